// Copyright 2026 The dpmtse authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPMTSE_AUDIO_HPP
#define DPMTSE_AUDIO_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace dpmtse {

struct Waveform {
    Eigen::ArrayXd samples;
    int sample_rate = 16000;
};

/// Mel pipeline configuration. Defaults follow the 16 kHz / 64-band /
/// 64 ms window / 10 ms hop setup; normalization statistics are fixed
/// per corpus: the lower anchor is the log floor (silence maps to -1
/// exactly), the upper anchor is measured once by the dataset generator.
struct MelConfig {
    int sample_rate = 16000;
    int n_mels = 64;
    int window = 1024;  // 64 ms at 16 kHz
    int hop = 160;      // 10 ms
    int fft_size = 1024;
    double fmin = 0.0;
    double fmax = 8000.0;
    double log_floor = 1e-5;
    double norm_log_min = std::log(1e-5);
    double norm_log_max = 6.0;

    int bins() const { return fft_size / 2 + 1; }
    double normalize(double log_value) const {
        return 2.0 * (log_value - norm_log_min) / (norm_log_max - norm_log_min) - 1.0;
    }
    double denormalize(double v) const {
        return (v + 1.0) * 0.5 * (norm_log_max - norm_log_min) + norm_log_min;
    }
    /// Normalized value of a frame at the log floor; -1 under the default
    /// anchoring.
    double silence_value() const { return normalize(std::log(log_floor)); }
};

struct MelMeta {
    int sample_rate = 16000;
    int hop = 160;
    int window = 1024;
};

/// Log-mel spectrogram as a frames x bins grid of normalized values.
struct MelGrid {
    Eigen::ArrayXXd values;  // frames x bins
    int original_frames = 0;
    MelMeta meta;

    Eigen::Index frames() const { return values.rows(); }
    Eigen::Index bins() const { return values.cols(); }
};

using ComplexGrid = Eigen::ArrayXXcd;  // frames x (fft_size/2 + 1)

/// Hann-windowed centered frames with reflection padding;
/// frame count = ceil(len / hop). Throws on an empty wave.
ComplexGrid stft(const Waveform& wave, const MelConfig& config);

/// Weighted overlap-add inverse with Hann synthesis-window normalization.
Waveform istft(const ComplexGrid& spec, const MelConfig& config, long out_len);

/// n_mels x bins triangular filters on the HTK mel scale,
/// mel(f) = 2595 log10(1 + f/700), each row normalized to sum to 1.
Eigen::MatrixXd mel_filterbank(const MelConfig& config);

/// log(max(mel |stft|, floor)) normalized to [-1, 1], frames padded to a
/// multiple of 4 at the silence value.
MelGrid log_mel(const Waveform& wave, const MelConfig& config);

/// Appends trailing frames at `silence_value` until frames % 4 == 0; the
/// original frame count stays in the metadata.
MelGrid pad_to_multiple4(MelGrid grid, double silence_value);

struct GriffinLimResult {
    Waveform wave;
    /// Spectral-convergence error per phase iteration.
    std::vector<double> convergence;
};

/// Vocoder substitute: mel inverted to a linear magnitude spectrogram by
/// multiplicative-update nonnegative least squares (nnls_iterations), then
/// Griffin-Lim phase iteration with inverse-STFT/STFT projection. Output
/// peak-normalized to <= 1.
GriffinLimResult griffin_lim_traced(const MelGrid& grid, int iterations,
                                    const MelConfig& config,
                                    int nnls_iterations = 50);
Waveform griffin_lim(const MelGrid& grid, int iterations, const MelConfig& config);

/// 16-bit PCM mono little-endian RIFF.
void write_wav(const std::string& path, const Waveform& wave);
Waveform read_wav(const std::string& path);

/// MelGrid file: header (frames, bins, original frames, config hash) +
/// row-major 32-bit floats.
void write_mel_file(const std::string& path, const MelGrid& grid,
                    std::uint64_t config_hash);
struct MelFileContents {
    MelGrid grid;
    std::uint64_t config_hash = 0;
};
MelFileContents read_mel_file(const std::string& path, const MelConfig& config);

}  // namespace dpmtse

#endif  // DPMTSE_AUDIO_HPP
