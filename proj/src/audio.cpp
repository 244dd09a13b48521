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

#include "dpmtse/audio.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <complex>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dpmtse {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::ArrayXd hann_window(int size) {
    Eigen::ArrayXd w(size);
    for (int i = 0; i < size; ++i)
        w(i) = 0.5 - 0.5 * std::cos(2.0 * kPi * i / size);
    return w;
}

// Mirror an out-of-range index back into [0, n) without repeating edges.
long reflect_index(long i, long n) {
    if (n == 1) return 0;
    const long period = 2 * (n - 1);
    i = std::abs(i) % period;
    return i < n ? i : period - i;
}

void check_config(const MelConfig& cfg) {
    if (cfg.hop <= 0 || cfg.window <= 0 || cfg.fft_size < cfg.window)
        throw std::invalid_argument("invalid window/hop/fft configuration");
    if (cfg.hop > cfg.window)
        throw std::invalid_argument("hop must not exceed the window");
    if (cfg.fmax > cfg.sample_rate / 2.0)
        throw std::invalid_argument("fmax above Nyquist");
}

}  // namespace

ComplexGrid stft(const Waveform& wave, const MelConfig& config) {
    check_config(config);
    const long n = wave.samples.size();
    if (n == 0) throw std::invalid_argument("empty waveform");
    if (wave.sample_rate != config.sample_rate)
        throw std::invalid_argument("waveform sample rate does not match the config");

    const int w = config.window;
    const int hop = config.hop;
    const long frames = (n + hop - 1) / hop;
    const Eigen::ArrayXd win = hann_window(w);

    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);

    ComplexGrid out(frames, config.bins());
    std::vector<double> frame(config.fft_size, 0.0);
    std::vector<std::complex<double>> spec;
    for (long k = 0; k < frames; ++k) {
        const long center = k * hop;
        for (int j = 0; j < w; ++j) {
            const long idx = reflect_index(center - w / 2 + j, n);
            frame[j] = wave.samples(idx) * win(j);
        }
        fft.fwd(spec, frame);
        for (int b = 0; b < config.bins(); ++b) out(k, b) = spec[b];
    }
    return out;
}

Waveform istft(const ComplexGrid& spec, const MelConfig& config, long out_len) {
    check_config(config);
    const long frames = spec.rows();
    if (frames == 0 || spec.cols() != config.bins())
        throw std::invalid_argument("spectrogram shape does not match the config");

    const int w = config.window;
    const int hop = config.hop;
    const Eigen::ArrayXd win = hann_window(w);

    const long acc_len = (frames - 1) * hop + w;
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(acc_len);
    Eigen::ArrayXd wsum = Eigen::ArrayXd::Zero(acc_len);

    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);

    std::vector<std::complex<double>> spec_row(config.bins());
    std::vector<double> frame;
    for (long k = 0; k < frames; ++k) {
        for (int b = 0; b < config.bins(); ++b) spec_row[b] = spec(k, b);
        fft.inv(frame, spec_row, config.fft_size);
        const long base = k * hop;
        for (int j = 0; j < w; ++j) {
            acc(base + j) += frame[j] * win(j);
            wsum(base + j) += win(j) * win(j);
        }
    }

    Waveform out;
    out.sample_rate = config.sample_rate;
    out.samples = Eigen::ArrayXd::Zero(out_len);
    const long lead = w / 2;  // frame 0 is centered at sample 0
    for (long i = 0; i < out_len; ++i) {
        const long a = i + lead;
        if (a < acc_len && wsum(a) > 1e-12) out.samples(i) = acc(a) / wsum(a);
    }
    return out;
}

Eigen::MatrixXd mel_filterbank(const MelConfig& config) {
    check_config(config);
    auto hz_to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
    auto mel_to_hz = [](double m) {
        return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
    };

    const int bins = config.bins();
    const double mel_lo = hz_to_mel(config.fmin);
    const double mel_hi = hz_to_mel(config.fmax);
    Eigen::ArrayXd edges(config.n_mels + 2);
    for (int i = 0; i < config.n_mels + 2; ++i)
        edges(i) = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (config.n_mels + 1));

    Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(config.n_mels, bins);
    for (int k = 0; k < config.n_mels; ++k) {
        const double f_lo = edges(k), f_c = edges(k + 1), f_hi = edges(k + 2);
        for (int b = 0; b < bins; ++b) {
            const double f = static_cast<double>(b) * config.sample_rate / config.fft_size;
            double v = 0.0;
            if (f > f_lo && f < f_hi)
                v = f <= f_c ? (f - f_lo) / (f_c - f_lo) : (f_hi - f) / (f_hi - f_c);
            bank(k, b) = v;
        }
        const double sum = bank.row(k).sum();
        if (sum <= 0.0)
            throw std::invalid_argument("mel filter with empty support; fft too coarse");
        bank.row(k) /= sum;
    }
    return bank;
}

MelGrid log_mel(const Waveform& wave, const MelConfig& config) {
    const ComplexGrid spec = stft(wave, config);
    const Eigen::MatrixXd bank = mel_filterbank(config);
    const Eigen::MatrixXd mag = spec.abs().matrix();
    Eigen::ArrayXXd mel = (mag * bank.transpose()).array();

    MelGrid grid;
    grid.values = mel.max(config.log_floor).log();
    grid.values = 2.0 * (grid.values - config.norm_log_min) /
                      (config.norm_log_max - config.norm_log_min) -
                  1.0;
    grid.original_frames = static_cast<int>(spec.rows());
    grid.meta = {config.sample_rate, config.hop, config.window};
    return pad_to_multiple4(std::move(grid), config.silence_value());
}

MelGrid pad_to_multiple4(MelGrid grid, double silence_value) {
    const Eigen::Index frames = grid.values.rows();
    const Eigen::Index pad = (4 - frames % 4) % 4;
    if (pad == 0) return grid;
    Eigen::ArrayXXd padded(frames + pad, grid.values.cols());
    padded.topRows(frames) = grid.values;
    padded.bottomRows(pad).setConstant(silence_value);
    grid.values = std::move(padded);
    return grid;
}

GriffinLimResult griffin_lim_traced(const MelGrid& grid, int iterations,
                                    const MelConfig& config, int nnls_iterations) {
    if (!grid.values.isFinite().all())
        throw std::invalid_argument("non-finite mel grid");
    const long frames = grid.values.rows();

    // De-normalize back to linear mel amplitudes.
    const Eigen::ArrayXXd log_vals =
        (grid.values + 1.0) * 0.5 * (config.norm_log_max - config.norm_log_min) +
        config.norm_log_min;
    const Eigen::MatrixXd mel = log_vals.exp().matrix().transpose();  // n_mels x frames

    // Multiplicative-update NNLS for ||A s - mel||^2, s >= 0.
    const Eigen::MatrixXd bank = mel_filterbank(config);
    Eigen::MatrixXd atm = bank.transpose() * mel;  // bins x frames
    Eigen::MatrixXd s = atm;
    for (int it = 0; it < nnls_iterations; ++it) {
        const Eigen::MatrixXd denom = bank.transpose() * (bank * s);
        s = s.cwiseProduct(atm.cwiseQuotient(
            denom.cwiseMax(1e-30)));
    }
    const Eigen::ArrayXXd target_mag = s.transpose().array();  // frames x bins

    // Griffin-Lim phase retrieval from a zero-phase start.
    GriffinLimResult result;
    result.convergence.reserve(iterations);
    const long full_len = frames * config.hop;
    ComplexGrid c = target_mag.cast<std::complex<double>>();
    const double mag_norm = std::sqrt(target_mag.square().sum());
    for (int it = 0; it < iterations; ++it) {
        const Waveform x = istft(c, config, full_len);
        const ComplexGrid projected = stft(x, config);
        const Eigen::ArrayXXd pmag = projected.abs();
        result.convergence.push_back(
            mag_norm > 0.0
                ? std::sqrt((pmag - target_mag).square().sum()) / mag_norm
                : 0.0);
        c = target_mag.cast<std::complex<double>>() *
            (projected / pmag.max(1e-30).cast<std::complex<double>>());
    }

    const long out_len = static_cast<long>(grid.original_frames) * config.hop;
    result.wave = istft(c, config, std::min(out_len, full_len));
    const double peak = result.wave.samples.abs().maxCoeff();
    if (peak > 1.0) result.wave.samples /= peak;
    return result;
}

Waveform griffin_lim(const MelGrid& grid, int iterations, const MelConfig& config) {
    return griffin_lim_traced(grid, iterations, config).wave;
}

// ---------------------------------------------------------------------------
// WAV I/O (16-bit PCM mono RIFF)
// ---------------------------------------------------------------------------

namespace {

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("truncated file");
    return value;
}

}  // namespace

void write_wav(const std::string& path, const Waveform& wave) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write wav: " + path);

    const std::uint32_t n = static_cast<std::uint32_t>(wave.samples.size());
    const std::uint32_t data_bytes = n * 2;
    out.write("RIFF", 4);
    put<std::uint32_t>(out, 36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put<std::uint32_t>(out, 16);
    put<std::uint16_t>(out, 1);  // PCM
    put<std::uint16_t>(out, 1);  // mono
    put<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate * 2));
    put<std::uint16_t>(out, 2);
    put<std::uint16_t>(out, 16);
    out.write("data", 4);
    put<std::uint32_t>(out, data_bytes);
    for (std::uint32_t i = 0; i < n; ++i) {
        const double v = std::clamp(wave.samples(i), -1.0, 1.0);
        put<std::int16_t>(out, static_cast<std::int16_t>(std::llround(v * 32767.0)));
    }
    if (!out) throw std::runtime_error("wav write failed: " + path);
}

Waveform read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open wav: " + path);

    char tag[4];
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "RIFF", 4) != 0)
        throw std::runtime_error("not a RIFF file: " + path);
    get<std::uint32_t>(in);
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "WAVE", 4) != 0)
        throw std::runtime_error("not a WAVE file: " + path);

    Waveform wave;
    bool have_fmt = false;
    while (in.read(tag, 4)) {
        const auto chunk_size = get<std::uint32_t>(in);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            const auto format = get<std::uint16_t>(in);
            const auto channels = get<std::uint16_t>(in);
            wave.sample_rate = static_cast<int>(get<std::uint32_t>(in));
            get<std::uint32_t>(in);
            get<std::uint16_t>(in);
            const auto bits = get<std::uint16_t>(in);
            if (format != 1 || channels != 1 || bits != 16)
                throw std::runtime_error("expected 16-bit PCM mono: " + path);
            in.ignore(chunk_size - 16);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            if (!have_fmt) throw std::runtime_error("data before fmt: " + path);
            const std::uint32_t n = chunk_size / 2;
            wave.samples.resize(n);
            for (std::uint32_t i = 0; i < n; ++i)
                wave.samples(i) = get<std::int16_t>(in) / 32767.0;
            return wave;
        } else {
            in.ignore(chunk_size + (chunk_size & 1));
        }
    }
    throw std::runtime_error("no data chunk: " + path);
}

// ---------------------------------------------------------------------------
// MelGrid file I/O
// ---------------------------------------------------------------------------

namespace {
constexpr char kMelMagic[8] = {'D', 'T', 'S', 'E', 'M', 'E', 'L', '1'};
}

void write_mel_file(const std::string& path, const MelGrid& grid,
                    std::uint64_t config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write mel file: " + path);
    out.write(kMelMagic, sizeof(kMelMagic));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.frames()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.bins()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.original_frames));
    put<std::uint64_t>(out, config_hash);
    for (Eigen::Index r = 0; r < grid.frames(); ++r)
        for (Eigen::Index c = 0; c < grid.bins(); ++c)
            put<float>(out, static_cast<float>(grid.values(r, c)));
    if (!out) throw std::runtime_error("mel file write failed: " + path);
}

MelFileContents read_mel_file(const std::string& path, const MelConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open mel file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMelMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a mel file: " + path);

    MelFileContents contents;
    const auto frames = get<std::uint32_t>(in);
    const auto bins = get<std::uint32_t>(in);
    const auto original = get<std::uint32_t>(in);
    contents.config_hash = get<std::uint64_t>(in);
    contents.grid.values.resize(frames, bins);
    for (std::uint32_t r = 0; r < frames; ++r)
        for (std::uint32_t c = 0; c < bins; ++c)
            contents.grid.values(r, c) = get<float>(in);
    contents.grid.original_frames = static_cast<int>(original);
    contents.grid.meta = {config.sample_rate, config.hop, config.window};
    return contents;
}

}  // namespace dpmtse
