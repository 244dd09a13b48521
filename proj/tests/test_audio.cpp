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

#include <doctest.h>

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <vector>

#include "dpmtse/audio.hpp"
#include "dpmtse/rng.hpp"

using namespace dpmtse;

namespace {

constexpr double kPi = 3.14159265358979323846;

Waveform sine(double freq, double seconds, int sr, double amp = 0.8) {
    const long n = std::lround(seconds * sr);
    Eigen::ArrayXd x(n);
    for (long i = 0; i < n; ++i) x(i) = amp * std::sin(2.0 * kPi * freq * i / sr);
    return {x, sr};
}

// Dominant frequency of a waveform from one big periodogram.
double dominant_frequency(const Waveform& w) {
    Eigen::FFT<double> fft;
    std::vector<double> x(w.samples.data(), w.samples.data() + w.samples.size());
    std::vector<std::complex<double>> spec;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    fft.fwd(spec, x);
    std::size_t best = 1;
    for (std::size_t i = 1; i + 1 < spec.size(); ++i)
        if (std::abs(spec[i]) > std::abs(spec[best])) best = i;
    return static_cast<double>(best) * w.sample_rate /
           static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("stft peaks at the tone bin") {
    const MelConfig cfg;
    const Waveform tone = sine(1000.0, 1.0, 16000);
    const ComplexGrid spec = stft(tone, cfg);
    CHECK(spec.rows() == 100);  // ceil(16000 / 160)
    CHECK(spec.cols() == 513);

    // 1 kHz / (16000/1024) = bin 64 exactly.
    const Eigen::ArrayXd mid = spec.row(50).abs();
    Eigen::Index peak;
    mid.maxCoeff(&peak);
    CHECK(peak == 64);
}

TEST_CASE("stft of silence is zero and empty input is rejected") {
    const MelConfig cfg;
    Waveform zero{Eigen::ArrayXd::Zero(4000), 16000};
    CHECK((stft(zero, cfg).abs() == 0.0).all());
    Waveform empty{Eigen::ArrayXd(0), 16000};
    CHECK_THROWS_AS(stft(empty, cfg), std::invalid_argument);
    Waveform wrong_rate{Eigen::ArrayXd::Zero(100), 8000};
    CHECK_THROWS_AS(stft(wrong_rate, cfg), std::invalid_argument);
}

TEST_CASE("stft satisfies Parseval per frame") {
    const MelConfig cfg;
    Rng rng(40);
    Waveform noise{rng.normal_vector(4000) * 0.2, 16000};
    const ComplexGrid spec = stft(noise, cfg);

    // Recompute the windowed frame directly for a middle frame.
    const int k = 10;
    Eigen::ArrayXd win(cfg.window);
    for (int i = 0; i < cfg.window; ++i)
        win(i) = 0.5 - 0.5 * std::cos(2.0 * kPi * i / cfg.window);
    double time_energy = 0.0;
    for (int j = 0; j < cfg.window; ++j) {
        const long idx = k * cfg.hop - cfg.window / 2 + j;
        const double v = noise.samples(idx) * win(j);
        time_energy += v * v;
    }
    double spec_energy = std::norm(spec(k, 0)) + std::norm(spec(k, 512));
    for (int b = 1; b < 512; ++b) spec_energy += 2.0 * std::norm(spec(k, b));
    CHECK(spec_energy / cfg.fft_size ==
          doctest::Approx(time_energy).epsilon(1e-6));
}

TEST_CASE("stft/istft round trip") {
    const MelConfig cfg;
    Rng rng(41);
    Waveform noise{rng.normal_vector(5000) * 0.3, 16000};
    const Waveform back = istft(stft(noise, cfg), cfg, noise.samples.size());
    const double rms =
        std::sqrt((back.samples - noise.samples).square().mean());
    CHECK(rms < 1e-6);
}

TEST_CASE("mel filterbank shape and normalization") {
    const MelConfig cfg;
    const Eigen::MatrixXd bank = mel_filterbank(cfg);
    REQUIRE(bank.rows() == 64);
    REQUIRE(bank.cols() == 513);

    for (int k = 0; k < 64; ++k)
        CHECK(bank.row(k).sum() == doctest::Approx(1.0).epsilon(1e-6));

    // Every bin strictly inside (fmin, fmax) is covered by some filter.
    const Eigen::VectorXd col_sums = bank.colwise().sum();
    for (int b = 1; b < 512; ++b) {
        const double f = b * 16000.0 / 1024.0;
        if (f > cfg.fmin && f < cfg.fmax) CHECK(col_sums(b) > 0.0);
    }

    // Center frequencies (argmax bins) are nondecreasing and overall rising.
    Eigen::Index prev = -1;
    for (int k = 0; k < 64; ++k) {
        Eigen::Index center;
        bank.row(k).maxCoeff(&center);
        CHECK(center >= prev);
        prev = center;
    }

    MelConfig bad = cfg;
    bad.fmax = 9000.0;
    CHECK_THROWS_AS(mel_filterbank(bad), std::invalid_argument);
}

TEST_CASE("log mel of silence sits at the normalized floor") {
    const MelConfig cfg;
    Waveform zero{Eigen::ArrayXd::Zero(16000), 16000};
    const MelGrid grid = log_mel(zero, cfg);
    CHECK((grid.values == cfg.silence_value()).all());
    CHECK(grid.frames() % 4 == 0);
    CHECK(grid.values.isFinite().all());
}

TEST_CASE("doubling the amplitude shifts the log mel by log 2") {
    const MelConfig cfg;
    const Waveform half = sine(1000.0, 0.5, 16000, 0.3);
    Waveform full = half;
    full.samples *= 2.0;
    const MelGrid a = log_mel(half, cfg);
    const MelGrid b = log_mel(full, cfg);

    const double scale = (cfg.norm_log_max - cfg.norm_log_min) / 2.0;
    // Compare well above the floor: frame 20, the strongest bin.
    Eigen::Index bin;
    a.values.row(20).maxCoeff(&bin);
    const double diff = (b.values(20, bin) - a.values(20, bin)) * scale;
    CHECK(diff == doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("log mel frame count is a multiple of 4") {
    const MelConfig cfg;
    for (double seconds : {0.31, 0.5, 0.97}) {
        const MelGrid grid = log_mel(sine(500.0, seconds, 16000), cfg);
        CHECK(grid.frames() % 4 == 0);
        CHECK(grid.original_frames <= grid.frames());
    }
}

TEST_CASE("pad_to_multiple4 cases") {
    MelGrid g;
    g.values = Eigen::ArrayXXd::Constant(998, 4, 0.5);
    g.original_frames = 998;
    const MelGrid p = pad_to_multiple4(g, -1.0);
    CHECK(p.frames() == 1000);
    CHECK(p.original_frames == 998);
    CHECK((p.values.bottomRows(2) == -1.0).all());

    MelGrid g2;
    g2.values = Eigen::ArrayXXd::Constant(1000, 4, 0.5);
    g2.original_frames = 1000;
    CHECK(pad_to_multiple4(g2, -1.0).frames() == 1000);

    MelGrid g3;
    g3.values = Eigen::ArrayXXd::Constant(1, 4, 0.5);
    g3.original_frames = 1;
    const MelGrid p3 = pad_to_multiple4(g3, -1.0);
    CHECK(p3.frames() == 4);
    CHECK((p3.values.bottomRows(3) == -1.0).all());
}

TEST_CASE("log mel ignores appended sub-hop silence after a silent tail") {
    const MelConfig cfg;
    // Tone with a silent tail longer than half a window.
    Waveform w = sine(700.0, 0.3, 16000, 0.5);
    Eigen::ArrayXd padded(w.samples.size() + 1600);
    padded.setZero();
    padded.head(w.samples.size()) = w.samples;
    Waveform base{padded, 16000};

    Eigen::ArrayXd longer(padded.size() + 100);  // less than one hop
    longer.setZero();
    longer.head(padded.size()) = padded;
    Waveform appended{longer, 16000};

    const MelGrid a = log_mel(base, cfg);
    const MelGrid b = log_mel(appended, cfg);
    REQUIRE(a.frames() == b.frames());
    CHECK(((a.values - b.values).abs() < 1e-12).all());
}

TEST_CASE("griffin lim reconstructs a tone and converges") {
    const MelConfig cfg;
    const Waveform tone = sine(1000.0, 0.6, 16000, 0.6);
    const MelGrid grid = log_mel(tone, cfg);

    const GriffinLimResult res = griffin_lim_traced(grid, 40, cfg);
    REQUIRE(res.convergence.size() == 40);
    for (std::size_t i = 1; i < res.convergence.size(); ++i)
        CHECK(res.convergence[i] <= res.convergence[i - 1] + 1e-6);

    CHECK(res.wave.samples.abs().maxCoeff() <= 1.0);
    const double freq = dominant_frequency(res.wave);
    const double bin_hz = 16000.0 / 1024.0;
    CHECK(std::abs(freq - 1000.0) <= bin_hz + 1e-9);
}

TEST_CASE("griffin lim of a silence grid is near-silent") {
    const MelConfig cfg;
    MelGrid grid;
    grid.values = Eigen::ArrayXXd::Constant(40, 64, cfg.silence_value());
    grid.original_frames = 40;
    const Waveform out = griffin_lim(grid, 20, cfg);
    CHECK(std::sqrt(out.samples.square().mean()) < 1e-3);
}

TEST_CASE("wav round trip and determinism") {
    namespace fs = std::filesystem;
    Rng rng(42);
    Waveform w{rng.normal_vector(3000).min(1.0).max(-1.0) * 0.7, 16000};
    const std::string path = (fs::temp_directory_path() / "dpmtse_t.wav").string();
    write_wav(path, w);
    const Waveform back = read_wav(path);
    REQUIRE(back.samples.size() == w.samples.size());
    CHECK(back.sample_rate == 16000);
    CHECK((back.samples - w.samples).abs().maxCoeff() <= 0.5 / 32767.0 + 1e-9);

    write_wav(path + "2", w);
    std::ifstream f1(path, std::ios::binary), f2(path + "2", std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), {});
    std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);
    fs::remove(path);
    fs::remove(path + "2");
}

TEST_CASE("mel file round trip") {
    namespace fs = std::filesystem;
    const MelConfig cfg;
    MelGrid grid;
    Rng rng(43);
    grid.values = rng.normal_grid(12, 64);
    grid.original_frames = 11;
    grid.meta = {16000, 160, 1024};

    const std::string path = (fs::temp_directory_path() / "dpmtse_t.mel").string();
    write_mel_file(path, grid, 0xABCD1234u);
    const MelFileContents back = read_mel_file(path, cfg);
    fs::remove(path);

    CHECK(back.config_hash == 0xABCD1234u);
    CHECK(back.grid.original_frames == 11);
    REQUIRE(back.grid.frames() == 12);
    // Stored as 32-bit floats.
    for (int r = 0; r < 12; ++r)
        for (int c = 0; c < 64; ++c)
            CHECK(back.grid.values(r, c) ==
                  static_cast<double>(static_cast<float>(grid.values(r, c))));
}
