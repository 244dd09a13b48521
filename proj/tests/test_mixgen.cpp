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

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "dpmtse/mixgen.hpp"

using namespace dpmtse;

namespace {

double dominant_frequency(const Waveform& w) {
    Eigen::FFT<double> fft;
    std::vector<double> x(w.samples.data(), w.samples.data() + w.samples.size());
    if (x.size() % 2 == 1) x.push_back(0.0);
    std::vector<std::complex<double>> spec;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    fft.fwd(spec, x);
    std::size_t best = 1;
    for (std::size_t i = 1; i + 1 < spec.size(); ++i)
        if (std::abs(spec[i]) > std::abs(spec[best])) best = i;
    return static_cast<double>(best) * w.sample_rate /
           static_cast<double>(x.size());
}

double rms(const Eigen::ArrayXd& x) { return std::sqrt(x.square().mean()); }

}  // namespace

TEST_CASE("event synthesis determinism and shape") {
    EventSpec spec;
    spec.category = "pure_tone";
    spec.duration_s = 0.3;
    spec.seed = 5;
    const Waveform a = synth_event(spec, 16000);
    const Waveform b = synth_event(spec, 16000);
    CHECK(a.samples.size() == 4800);
    CHECK((a.samples == b.samples).all());
    CHECK(a.samples.abs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pure tones land on the quantized frequency set") {
    const std::set<int> allowed = {220, 330, 440, 587, 784, 988, 1319, 1760};
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
        EventSpec spec;
        spec.category = "pure_tone";
        spec.duration_s = 1.0;
        spec.seed = seed;
        const double f = dominant_frequency(synth_event(spec, 16000));
        bool near = false;
        for (int cand : allowed)
            if (std::abs(f - cand) < 4.0) near = true;
        CHECK(near);
    }
}

TEST_CASE("every registered category synthesizes") {
    for (const std::string& cat : default_categories()) {
        EventSpec spec;
        spec.category = cat;
        spec.duration_s = 0.5;
        spec.seed = 11;
        const Waveform w = synth_event(spec, 16000);
        CHECK(w.samples.size() == 8000);
        CHECK(w.samples.isFinite().all());
        CHECK(w.samples.abs().maxCoeff() <= 1.0 + 1e-12);
        // Ramps keep the edges quiet.
        CHECK(std::abs(w.samples(0)) < 1e-9);
        CHECK(std::abs(w.samples(7999)) < 1e-9);
    }
    EventSpec bad;
    bad.category = "kazoo_solo";
    bad.duration_s = 1.0;
    CHECK_THROWS_AS(synth_event(bad, 16000), std::invalid_argument);
}

TEST_CASE("snr scaling identities") {
    Eigen::ArrayXd ones = Eigen::ArrayXd::Constant(1000, 0.5);
    Eigen::ArrayXd alt(1000);
    for (int i = 0; i < 1000; ++i) alt(i) = (i % 2 == 0) ? 0.5 : -0.5;
    const Waveform fg{ones, 16000};
    const Waveform bg{alt, 16000};
    const Region region{0, 1000};

    CHECK(scale_to_snr(fg, bg, 0.0, region) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(scale_to_snr(fg, bg, 6.0206, region) ==
          doctest::Approx(2.0).epsilon(1e-5));
    CHECK(scale_to_snr(fg, bg, -6.0206, region) ==
          doctest::Approx(0.5).epsilon(1e-5));

    const Waveform silent{Eigen::ArrayXd::Zero(1000), 16000};
    CHECK_THROWS_AS(scale_to_snr(silent, bg, 0.0, region), std::invalid_argument);
    CHECK_THROWS_AS(scale_to_snr(fg, silent, 0.0, region), std::invalid_argument);
    CHECK_THROWS_AS(scale_to_snr(fg, bg, 0.0, Region{10, 10}),
                    std::invalid_argument);
}

TEST_CASE("mixtures obey the corpus protocol") {
    CorpusConfig cfg;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const MixtureSample mx = make_mixture(cfg, seed);

        CHECK(mx.mixture.samples.size() == 160000);
        CHECK(mx.target_stem.samples.size() == 160000);
        CHECK(mx.mixture.samples.abs().maxCoeff() <= 1.0);

        const std::size_t interferers = mx.events.size() - 1;
        CHECK(interferers >= 1);
        CHECK(interferers <= 3);

        // Interferers never share the target category by default.
        for (std::size_t e = 1; e < mx.events.size(); ++e)
            CHECK(mx.events[e].category != mx.target_category);

        // Additivity: mixture minus background and interferers is the stem.
        Eigen::ArrayXd residual = mx.mixture.samples - mx.background.samples;
        for (const Waveform& s : mx.interferer_stems) residual -= s.samples;
        CHECK(rms(residual - mx.target_stem.samples) < 1e-6);

        // Realized SNR within 0.1 dB of the requested value for all events.
        REQUIRE(mx.realized_snr_db.size() == mx.events.size());
        for (std::size_t e = 0; e < mx.events.size(); ++e)
            CHECK(std::abs(mx.realized_snr_db[e] - mx.events[e].snr_db) <= 0.1);

        // The stem is zero outside the recorded region.
        REQUIRE(mx.regions.size() == 1);
        const Region r = mx.regions[0];
        if (r.begin > 0)
            CHECK(mx.target_stem.samples.head(r.begin).abs().maxCoeff() == 0.0);
        if (r.end < 160000)
            CHECK(mx.target_stem.samples.tail(160000 - r.end).abs().maxCoeff() ==
                  0.0);
    }
}

TEST_CASE("mixture generation is deterministic in the sample seed") {
    CorpusConfig cfg;
    const MixtureSample a = make_mixture(cfg, 99);
    const MixtureSample b = make_mixture(cfg, 99);
    CHECK((a.mixture.samples == b.mixture.samples).all());
    CHECK((a.target_stem.samples == b.target_stem.samples).all());
    CHECK(a.target_category == b.target_category);

    const MixtureSample c = make_mixture(cfg, 100);
    CHECK((a.mixture.samples != c.mixture.samples).any());
}

TEST_CASE("stem and mixture are sample-aligned") {
    CorpusConfig cfg;
    const MixtureSample mx = make_mixture(cfg, 3);
    // Cross-correlation over small lags peaks at lag zero.
    const Eigen::ArrayXd& stem = mx.target_stem.samples;
    const Eigen::ArrayXd& mix = mx.mixture.samples;
    const long n = stem.size();
    double best = -1e300;
    long best_lag = -999;
    for (long lag = -50; lag <= 50; ++lag) {
        const long lo = std::max<long>(0, -lag);
        const long hi = std::min(n, n - lag);
        const double corr =
            (stem.segment(lo, hi - lo) * mix.segment(lo + lag, hi - lo)).sum();
        if (corr > best) {
            best = corr;
            best_lag = lag;
        }
    }
    CHECK(best_lag == 0);
}

TEST_CASE("manifest round trip") {
    namespace fs = std::filesystem;
    const std::string path =
        (fs::temp_directory_path() / "dpmtse_manifest.jsonl").string();

    SUBCASE("empty corpus gives an empty file") {
        write_manifest({}, path);
        CHECK(fs::file_size(path) == 0);
        CHECK(read_manifest(path).empty());
        fs::remove(path);
    }

    SUBCASE("records survive field by field") {
        std::vector<ManifestRecord> records;
        for (int i = 0; i < 5; ++i) {
            ManifestRecord r;
            r.id = "0000" + std::to_string(i);
            r.mixture_path = "train/mixture/" + r.id + ".wav";
            r.target_path = "train/target/" + r.id + ".wav";
            r.target_category = default_categories()[i % 8];
            r.sample_seed = 1000 + i;
            r.background_seed = 2000 + i;
            r.config_hash = 0xFEEDBEEF;
            r.norm_log_min = -11.512925464970229;
            r.norm_log_max = 3.0625;
            r.sample_rate = 16000;
            r.regions = {{100 + i, 4000 + i}};
            ManifestEventEntry e;
            e.spec = {"pure_tone", 1.25, 0.5, -3.75, 77ULL + i};
            e.role = i == 0 ? "target" : "interferer";
            e.realized_snr_db = -3.75;
            r.events = {e};
            records.push_back(std::move(r));
        }
        write_manifest(records, path);

        std::ifstream in(path);
        std::string line;
        int lines = 0;
        while (std::getline(in, line)) ++lines;
        CHECK(lines == 5);

        const auto back = read_manifest(path);
        REQUIRE(back.size() == 5);
        for (int i = 0; i < 5; ++i) {
            CHECK(back[i].id == records[i].id);
            CHECK(back[i].mixture_path == records[i].mixture_path);
            CHECK(back[i].target_path == records[i].target_path);
            CHECK(back[i].target_category == records[i].target_category);
            CHECK(back[i].sample_seed == records[i].sample_seed);
            CHECK(back[i].background_seed == records[i].background_seed);
            CHECK(back[i].config_hash == records[i].config_hash);
            CHECK(back[i].norm_log_min == records[i].norm_log_min);
            CHECK(back[i].norm_log_max == records[i].norm_log_max);
            CHECK(back[i].sample_rate == records[i].sample_rate);
            REQUIRE(back[i].regions.size() == 1);
            CHECK(back[i].regions[0].begin == records[i].regions[0].begin);
            CHECK(back[i].regions[0].end == records[i].regions[0].end);
            REQUIRE(back[i].events.size() == 1);
            CHECK(back[i].events[0].spec.category ==
                  records[i].events[0].spec.category);
            CHECK(back[i].events[0].spec.duration_s ==
                  records[i].events[0].spec.duration_s);
            CHECK(back[i].events[0].spec.onset_s == records[i].events[0].spec.onset_s);
            CHECK(back[i].events[0].spec.snr_db == records[i].events[0].spec.snr_db);
            CHECK(back[i].events[0].spec.seed == records[i].events[0].spec.seed);
            CHECK(back[i].events[0].role == records[i].events[0].role);
            CHECK(back[i].events[0].realized_snr_db ==
                  records[i].events[0].realized_snr_db);
        }
        fs::remove(path);
    }

    SUBCASE("malformed lines are reported with their line number") {
        std::ofstream out(path);
        out << "{\"id\": \"00000\"}\n";  // valid json, missing fields
        out.close();
        CHECK_THROWS_WITH_AS(read_manifest(path),
                             doctest::Contains("line 1"), std::runtime_error);
        fs::remove(path);
    }
}

TEST_CASE("config validation in make_mixture") {
    CorpusConfig cfg;
    cfg.categories.clear();
    CHECK_THROWS_AS(make_mixture(cfg, 1), std::invalid_argument);

    CorpusConfig cfg2;
    cfg2.min_interferers = 3;
    cfg2.max_interferers = 1;
    CHECK_THROWS_AS(make_mixture(cfg2, 1), std::invalid_argument);

    CorpusConfig cfg3;
    cfg3.min_event_s = 20.0;
    CHECK_THROWS_AS(make_mixture(cfg3, 1), std::invalid_argument);
}
