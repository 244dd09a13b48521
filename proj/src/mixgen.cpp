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

#include "dpmtse/mixgen.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "dpmtse/rng.hpp"

namespace dpmtse {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRampSeconds = 0.010;
constexpr double kPeakCeiling = 0.99;

template <std::size_t N>
double pick(const double (&options)[N], Rng& rng) {
    return options[rng.next_u64() % N];
}

Eigen::ArrayXd time_axis(long n, int sample_rate) {
    return Eigen::ArrayXd::LinSpaced(n, 0.0, static_cast<double>(n - 1)) /
           sample_rate;
}

}  // namespace

const std::vector<std::string>& default_categories() {
    static const std::vector<std::string> kCategories = {
        "pure_tone",   "harmonic_tone", "linear_chirp", "noise_burst",
        "am_tone",     "click_train",   "gated_noise",  "exp_sweep"};
    return kCategories;
}

Waveform synth_event(const EventSpec& spec, int sample_rate) {
    const long n = std::lround(spec.duration_s * sample_rate);
    if (n < 2) throw std::invalid_argument("event too short to synthesize");
    Rng rng(split_seed(spec.seed));
    const Eigen::ArrayXd t = time_axis(n, sample_rate);
    Eigen::ArrayXd x(n);

    if (spec.category == "pure_tone") {
        static const double kFreqs[] = {220, 330, 440, 587, 784, 988, 1319, 1760};
        x = (2.0 * kPi * pick(kFreqs, rng) * t).sin();
    } else if (spec.category == "harmonic_tone") {
        static const double kF0[] = {110, 147, 196, 247, 330, 392};
        const double f0 = pick(kF0, rng);
        x.setZero();
        for (int k = 1; k <= 5; ++k)
            x += (2.0 * kPi * k * f0 * t).sin() / k;
    } else if (spec.category == "linear_chirp") {
        static const double kLo[] = {200, 300, 500, 1000};
        static const double kHi[] = {1500, 3000, 4000, 6000};
        const double f0 = pick(kLo, rng), f1 = pick(kHi, rng);
        const double rate = (f1 - f0) / spec.duration_s;
        x = (2.0 * kPi * (f0 * t + 0.5 * rate * t.square())).sin();
    } else if (spec.category == "noise_burst") {
        x = rng.normal_vector(n);
    } else if (spec.category == "am_tone") {
        static const double kCarrier[] = {600, 900, 1200, 1500};
        static const double kRate[] = {4, 7, 10, 14};
        const double fc = pick(kCarrier, rng), fm = pick(kRate, rng);
        x = (1.0 - 0.8 * 0.5 * (1.0 - (2.0 * kPi * fm * t).cos())) *
            (2.0 * kPi * fc * t).sin();
    } else if (spec.category == "click_train") {
        static const double kRate[] = {8, 12, 16, 20};
        const double rate = pick(kRate, rng);
        const double decay = 1.0 / 0.002;  // 2 ms damped sine per click
        x.setZero();
        const long period = std::lround(sample_rate / rate);
        for (long start = 0; start < n; start += period) {
            const long len = std::min<long>(n - start, std::lround(0.008 * sample_rate));
            for (long i = 0; i < len; ++i) {
                const double tt = static_cast<double>(i) / sample_rate;
                x(start + i) += std::exp(-decay * tt) * std::sin(2.0 * kPi * 2000.0 * tt);
            }
        }
    } else if (spec.category == "gated_noise") {
        static const double kGate[] = {2, 4, 6, 8};
        const double gate = pick(kGate, rng);
        const Eigen::ArrayXd noise = rng.normal_vector(n);
        x = noise * (t * gate).unaryExpr([](double v) {
            return std::fmod(std::floor(v), 2.0) == 0.0 ? 1.0 : 0.0;
        });
    } else if (spec.category == "exp_sweep") {
        static const double kLo[] = {100, 150};
        static const double kHi[] = {4000, 6000};
        const double f0 = pick(kLo, rng), f1 = pick(kHi, rng);
        const double k = std::log(f1 / f0) / spec.duration_s;
        x = (2.0 * kPi * f0 / k * ((k * t).exp() - 1.0)).sin();
    } else {
        throw std::invalid_argument("unknown event category: " + spec.category);
    }

    // Raised-cosine onset/offset ramps, then unit peak.
    const long ramp = std::min<long>(std::lround(kRampSeconds * sample_rate), n / 2);
    for (long i = 0; i < ramp; ++i) {
        const double g = 0.5 * (1.0 - std::cos(kPi * i / ramp));
        x(i) *= g;
        x(n - 1 - i) *= g;
    }
    const double peak = x.abs().maxCoeff();
    if (peak > 0.0) x /= peak;

    return {x, sample_rate};
}

Waveform synth_background(std::uint64_t seed, long length, int sample_rate,
                          double rms) {
    Rng rng(split_seed(seed));
    const Eigen::ArrayXd white = rng.normal_vector(length);
    // One-pole lowpass bed with a touch of wideband noise on top.
    const double a = std::exp(-2.0 * kPi * 400.0 / sample_rate);
    Eigen::ArrayXd bed(length);
    double state = 0.0;
    for (long i = 0; i < length; ++i) {
        state = a * state + (1.0 - a) * white(i);
        bed(i) = state;
    }
    bed = 0.9 * bed / std::max(std::sqrt(bed.square().mean()), 1e-12) + 0.1 * white;
    bed *= rms / std::max(std::sqrt(bed.square().mean()), 1e-12);
    return {bed, sample_rate};
}

double scale_to_snr(const Waveform& foreground, const Waveform& background,
                    double snr_db, Region region) {
    if (region.begin < 0 || region.end <= region.begin ||
        region.end > foreground.samples.size() ||
        region.end > background.samples.size())
        throw std::invalid_argument("bad SNR region");
    const long len = region.end - region.begin;
    const double fg_rms =
        std::sqrt(foreground.samples.segment(region.begin, len).square().mean());
    const double bg_rms =
        std::sqrt(background.samples.segment(region.begin, len).square().mean());
    if (fg_rms <= 0.0) throw std::invalid_argument("silent foreground region");
    if (bg_rms <= 0.0) throw std::invalid_argument("silent background region");
    return bg_rms / fg_rms * std::pow(10.0, snr_db / 20.0);
}

MixtureSample make_mixture(const CorpusConfig& config, std::uint64_t sample_seed) {
    if (config.categories.empty()) throw std::invalid_argument("empty category registry");
    if (config.min_interferers < 0 || config.max_interferers < config.min_interferers)
        throw std::invalid_argument("bad interferer range");
    if (config.min_event_s > config.duration_s)
        throw std::invalid_argument("event cannot fit inside the canvas");

    const long canvas = std::lround(config.duration_s * config.sample_rate);
    Rng rng(split_seed(sample_seed));

    MixtureSample out;
    out.sample_seed = sample_seed;

    const int n_cat = static_cast<int>(config.categories.size());
    const int target_cat = static_cast<int>(rng.uniform_int(0, n_cat - 1));
    out.target_category = config.categories[target_cat];

    const int n_interferers =
        static_cast<int>(rng.uniform_int(config.min_interferers, config.max_interferers));
    std::vector<int> cats = {target_cat};
    for (int i = 0; i < n_interferers; ++i) {
        if (!config.allow_same_category && n_cat > 1) {
            int c = static_cast<int>(rng.uniform_int(0, n_cat - 2));
            if (c >= target_cat) ++c;
            cats.push_back(c);
        } else {
            cats.push_back(static_cast<int>(rng.uniform_int(0, n_cat - 1)));
        }
    }

    const double max_dur = std::min(config.max_event_s, config.duration_s);
    for (int c : cats) {
        EventSpec spec;
        spec.category = config.categories[c];
        spec.duration_s = rng.uniform(config.min_event_s, max_dur);
        spec.onset_s = rng.uniform(0.0, config.duration_s - spec.duration_s);
        spec.snr_db = rng.uniform(config.snr_min_db, config.snr_max_db);
        spec.seed = rng.next_u64();
        out.events.push_back(std::move(spec));
    }
    out.background_seed = rng.next_u64();

    out.background = synth_background(out.background_seed, canvas,
                                      config.sample_rate, config.background_rms);

    Eigen::ArrayXd mix = out.background.samples;
    std::vector<Eigen::ArrayXd> stems;
    std::vector<Region> event_regions;
    for (const EventSpec& spec : out.events) {
        const Waveform event = synth_event(spec, config.sample_rate);
        const long onset = std::lround(spec.onset_s * config.sample_rate);
        const long len = std::min<long>(event.samples.size(), canvas - onset);
        Region region{onset, onset + len};

        Eigen::ArrayXd placed = Eigen::ArrayXd::Zero(canvas);
        placed.segment(onset, len) = event.samples.head(len);
        const double gain = scale_to_snr({placed, config.sample_rate},
                                         out.background, spec.snr_db, region);
        placed *= gain;
        mix += placed;
        stems.push_back(std::move(placed));
        event_regions.push_back(region);
    }

    // Joint rescale keeps stems additive and SNRs intact when the sum clips.
    const double peak = mix.abs().maxCoeff();
    const double g = peak > kPeakCeiling ? kPeakCeiling / peak : 1.0;
    mix *= g;
    out.background.samples *= g;
    for (auto& s : stems) s *= g;

    out.mixture = {mix, config.sample_rate};
    out.target_stem = {stems[0], config.sample_rate};
    out.regions = {event_regions[0]};
    for (std::size_t i = 1; i < stems.size(); ++i)
        out.interferer_stems.push_back({stems[i], config.sample_rate});

    for (std::size_t i = 0; i < stems.size(); ++i) {
        const Region r = event_regions[i];
        const long len = r.end - r.begin;
        const double fg = std::sqrt(stems[i].segment(r.begin, len).square().mean());
        const double bg = std::sqrt(
            out.background.samples.segment(r.begin, len).square().mean());
        out.realized_snr_db.push_back(20.0 * std::log10(fg / bg));
    }

    const Region tr = event_regions[0];
    long overlapped = 0;
    for (std::size_t i = 1; i < event_regions.size(); ++i) {
        const Region r = event_regions[i];
        overlapped += std::max<long>(
            0, std::min(tr.end, r.end) - std::max(tr.begin, r.begin));
    }
    out.overlap_fraction =
        static_cast<double>(std::min(overlapped, tr.end - tr.begin)) /
        static_cast<double>(tr.end - tr.begin);
    return out;
}

// ---------------------------------------------------------------------------
// Manifest I/O
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json to_json(const ManifestRecord& r) {
    json events = json::array();
    for (const auto& e : r.events) {
        events.push_back({{"category", e.spec.category},
                          {"duration_s", e.spec.duration_s},
                          {"onset_s", e.spec.onset_s},
                          {"snr_db", e.spec.snr_db},
                          {"seed", e.spec.seed},
                          {"role", e.role},
                          {"realized_snr_db", e.realized_snr_db}});
    }
    json regions = json::array();
    for (const auto& reg : r.regions) regions.push_back({reg.begin, reg.end});
    return {{"id", r.id},
            {"mixture", r.mixture_path},
            {"target", r.target_path},
            {"category", r.target_category},
            {"sample_seed", r.sample_seed},
            {"background_seed", r.background_seed},
            {"config_hash", r.config_hash},
            {"norm_log_min", r.norm_log_min},
            {"norm_log_max", r.norm_log_max},
            {"sample_rate", r.sample_rate},
            {"regions", regions},
            {"events", events}};
}

ManifestRecord from_json(const json& j) {
    ManifestRecord r;
    r.id = j.at("id").get<std::string>();
    r.mixture_path = j.at("mixture").get<std::string>();
    r.target_path = j.at("target").get<std::string>();
    r.target_category = j.at("category").get<std::string>();
    r.sample_seed = j.at("sample_seed").get<std::uint64_t>();
    r.background_seed = j.at("background_seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::uint64_t>();
    r.norm_log_min = j.at("norm_log_min").get<double>();
    r.norm_log_max = j.at("norm_log_max").get<double>();
    r.sample_rate = j.at("sample_rate").get<int>();
    for (const auto& reg : j.at("regions"))
        r.regions.push_back({reg.at(0).get<long>(), reg.at(1).get<long>()});
    for (const auto& e : j.at("events")) {
        ManifestEventEntry entry;
        entry.spec.category = e.at("category").get<std::string>();
        entry.spec.duration_s = e.at("duration_s").get<double>();
        entry.spec.onset_s = e.at("onset_s").get<double>();
        entry.spec.snr_db = e.at("snr_db").get<double>();
        entry.spec.seed = e.at("seed").get<std::uint64_t>();
        entry.role = e.at("role").get<std::string>();
        entry.realized_snr_db = e.at("realized_snr_db").get<double>();
        r.events.push_back(std::move(entry));
    }
    return r;
}

}  // namespace

void write_manifest(std::span<const ManifestRecord> records,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    for (const auto& r : records) out << to_json(r).dump() << '\n';
    if (!out) throw std::runtime_error("manifest write failed: " + path);
}

std::vector<ManifestRecord> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    std::vector<ManifestRecord> records;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error("manifest " + path + " line " +
                                     std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

}  // namespace dpmtse
