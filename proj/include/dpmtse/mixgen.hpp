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

#ifndef DPMTSE_MIXGEN_HPP
#define DPMTSE_MIXGEN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpmtse/audio.hpp"

namespace dpmtse {

/// Registry of synthetic event classes standing in for a real sound-event
/// corpus. Extensible via CorpusConfig::categories.
const std::vector<std::string>& default_categories();

/// One sound event to place on the mixture canvas. The waveform is a pure
/// function of (category, seed); duration/onset are in seconds.
struct EventSpec {
    std::string category;
    double duration_s = 1.0;
    double onset_s = 0.0;
    double snr_db = 0.0;
    std::uint64_t seed = 0;
};

/// Half-open sample range [begin, end).
struct Region {
    long begin = 0;
    long end = 0;
};

struct MixtureSample {
    Waveform mixture;
    Waveform target_stem;  // zeros outside the target regions
    std::string target_category;
    std::vector<EventSpec> events;  // events[0] is the target
    std::vector<double> realized_snr_db;
    std::uint64_t sample_seed = 0;
    std::uint64_t background_seed = 0;
    std::vector<Region> regions;  // target-active sample ranges

    // Kept for diagnostics and additivity checks; not written to disk.
    Waveform background;
    std::vector<Waveform> interferer_stems;
    double overlap_fraction = 0.0;  // target samples also covered by interferers
};

struct CorpusConfig {
    int sample_rate = 16000;
    double duration_s = 10.0;
    int min_interferers = 1;
    int max_interferers = 3;
    bool allow_same_category = false;
    double snr_min_db = -5.0;
    double snr_max_db = 10.0;
    double min_event_s = 0.3;
    double max_event_s = 10.0;
    double background_rms = 0.03;
    std::vector<std::string> categories = default_categories();
};

/// Deterministic waveform for (category, seed) with 10 ms raised-cosine
/// onset/offset ramps and unit peak. Throws on an unknown category.
Waveform synth_event(const EventSpec& spec, int sample_rate);

/// Filtered noise bed covering the whole canvas, RMS-normalized.
Waveform synth_background(std::uint64_t seed, long length, int sample_rate,
                          double rms);

/// Gain g such that 20 log10(RMS(g*fg) / RMS(bg)) == snr_db over `region`.
/// Throws when either signal is silent over the region.
double scale_to_snr(const Waveform& foreground, const Waveform& background,
                    double snr_db, Region region);

/// Full synthesis of one sample: seeded event placement, per-event SNR
/// scaling against the background, peak-safe joint rescale of mixture and
/// stems. Deterministic in sample_seed.
MixtureSample make_mixture(const CorpusConfig& config, std::uint64_t sample_seed);

/// One manifest line per sample; every line also carries the corpus-level
/// normalization statistics and config hash so any line alone suffices to
/// interpret the files.
struct ManifestEventEntry {
    EventSpec spec;
    std::string role;  // "target" or "interferer"
    double realized_snr_db = 0.0;
};

struct ManifestRecord {
    std::string id;
    std::string mixture_path;
    std::string target_path;
    std::string target_category;
    std::uint64_t sample_seed = 0;
    std::uint64_t background_seed = 0;
    std::uint64_t config_hash = 0;
    double norm_log_min = 0.0;
    double norm_log_max = 0.0;
    int sample_rate = 16000;
    std::vector<Region> regions;
    std::vector<ManifestEventEntry> events;
};

void write_manifest(std::span<const ManifestRecord> records,
                    const std::string& path);

/// Throws std::runtime_error naming the offending line on malformed input.
std::vector<ManifestRecord> read_manifest(const std::string& path);

}  // namespace dpmtse

#endif  // DPMTSE_MIXGEN_HPP
