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

#ifndef DPMTSE_EVAL_HPP
#define DPMTSE_EVAL_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpmtse/audio.hpp"
#include "dpmtse/mixgen.hpp"

namespace dpmtse {

/// Frame-aligned flags marking target-active frames; a frame counts as
/// active when its analysis window overlaps a target region at all
/// (half-window dilation).
struct RegionMask {
    std::vector<bool> active;

    long count_active() const;
    long count_inactive() const;
};

RegionMask make_region_mask(std::span<const Region> regions, long n_frames,
                            const MelConfig& config);

/// Scale-invariant signal-to-distortion ratio in dB: the estimate is
/// projected onto the reference; ratio of projection energy to residual
/// energy. Capped to [-100, +100] so reports stay finite.
double si_sdr(const Waveform& estimate, const Waveform& reference);

/// Mean squared error over all frames, or over masked frames when a mask
/// is given. Throws when the mask selects no frames.
double log_mel_distance(const MelGrid& estimate, const MelGrid& reference,
                        const RegionMask* mask = nullptr);

/// Mean energy above the normalized silence floor in non-target frames;
/// lower is better. Throws on an all-active mask.
double purity_score(const MelGrid& estimate, const RegionMask& mask,
                    double silence_floor);

/// Masked log-mel MSE restricted to target-active frames; lower is better.
double extraction_score(const MelGrid& estimate, const MelGrid& reference,
                        const RegionMask& mask);

struct SampleMetrics {
    std::string id;
    std::optional<double> si_sdr_db;  // present only when a waveform estimate exists
    double mel_mse = 0.0;
    double mel_mse_target = 0.0;
    double purity = 0.0;
    double extraction = 0.0;
};

struct Aggregate {
    double mean = 0.0;
    double ci95 = 0.0;  // 1.96 * stderr, normal approximation
    long n = 0;
};

Aggregate aggregate(std::span<const double> values);

/// Estimate produced by an extractor for one manifest record; the waveform
/// is optional (mel-only extractors skip si_sdr).
struct Estimate {
    MelGrid mel;
    std::optional<Waveform> wave;
};

using Extractor = std::function<std::optional<Estimate>(const ManifestRecord&)>;

struct CorpusReport {
    std::vector<SampleMetrics> rows;
    std::vector<std::string> failures;  // "<id>: reason"
};

/// Runs every manifest record through the extractor and scores it against
/// the ground-truth stem under `corpus_dir`. Failures are listed and
/// evaluation continues.
CorpusReport evaluate_corpus(std::span<const ManifestRecord> manifest,
                             const Extractor& extractor,
                             const std::string& corpus_dir,
                             const MelConfig& config);

/// CSV: sample_id,si_sdr,mel_mse,mel_mse_target,purity,extraction.
void write_report_csv(const CorpusReport& report, std::ostream& out);

/// Mean +/- CI table over the report columns.
std::string format_report_summary(const CorpusReport& report);

}  // namespace dpmtse

#endif  // DPMTSE_EVAL_HPP
