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

#ifndef DPMTSE_CONFIG_HPP
#define DPMTSE_CONFIG_HPP

#include <cstdint>
#include <string>

#include "dpmtse/audio.hpp"
#include "dpmtse/denoiser.hpp"
#include "dpmtse/mixgen.hpp"
#include "dpmtse/schedule.hpp"

namespace dpmtse {

struct ScheduleSettings {
    int T = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    bool corrected = true;
    int inference_steps = 50;

    NoiseSchedule build() const {
        NoiseSchedule s = build_linear_schedule(T, beta_start, beta_end);
        return corrected ? rescale_zero_terminal_snr(s) : s;
    }
};

struct CorpusSettings {
    int train = 64;
    int valid = 16;
    int test = 16;
    CorpusConfig gen;
};

/// Unified run configuration. Desk-scale defaults; --paper-scale switches
/// corpus size, epochs and batch to the full-scale values.
struct RunConfig {
    std::uint64_t seed = 0;
    ScheduleSettings schedule;
    MelConfig mel;
    TinyDenoiserConfig model;
    TrainConfig train;
    CorpusSettings corpus;
};

/// Hash over the grid contract that must agree across pipeline stages:
/// mel config including normalization anchors, model architecture and the
/// category registry. Schedule shape is carried and compared explicitly by
/// checkpoints; seeds, step counts and corpus sizes are excluded.
std::uint64_t config_hash(const RunConfig& config);

/// Loads a JSON config file over the defaults; unknown keys are rejected.
/// The environment variable DPM_TSE_SEED seeds the config at the lowest
/// priority (file and CLI flags override it).
RunConfig load_run_config(const std::string& path);
RunConfig default_run_config();

void apply_paper_scale(RunConfig& config);

}  // namespace dpmtse

#endif  // DPMTSE_CONFIG_HPP
