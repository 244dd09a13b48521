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

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dpmtse/audio.hpp"
#include "dpmtse/config.hpp"
#include "dpmtse/denoiser.hpp"
#include "dpmtse/diffusion.hpp"
#include "dpmtse/eval.hpp"
#include "dpmtse/mixgen.hpp"
#include "dpmtse/parallel.hpp"
#include "dpmtse/rng.hpp"
#include "dpmtse/schedule.hpp"

namespace fs = std::filesystem;
using namespace dpmtse;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitMissingInput = 3;
constexpr int kExitNumeric = 4;

const char* const kSplits[] = {"train", "valid", "test"};

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool paper_scale = false;
};

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig cfg = args.config_path.empty() ? default_run_config()
                                             : load_run_config(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    if (args.paper_scale) apply_paper_scale(cfg);
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    cmd->add_option("--seed", args.seed, "master seed (overrides config and env)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_flag("--paper-scale", args.paper_scale,
                  "full-scale corpus/epoch settings (impractically slow)");
}

int category_index(const std::vector<std::string>& categories,
                   const std::string& name) {
    const auto it = std::find(categories.begin(), categories.end(), name);
    return it == categories.end() ? -1
                                  : static_cast<int>(it - categories.begin());
}

std::string sample_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05d", index);
    return buf;
}

// ---------------------------------------------------------------------------
// schedule inspect
// ---------------------------------------------------------------------------

struct ScheduleInspectArgs {
    int T = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    int steps = 50;
    bool correct = false;
    std::string csv_path;
};

int run_schedule_inspect(const ScheduleInspectArgs& args) {
    const NoiseSchedule base =
        build_linear_schedule(args.T, args.beta_start, args.beta_end);
    const NoiseSchedule corrected = rescale_zero_terminal_snr(base);
    const NoiseSchedule& selected = args.correct ? corrected : base;
    const StepPlan plan = plan_inference_steps(selected, args.steps);

    std::cout.precision(12);
    std::cout << "linear schedule: T=" << args.T << " beta=[" << args.beta_start
              << ", " << args.beta_end << "], plan=" << plan.steps.size()
              << " steps\n";
    std::cout << "terminal SNR (default):   " << snr(base, args.T) << "\n";
    std::cout << "terminal SNR (corrected): " << snr(corrected, args.T) << "\n";
    std::cout << "selected: " << (args.correct ? "corrected" : "default") << "\n";
    std::cout << "terminal SNR: " << snr(selected, args.T) << "\n";
    std::cout << "sqrt_alpha_bar_1: default " << base.sqrt_alpha_bar(1)
              << ", corrected " << corrected.sqrt_alpha_bar(1) << "\n";

    if (!args.csv_path.empty()) {
        std::ofstream out(args.csv_path);
        if (!out) {
            std::cerr << "error: cannot write " << args.csv_path << "\n";
            return kExitMissingInput;
        }
        dump_schedule(selected, plan, out);
        std::cout << "wrote " << args.csv_path << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

struct GenDataArgs {
    CommonArgs common;
    std::string out_dir;
    int train = -1, valid = -1, test = -1;
    std::string interferers;
    bool allow_clean = false;
    int workers = 0;
};

int run_gen_data(const GenDataArgs& args) {
    RunConfig cfg = resolve_config(args.common);
    if (args.train >= 0) cfg.corpus.train = args.train;
    if (args.valid >= 0) cfg.corpus.valid = args.valid;
    if (args.test >= 0) cfg.corpus.test = args.test;
    if (!args.interferers.empty()) {
        int lo = 0, hi = 0;
        if (std::sscanf(args.interferers.c_str(), "%d-%d", &lo, &hi) != 2) {
            std::cerr << "error: --interferers expects MIN-MAX\n";
            return kExitUsage;
        }
        cfg.corpus.gen.min_interferers = lo;
        cfg.corpus.gen.max_interferers = hi;
    }
    if (cfg.corpus.gen.min_interferers < 1 && !args.allow_clean) {
        std::cerr << "error: mixtures need 1-3 interferers; pass --allow-clean "
                     "to generate clean samples anyway\n";
        return kExitUsage;
    }

    const int counts[3] = {cfg.corpus.train, cfg.corpus.valid, cfg.corpus.test};
    const fs::path root(args.out_dir);
    for (int s = 0; s < 3; ++s) {
        fs::create_directories(root / kSplits[s] / "mixture");
        fs::create_directories(root / kSplits[s] / "target");
    }

    // Raw (un-normalized) log-mel statistics are measured on the train
    // split; identity anchors make log_mel return raw log values.
    MelConfig raw = cfg.mel;
    raw.norm_log_min = -1.0;
    raw.norm_log_max = 1.0;

    struct PerSample {
        MixtureSample sample;
        int split = 0;
        int index_in_split = 0;
        double raw_max = -1e300;
    };

    const int total = counts[0] + counts[1] + counts[2];
    std::vector<PerSample> meta(total);

    parallel_for(
        total,
        [&](long i) {
            int split = 0, offset = static_cast<int>(i);
            while (split < 2 && offset >= counts[split]) {
                offset -= counts[split];
                ++split;
            }
            PerSample& ps = meta[i];
            ps.split = split;
            ps.index_in_split = offset;
            ps.sample = make_mixture(cfg.corpus.gen, split_seed(cfg.seed, i));

            const std::string id = sample_id(offset);
            write_wav((root / kSplits[split] / "mixture" / (id + ".wav")).string(),
                      ps.sample.mixture);
            write_wav((root / kSplits[split] / "target" / (id + ".wav")).string(),
                      ps.sample.target_stem);

            if (split == 0) {
                const MelGrid mix_mel = log_mel(ps.sample.mixture, raw);
                const MelGrid tgt_mel = log_mel(ps.sample.target_stem, raw);
                ps.raw_max = std::max(mix_mel.values.maxCoeff(),
                                      tgt_mel.values.maxCoeff());
            }
            // Keep only metadata; the waveforms are already on disk.
            ps.sample.mixture.samples.resize(0);
            ps.sample.target_stem.samples.resize(0);
            ps.sample.background.samples.resize(0);
            ps.sample.interferer_stems.clear();
        },
        args.workers);

    double raw_max = std::log(cfg.mel.log_floor) + 1.0;
    for (const PerSample& ps : meta)
        if (ps.split == 0) raw_max = std::max(raw_max, ps.raw_max);
    cfg.mel.norm_log_min = std::log(cfg.mel.log_floor);
    if (counts[0] > 0) cfg.mel.norm_log_max = raw_max;
    const std::uint64_t hash = config_hash(cfg);

    for (int s = 0; s < 3; ++s) {
        std::vector<ManifestRecord> records;
        for (const PerSample& ps : meta) {
            if (ps.split != s) continue;
            const MixtureSample& mx = ps.sample;
            ManifestRecord r;
            r.id = sample_id(ps.index_in_split);
            r.mixture_path = std::string(kSplits[s]) + "/mixture/" + r.id + ".wav";
            r.target_path = std::string(kSplits[s]) + "/target/" + r.id + ".wav";
            r.target_category = mx.target_category;
            r.sample_seed = mx.sample_seed;
            r.background_seed = mx.background_seed;
            r.config_hash = hash;
            r.norm_log_min = cfg.mel.norm_log_min;
            r.norm_log_max = cfg.mel.norm_log_max;
            r.sample_rate = cfg.mel.sample_rate;
            r.regions = mx.regions;
            for (std::size_t e = 0; e < mx.events.size(); ++e)
                r.events.push_back({mx.events[e], e == 0 ? "target" : "interferer",
                                    mx.realized_snr_db[e]});
            records.push_back(std::move(r));
        }
        write_manifest(records, (root / kSplits[s] / "manifest.jsonl").string());
    }

    std::cout << "wrote " << total << " samples under " << args.out_dir
              << " (config hash " << std::hex << hash << std::dec
              << ", norm range [" << cfg.mel.norm_log_min << ", "
              << cfg.mel.norm_log_max << "])\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    CommonArgs common;
    std::string corpus_dir;
    std::string out_path;
    std::string loss_csv;
    int epochs = -1;
    int batch = -1;
    bool resume = false;
    bool default_schedule = false;
};

std::vector<std::pair<int, int>> mask_to_spans(const RegionMask& mask) {
    std::vector<std::pair<int, int>> spans;
    int begin = -1;
    for (int f = 0; f <= static_cast<int>(mask.active.size()); ++f) {
        const bool on = f < static_cast<int>(mask.active.size()) && mask.active[f];
        if (on && begin < 0) begin = f;
        if (!on && begin >= 0) {
            spans.emplace_back(begin, f);
            begin = -1;
        }
    }
    return spans;
}

int run_train(const TrainArgs& args) {
    RunConfig cfg = resolve_config(args.common);
    if (args.epochs >= 0) cfg.train.epochs = args.epochs;
    if (args.batch > 0) cfg.train.batch_size = args.batch;
    if (args.default_schedule) cfg.schedule.corrected = false;
    cfg.train.seed = split_seed(cfg.seed, 0xAD0);

    const fs::path manifest_path =
        fs::path(args.corpus_dir) / "train" / "manifest.jsonl";
    if (!fs::exists(manifest_path)) {
        std::cerr << "error: missing corpus manifest " << manifest_path << "\n";
        return kExitMissingInput;
    }
    const std::vector<ManifestRecord> records = read_manifest(manifest_path.string());
    if (records.empty()) {
        std::cerr << "error: empty training manifest\n";
        return kExitMissingInput;
    }

    cfg.mel.norm_log_min = records[0].norm_log_min;
    cfg.mel.norm_log_max = records[0].norm_log_max;
    const std::uint64_t hash = config_hash(cfg);
    if (hash != records[0].config_hash) {
        std::cerr << "error: config hash mismatch with corpus manifest (corpus "
                  << std::hex << records[0].config_hash << ", config " << hash
                  << std::dec << ")\n";
        return kExitMissingInput;
    }

    std::cout << "loading " << records.size() << " training samples\n";
    std::vector<TrainSample> dataset(records.size());
    parallel_for(static_cast<long>(records.size()), [&](long i) {
        const ManifestRecord& r = records[i];
        const Waveform mix =
            read_wav((fs::path(args.corpus_dir) / r.mixture_path).string());
        const Waveform tgt =
            read_wav((fs::path(args.corpus_dir) / r.target_path).string());
        TrainSample s;
        s.m = log_mel(mix, cfg.mel).values;
        s.x0 = log_mel(tgt, cfg.mel).values;
        const int cat = category_index(cfg.corpus.gen.categories, r.target_category);
        if (cat < 0)
            throw std::runtime_error("category not in registry: " + r.target_category);
        s.category = cat;
        const RegionMask mask = make_region_mask(r.regions, s.x0.rows(), cfg.mel);
        s.target_frame_spans = mask_to_spans(mask);
        dataset[i] = std::move(s);
    });

    TinyDenoiser model(cfg.model);
    AdamState adam;
    int start_epoch = 0;
    if (args.resume) {
        if (!fs::exists(args.out_path)) {
            std::cerr << "error: --resume but no checkpoint at " << args.out_path
                      << "\n";
            return kExitMissingInput;
        }
        const Checkpoint ckpt = load_checkpoint(args.out_path);
        if (ckpt.config_hash != hash) {
            std::cerr << "error: checkpoint/config hash mismatch\n";
            return kExitMissingInput;
        }
        model.params() = ckpt.params;
        adam = ckpt.adam;
        cfg.train.seed = ckpt.train_seed;
        start_epoch = adam.epochs_done;
        std::cout << "resuming from epoch " << start_epoch << "\n";
    } else {
        model.init_params(split_seed(cfg.seed, 0x1417));
    }

    const NoiseSchedule schedule = cfg.schedule.build();
    std::cout << "training: epochs " << start_epoch << ".." << cfg.train.epochs
              << ", batch " << cfg.train.batch_size << ", schedule "
              << (cfg.schedule.corrected ? "corrected" : "default") << "\n";

    std::vector<LossRecord> history;
    try {
        history = train(model, dataset, cfg.train, schedule, adam);
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }

    Checkpoint ckpt;
    ckpt.arch = cfg.model;
    ckpt.params = model.params();
    ckpt.adam = adam;
    ckpt.train_seed = cfg.train.seed;
    ckpt.config_hash = hash;
    ckpt.schedule_T = cfg.schedule.T;
    ckpt.beta_start = cfg.schedule.beta_start;
    ckpt.beta_end = cfg.schedule.beta_end;
    ckpt.corrected = cfg.schedule.corrected;
    ckpt.norm_log_min = cfg.mel.norm_log_min;
    ckpt.norm_log_max = cfg.mel.norm_log_max;
    ckpt.categories = cfg.corpus.gen.categories;
    save_checkpoint(ckpt, args.out_path);

    const std::string loss_path =
        args.loss_csv.empty() ? args.out_path + ".loss.csv" : args.loss_csv;
    std::ofstream loss_out(loss_path, args.resume ? std::ios::app : std::ios::trunc);
    if (!args.resume) loss_out << "epoch,step,loss\n";
    loss_out.precision(17);
    for (const LossRecord& r : history)
        loss_out << r.epoch << ',' << r.step << ',' << r.loss << '\n';

    if (!history.empty())
        std::cout << "final loss " << history.back().loss << " after "
                  << history.back().step << " steps\n";
    std::cout << "wrote " << args.out_path << " and " << loss_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

struct ExtractArgs {
    CommonArgs common;
    std::string checkpoint;
    std::string mixture;
    std::string category;
    std::string out_prefix;
    std::string manifest;
    int steps = -1;
    int gl_iters = 60;
    bool oracle = false;
    std::string stem;
};

class TimingDenoiser : public Denoiser {
  public:
    TimingDenoiser(const Denoiser& inner, bool log) : inner_(inner), log_(log) {}
    Grid predict_v(const Grid& x_t, const Grid& m, int category,
                   int t) const override {
        const auto start = std::chrono::steady_clock::now();
        Grid v = inner_.predict_v(x_t, m, category, t);
        if (log_) {
            const double ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
            std::cout << "  step t=" << t << ": " << ms << " ms\n";
        }
        return v;
    }

  private:
    const Denoiser& inner_;
    bool log_;
};

int run_extract(const ExtractArgs& args) {
    RunConfig cfg = resolve_config(args.common);
    if (!fs::exists(args.mixture) && !args.oracle) {
        std::cerr << "error: missing mixture " << args.mixture << "\n";
        return kExitMissingInput;
    }

    if (args.oracle) {
        if (args.stem.empty() || !fs::exists(args.stem)) {
            std::cerr << "error: --oracle requires --stem pointing at the "
                         "ground-truth wav\n";
            return kExitMissingInput;
        }
        // Bypass path for harness validation: the estimate is the stem mel.
        // Normalization anchors come from the corpus manifest when given.
        if (!args.manifest.empty()) {
            const auto records = read_manifest(args.manifest);
            if (!records.empty()) {
                cfg.mel.norm_log_min = records[0].norm_log_min;
                cfg.mel.norm_log_max = records[0].norm_log_max;
                if (config_hash(cfg) != records[0].config_hash) {
                    std::cerr << "error: config hash mismatch with " << args.manifest
                              << "\n";
                    return kExitMissingInput;
                }
            }
        }
        const std::uint64_t hash = config_hash(cfg);
        const MelGrid mel = log_mel(read_wav(args.stem), cfg.mel);
        write_mel_file(args.out_prefix + ".mel", mel, hash);
        const Waveform wave = griffin_lim(mel, args.gl_iters, cfg.mel);
        write_wav(args.out_prefix + ".wav", wave);
        std::cout << "oracle mode: wrote " << args.out_prefix << ".mel/.wav\n";
        return 0;
    }

    if (args.checkpoint.empty() || !fs::exists(args.checkpoint)) {
        std::cerr << "error: missing checkpoint " << args.checkpoint << "\n";
        return kExitMissingInput;
    }
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    cfg.mel.norm_log_min = ckpt.norm_log_min;
    cfg.mel.norm_log_max = ckpt.norm_log_max;
    cfg.model = ckpt.arch;
    cfg.corpus.gen.categories = ckpt.categories;
    const std::uint64_t hash = config_hash(cfg);
    if (hash != ckpt.config_hash) {
        std::cerr << "error: checkpoint/config hash mismatch (checkpoint "
                  << std::hex << ckpt.config_hash << ", config " << hash
                  << std::dec << ")\n";
        return kExitMissingInput;
    }

    const int cat = category_index(ckpt.categories, args.category);
    if (cat < 0) {
        std::cerr << "error: category '" << args.category
                  << "' unknown to the checkpoint (has:";
        for (const auto& c : ckpt.categories) std::cerr << ' ' << c;
        std::cerr << ")\n";
        return kExitUsage;
    }

    cfg.schedule.T = ckpt.schedule_T;
    cfg.schedule.beta_start = ckpt.beta_start;
    cfg.schedule.beta_end = ckpt.beta_end;
    cfg.schedule.corrected = ckpt.corrected;
    const NoiseSchedule schedule = cfg.schedule.build();
    const int steps = args.steps > 0 ? args.steps : cfg.schedule.inference_steps;
    const StepPlan plan = plan_inference_steps(schedule, steps);

    TinyDenoiser model(ckpt.arch);
    model.params() = ckpt.params;

    const MelGrid mix_mel = log_mel(read_wav(args.mixture), cfg.mel);
    // The tiny denoiser consumes whole patches; pad the condition with
    // silence and trim the sample afterwards.
    const Eigen::Index frames = mix_mel.values.rows();
    const Eigen::Index pf = ckpt.arch.patch_frames;
    const Eigen::Index padded = (frames + pf - 1) / pf * pf;
    Grid condition(padded, mix_mel.values.cols());
    condition.topRows(frames) = mix_mel.values;
    condition.bottomRows(padded - frames).setConstant(cfg.mel.silence_value());

    std::cout << "sampling " << plan.steps.size() << " steps (T=" << cfg.schedule.T
              << ", " << (ckpt.corrected ? "corrected" : "default")
              << " schedule)\n";
    const TimingDenoiser timed(model, true);
    const auto t0 = std::chrono::steady_clock::now();
    Grid x0 =
        sample(timed, condition, cat, plan, schedule, split_seed(cfg.seed, 0xE));
    const double total_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
    std::cout << "sampling done in " << total_ms << " ms\n";

    MelGrid out;
    out.values = x0.topRows(frames);
    out.original_frames = mix_mel.original_frames;
    out.meta = mix_mel.meta;
    write_mel_file(args.out_prefix + ".mel", out, hash);
    const Waveform wave = griffin_lim(out, args.gl_iters, cfg.mel);
    write_wav(args.out_prefix + ".wav", wave);
    std::cout << "wrote " << args.out_prefix << ".mel/.wav\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
    CommonArgs common;
    std::string corpus_dir;
    std::string split = "test";
    std::string estimates_dir;
    std::string out_csv;
};

int run_eval(const EvalArgs& args) {
    RunConfig cfg = resolve_config(args.common);
    const fs::path manifest_path =
        fs::path(args.corpus_dir) / args.split / "manifest.jsonl";
    if (!fs::exists(manifest_path)) {
        std::cerr << "error: missing manifest " << manifest_path << "\n";
        return kExitMissingInput;
    }
    const std::vector<ManifestRecord> records = read_manifest(manifest_path.string());
    if (records.empty()) {
        std::cerr << "error: empty manifest\n";
        return kExitMissingInput;
    }
    cfg.mel.norm_log_min = records[0].norm_log_min;
    cfg.mel.norm_log_max = records[0].norm_log_max;

    long found = 0;
    bool hash_mismatch = false;
    const MelConfig mel = cfg.mel;
    const Extractor extractor =
        [&](const ManifestRecord& r) -> std::optional<Estimate> {
        const fs::path mel_path = fs::path(args.estimates_dir) / (r.id + ".mel");
        if (!fs::exists(mel_path)) return std::nullopt;
        MelFileContents contents = read_mel_file(mel_path.string(), mel);
        if (contents.config_hash != r.config_hash) {
            hash_mismatch = true;
            throw std::runtime_error("estimate config hash mismatch");
        }
        ++found;
        Estimate est;
        est.mel = std::move(contents.grid);
        const fs::path wav_path = fs::path(args.estimates_dir) / (r.id + ".wav");
        if (fs::exists(wav_path)) est.wave = read_wav(wav_path.string());
        return est;
    };

    const CorpusReport report =
        evaluate_corpus(records, extractor, args.corpus_dir, mel);
    if (hash_mismatch) {
        std::cerr << "error: estimates were produced under a different config "
                     "(hash mismatch)\n";
        return kExitMissingInput;
    }
    if (found == 0) {
        std::cerr << "error: no estimates found for any manifest entry under "
                  << args.estimates_dir << "\n";
        return kExitMissingInput;
    }

    if (!args.out_csv.empty()) {
        std::ofstream out(args.out_csv);
        write_report_csv(report, out);
        std::cout << "wrote " << args.out_csv << "\n";
    } else {
        write_report_csv(report, std::cout);
    }
    std::cout << format_report_summary(report);
    if (!report.failures.empty())
        std::cout << "evaluated " << report.rows.size() << " of " << records.size()
                  << " samples (" << report.failures.size() << " skipped)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// demo-gaussian
// ---------------------------------------------------------------------------

struct DemoArgs {
    CommonArgs common;
    double mu = 0.0;
    double sigma = 1.0;
    int n = 5000;
    int d = 8;
    int steps = 50;
    int T = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    bool no_correct = false;
    double var_tol = 0.10;
    double mean_sigmas = 4.0;
    std::string variance = "posterior";
};

int run_demo_gaussian(const DemoArgs& args) {
    RunConfig cfg = resolve_config(args.common);
    NoiseSchedule schedule =
        build_linear_schedule(args.T, args.beta_start, args.beta_end);
    if (!args.no_correct) {
        schedule = rescale_zero_terminal_snr(schedule);
    } else {
        std::cout << "warning: schedule has nonzero terminal SNR ("
                  << snr(schedule, args.T) << "); silence-heavy targets are not "
                  << "reachable from pure noise\n";
    }
    const StepPlan plan = plan_inference_steps(schedule, args.steps);

    const Grid mu0 = Grid::Constant(1, args.d, args.mu);
    const GaussianOracleDenoiser oracle(schedule, mu0, args.sigma);
    const Grid condition = Grid::Zero(1, args.d);

    SampleOptions options;
    options.clamp = std::nullopt;  // oracle targets are not log-mel grids
    options.warn_nonzero_terminal = false;
    if (args.variance == "beta")
        options.noise_variance = NoiseVariance::kTransitionBeta;
    else if (args.variance != "posterior")
        throw std::invalid_argument("--variance must be 'posterior' or 'beta'");
    std::cout << "step noise variance: " << args.variance << "\n";

    Eigen::ArrayXXd draws(args.n, args.d);
    for (int i = 0; i < args.n; ++i)
        draws.row(i) = sample(oracle, condition, 0, plan, schedule,
                              split_seed(cfg.seed, i), options)
                           .row(0);

    const Eigen::ArrayXd mean = draws.colwise().mean();
    Eigen::ArrayXd var(args.d);
    for (int j = 0; j < args.d; ++j)
        var(j) = (draws.col(j) - mean(j)).square().sum() / (args.n - 1);

    const double mean_tol =
        args.sigma > 0.0 ? args.mean_sigmas * args.sigma / std::sqrt(args.n) : 1e-9;
    bool pass = true;
    std::cout.precision(8);
    std::cout << "target: mean " << args.mu << ", variance "
              << args.sigma * args.sigma << " (n=" << args.n << ", d=" << args.d
              << ")\n";
    for (int j = 0; j < args.d; ++j) {
        const bool mean_ok = std::abs(mean(j) - args.mu) <= mean_tol;
        bool var_ok = true;
        if (args.sigma > 0.0)
            var_ok = std::abs(var(j) - args.sigma * args.sigma) <=
                     args.var_tol * args.sigma * args.sigma;
        else
            var_ok = var(j) <= 1e-18;
        pass = pass && mean_ok && var_ok;
        std::cout << "  dim " << j << ": mean " << mean(j) << " (tol " << mean_tol
                  << (mean_ok ? ", ok" : ", FAIL") << "), var " << var(j)
                  << (var_ok ? " ok" : " FAIL") << "\n";
    }
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale diffusion target sound extraction"};
    app.require_subcommand(1);

    ScheduleInspectArgs sched_args;
    CLI::App* sched = app.add_subcommand("schedule", "noise schedule tools");
    sched->require_subcommand(1);
    CLI::App* inspect =
        sched->add_subcommand("inspect", "dump schedules and terminal SNRs");
    inspect->add_option("--T", sched_args.T, "diffusion steps")
        ->check(CLI::PositiveNumber);
    inspect->add_option("--beta-start", sched_args.beta_start, "first variance");
    inspect->add_option("--beta-end", sched_args.beta_end, "last variance");
    inspect->add_option("--steps", sched_args.steps, "inference steps");
    inspect->add_flag("--correct", sched_args.correct,
                      "select the corrected schedule");
    inspect->add_option("--csv", sched_args.csv_path, "write per-step CSV here");

    GenDataArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic corpus");
    add_common(gen, gen_args.common);
    gen->add_option("--out", gen_args.out_dir, "corpus directory")->required();
    gen->add_option("--train", gen_args.train, "train sample count");
    gen->add_option("--valid", gen_args.valid, "valid sample count");
    gen->add_option("--test", gen_args.test, "test sample count");
    gen->add_option("--interferers", gen_args.interferers,
                    "MIN-MAX interferer count");
    gen->add_flag("--allow-clean", gen_args.allow_clean,
                  "permit samples without interferers");
    gen->add_option("--workers", gen_args.workers, "worker pool size");

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "train the tiny denoiser");
    add_common(train_cmd, train_args.common);
    train_cmd->add_option("--corpus", train_args.corpus_dir, "corpus directory")
        ->required();
    train_cmd->add_option("--out", train_args.out_path, "checkpoint path")
        ->required();
    train_cmd->add_option("--loss-csv", train_args.loss_csv, "loss history CSV path");
    train_cmd->add_option("--epochs", train_args.epochs, "epoch count");
    train_cmd->add_option("--batch", train_args.batch, "batch size");
    train_cmd->add_flag("--resume", train_args.resume,
                        "continue from the checkpoint");
    train_cmd->add_flag("--default-schedule", train_args.default_schedule,
                        "train under the uncorrected schedule");

    ExtractArgs extract_args;
    CLI::App* extract_cmd = app.add_subcommand("extract", "extract a target sound");
    add_common(extract_cmd, extract_args.common);
    extract_cmd->add_option("--checkpoint", extract_args.checkpoint, "trained model");
    extract_cmd->add_option("--mixture", extract_args.mixture, "mixture wav")
        ->required();
    extract_cmd->add_option("--category", extract_args.category, "target category")
        ->required();
    extract_cmd
        ->add_option("--out", extract_args.out_prefix, "output prefix (.mel/.wav)")
        ->required();
    extract_cmd->add_option("--steps", extract_args.steps, "inference steps");
    extract_cmd->add_option("--gl-iters", extract_args.gl_iters,
                            "Griffin-Lim iterations");
    extract_cmd->add_flag("--oracle", extract_args.oracle,
                          "bypass sampling; emit the ground-truth stem mel");
    extract_cmd->add_option("--stem", extract_args.stem, "stem wav for --oracle");
    extract_cmd->add_option("--manifest", extract_args.manifest,
                            "corpus manifest supplying normalization anchors "
                            "(oracle mode)");

    EvalArgs eval_args;
    CLI::App* eval_cmd = app.add_subcommand("eval", "score extraction outputs");
    add_common(eval_cmd, eval_args.common);
    eval_cmd->add_option("--corpus", eval_args.corpus_dir, "corpus directory")
        ->required();
    eval_cmd->add_option("--split", eval_args.split, "corpus split");
    eval_cmd
        ->add_option("--estimates", eval_args.estimates_dir,
                     "directory of NNNNN.mel estimates")
        ->required();
    eval_cmd->add_option("--out", eval_args.out_csv, "report CSV path");

    DemoArgs demo_args;
    CLI::App* demo = app.add_subcommand(
        "demo-gaussian", "validate the sampler against a closed-form oracle");
    add_common(demo, demo_args.common);
    demo->add_option("--mu", demo_args.mu, "target mean");
    demo->add_option("--sigma", demo_args.sigma, "target standard deviation");
    demo->add_option("--n", demo_args.n, "sample count");
    demo->add_option("--d", demo_args.d, "dimensions");
    demo->add_option("--steps", demo_args.steps, "inference steps");
    demo->add_option("--T", demo_args.T, "diffusion steps");
    demo->add_option("--beta-start", demo_args.beta_start, "first variance");
    demo->add_option("--beta-end", demo_args.beta_end, "last variance");
    demo->add_flag("--no-correct", demo_args.no_correct,
                   "sample from the uncorrected schedule");
    demo->add_option("--var-tol", demo_args.var_tol, "relative variance tolerance");
    demo->add_option("--mean-sigmas", demo_args.mean_sigmas,
                     "mean tolerance in units of sigma/sqrt(n)");
    demo->add_option("--variance", demo_args.variance,
                     "step noise variance rule: posterior (beta_tilde) or beta");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (inspect->parsed()) return run_schedule_inspect(sched_args);
        if (gen->parsed()) return run_gen_data(gen_args);
        if (train_cmd->parsed()) return run_train(train_args);
        if (extract_cmd->parsed()) return run_extract(extract_args);
        if (eval_cmd->parsed()) return run_eval(eval_args);
        if (demo->parsed()) return run_demo_gaussian(demo_args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
