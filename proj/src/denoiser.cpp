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

#include "dpmtse/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace dpmtse {

Eigen::VectorXd sinusoidal_embedding(double t, int dim) {
    if (dim < 2 || dim % 2 != 0)
        throw std::invalid_argument("embedding dimension must be even and >= 2");
    Eigen::VectorXd emb(dim);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::pow(10000.0, 2.0 * i / dim);
        emb(i) = std::sin(t / freq);
        emb(half + i) = std::cos(t / freq);
    }
    return emb;
}

// ---------------------------------------------------------------------------
// Gaussian oracle
// ---------------------------------------------------------------------------

GaussianOracleDenoiser::GaussianOracleDenoiser(const NoiseSchedule& schedule,
                                               Grid mu0, double sigma0)
    : schedule_(&schedule), mu0_(std::move(mu0)), sigma0_(sigma0) {
    if (sigma0 < 0.0) throw std::invalid_argument("sigma0 must be nonnegative");
}

Grid GaussianOracleDenoiser::posterior_x0_mean(const Grid& x_t, int t) const {
    Grid mu = mu0_;
    if (mu.size() == 1 && x_t.size() != 1)
        mu = Grid::Constant(x_t.rows(), x_t.cols(), mu0_(0, 0));
    detail::require_same_shape(mu, x_t);

    const double ab = schedule_->alpha_bar(t);
    if (ab >= 1.0) {
        if (sigma0_ == 0.0)
            throw std::domain_error("alpha_bar == 1 with sigma0 == 0: nothing to condition on");
        return x_t;
    }
    if (sigma0_ == 0.0) return mu;

    const double var0 = sigma0_ * sigma0_;
    const double sab = schedule_->sqrt_alpha_bar(t);
    const double denom = ab * var0 + (1.0 - ab);
    return (sab * var0 * x_t + (1.0 - ab) * mu) / denom;
}

Grid GaussianOracleDenoiser::predict_v(const Grid& x_t, const Grid& /*m*/,
                                       int /*category*/, int t) const {
    const Grid ex0 = posterior_x0_mean(x_t, t);
    const double ab = schedule_->alpha_bar(t);
    const double sab = schedule_->sqrt_alpha_bar(t);
    const double somab = schedule_->sqrt_one_minus_alpha_bar(t);
    Grid eeps;
    if (ab < 1.0)
        eeps = (x_t - sab * ex0) / somab;
    else
        eeps = Grid::Zero(x_t.rows(), x_t.cols());
    return sab * eeps - somab * ex0;
}

// ---------------------------------------------------------------------------
// Tiny denoiser
// ---------------------------------------------------------------------------

namespace {

using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Layout {
    long w1, b1, w2, b2, w3, b3, wt, bt, ct;
    explicit Layout(const TinyDenoiserConfig& c) {
        long off = 0;
        w1 = off; off += c.w1_size();
        b1 = off; off += c.hidden;
        w2 = off; off += c.w2_size();
        b2 = off; off += c.hidden;
        w3 = off; off += c.w3_size();
        b3 = off; off += c.patch_elems();
        wt = off; off += c.wt_size();
        bt = off; off += c.emb_dim;
        ct = off;
    }
};

struct Views {
    Map<const MatrixXd> W1, W2, W3, Wt, Ct;
    Map<const VectorXd> b1, b2, b3, bt;
    Views(const VectorXd& theta, const TinyDenoiserConfig& c, const Layout& l)
        : W1(theta.data() + l.w1, c.hidden, c.input_dim()),
          W2(theta.data() + l.w2, c.hidden, c.hidden),
          W3(theta.data() + l.w3, c.patch_elems(), c.hidden),
          Wt(theta.data() + l.wt, c.emb_dim, c.emb_dim),
          Ct(theta.data() + l.ct, c.emb_dim, c.num_categories),
          b1(theta.data() + l.b1, c.hidden),
          b2(theta.data() + l.b2, c.hidden),
          b3(theta.data() + l.b3, c.patch_elems()),
          bt(theta.data() + l.bt, c.emb_dim) {}
};

inline MatrixXd silu(const MatrixXd& a) {
    return a.array() / (1.0 + (-a).array().exp());
}

inline MatrixXd silu_grad(const MatrixXd& a) {
    const Eigen::ArrayXXd s = 1.0 / (1.0 + (-a).array().exp());
    return (s * (1.0 + a.array() * (1.0 - s))).matrix();
}

struct ForwardCache {
    MatrixXd Z, SE, A1, H1, A2, H2, Y;
    std::vector<int> cats;
};

void run_forward(const VectorXd& theta, const TinyDenoiserConfig& cfg,
                 ForwardCache& fc) {
    const Layout layout(cfg);
    const Views p(theta, cfg, layout);
    const Eigen::Index batch = fc.Z.cols();
    const int pe = cfg.patch_elems();

    // Timestep and category embeddings live in the tail of each column.
    fc.Z.middleRows(2 * pe, cfg.emb_dim) = p.Wt * fc.SE;
    fc.Z.middleRows(2 * pe, cfg.emb_dim).colwise() += p.bt;
    for (Eigen::Index j = 0; j < batch; ++j)
        fc.Z.col(j).segment(2 * pe + cfg.emb_dim, cfg.emb_dim) = p.Ct.col(fc.cats[j]);

    fc.A1 = p.W1 * fc.Z;
    fc.A1.colwise() += p.b1;
    fc.H1 = silu(fc.A1);
    fc.A2 = p.W2 * fc.H1;
    fc.A2.colwise() += p.b2;
    fc.H2 = silu(fc.A2);
    fc.Y = p.W3 * fc.H2;
    fc.Y.colwise() += p.b3;
}

void run_backward(const VectorXd& theta, const TinyDenoiserConfig& cfg,
                  const ForwardCache& fc, const MatrixXd& dY, VectorXd& grad) {
    const Layout layout(cfg);
    const Views p(theta, cfg, layout);
    const int pe = cfg.patch_elems();

    Map<MatrixXd> gW1(grad.data() + layout.w1, cfg.hidden, cfg.input_dim());
    Map<MatrixXd> gW2(grad.data() + layout.w2, cfg.hidden, cfg.hidden);
    Map<MatrixXd> gW3(grad.data() + layout.w3, pe, cfg.hidden);
    Map<MatrixXd> gWt(grad.data() + layout.wt, cfg.emb_dim, cfg.emb_dim);
    Map<MatrixXd> gCt(grad.data() + layout.ct, cfg.emb_dim, cfg.num_categories);
    Map<VectorXd> gb1(grad.data() + layout.b1, cfg.hidden);
    Map<VectorXd> gb2(grad.data() + layout.b2, cfg.hidden);
    Map<VectorXd> gb3(grad.data() + layout.b3, pe);
    Map<VectorXd> gbt(grad.data() + layout.bt, cfg.emb_dim);

    gW3.noalias() += dY * fc.H2.transpose();
    gb3 += dY.rowwise().sum();
    MatrixXd dA2 = (p.W3.transpose() * dY).cwiseProduct(silu_grad(fc.A2));
    gW2.noalias() += dA2 * fc.H1.transpose();
    gb2 += dA2.rowwise().sum();
    MatrixXd dA1 = (p.W2.transpose() * dA2).cwiseProduct(silu_grad(fc.A1));
    gW1.noalias() += dA1 * fc.Z.transpose();
    gb1 += dA1.rowwise().sum();

    const MatrixXd dZtail = p.W1.transpose().middleRows(2 * pe, 2 * cfg.emb_dim) *
                            dA1;  // gradients wrt the embedding slots only
    const auto dTemb = dZtail.topRows(cfg.emb_dim);
    const auto dCemb = dZtail.bottomRows(cfg.emb_dim);
    gWt.noalias() += dTemb * fc.SE.transpose();
    gbt += dTemb.rowwise().sum();
    for (Eigen::Index j = 0; j < dCemb.cols(); ++j)
        gCt.col(fc.cats[j]) += dCemb.col(j);
}

void fill_patch_column(const Grid& grid, int patch, int patch_frames,
                       Eigen::Ref<VectorXd> dst) {
    const Eigen::Index bins = grid.cols();
    for (Eigen::Index b = 0; b < bins; ++b)
        dst.segment(b * patch_frames, patch_frames) =
            grid.col(b).segment(static_cast<Eigen::Index>(patch) * patch_frames,
                                patch_frames)
                .matrix();
}

}  // namespace

TinyDenoiser::TinyDenoiser(TinyDenoiserConfig config) : config_(config) {
    if (config_.patch_frames < 1 || config_.bins < 1 || config_.hidden < 1 ||
        config_.num_categories < 1)
        throw std::invalid_argument("invalid denoiser dimensions");
    if (config_.emb_dim < 2 || config_.emb_dim % 2 != 0)
        throw std::invalid_argument("embedding width must be even");
    theta_ = Eigen::VectorXd::Zero(config_.param_count());
}

void TinyDenoiser::init_params(std::uint64_t seed) {
    const Layout layout(config_);
    Rng rng(seed);
    auto fill = [&](long offset, long count, double scale) {
        for (long i = 0; i < count; ++i) theta_(offset + i) = scale * rng.normal();
    };
    fill(layout.w1, config_.w1_size(), 1.0 / std::sqrt(config_.input_dim()));
    fill(layout.w2, config_.w2_size(), 1.0 / std::sqrt(config_.hidden));
    fill(layout.w3, config_.w3_size(), 1.0 / std::sqrt(config_.hidden));
    fill(layout.wt, config_.wt_size(), 1.0 / std::sqrt(config_.emb_dim));
    fill(layout.ct, config_.ctable_size(), 1.0);
    theta_.segment(layout.b1, config_.hidden).setZero();
    theta_.segment(layout.b2, config_.hidden).setZero();
    theta_.segment(layout.b3, config_.patch_elems()).setZero();
    theta_.segment(layout.bt, config_.emb_dim).setZero();
}

Grid TinyDenoiser::predict_v(const Grid& x_t, const Grid& m, int category,
                             int t) const {
    detail::require_same_shape(x_t, m);
    if (x_t.cols() != config_.bins)
        throw std::invalid_argument("grid bin count does not match the model");
    if (x_t.rows() % config_.patch_frames != 0)
        throw std::invalid_argument("frame count must be a multiple of the patch size");
    if (category < 0 || category >= config_.num_categories)
        throw std::out_of_range("category token outside the embedding table");

    const int patches = static_cast<int>(x_t.rows()) / config_.patch_frames;
    const int pe = config_.patch_elems();

    ForwardCache fc;
    fc.Z.setZero(config_.input_dim(), patches);
    fc.SE.resize(config_.emb_dim, patches);
    fc.cats.assign(patches, category);
    const Eigen::VectorXd se = sinusoidal_embedding(t, config_.emb_dim);
    for (int p = 0; p < patches; ++p) {
        fill_patch_column(x_t, p, config_.patch_frames, fc.Z.col(p).head(pe));
        fill_patch_column(m, p, config_.patch_frames,
                          fc.Z.col(p).segment(pe, pe));
        fc.SE.col(p) = se;
    }
    run_forward(theta_, config_, fc);

    Grid out(x_t.rows(), x_t.cols());
    for (int p = 0; p < patches; ++p)
        for (int b = 0; b < config_.bins; ++b)
            out.col(b).segment(static_cast<Eigen::Index>(p) * config_.patch_frames,
                               config_.patch_frames) =
                fc.Y.col(p).segment(b * config_.patch_frames, config_.patch_frames)
                    .array();
    return out;
}

TrainingTarget make_training_target(const Grid& x0, const NoiseSchedule& schedule,
                                    std::uint64_t seed) {
    Rng rng(seed);
    TrainingTarget out;
    out.t = static_cast<int>(rng.uniform_int(1, schedule.T));
    const Grid eps = rng.normal_grid(x0.rows(), x0.cols());
    out.x_t = forward_sample(x0, out.t, eps, schedule);
    out.v = v_target(x0, eps, out.t, schedule);
    return out;
}

LossResult loss_and_gradients(const TinyDenoiser& model,
                              std::span<const TrainItem> batch,
                              const NoiseSchedule& schedule,
                              std::uint64_t seed) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    const TinyDenoiserConfig& cfg = model.config();
    const int pe = cfg.patch_elems();

    int total_patches = 0;
    std::vector<int> patches_per_item(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Grid& x0 = batch[i].x0;
        detail::require_same_shape(x0, batch[i].m);
        if (x0.cols() != cfg.bins || x0.rows() % cfg.patch_frames != 0)
            throw std::invalid_argument("batch item shape does not match the model");
        patches_per_item[i] = static_cast<int>(x0.rows()) / cfg.patch_frames;
        total_patches += patches_per_item[i];
    }

    ForwardCache fc;
    fc.Z.setZero(cfg.input_dim(), total_patches);
    fc.SE.resize(cfg.emb_dim, total_patches);
    fc.cats.resize(total_patches);
    MatrixXd targets(pe, total_patches);
    std::vector<std::size_t> col_item(total_patches);

    int col = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const TrainingTarget tt =
            make_training_target(batch[i].x0, schedule, split_seed(seed, i));
        const Eigen::VectorXd se = sinusoidal_embedding(tt.t, cfg.emb_dim);
        for (int p = 0; p < patches_per_item[i]; ++p, ++col) {
            fill_patch_column(tt.x_t, p, cfg.patch_frames, fc.Z.col(col).head(pe));
            fill_patch_column(batch[i].m, p, cfg.patch_frames,
                              fc.Z.col(col).segment(pe, pe));
            fill_patch_column(tt.v, p, cfg.patch_frames, targets.col(col));
            fc.SE.col(col) = se;
            fc.cats[col] = batch[i].category;
            col_item[col] = i;
        }
    }

    run_forward(model.params(), cfg, fc);

    LossResult result;
    result.per_item.assign(batch.size(), 0.0);
    MatrixXd dY(pe, total_patches);
    const double n_items = static_cast<double>(batch.size());
    for (int j = 0; j < total_patches; ++j) {
        const std::size_t item = col_item[j];
        const double item_norm = 1.0 / (static_cast<double>(patches_per_item[item]) * pe);
        const VectorXd resid = fc.Y.col(j) - targets.col(j);
        result.per_item[item] += resid.squaredNorm() * item_norm;
        dY.col(j) = (2.0 * item_norm / n_items) * resid;
    }
    result.loss =
        std::accumulate(result.per_item.begin(), result.per_item.end(), 0.0) / n_items;

    result.grad = Eigen::VectorXd::Zero(model.params().size());
    run_backward(model.params(), cfg, fc, dY, result.grad);
    return result;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

// Uniform choice among clip starts whose window overlaps a target span.
int pick_clip_start(const TrainSample& sample, int clip_frames, Rng& rng) {
    const int frames = static_cast<int>(sample.x0.rows());
    const int max_start = frames - clip_frames;
    if (max_start <= 0) return 0;

    std::vector<std::pair<int, int>> ranges;  // inclusive start ranges
    for (const auto& [b, e] : sample.target_frame_spans) {
        const int lo = std::max(0, b - clip_frames + 1);
        const int hi = std::min(max_start, e - 1);
        if (lo <= hi) ranges.emplace_back(lo, hi);
    }
    if (ranges.empty()) return static_cast<int>(rng.uniform_int(0, max_start));

    std::sort(ranges.begin(), ranges.end());
    std::vector<std::pair<int, int>> merged;
    for (const auto& r : ranges) {
        if (!merged.empty() && r.first <= merged.back().second + 1)
            merged.back().second = std::max(merged.back().second, r.second);
        else
            merged.push_back(r);
    }
    long total = 0;
    for (const auto& r : merged) total += r.second - r.first + 1;
    long k = rng.uniform_int(0, total - 1);
    for (const auto& r : merged) {
        const long span = r.second - r.first + 1;
        if (k < span) return r.first + static_cast<int>(k);
        k -= span;
    }
    return merged.back().second;
}

}  // namespace

std::vector<LossRecord> train(TinyDenoiser& model,
                              std::span<const TrainSample> dataset,
                              const TrainConfig& config,
                              const NoiseSchedule& schedule,
                              AdamState& state) {
    if (dataset.empty()) throw std::invalid_argument("empty dataset");
    if (!(config.learning_rate >= 0.0))
        throw std::invalid_argument("learning rate must be nonnegative");

    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;

    const long n_params = model.params().size();
    if (state.m.size() != n_params) {
        state.m = Eigen::VectorXd::Zero(n_params);
        state.v = Eigen::VectorXd::Zero(n_params);
    }

    std::vector<LossRecord> history;
    const int clip = config.clip_frames;
    const std::size_t n = dataset.size();

    for (int epoch = state.epochs_done; epoch < config.epochs; ++epoch) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng(split_seed(config.seed, epoch, 0));
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_int(0, i - 1)]);

        int step_in_epoch = 0;
        for (std::size_t pos = 0; pos < n; pos += config.batch_size, ++step_in_epoch) {
            const std::uint64_t step_seed =
                split_seed(config.seed, epoch, 1 + step_in_epoch);
            Rng clip_rng(split_seed(step_seed, 0));

            std::vector<TrainItem> items;
            const std::size_t end = std::min(pos + config.batch_size, n);
            items.reserve(end - pos);
            for (std::size_t k = pos; k < end; ++k) {
                const TrainSample& s = dataset[order[k]];
                const int frames = static_cast<int>(s.x0.rows());
                const int take = std::min(clip, frames);
                const int start = pick_clip_start(s, take, clip_rng);
                items.push_back({s.x0.middleRows(start, take),
                                 s.m.middleRows(start, take), s.category});
            }

            const LossResult res = loss_and_gradients(
                model, items, schedule, split_seed(step_seed, 1));
            if (!std::isfinite(res.loss))
                throw std::runtime_error(
                    "training diverged: non-finite loss at epoch " +
                    std::to_string(epoch) + " step " + std::to_string(state.step));

            ++state.step;
            state.m = kBeta1 * state.m + (1.0 - kBeta1) * res.grad;
            state.v = (kBeta2 * state.v.array() +
                       (1.0 - kBeta2) * res.grad.array().square())
                          .matrix();
            const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
            const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
            model.params().array() -=
                config.learning_rate *
                ((state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + kEps) +
                 config.weight_decay * model.params().array());

            history.push_back({epoch, state.step, res.loss});
        }
        state.epochs_done = epoch + 1;
    }
    return history;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O
// ---------------------------------------------------------------------------

namespace {

constexpr char kCheckpointMagic[8] = {'D', 'T', 'S', 'E', 'C', 'K', 'P', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("truncated checkpoint");
    return value;
}

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd read_vector(std::istream& in) {
    const auto n = read_pod<std::uint64_t>(in);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("truncated checkpoint");
    return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_pod<std::int32_t>(out, ckpt.arch.patch_frames);
    write_pod<std::int32_t>(out, ckpt.arch.bins);
    write_pod<std::int32_t>(out, ckpt.arch.hidden);
    write_pod<std::int32_t>(out, ckpt.arch.emb_dim);
    write_pod<std::int32_t>(out, ckpt.arch.num_categories);
    write_pod<std::uint64_t>(out, ckpt.config_hash);
    write_pod<std::uint64_t>(out, ckpt.train_seed);
    write_pod<std::int32_t>(out, ckpt.schedule_T);
    write_pod<double>(out, ckpt.beta_start);
    write_pod<double>(out, ckpt.beta_end);
    write_pod<std::uint8_t>(out, ckpt.corrected ? 1 : 0);
    write_pod<double>(out, ckpt.norm_log_min);
    write_pod<double>(out, ckpt.norm_log_max);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.categories.size()));
    for (const std::string& c : ckpt.categories) {
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(c.size()));
        out.write(c.data(), static_cast<std::streamsize>(c.size()));
    }
    write_vector(out, ckpt.params);
    write_vector(out, ckpt.adam.m);
    write_vector(out, ckpt.adam.v);
    write_pod<std::int64_t>(out, ckpt.adam.step);
    write_pod<std::int32_t>(out, ckpt.adam.epochs_done);
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);

    Checkpoint ckpt;
    ckpt.arch.patch_frames = read_pod<std::int32_t>(in);
    ckpt.arch.bins = read_pod<std::int32_t>(in);
    ckpt.arch.hidden = read_pod<std::int32_t>(in);
    ckpt.arch.emb_dim = read_pod<std::int32_t>(in);
    ckpt.arch.num_categories = read_pod<std::int32_t>(in);
    ckpt.config_hash = read_pod<std::uint64_t>(in);
    ckpt.train_seed = read_pod<std::uint64_t>(in);
    ckpt.schedule_T = read_pod<std::int32_t>(in);
    ckpt.beta_start = read_pod<double>(in);
    ckpt.beta_end = read_pod<double>(in);
    ckpt.corrected = read_pod<std::uint8_t>(in) != 0;
    ckpt.norm_log_min = read_pod<double>(in);
    ckpt.norm_log_max = read_pod<double>(in);
    const auto n_cat = read_pod<std::uint32_t>(in);
    ckpt.categories.resize(n_cat);
    for (auto& c : ckpt.categories) {
        const auto len = read_pod<std::uint32_t>(in);
        c.resize(len);
        in.read(c.data(), len);
        if (!in) throw std::runtime_error("truncated checkpoint");
    }
    ckpt.params = read_vector(in);
    ckpt.adam.m = read_vector(in);
    ckpt.adam.v = read_vector(in);
    ckpt.adam.step = read_pod<std::int64_t>(in);
    ckpt.adam.epochs_done = read_pod<std::int32_t>(in);
    return ckpt;
}

}  // namespace dpmtse
