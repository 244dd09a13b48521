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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "dpmtse/denoiser.hpp"
#include "dpmtse/diffusion.hpp"
#include "dpmtse/rng.hpp"
#include "dpmtse/schedule.hpp"

using namespace dpmtse;

namespace {

NoiseSchedule corrected_default() {
    return rescale_zero_terminal_snr(build_linear_schedule(1000, 1e-4, 0.02));
}

TinyDenoiserConfig tiny_config() {
    TinyDenoiserConfig cfg;
    cfg.patch_frames = 4;
    cfg.bins = 6;
    cfg.hidden = 8;
    cfg.emb_dim = 4;
    cfg.num_categories = 3;
    return cfg;
}

std::vector<TrainItem> toy_batch(int items, const TinyDenoiserConfig& cfg,
                                 std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TrainItem> batch;
    for (int i = 0; i < items; ++i) {
        TrainItem item;
        item.x0 = rng.normal_grid(2 * cfg.patch_frames, cfg.bins);
        item.m = rng.normal_grid(2 * cfg.patch_frames, cfg.bins);
        item.category = i % cfg.num_categories;
        batch.push_back(std::move(item));
    }
    return batch;
}

}  // namespace

TEST_CASE("sinusoidal embedding") {
    const Eigen::VectorXd at0 = sinusoidal_embedding(0, 8);
    for (int i = 0; i < 4; ++i) {
        CHECK(at0(i) == 0.0);
        CHECK(at0(4 + i) == 1.0);
    }

    const Eigen::VectorXd e = sinusoidal_embedding(10000, 2);
    CHECK(e(0) == doctest::Approx(std::sin(10000.0)).epsilon(1e-15));
    CHECK(e(1) == doctest::Approx(std::cos(10000.0)).epsilon(1e-15));

    for (int t : {1, 17, 999}) {
        const Eigen::VectorXd emb = sinusoidal_embedding(t, 64);
        CHECK(emb.maxCoeff() <= 1.0);
        CHECK(emb.minCoeff() >= -1.0);
    }

    CHECK_THROWS_AS(sinusoidal_embedding(1, 3), std::invalid_argument);
    CHECK_THROWS_AS(sinusoidal_embedding(1, 0), std::invalid_argument);
}

TEST_CASE("sinusoidal embeddings separate all timesteps at dim 128") {
    const int dim = 128;
    std::vector<Eigen::VectorXd> embs;
    embs.reserve(1000);
    for (int t = 1; t <= 1000; ++t) embs.push_back(sinusoidal_embedding(t, dim));
    double min_linf = 1e300;
    for (int a = 0; a < 1000; ++a)
        for (int b = a + 1; b < 1000; ++b) {
            const double d = (embs[a] - embs[b]).lpNorm<Eigen::Infinity>();
            min_linf = std::min(min_linf, d);
        }
    CHECK(min_linf > 0.0);
}

TEST_CASE("gaussian oracle closed forms") {
    const NoiseSchedule r = corrected_default();

    SUBCASE("point mass ignores the observation") {
        const GaussianOracleDenoiser o(r, Grid::Constant(1, 4, 2.5), 0.0);
        Rng rng(5);
        const Grid xt = rng.normal_grid(1, 4);
        CHECK((o.posterior_x0_mean(xt, 500) == 2.5).all());
    }

    SUBCASE("terminal v is the negated data mean") {
        const GaussianOracleDenoiser o(r, Grid::Constant(1, 4, 1.75), 1.3);
        Rng rng(6);
        const Grid xt = rng.normal_grid(1, 4);
        const Grid v = o.predict_v(xt, Grid::Zero(1, 4), 0, 1000);
        CHECK((v == -1.75).all());  // exact at alpha_bar = 0
    }

    SUBCASE("half signal, unit prior") {
        const NoiseSchedule half = build_linear_schedule(1, 0.5, 0.5);
        const GaussianOracleDenoiser o(half, Grid::Zero(1, 3), 1.0);
        Rng rng(7);
        const Grid xt = rng.normal_grid(1, 3);
        const Grid ex0 = o.posterior_x0_mean(xt, 1);
        CHECK(((ex0 - 0.7071067811865476 * xt).abs() < 1e-12).all());
    }

    SUBCASE("matches numerical integration of the posterior") {
        const GaussianOracleDenoiser o(r, Grid::Constant(1, 1, 0.6), 1.4);
        for (int t : {100, 400, 850}) {
            const double a = r.sqrt_alpha_bar(t);
            const double b2 = 1.0 - r.alpha_bar(t);
            const Grid xt = Grid::Constant(1, 1, 0.9);
            // Brute-force E[x0 | x_t] on a 1-D grid.
            const int n = 40001;
            const double lo = 0.6 - 10 * 1.4, hi = 0.6 + 10 * 1.4;
            double num = 0.0, den = 0.0;
            for (int i = 0; i < n; ++i) {
                const double x0 = lo + (hi - lo) * i / (n - 1);
                const double like =
                    std::exp(-0.5 * (0.9 - a * x0) * (0.9 - a * x0) / b2);
                const double prior =
                    std::exp(-0.5 * (x0 - 0.6) * (x0 - 0.6) / (1.4 * 1.4));
                num += x0 * like * prior;
                den += like * prior;
            }
            CHECK(o.posterior_x0_mean(xt, t)(0, 0) ==
                  doctest::Approx(num / den).epsilon(1e-4));
        }
    }
}

TEST_CASE("tiny denoiser forward basics") {
    const TinyDenoiserConfig cfg = tiny_config();
    TinyDenoiser model(cfg);
    Rng rng(21);
    const Grid xt = rng.normal_grid(8, 6);
    const Grid m = rng.normal_grid(8, 6);

    SUBCASE("zero parameters give zero output") {
        CHECK((model.predict_v(xt, m, 1, 10) == 0.0).all());
    }

    SUBCASE("deterministic across calls") {
        model.init_params(3);
        const Grid a = model.predict_v(xt, m, 2, 17);
        const Grid b = model.predict_v(xt, m, 2, 17);
        CHECK((a == b).all());
    }

    SUBCASE("input perturbations are Lipschitz-bounded") {
        model.init_params(3);
        const Grid base = model.predict_v(xt, m, 0, 5);
        Grid bumped = xt;
        const double delta = 1e-3;
        bumped(3, 2) += delta;
        const Grid out = model.predict_v(bumped, m, 0, 5);

        // Operator-norm bound via Frobenius norms; silu' is below 1.1.
        const TinyDenoiserConfig& c = model.config();
        const auto& th = model.params();
        const long w1 = static_cast<long>(c.w1_size());
        const long w2 = static_cast<long>(c.w2_size());
        const long w3 = static_cast<long>(c.w3_size());
        const double n1 = th.segment(0, w1).norm();
        const double n2 = th.segment(w1 + c.hidden, w2).norm();
        const double n3 = th.segment(w1 + c.hidden + w2 + c.hidden, w3).norm();
        const double bound = n1 * 1.1 * n2 * 1.1 * n3 * delta;
        CHECK((out - base).matrix().norm() <= bound);
    }

    SUBCASE("argument validation") {
        CHECK_THROWS_AS(model.predict_v(xt, m, 99, 10), std::out_of_range);
        CHECK_THROWS_AS(model.predict_v(xt, Grid::Zero(4, 6), 0, 10),
                        std::invalid_argument);
        CHECK_THROWS_AS(model.predict_v(Grid::Zero(7, 6), Grid::Zero(7, 6), 0, 10),
                        std::invalid_argument);
    }
}

TEST_CASE("loss of a perfect predictor is zero") {
    const NoiseSchedule r = corrected_default();
    Rng rng(30);
    const Grid x0 = rng.normal_grid(8, 6);
    const TrainingTarget tt = make_training_target(x0, r, 717);
    // MSE lower bound: prediction equal to the target leaves nothing.
    CHECK((tt.v - tt.v).square().mean() == 0.0);
    // And the draw itself is consistent with the forward process.
    const Grid eps = eps_from_v(tt.v, tt.x_t, tt.t, r);
    CHECK(((forward_sample(x0, tt.t, eps, r) - tt.x_t).abs() < 1e-9).all());
}

TEST_CASE("per-item losses replay exactly for a fixed seed") {
    const NoiseSchedule r = corrected_default();
    const TinyDenoiserConfig cfg = tiny_config();
    TinyDenoiser model(cfg);
    model.init_params(4);

    auto batch = toy_batch(3, cfg, 77);
    batch.push_back(batch[0]);  // duplicate item

    const LossResult a = loss_and_gradients(model, batch, r, 42);
    const LossResult b = loss_and_gradients(model, batch, r, 42);
    REQUIRE(a.per_item.size() == 4);
    for (std::size_t i = 0; i < a.per_item.size(); ++i)
        CHECK(a.per_item[i] == b.per_item[i]);
    CHECK(a.loss == b.loss);
    CHECK((a.grad == b.grad).all());

    CHECK_THROWS_AS(loss_and_gradients(model, {}, r, 1), std::invalid_argument);
}

TEST_CASE("hand-rolled gradients match central finite differences") {
    const NoiseSchedule r = corrected_default();
    TinyDenoiserConfig cfg;
    cfg.patch_frames = 2;
    cfg.bins = 3;
    cfg.hidden = 5;
    cfg.emb_dim = 4;
    cfg.num_categories = 2;
    TinyDenoiser model(cfg);
    model.init_params(9);

    const auto batch = toy_batch(2, cfg, 55);
    const std::uint64_t seed = 1234;
    const LossResult res = loss_and_gradients(model, batch, r, seed);

    Rng pick(77);
    const double h = 1e-4;
    int checked = 0;
    while (checked < 60) {
        const long idx = pick.uniform_int(0, model.params().size() - 1);
        const double saved = model.params()(idx);
        model.params()(idx) = saved + h;
        const double up = loss_and_gradients(model, batch, r, seed).loss;
        model.params()(idx) = saved - h;
        const double down = loss_and_gradients(model, batch, r, seed).loss;
        model.params()(idx) = saved;
        const double fd = (up - down) / (2 * h);
        const double an = res.grad(idx);
        const double rel =
            std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
        CHECK(rel < 1e-4);
        ++checked;
    }
}

TEST_CASE("training") {
    const NoiseSchedule r = corrected_default();
    const TinyDenoiserConfig cfg = tiny_config();

    std::vector<TrainSample> dataset;
    Rng rng(61);
    for (int i = 0; i < 8; ++i) {
        TrainSample s;
        s.x0 = rng.normal_grid(8, cfg.bins) * 0.5;
        s.m = s.x0 + 0.1 * rng.normal_grid(8, cfg.bins);
        s.category = i % cfg.num_categories;
        s.target_frame_spans = {{0, 8}};
        dataset.push_back(std::move(s));
    }

    SUBCASE("zero learning rate leaves parameters unchanged") {
        TinyDenoiser model(cfg);
        model.init_params(5);
        const Eigen::VectorXd before = model.params();
        TrainConfig tc;
        tc.learning_rate = 0.0;
        tc.epochs = 3;
        tc.batch_size = 4;
        tc.clip_frames = 8;
        tc.seed = 11;
        AdamState state;
        train(model, dataset, tc, r, state);
        CHECK((model.params() == before).all());
    }

    SUBCASE("memorizes a toy dataset") {
        TinyDenoiser model(cfg);
        model.init_params(5);
        TrainConfig tc;
        tc.learning_rate = 3e-3;
        tc.weight_decay = 1e-4;
        tc.epochs = 2000;  // one step per epoch with batch 8
        tc.batch_size = 8;
        tc.clip_frames = 8;
        tc.seed = 11;
        AdamState state;
        const auto history = train(model, dataset, tc, r, state);
        REQUIRE(history.size() >= 2000);
        const double first = history.front().loss;
        // Mean loss over the final 50 steps to smooth the per-step noise.
        double last = 0.0;
        for (std::size_t i = history.size() - 50; i < history.size(); ++i)
            last += history[i].loss;
        last /= 50.0;
        CHECK(first / last >= 10.0);
    }

    SUBCASE("identical seeds give identical histories and parameters") {
        TrainConfig tc;
        tc.learning_rate = 1e-3;
        tc.epochs = 20;
        tc.batch_size = 4;
        tc.clip_frames = 8;
        tc.seed = 99;

        TinyDenoiser m1(cfg), m2(cfg);
        m1.init_params(5);
        m2.init_params(5);
        AdamState s1, s2;
        const auto h1 = train(m1, dataset, tc, r, s1);
        const auto h2 = train(m2, dataset, tc, r, s2);
        REQUIRE(h1.size() == h2.size());
        for (std::size_t i = 0; i < h1.size(); ++i) CHECK(h1[i].loss == h2[i].loss);
        CHECK((m1.params() == m2.params()).all());
    }

    SUBCASE("resume replays an uninterrupted run") {
        TrainConfig tc;
        tc.learning_rate = 1e-3;
        tc.epochs = 10;
        tc.batch_size = 4;
        tc.clip_frames = 8;
        tc.seed = 7;

        TinyDenoiser full(cfg);
        full.init_params(5);
        AdamState sf;
        train(full, dataset, tc, r, sf);

        TinyDenoiser part(cfg);
        part.init_params(5);
        AdamState sp;
        TrainConfig half = tc;
        half.epochs = 4;
        train(part, dataset, half, r, sp);
        train(part, dataset, tc, r, sp);  // continues at epoch 4

        CHECK((full.params() == part.params()).all());
        CHECK(sf.step == sp.step);
    }
}

TEST_CASE("checkpoint round trip") {
    Checkpoint ckpt;
    ckpt.arch = tiny_config();
    ckpt.params = Eigen::VectorXd::LinSpaced(ckpt.arch.param_count(), -1.0, 1.0);
    ckpt.adam.m = Eigen::VectorXd::Constant(ckpt.arch.param_count(), 0.25);
    ckpt.adam.v = Eigen::VectorXd::Constant(ckpt.arch.param_count(), 0.5);
    ckpt.adam.step = 123;
    ckpt.adam.epochs_done = 7;
    ckpt.train_seed = 42;
    ckpt.config_hash = 0xDEADBEEF12345678ULL;
    ckpt.schedule_T = 100;
    ckpt.beta_start = 1e-4;
    ckpt.beta_end = 0.06;
    ckpt.corrected = true;
    ckpt.norm_log_min = -11.5;
    ckpt.norm_log_max = 3.25;
    ckpt.categories = {"pure_tone", "noise_burst"};

    const std::string path =
        (std::filesystem::temp_directory_path() / "dpmtse_test_ckpt.bin").string();
    save_checkpoint(ckpt, path);
    const Checkpoint back = load_checkpoint(path);
    std::filesystem::remove(path);

    CHECK(back.arch.patch_frames == ckpt.arch.patch_frames);
    CHECK(back.arch.hidden == ckpt.arch.hidden);
    CHECK((back.params == ckpt.params).all());
    CHECK((back.adam.m == ckpt.adam.m).all());
    CHECK(back.adam.step == 123);
    CHECK(back.adam.epochs_done == 7);
    CHECK(back.config_hash == ckpt.config_hash);
    CHECK(back.beta_end == 0.06);
    CHECK(back.corrected);
    CHECK(back.categories == ckpt.categories);
    CHECK(back.norm_log_max == 3.25);
}
