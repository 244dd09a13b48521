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

#ifndef DPMTSE_DENOISER_HPP
#define DPMTSE_DENOISER_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpmtse/diffusion.hpp"
#include "dpmtse/rng.hpp"
#include "dpmtse/schedule.hpp"

namespace dpmtse {

/// Even-dimensional sinusoidal position embedding of a timestep:
/// component i < dim/2 is sin(t / 10000^(2i/dim)), the upper half the
/// matching cosines.
Eigen::VectorXd sinusoidal_embedding(double t, int dim);

/// Closed-form velocity predictor for data distributed N(mu0, sigma0^2 I).
/// Validates the sampler against an analytically known posterior.
class GaussianOracleDenoiser : public Denoiser {
  public:
    GaussianOracleDenoiser(const NoiseSchedule& schedule, Grid mu0, double sigma0);

    Grid predict_v(const Grid& x_t, const Grid& m, int category,
                   int t) const override;

    /// E[x0 | x_t] under the Gaussian prior; exposed for oracle-exactness
    /// checks against numerical integration.
    Grid posterior_x0_mean(const Grid& x_t, int t) const;

  private:
    const NoiseSchedule* schedule_;
    Grid mu0_;
    double sigma0_;
};

/// Desk-scale substitute for the paper-size U-Net: a 3-layer fully
/// connected network over fixed-size grid patches, with a learned
/// projection of the sinusoidal timestep embedding and a learned
/// category embedding table.
struct TinyDenoiserConfig {
    int patch_frames = 16;
    int bins = 64;
    int hidden = 512;
    int emb_dim = 256;
    int num_categories = 8;

    int patch_elems() const { return patch_frames * bins; }
    int input_dim() const { return 2 * patch_elems() + 2 * emb_dim; }

    // Flat parameter layout: W1, b1, W2, b2, W3, b3, Wt, bt, Ctable.
    int w1_size() const { return hidden * input_dim(); }
    int w2_size() const { return hidden * hidden; }
    int w3_size() const { return patch_elems() * hidden; }
    int wt_size() const { return emb_dim * emb_dim; }
    int ctable_size() const { return num_categories * emb_dim; }
    long param_count() const {
        return static_cast<long>(w1_size()) + hidden + w2_size() + hidden +
               w3_size() + patch_elems() + wt_size() + emb_dim + ctable_size();
    }
};

class TinyDenoiser : public Denoiser {
  public:
    explicit TinyDenoiser(TinyDenoiserConfig config);

    /// Gaussian fan-in initialization; biases zero.
    void init_params(std::uint64_t seed);

    const TinyDenoiserConfig& config() const { return config_; }
    Eigen::VectorXd& params() { return theta_; }
    const Eigen::VectorXd& params() const { return theta_; }

    /// Deterministic forward pass over a grid whose frame count is a
    /// multiple of patch_frames. Throws on shape mismatch or a category
    /// outside the embedding table.
    Grid predict_v(const Grid& x_t, const Grid& m, int category,
                   int t) const override;

  private:
    friend struct TinyBackprop;
    TinyDenoiserConfig config_;
    Eigen::VectorXd theta_;
};

/// One training example: clean target grid, mixture condition, category.
struct TrainItem {
    Grid x0;
    Grid m;
    int category = 0;
};

struct LossResult {
    double loss = 0.0;
    Eigen::VectorXd grad;
    std::vector<double> per_item;
};

/// Draws (t, eps) per item from seeds split off `seed` by item index,
/// forms x_t and the velocity target, and returns the batch-mean squared
/// error with hand-derived gradients for every parameter.
LossResult loss_and_gradients(const TinyDenoiser& model,
                              std::span<const TrainItem> batch,
                              const NoiseSchedule& schedule,
                              std::uint64_t seed);

/// The (t, eps, x_t, v) draw used by the training loss, exposed so tests
/// can evaluate the loss of an arbitrary predictor.
struct TrainingTarget {
    int t = 0;
    Grid x_t;
    Grid v;
};
TrainingTarget make_training_target(const Grid& x0, const NoiseSchedule& schedule,
                                    std::uint64_t seed);

struct TrainConfig {
    double learning_rate = 1e-4;
    double weight_decay = 1e-4;
    int batch_size = 8;
    int epochs = 20;
    int clip_frames = 64;
    std::uint64_t seed = 0;
};

/// Full-length sample from which clips are drawn each step; spans mark
/// target-active frames so every clip contains part of the target sound.
struct TrainSample {
    Grid x0;
    Grid m;
    int category = 0;
    std::vector<std::pair<int, int>> target_frame_spans;  // [begin, end)
};

struct LossRecord {
    int epoch = 0;
    long step = 0;
    double loss = 0.0;
};

/// Adam state carried across resumes.
struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long step = 0;
    int epochs_done = 0;
};

/// Adam (beta1 0.9, beta2 0.999, eps 1e-8) with decoupled weight decay.
/// All randomness is derived statelessly from (seed, epoch, step), so a
/// resumed run replays exactly like an uninterrupted one. Throws on a
/// non-finite loss.
std::vector<LossRecord> train(TinyDenoiser& model,
                              std::span<const TrainSample> dataset,
                              const TrainConfig& config,
                              const NoiseSchedule& schedule,
                              AdamState& state);

/// Trained-model archive: versioned binary, explicit shape header,
/// little-endian 64-bit floats. Carries the pipeline context needed to
/// reproduce the grids it was trained on.
struct Checkpoint {
    TinyDenoiserConfig arch;
    Eigen::VectorXd params;
    AdamState adam;
    std::uint64_t train_seed = 0;
    std::uint64_t config_hash = 0;
    int schedule_T = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    bool corrected = true;
    double norm_log_min = 0.0;
    double norm_log_max = 0.0;
    std::vector<std::string> categories;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dpmtse

#endif  // DPMTSE_DENOISER_HPP
