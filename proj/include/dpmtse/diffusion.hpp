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

#ifndef DPMTSE_DIFFUSION_HPP
#define DPMTSE_DIFFUSION_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "dpmtse/schedule.hpp"

namespace dpmtse {

using Grid = Eigen::ArrayXXd;

/// Velocity predictor: v given the noisy target x_t, the mixture condition
/// m, the category token c, and the timestep t. Implementations must return
/// a grid of the same shape as x_t and be pure (safe to share).
class Denoiser {
  public:
    virtual ~Denoiser() = default;
    virtual Grid predict_v(const Grid& x_t, const Grid& m, int category,
                           int t) const = 0;
};

namespace detail {

template <typename A, typename B>
void require_same_shape(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("grid shape mismatch");
}

}  // namespace detail

/// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps.
template <typename A, typename B>
typename A::PlainObject forward_sample(const Eigen::ArrayBase<A>& x0,
                                       int t,
                                       const Eigen::ArrayBase<B>& eps,
                                       const NoiseSchedule& schedule) {
    detail::require_same_shape(x0, eps);
    return schedule.sqrt_alpha_bar(t) * x0 +
           schedule.sqrt_one_minus_alpha_bar(t) * eps;
}

/// v = sqrt(alpha_bar_t) eps - sqrt(1 - alpha_bar_t) x0. At a zero
/// terminal this reduces exactly to -x0.
template <typename A, typename B>
typename A::PlainObject v_target(const Eigen::ArrayBase<A>& x0,
                                 const Eigen::ArrayBase<B>& eps,
                                 int t,
                                 const NoiseSchedule& schedule) {
    detail::require_same_shape(x0, eps);
    return schedule.sqrt_alpha_bar(t) * eps -
           schedule.sqrt_one_minus_alpha_bar(t) * x0;
}

/// eps = sqrt(alpha_bar_t) v + sqrt(1 - alpha_bar_t) x_t.
template <typename A, typename B>
typename A::PlainObject eps_from_v(const Eigen::ArrayBase<A>& v,
                                   const Eigen::ArrayBase<B>& x_t,
                                   int t,
                                   const NoiseSchedule& schedule) {
    detail::require_same_shape(v, x_t);
    return schedule.sqrt_alpha_bar(t) * v +
           schedule.sqrt_one_minus_alpha_bar(t) * x_t;
}

/// Elementwise clipping range for x0 estimates during sampling.
struct ClampRange {
    double lo;
    double hi;
};

/// Default clip for normalized log-mel grids: data lives in [-1, 1] with
/// 20% headroom.
inline constexpr ClampRange kMelClamp{-1.2, 1.2};

/// x0 = sqrt(alpha_bar_t) x_t - sqrt(1 - alpha_bar_t) v, optionally clipped.
template <typename A, typename B>
typename A::PlainObject x0_from_v(const Eigen::ArrayBase<A>& v,
                                  const Eigen::ArrayBase<B>& x_t,
                                  int t,
                                  const NoiseSchedule& schedule,
                                  std::optional<ClampRange> clamp = std::nullopt) {
    detail::require_same_shape(v, x_t);
    typename A::PlainObject x0 = schedule.sqrt_alpha_bar(t) * x_t -
                                 schedule.sqrt_one_minus_alpha_bar(t) * v;
    if (clamp) x0 = x0.min(clamp->hi).max(clamp->lo);
    return x0;
}

/// Mean and (scalar) variance of the reverse transition q(x_lo | x_hi, x0).
struct PosteriorStats {
    Grid mean;
    double variance = 0.0;
};

/// Generalized skip-step posterior with alpha_hl = alpha_bar_hi/alpha_bar_lo.
/// Reduces to the adjacent-step posterior at stride 1; at t_lo = 0 the
/// mean is exactly x0 and the variance 0. Throws when alpha_bar_hi == 1
/// or t_lo >= t_hi.
PosteriorStats posterior_stats(const Grid& x0, const Grid& x_t, int t_hi,
                               int t_lo, const NoiseSchedule& schedule);

/// Noise scale for intermediate ancestral steps. The posterior variance
/// beta_tilde is the default; the transition variance beta_hl (its upper
/// bound, exact for unit-variance Gaussian data) is kept for comparison.
enum class NoiseVariance {
    kPosteriorBetaTilde,
    kTransitionBeta,
};

/// One ancestral step: x0 via x0_from_v (clipped), posterior mean, plus
/// sqrt(variance) * noise when t_lo > 0. noise must be absent iff t_lo == 0.
Grid reverse_step(const Grid& x_t, const Grid& v_pred, int t_hi, int t_lo,
                  const NoiseSchedule& schedule, const Grid* noise,
                  std::optional<ClampRange> clamp = kMelClamp,
                  NoiseVariance variance = NoiseVariance::kPosteriorBetaTilde);

struct SampleOptions {
    std::optional<ClampRange> clamp = kMelClamp;
    NoiseVariance noise_variance = NoiseVariance::kPosteriorBetaTilde;
    /// Emits a warning to stderr when sampling from a schedule whose
    /// terminal SNR is nonzero.
    bool warn_nonzero_terminal = true;
};

/// Ancestral sampling along the plan, starting from x_T ~ N(0, I) drawn
/// from a generator seeded with `seed`. Noise order is fixed: the initial
/// grid first, then one grid per intermediate step. Returns the final x0
/// estimate; deterministic given (seed, denoiser, m, c).
Grid sample(const Denoiser& denoiser, const Grid& m, int category,
            const StepPlan& plan, const NoiseSchedule& schedule,
            std::uint64_t seed, const SampleOptions& options = {});

}  // namespace dpmtse

#endif  // DPMTSE_DIFFUSION_HPP
