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

#include "dpmtse/diffusion.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "dpmtse/rng.hpp"

namespace dpmtse {

PosteriorStats posterior_stats(const Grid& x0, const Grid& x_t, int t_hi,
                               int t_lo, const NoiseSchedule& schedule) {
    detail::require_same_shape(x0, x_t);
    if (t_lo >= t_hi) throw std::invalid_argument("posterior needs t_lo < t_hi");
    if (t_lo < 0) throw std::invalid_argument("t_lo must be >= 0");

    const double ab_hi = schedule.alpha_bar(t_hi);
    const double ab_lo = schedule.alpha_bar(t_lo);
    if (ab_hi >= 1.0)
        throw std::domain_error("alpha_bar at t_hi == 1: degenerate posterior");

    const double alpha_hl = ab_hi / ab_lo;
    const double beta_hl = 1.0 - alpha_hl;
    const double one_minus_hi = 1.0 - ab_hi;
    const double one_minus_lo = 1.0 - ab_lo;

    const double coef_x0 = std::sqrt(ab_lo) * beta_hl / one_minus_hi;
    const double coef_xt = std::sqrt(alpha_hl) * one_minus_lo / one_minus_hi;

    PosteriorStats out;
    out.mean = coef_x0 * x0 + coef_xt * x_t;
    out.variance = one_minus_lo / one_minus_hi * beta_hl;
    return out;
}

Grid reverse_step(const Grid& x_t, const Grid& v_pred, int t_hi, int t_lo,
                  const NoiseSchedule& schedule, const Grid* noise,
                  std::optional<ClampRange> clamp, NoiseVariance variance) {
    detail::require_same_shape(x_t, v_pred);
    if (t_lo > 0 && noise == nullptr)
        throw std::invalid_argument("intermediate reverse step requires noise");
    if (t_lo == 0 && noise != nullptr)
        throw std::invalid_argument("final reverse step takes no noise");

    const Grid x0 = x0_from_v(v_pred, x_t, t_hi, schedule, clamp);
    PosteriorStats stats = posterior_stats(x0, x_t, t_hi, t_lo, schedule);
    if (t_lo == 0) return std::move(stats.mean);

    double var = stats.variance;
    if (variance == NoiseVariance::kTransitionBeta)
        var = 1.0 - schedule.alpha_bar(t_hi) / schedule.alpha_bar(t_lo);

    detail::require_same_shape(stats.mean, *noise);
    return stats.mean + std::sqrt(var) * (*noise);
}

Grid sample(const Denoiser& denoiser, const Grid& m, int category,
            const StepPlan& plan, const NoiseSchedule& schedule,
            std::uint64_t seed, const SampleOptions& options) {
    if (plan.steps.empty() || plan.steps.front() != schedule.T)
        throw std::invalid_argument("step plan must start at the last timestep");
    if (options.warn_nonzero_terminal && !schedule.terminal_is_zero)
        std::cerr << "warning: sampling from a schedule with nonzero terminal SNR ("
                  << snr(schedule, schedule.T) << ")\n";

    Rng rng(seed);
    Grid x = rng.normal_grid(m.rows(), m.cols());

    const auto& steps = plan.steps;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const int t_hi = steps[i];
        const int t_lo = i + 1 < steps.size() ? steps[i + 1] : 0;
        const Grid v = denoiser.predict_v(x, m, category, t_hi);
        detail::require_same_shape(v, x);
        if (t_lo > 0) {
            const Grid noise = rng.normal_grid(x.rows(), x.cols());
            x = reverse_step(x, v, t_hi, t_lo, schedule, &noise, options.clamp,
                             options.noise_variance);
        } else {
            x = reverse_step(x, v, t_hi, t_lo, schedule, nullptr, options.clamp,
                             options.noise_variance);
        }
    }
    return x;
}

}  // namespace dpmtse
