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

#ifndef DPMTSE_SCHEDULE_HPP
#define DPMTSE_SCHEDULE_HPP

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace dpmtse {

/// Per-step variances and cumulative signal/noise coefficients of a
/// diffusion forward process. Arrays are stored 0-based but the public
/// accessors take timesteps t in [1, T]; alpha_bar(0) is defined as 1.
///
/// Immutable after construction; all operations on it are pure.
struct NoiseSchedule {
    int T = 0;
    Eigen::ArrayXd betas;        // beta_t, size T
    Eigen::ArrayXd alphas;       // alpha_t = 1 - beta_t
    Eigen::ArrayXd alpha_bars;   // cumulative product of alphas
    Eigen::ArrayXd sqrt_alpha_bars;
    Eigen::ArrayXd sqrt_one_minus_alpha_bars;
    bool terminal_is_zero = false;

    double beta(int t) const { return betas(check(t) - 1); }
    double alpha(int t) const { return alphas(check(t) - 1); }
    double alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bars(check(t) - 1); }
    double sqrt_alpha_bar(int t) const {
        return t == 0 ? 1.0 : sqrt_alpha_bars(check(t) - 1);
    }
    double sqrt_one_minus_alpha_bar(int t) const {
        return t == 0 ? 0.0 : sqrt_one_minus_alpha_bars(check(t) - 1);
    }

  private:
    int check(int t) const;
};

/// Descending subsequence of timesteps visited at inference. The first
/// entry is always T; the final reverse transition targets the clean
/// estimate at t = 0.
struct StepPlan {
    std::vector<int> steps;
    bool includes_zero_endpoint = true;
};

/// Linearly spaced beta_1..beta_T inclusive; alpha_bars as the running
/// product. Throws std::invalid_argument on T < 1, variances outside
/// (0, 1) or beta_start > beta_end.
NoiseSchedule build_linear_schedule(int T, double beta_start, double beta_end);

/// alpha_bar_t / (1 - alpha_bar_t); exactly 0 at a zero terminal.
/// Throws std::domain_error when alpha_bar_t == 1.
double snr(const NoiseSchedule& schedule, int t);

/// Enforces a zero terminal SNR: keeps sqrt(alpha_bar_1), sends
/// sqrt(alpha_bar_T) to zero, linearly rescales the rest, and re-derives
/// alphas/betas from the new cumulative products (beta_T becomes exactly 1).
NoiseSchedule rescale_zero_terminal_snr(const NoiseSchedule& schedule);

/// Trailing uniform spacing anchored at T: steps[i] = round(T - i*T/S),
/// clamped to [1, T], duplicates dropped. steps[0] == T always.
StepPlan plan_inference_steps(const NoiseSchedule& schedule, int S);

/// CSV report, one row per timestep:
/// t,beta,alpha_bar,sqrt_alpha_bar,snr,in_plan (full decimal precision).
void dump_schedule(const NoiseSchedule& schedule, const StepPlan& plan,
                   std::ostream& out);

}  // namespace dpmtse

#endif  // DPMTSE_SCHEDULE_HPP
