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

#include "dpmtse/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dpmtse {

int NoiseSchedule::check(int t) const {
    if (t < 1 || t > T)
        throw std::out_of_range("timestep " + std::to_string(t) +
                                " outside [1, " + std::to_string(T) + "]");
    return t;
}

namespace {

void finish_from_alpha_bars(NoiseSchedule& s) {
    s.sqrt_alpha_bars = s.alpha_bars.sqrt();
    s.sqrt_one_minus_alpha_bars = (1.0 - s.alpha_bars).sqrt();
}

}  // namespace

NoiseSchedule build_linear_schedule(int T, double beta_start, double beta_end) {
    if (T < 1) throw std::invalid_argument("step count must be positive");
    if (!(beta_start > 0.0) || !(beta_end < 1.0))
        throw std::invalid_argument("variances must lie in (0, 1)");
    if (beta_start > beta_end)
        throw std::invalid_argument("beta_start must not exceed beta_end");

    NoiseSchedule s;
    s.T = T;
    if (T == 1)
        s.betas = Eigen::ArrayXd::Constant(1, beta_start);
    else
        s.betas = Eigen::ArrayXd::LinSpaced(T, beta_start, beta_end);
    s.alphas = 1.0 - s.betas;
    s.alpha_bars.resize(T);
    double prod = 1.0;
    for (int i = 0; i < T; ++i) {
        prod *= s.alphas(i);
        s.alpha_bars(i) = prod;
    }
    finish_from_alpha_bars(s);
    s.terminal_is_zero = false;
    return s;
}

double snr(const NoiseSchedule& schedule, int t) {
    const double ab = schedule.alpha_bar(t);
    if (ab >= 1.0) throw std::domain_error("alpha_bar == 1: SNR undefined");
    return ab == 0.0 ? 0.0 : ab / (1.0 - ab);
}

NoiseSchedule rescale_zero_terminal_snr(const NoiseSchedule& schedule) {
    if (schedule.T < 2)
        throw std::invalid_argument("rescale needs at least two steps");
    const Eigen::ArrayXd& s = schedule.sqrt_alpha_bars;
    const double s1 = s(0);
    const double sT = s(schedule.T - 1);
    if (!(s1 > sT))
        throw std::invalid_argument("degenerate schedule: sqrt(alpha_bar) not decreasing");

    NoiseSchedule out;
    out.T = schedule.T;
    out.sqrt_alpha_bars.resize(out.T);
    // Ratio first so that t = 1 maps to exactly s1 and t = T to exactly 0.
    for (int i = 0; i < out.T; ++i)
        out.sqrt_alpha_bars(i) = s1 * ((s(i) - sT) / (s1 - sT));
    out.alpha_bars = out.sqrt_alpha_bars.square();
    out.sqrt_one_minus_alpha_bars = (1.0 - out.alpha_bars).sqrt();

    // Back-derive per-step quantities: alpha_t = alpha_bar_t / alpha_bar_{t-1}.
    out.alphas.resize(out.T);
    out.betas.resize(out.T);
    double prev = 1.0;
    for (int i = 0; i < out.T; ++i) {
        out.alphas(i) = out.alpha_bars(i) / prev;
        out.betas(i) = 1.0 - out.alphas(i);
        prev = out.alpha_bars(i);
    }
    out.terminal_is_zero = true;
    return out;
}

StepPlan plan_inference_steps(const NoiseSchedule& schedule, int S) {
    if (S < 1) throw std::invalid_argument("inference step count must be positive");
    if (S > schedule.T)
        throw std::invalid_argument("inference steps exceed diffusion steps");

    StepPlan plan;
    plan.steps.reserve(S);
    const double stride = static_cast<double>(schedule.T) / S;
    for (int i = 0; i < S; ++i) {
        int t = static_cast<int>(std::llround(schedule.T - i * stride));
        t = std::clamp(t, 1, schedule.T);
        if (plan.steps.empty() || t < plan.steps.back()) plan.steps.push_back(t);
    }
    plan.steps.front() = schedule.T;
    return plan;
}

void dump_schedule(const NoiseSchedule& schedule, const StepPlan& plan,
                   std::ostream& out) {
    std::vector<bool> in_plan(schedule.T + 1, false);
    for (int t : plan.steps) in_plan[t] = true;

    const auto prev = out.precision(17);
    out << "t,beta,alpha_bar,sqrt_alpha_bar,snr,in_plan\n";
    for (int t = 1; t <= schedule.T; ++t) {
        out << t << ',' << schedule.beta(t) << ',' << schedule.alpha_bar(t) << ','
            << schedule.sqrt_alpha_bar(t) << ',' << snr(schedule, t) << ','
            << (in_plan[t] ? 1 : 0) << '\n';
    }
    out.precision(prev);
}

}  // namespace dpmtse
