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

#include "dpmtse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dpmtse {

long RegionMask::count_active() const {
    return std::count(active.begin(), active.end(), true);
}

long RegionMask::count_inactive() const {
    return static_cast<long>(active.size()) - count_active();
}

RegionMask make_region_mask(std::span<const Region> regions, long n_frames,
                            const MelConfig& config) {
    RegionMask mask;
    mask.active.assign(n_frames, false);
    const long half = config.window / 2;
    for (long f = 0; f < n_frames; ++f) {
        const long lo = f * config.hop - half;
        const long hi = f * config.hop + half;
        for (const Region& r : regions) {
            if (lo < r.end && hi > r.begin) {
                mask.active[f] = true;
                break;
            }
        }
    }
    return mask;
}

double si_sdr(const Waveform& estimate, const Waveform& reference) {
    if (estimate.samples.size() != reference.samples.size())
        throw std::invalid_argument("si_sdr length mismatch");
    const double ref_energy = reference.samples.square().sum();
    if (ref_energy <= 0.0) throw std::invalid_argument("zero reference");

    const double alpha = (estimate.samples * reference.samples).sum() / ref_energy;
    const double target_energy = alpha * alpha * ref_energy;
    const double residual_energy =
        (estimate.samples - alpha * reference.samples).square().sum();

    if (residual_energy <= target_energy * 1e-10) return 100.0;
    if (target_energy <= residual_energy * 1e-10) return -100.0;
    return std::clamp(10.0 * std::log10(target_energy / residual_energy),
                      -100.0, 100.0);
}

namespace {

double masked_mse(const MelGrid& a, const MelGrid& b, const RegionMask& mask,
                  bool want_active) {
    if (static_cast<long>(mask.active.size()) != a.frames())
        throw std::invalid_argument("mask length does not match the grid");
    double sum = 0.0;
    long frames = 0;
    for (long f = 0; f < a.frames(); ++f) {
        if (mask.active[f] != want_active) continue;
        sum += (a.values.row(f) - b.values.row(f)).square().sum();
        ++frames;
    }
    if (frames == 0) throw std::invalid_argument("mask selects no frames");
    return sum / (static_cast<double>(frames) * a.bins());
}

}  // namespace

double log_mel_distance(const MelGrid& estimate, const MelGrid& reference,
                        const RegionMask* mask) {
    if (estimate.frames() != reference.frames() ||
        estimate.bins() != reference.bins())
        throw std::invalid_argument("grid shape mismatch");
    if (mask == nullptr)
        return (estimate.values - reference.values).square().mean();
    return masked_mse(estimate, reference, *mask, true);
}

double purity_score(const MelGrid& estimate, const RegionMask& mask,
                    double silence_floor) {
    if (static_cast<long>(mask.active.size()) != estimate.frames())
        throw std::invalid_argument("mask length does not match the grid");
    if (mask.count_inactive() == 0)
        throw std::invalid_argument("purity needs at least one non-target frame");
    double sum = 0.0;
    long frames = 0;
    for (long f = 0; f < estimate.frames(); ++f) {
        if (mask.active[f]) continue;
        sum += (estimate.values.row(f) - silence_floor).max(0.0).square().sum();
        ++frames;
    }
    return sum / (static_cast<double>(frames) * estimate.bins());
}

double extraction_score(const MelGrid& estimate, const MelGrid& reference,
                        const RegionMask& mask) {
    if (estimate.frames() != reference.frames() ||
        estimate.bins() != reference.bins())
        throw std::invalid_argument("grid shape mismatch");
    if (mask.count_active() == 0)
        throw std::invalid_argument("extraction needs at least one target frame");
    return masked_mse(estimate, reference, mask, true);
}

Aggregate aggregate(std::span<const double> values) {
    Aggregate agg;
    agg.n = static_cast<long>(values.size());
    if (agg.n == 0) return agg;
    double sum = 0.0;
    for (double v : values) sum += v;
    agg.mean = sum / agg.n;
    if (agg.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
        const double stderr_ = std::sqrt(ss / (agg.n - 1)) / std::sqrt(agg.n);
        agg.ci95 = 1.96 * stderr_;
    }
    return agg;
}

CorpusReport evaluate_corpus(std::span<const ManifestRecord> manifest,
                             const Extractor& extractor,
                             const std::string& corpus_dir,
                             const MelConfig& config) {
    CorpusReport report;
    for (const ManifestRecord& record : manifest) {
        try {
            const Waveform ref_wave =
                read_wav(corpus_dir + "/" + record.target_path);
            const MelGrid ref_mel = log_mel(ref_wave, config);

            std::optional<Estimate> est = extractor(record);
            if (!est) {
                report.failures.push_back(record.id + ": no estimate");
                continue;
            }

            const RegionMask mask =
                make_region_mask(record.regions, ref_mel.frames(), config);

            SampleMetrics m;
            m.id = record.id;
            m.mel_mse = log_mel_distance(est->mel, ref_mel);
            m.mel_mse_target = log_mel_distance(est->mel, ref_mel, &mask);
            m.purity = purity_score(est->mel, mask, config.silence_value());
            m.extraction = extraction_score(est->mel, ref_mel, mask);
            if (est->wave) m.si_sdr_db = si_sdr(*est->wave, ref_wave);
            report.rows.push_back(std::move(m));
        } catch (const std::exception& e) {
            report.failures.push_back(record.id + ": " + e.what());
        }
    }
    return report;
}

void write_report_csv(const CorpusReport& report, std::ostream& out) {
    const auto prev = out.precision(17);
    out << "sample_id,si_sdr,mel_mse,mel_mse_target,purity,extraction\n";
    for (const SampleMetrics& m : report.rows) {
        out << m.id << ',';
        if (m.si_sdr_db) out << *m.si_sdr_db;
        out << ',' << m.mel_mse << ',' << m.mel_mse_target << ',' << m.purity
            << ',' << m.extraction << '\n';
    }
    out.precision(prev);
}

std::string format_report_summary(const CorpusReport& report) {
    std::vector<double> sdr, mse, mse_t, pur, ext;
    for (const SampleMetrics& m : report.rows) {
        if (m.si_sdr_db) sdr.push_back(*m.si_sdr_db);
        mse.push_back(m.mel_mse);
        mse_t.push_back(m.mel_mse_target);
        pur.push_back(m.purity);
        ext.push_back(m.extraction);
    }
    std::ostringstream os;
    os.precision(6);
    auto row = [&os](const char* name, const Aggregate& a) {
        os << name << ": " << a.mean << " +/- " << a.ci95 << " (n=" << a.n << ")\n";
    };
    os << "proxy metrics (si_sdr up; others down):\n";
    row("  si_sdr_db     ", aggregate(sdr));
    row("  mel_mse       ", aggregate(mse));
    row("  mel_mse_target", aggregate(mse_t));
    row("  purity        ", aggregate(pur));
    row("  extraction    ", aggregate(ext));
    if (!report.failures.empty()) {
        os << "failures (" << report.failures.size() << "):\n";
        for (const auto& f : report.failures) os << "  " << f << '\n';
    }
    return os.str();
}

}  // namespace dpmtse
