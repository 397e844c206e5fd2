#include "qform/contract_fit.hpp"

#include "qform/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace qform::fit {

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw FitError("quantile: no values");
    if (!(p > 0.0 && p <= 1.0)) throw FitError("quantile: percentile must be in (0, 1]");
    std::sort(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(
        std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(p * static_cast<double>(values.size())))));
    return values[std::min(idx, values.size()) - 1];
}

double radial_error(const SampleRecord& s) {
    if (!(s.est_pos.r > 0.0) || !std::isfinite(s.est_pos.r)) return std::numeric_limits<double>::infinity();
    return std::abs(std::log(s.est_pos.r / s.true_pos.r));
}

double angular_error(const SampleRecord& s) {
    if (!std::isfinite(s.est_pos.theta)) return std::numeric_limits<double>::infinity();
    return std::abs(signed_angle_diff(wrap_angle(s.est_pos.theta), s.true_pos.theta));
}

RadiusFit fit_step_radius(std::span<const SampleRecord> samples, double p, const FitOptions& opts) {
    if (samples.empty()) throw FitError("fit_step_radius: no samples");
    std::vector<double> errs;
    errs.reserve(samples.size());
    for (const SampleRecord& s : samples) errs.push_back(radial_error(s));
    const double e = quantile(std::move(errs), p);
    if (!std::isfinite(e))
        throw FitError("fit_step_radius: requested percentile falls on invalid estimates; no finite step radius");
    double a = std::exp(2.0 * e);
    // exp/log rounding must not drop the quantile sample out of the half cell
    while (0.5 * std::log(a) < e) a = std::nextafter(a, std::numeric_limits<double>::infinity());
    if (a <= opts.a_floor) return {opts.a_floor, true, static_cast<std::int64_t>(samples.size())};
    return {a, false, static_cast<std::int64_t>(samples.size())};
}

SectorFit fit_sector_count(std::span<const SampleRecord> samples, double p, const FitOptions& opts) {
    if (samples.empty()) throw FitError("fit_sector_count: no samples");
    std::vector<double> errs;
    errs.reserve(samples.size());
    for (const SampleRecord& s : samples) errs.push_back(angular_error(s));
    const double e = quantile(std::move(errs), p);
    if (e <= 0.0) return {opts.m_max, true, static_cast<std::int64_t>(samples.size())};
    if (!std::isfinite(e) || std::floor(std::numbers::pi / e) < 2.0)
        throw FitError("fit_sector_count: angle error too large for any half-sector bound (infeasible fit)");
    int M = std::min(static_cast<int>(std::floor(std::numbers::pi / e)), opts.m_max);
    while (M > 2 && std::numbers::pi / M < e) --M;  // guard the half-sector against rounding
    return {M, M == opts.m_max, static_cast<std::int64_t>(samples.size())};
}

std::pair<double, double> coverage_of(std::span<const SampleRecord> samples, const QuantizerConfig& cfg) {
    if (samples.empty()) throw FitError("coverage_of: no samples");
    const double half_r = 0.5 * cfg.log_a();
    const double half_theta = std::numbers::pi / cfg.M;
    std::size_t ok_r = 0, ok_theta = 0;
    for (const SampleRecord& s : samples) {
        if (radial_error(s) <= half_r) ++ok_r;
        if (angular_error(s) <= half_theta) ++ok_theta;
    }
    const double n = static_cast<double>(samples.size());
    return {static_cast<double>(ok_r) / n, static_cast<double>(ok_theta) / n};
}

FitResult fit_contract(std::span<const SampleRecord> samples, double p, const FitOptions& opts) {
    const RadiusFit rf = fit_step_radius(samples, p, opts);
    const SectorFit sf = fit_sector_count(samples, p, opts);
    FitResult res;
    res.a = rf.a;
    res.M = sf.M;
    res.n_used = rf.n_used;
    res.degenerate = rf.degenerate || sf.degenerate;
    const QuantizerConfig cfg{res.a, res.M, 0.618};
    std::tie(res.coverage_r, res.coverage_theta) = coverage_of(samples, cfg);
    return res;
}

std::vector<SweepRow> sweep_environments(std::span<const SampleRecord> samples, std::span<const double> p_list,
                                         const FitOptions& opts) {
    // group by label, preserving first-appearance order
    std::vector<std::string> order;
    std::map<std::string, std::vector<SampleRecord>> groups;
    for (const SampleRecord& s : samples) {
        auto [it, inserted] = groups.try_emplace(s.env);
        if (inserted) order.push_back(s.env);
        it->second.push_back(s);
    }

    std::vector<SweepRow> rows;
    for (const std::string& env : order) {
        const auto& group = groups[env];
        for (double p : p_list) {
            SweepRow row;
            row.env = env;
            row.p = p;
            row.fit.n_used = static_cast<std::int64_t>(group.size());
            try {
                const RadiusFit rf = fit_step_radius(group, p, opts);
                row.fit.a = rf.a;
                row.fit.degenerate |= rf.degenerate;
            } catch (const FitError&) {
                row.radial_infeasible = true;
                row.fit.a = std::numeric_limits<double>::quiet_NaN();
                row.fit.degenerate = true;
            }
            try {
                const SectorFit sf = fit_sector_count(group, p, opts);
                row.fit.M = sf.M;
                row.fit.degenerate |= sf.degenerate;
            } catch (const FitError&) {
                row.angular_infeasible = true;
                row.fit.M = 0;
                row.fit.degenerate = true;
            }
            if (!row.radial_infeasible && !row.angular_infeasible) {
                const QuantizerConfig cfg{row.fit.a, row.fit.M, 0.618};
                std::tie(row.fit.coverage_r, row.fit.coverage_theta) = coverage_of(group, cfg);
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "env,p,a,M,coverage_r,coverage_theta,n_used,degenerate\n";
    for (const SweepRow& r : rows) {
        out << r.env << ',' << csv::fmt(r.p) << ',' << csv::fmt(r.fit.a) << ',' << r.fit.M << ','
            << csv::fmt(r.fit.coverage_r) << ',' << csv::fmt(r.fit.coverage_theta) << ',' << r.fit.n_used << ','
            << (r.fit.degenerate ? 1 : 0) << '\n';
    }
    return out.str();
}

LoadedSamples load_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FitError("load_samples: cannot open " + path);
    csv::SampleLoad loaded = csv::read_samples(in);
    return {std::move(loaded.samples), loaded.skipped};
}

}  // namespace qform::fit
