#pragma once

#include "qform/quantizer.hpp"
#include "qform/sample.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Turns observed (true, perceived) pairs into quantizer parameters: the step
// radius bounds the log-radius error, the sector count bounds the angle
// error, each at a chosen percentile.
namespace qform::fit {

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitOptions {
    int m_max = 4096;              // sector cap when the angle error is zero
    double a_floor = 1.0 + 1e-6;   // step-radius floor when the radial error is zero
};

struct RadiusFit {
    double a;
    bool degenerate;  // clamped to the floor
    std::int64_t n_used;
};

struct SectorFit {
    int M;
    bool degenerate;  // clamped to the cap
    std::int64_t n_used;
};

// Inclusive order statistic at index ceil(p * n): conservative, so the fit
// covers at least fraction p of the fitting set exactly.
double quantile(std::vector<double> values, double p);

// Radial error of one sample: |ln(est_r / true_r)|; estimates that are not
// positive finite radii count as infinite error (violations, not drops).
double radial_error(const SampleRecord& s);
// Angle error normalized to [-pi, pi), absolute value; non-finite -> infinity.
double angular_error(const SampleRecord& s);

RadiusFit fit_step_radius(std::span<const SampleRecord> samples, double p, const FitOptions& opts = {});
SectorFit fit_sector_count(std::span<const SampleRecord> samples, double p, const FitOptions& opts = {});

// Fraction of samples whose radial / angular error fits inside half a
// quantization cell of the given config (closed bounds).
std::pair<double, double> coverage_of(std::span<const SampleRecord> samples, const QuantizerConfig& cfg);

struct FitResult {
    double a = 0.0;
    int M = 0;
    double coverage_r = 0.0;
    double coverage_theta = 0.0;
    std::int64_t n_used = 0;
    bool degenerate = false;
};

// Both channels at once; throws FitError when either channel is infeasible.
FitResult fit_contract(std::span<const SampleRecord> samples, double p, const FitOptions& opts = {});

struct SweepRow {
    std::string env;
    double p = 0.0;
    FitResult fit;
    bool radial_infeasible = false;   // fit.a is NaN in the CSV
    bool angular_infeasible = false;  // fit.M is 0 in the CSV
};

// One fit per (environment label, percentile); infeasible channels are
// reported in the row instead of aborting the sweep.
std::vector<SweepRow> sweep_environments(std::span<const SampleRecord> samples, std::span<const double> p_list,
                                         const FitOptions& opts = {});

// env,p,a,M,coverage_r,coverage_theta,n_used,degenerate
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

struct LoadedSamples {
    std::vector<SampleRecord> samples;
    std::int64_t skipped = 0;
};
LoadedSamples load_samples(const std::string& path);

}  // namespace qform::fit
