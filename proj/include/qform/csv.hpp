#pragma once

#include "qform/analysis.hpp"
#include "qform/formation.hpp"
#include "qform/sample.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qform::csv {

// Shortest round-trip decimal rendering ('.' separator, locale independent),
// so identical values always produce identical bytes.
std::string fmt(double x);

// step,i,j,r_1,theta_1,...,r_N,theta_N,safe   (i, j 1-based; -1 on row 0)
void write_formation_trace(std::ostream& out, const formation::Run& run, const analysis::SafetySpec& spec);

// true_r,true_theta,est_r,est_theta,env
void write_samples(std::ostream& out, const std::vector<SampleRecord>& samples);

struct SampleLoad {
    std::vector<SampleRecord> samples;
    std::int64_t skipped = 0;  // malformed rows
};
SampleLoad read_samples(std::istream& in);

}  // namespace qform::csv
