#pragma once

#include "qform/geometry.hpp"

#include <string>

namespace qform {

// One (ground truth, perceived) relative-position pair, optionally tagged
// with the environment it was sampled under.
struct SampleRecord {
    PolarVec true_pos;
    PolarVec est_pos;
    std::string env;
};

}  // namespace qform
