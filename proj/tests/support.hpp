#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <svmm/verify.hpp>

namespace svmm::testing {

inline std::vector<GridPoint> random_heston_grid(int count, std::uint64_t seed)
{
    return random_parameter_grid(count, seed);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace svmm::testing
