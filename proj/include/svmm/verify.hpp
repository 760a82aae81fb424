#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <svmm/model.hpp>
#include <svmm/poly.hpp>

namespace svmm {

struct VerifyLine {
    std::string identity;
    bool pass = false;
    double max_rel_err = 0.0;  ///< 0 for the symbolic identities
    std::string detail;
};

struct GridPoint {
    HestonParams params;
    double h = 1.0;
};

/// Reproducible random valid parameter sets: k log-uniform on [0.05, 3], theta on
/// [0.05, 0.5], sigma_v a uniform fraction in [0.1, 1] of the Feller bound, rho on
/// [-0.95, 0.95], mu on [-0.2, 0.3] and h drawn from {0.5, 1, 2}.
[[nodiscard]] std::vector<GridPoint> random_parameter_grid(int count, std::uint64_t seed);

/// var(IV_n) = theta sigma_v^2 / k^2 (h - h~), written in the engine's symbols.
[[nodiscard]] Poly iv_variance_target();
/// Stationary E[X^2 I] = theta sigma_v / k^2 (1 - e^{-kh} - kh e^{-2kh}); multiplying by
/// e^{2knh} gives cov(IE_n I_n, IE_n).
[[nodiscard]] Poly x2i_target();

/// Engine against the closed forms for E[y], var(y), cov1, cov2, covsq1 over `grid` random
/// points (both sides in 50-digit arithmetic), then the two symbolic identities above.
[[nodiscard]] std::vector<VerifyLine> verify_engine(int grid, double tol, std::uint64_t seed = 1);

} // namespace svmm
