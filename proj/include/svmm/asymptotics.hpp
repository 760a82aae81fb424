#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <svmm/estimate.hpp>
#include <svmm/model.hpp>
#include <svmm/moments.hpp>
#include <svmm/simulate.hpp>

namespace svmm {

using Matrix5 = Eigen::Matrix<double, 5, 5>;

/// Long-run variance of sqrt(N) * mean: theta h + theta h (sigma^2/(4k^2) - rho sigma / k).
template <class Scalar>
Scalar sigma11_exact_t(const Scalar& k, const Scalar& theta, const Scalar& sigma_v, const Scalar& rho, const Scalar& h)
{
    return theta * h + theta * h * (sigma_v * sigma_v / (Scalar(4) * k * k) - rho * sigma_v / k);
}

[[nodiscard]] double sigma11_exact(const ValidatedHestonParams& params, double h);

/// The same quantity assembled as var(y) + 2 cov(y_n, y_{n+1}) / (1 - e^{-kh}).
[[nodiscard]] double sigma11_from_covariances(const ValidatedHestonParams& params, double h);

struct ConstantsTable {
    double D1 = 0, D2 = 0, D3 = 0, D31 = 0, D32 = 0, D33 = 0;
    double F1 = 0, F2 = 0, F3 = 0, F4 = 0, F5 = 0, F6 = 0, F7 = 0, F8 = 0;
    double C2 = 0, C3 = 0, C4 = 0, C = 0, Cy = 0, C51 = 0, C52 = 0, C53 = 0;

    /// (name, value) pairs in declaration order.
    [[nodiscard]] std::vector<std::pair<std::string, double>> entries() const;
};

/// Constants of the covariance-matrix entries; E[y^2] is taken from the moment layer.
[[nodiscard]] ConstantsTable appendix_c_constants(const ValidatedHestonParams& params, double h);

enum class Provenance { Exact, Hac };

struct SigmaMatrix {
    Matrix5 value = Matrix5::Zero();
    std::array<std::array<Provenance, 5>, 5> provenance{};
    int bandwidth = 0;
    double hac11 = 0.0;  ///< the HAC value of entry (1,1), kept even when it is replaced
    std::vector<std::string> diagnostics;
};

/// floor(1.2 N^{1/3}).
[[nodiscard]] int hac_bandwidth(std::int64_t n);

/// Bartlett-kernel long-run covariance of (y_i, z_i^1..z_i^4) centred at sample means.
/// With `exact_params`, entry (1,1) is replaced by sigma11_exact when the result stays PSD.
[[nodiscard]] SigmaMatrix sigma_hac(const ReturnSeries& returns,
                                    const std::optional<ValidatedHestonParams>& exact_params = std::nullopt);

struct JacobianMatrix {
    Matrix5 value = Matrix5::Zero();  ///< rows (k, theta, sigma_v, mu, rho), columns gamma
    double step_drift = 0.0;          ///< max relative change between steps 1e-6 and 1e-5
};

/// Derivative of the estimator map at gamma; row 1 is analytic, the rest central differences.
[[nodiscard]] JacobianMatrix jacobian_g(const MomentVector& gamma, double h);

/// sqrt(diag(J Sigma J^T) / N) in the order (k, theta, sigma_v, mu, rho).
[[nodiscard]] std::array<double, 5> param_covariance(const Matrix5& sigma, const Matrix5& jac, std::int64_t n);

/// mm_estimate followed by the delta-method standard errors.
[[nodiscard]] EstimateResult mm_estimate_with_stderr(const ReturnSeries& returns, const EstimatorConfig& config = {},
                                                     SigmaMatrix* sigma_out = nullptr);

} // namespace svmm
