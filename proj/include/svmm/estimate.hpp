#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <svmm/errors.hpp>
#include <svmm/model.hpp>
#include <svmm/moments.hpp>
#include <svmm/simulate.hpp>

namespace svmm {

/// Sample counterparts of gamma. Divisors: N for mean and variance, N - m for the lag-m
/// covariance, N - 1 for cov(y^2, y_{+1}) (y^2 centred by its own sample mean).
struct SampleMoments {
    std::int64_t n = 0;
    double mean = 0.0;
    double variance = 0.0;
    std::vector<double> cov_lags;  ///< cov_lags[m - 1] = cov(y_n, y_{n+m})
    double covsq1 = 0.0;

    [[nodiscard]] double cov(int m) const { return cov_lags.at(static_cast<std::size_t>(m - 1)); }
    [[nodiscard]] MomentVector gamma() const { return {mean, variance, cov(1), cov(2), covsq1}; }
};

[[nodiscard]] SampleMoments sample_moments(const ReturnSeries& returns, int m_max);

struct EstimatorConfig {
    int M = 2;                      ///< lag depth for k
    std::int64_t min_n = 1000;
};

struct EstimateResult {
    HestonParams params;
    std::optional<HestonParams> stderr_;  ///< filled by the asymptotics layer
    std::vector<std::string> diagnostics;
    double wall_time = 0.0;  ///< seconds
};

/// Estimator failure that keeps whatever was computed before the failing step.
class EstimationError : public Error {
public:
    EstimationError(Errc code, const std::string& message, EstimateResult partial)
        : Error(code, message), partial_(std::move(partial))
    {
    }
    [[nodiscard]] const EstimateResult& partial() const noexcept { return partial_; }

private:
    EstimateResult partial_;
};

/// k from the lag-covariance ratios; lags whose ratio cov1/cov_m is not positive are
/// dropped and listed in `skipped`. Covariances with magnitude at most `zero_tol` count as zero.
template <class Scalar>
Scalar estimate_k_from_lags(const std::vector<Scalar>& cov_lags, const Scalar& h, int M,
                            std::vector<int>* skipped = nullptr, const Scalar& zero_tol = Scalar(0))
{
    using std::abs;
    using std::log;
    if (M < 2 || static_cast<std::size_t>(M) > cov_lags.size()) {
        throw Error(Errc::UnsupportedShape, "M must satisfy 2 <= M <= available lags");
    }
    Scalar sum(0);
    int used = 0;
    for (int m = 2; m <= M; ++m) {
        const Scalar cm = cov_lags[static_cast<std::size_t>(m - 1)];
        const Scalar ratio = cov_lags[0] / cm;
        if (!(ratio > Scalar(0)) || abs(cov_lags[0]) <= zero_tol || abs(cm) <= zero_tol) {
            if (skipped) {
                skipped->push_back(m);
            }
            continue;
        }
        sum += log(ratio) / (Scalar(m - 1) * h);
        ++used;
    }
    if (used == 0) {
        throw Error(Errc::NoValidLagRatio, "no lag has a positive covariance ratio");
    }
    return sum / Scalar(used);
}

[[nodiscard]] double estimate_k(const SampleMoments& moments, double h, int M, std::vector<int>* skipped = nullptr);

/// Remaining estimates given k, before any sign checks or clamping.
template <class Scalar>
struct RawEstimate {
    Scalar k{}, theta{}, mu{}, sigma_v2{}, rho{};
};

template <class Scalar>
RawEstimate<Scalar> invert_moments(const Scalar& k, const Scalar& mean, const Scalar& variance, const Scalar& cov1,
                                   const Scalar& covsq1, const Scalar& h)
{
    using std::sqrt;
    RawEstimate<Scalar> r;
    r.k = k;
    const Scalar ht = h_tilde(k, h);
    const Scalar d = d_h(k, h);
    r.theta = variance / h - Scalar(2) * h_minus_h_tilde(k, h) / (h * k * ht * ht) * cov1;
    r.mu = mean / h + r.theta / Scalar(2);
    const Scalar num = Scalar(4) * k * mean + Scalar(8) * d * cov1 / (r.theta * ht * ht * ht)
                       - Scalar(2) * k * covsq1 / cov1;
    const Scalar den = r.theta * ht * ht / (Scalar(2) * cov1) - d / (k * ht);
    r.sigma_v2 = num / den;
    if (r.sigma_v2 > Scalar(0)) {
        const Scalar s = sqrt(r.sigma_v2);
        r.rho = s / (Scalar(4) * k) - Scalar(2) * cov1 / (r.theta * s * ht * ht);
    } else {
        r.rho = Scalar(0) / Scalar(0);
    }
    return r;
}

/// Full estimator map (mean, var, cov1, cov2, covsq1) -> (k, theta, sigma_v, mu, rho) with
/// k taken from the lag-1/lag-2 ratio. No validation: used for the delta method.
template <class Scalar>
std::array<Scalar, 5> estimator_map(const BasicMomentVector<Scalar>& g, const Scalar& h)
{
    using std::sqrt;
    const Scalar k = estimate_k_from_lags<Scalar>({g.cov1, g.cov2}, h, 2);
    const auto r = invert_moments<Scalar>(k, g.mean, g.variance, g.cov1, g.covsq1, h);
    return {r.k, r.theta, sqrt(r.sigma_v2), r.mu, r.rho};
}

/// Closed-form estimates in the order k, theta, mu, sigma_v^2, rho.
[[nodiscard]] EstimateResult mm_estimate(const ReturnSeries& returns, const EstimatorConfig& config = {});

/// Same estimator applied to given moments (population values or precomputed samples).
[[nodiscard]] EstimateResult mm_estimate_from_moments(const SampleMoments& moments, double h,
                                                      const EstimatorConfig& config = {});

inline constexpr int kExtendedLags = 10;

/// Sample statistics used by the extension estimators: mean, variance, cov1, cov2, covsq1,
/// cov_y_ysq1 = cov(y_n, y_{n+1}^2), cm3, cm4 (central moments with divisor N), then
/// cov3..cov10.
[[nodiscard]] ExtendedMomentSystem extended_sample_moments(const ReturnSeries& returns);

struct ExtensionConfig {
    int starts = 16;
    std::uint64_t solver_seed = 1;
    int probe_iterations = 40;    ///< per start
    int polish_count = 3;         ///< best starts continued to convergence
    int polish_iterations = 20000;
    double floor = 0.05;  ///< residual scale floor, in units of sd(y)^order
    /// With a return series, scale residuals by batch-means standard errors instead.
    bool weight_by_standard_errors = true;
    int se_batches = 50;
    /// Jump models: refit with lambda = 0 and keep the jumps only when they are significant.
    bool nested_test = true;
    double nested_alpha = 0.05;
};

struct ExtensionResult {
    ModelSpec model;
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<std::string> diagnostics;
    double wall_time = 0.0;
};

/// Moment matching for the extension models by multi-start Levenberg-Marquardt on scaled
/// residuals. Only the variant (and, for jumps, the jump-law kind) of `kind` is used.
/// For the jump models a lambda = 0 fit is compared by the GMM distance test; when the jump
/// part is not significant the nested fit is returned with "jump_component_dropped".
[[nodiscard]] ExtensionResult extension_estimate(const ModelSpec& kind, const ReturnSeries& returns,
                                                 const ExtensionConfig& config = {});

/// Same, matching against given target statistics (names as in extended_sample_moments).
/// Without `standard_errors` residuals are relative (floored) and no nested test is run.
[[nodiscard]] ExtensionResult extension_estimate_from(const ModelSpec& kind, const ExtendedMomentSystem& target,
                                                      double h, const ExtensionConfig& config = {},
                                                      const ExtendedMomentSystem* standard_errors = nullptr);

/// Batch-means standard errors of the extended statistics over `batches` contiguous blocks.
[[nodiscard]] ExtendedMomentSystem batch_standard_errors(const ReturnSeries& returns, int batches = 50);

} // namespace svmm
