#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include <svmm/model.hpp>

namespace svmm {

/// gamma = (E[y], var(y), cov(y_n, y_{n+1}), cov(y_n, y_{n+2}), cov(y_n^2, y_{n+1})).
template <class Scalar = double>
struct BasicMomentVector {
    Scalar mean{};
    Scalar variance{};
    Scalar cov1{};
    Scalar cov2{};
    Scalar covsq1{};

    [[nodiscard]] Eigen::Matrix<Scalar, 5, 1> to_eigen() const
    {
        Eigen::Matrix<Scalar, 5, 1> g;
        g << mean, variance, cov1, cov2, covsq1;
        return g;
    }

    [[nodiscard]] static BasicMomentVector from_eigen(const Eigen::Matrix<Scalar, 5, 1>& g)
    {
        return {g(0), g(1), g(2), g(3), g(4)};
    }
};

using MomentVector = BasicMomentVector<double>;

/// Closed-form gamma for raw Heston parameters in any floating type.
template <class Scalar>
BasicMomentVector<Scalar> population_gamma_t(const Scalar& mu, const Scalar& k, const Scalar& theta,
                                             const Scalar& sigma_v, const Scalar& rho, const Scalar& h)
{
    using std::exp;
    const Scalar ht = h_tilde(k, h);
    const Scalar hmht = h_minus_h_tilde(k, h);
    const Scalar dh = d_h(k, h);
    const Scalar s2 = sigma_v * sigma_v;
    const Scalar decay = exp(Scalar(-k * h));

    BasicMomentVector<Scalar> g;
    g.mean = (mu - theta / Scalar(2)) * h;
    g.variance = theta * h + (s2 / (Scalar(4) * k * k) - rho * sigma_v / k) * theta * hmht;
    g.cov1 = theta * ht * ht * (s2 / (Scalar(8) * k) - rho * sigma_v / Scalar(2));
    g.cov2 = decay * g.cov1;
    const Scalar t1 = theta * s2 * s2 / (Scalar(8) * k * k * k) * ht * dh;
    const Scalar t2 = (theta * s2 / (Scalar(4) * k) * mu * h - theta * theta * s2 / (Scalar(8) * k) * h
                       - theta * s2 / (Scalar(4) * k))
                      * ht * ht;
    const Scalar t3 = -rho * sigma_v / Scalar(2) * ht
                      * ((Scalar(3) * s2 / (Scalar(2) * k * k) - Scalar(2) * rho * sigma_v / k) * theta * dh
                         + (Scalar(2) * mu * theta - theta * theta) * h * ht);
    g.covsq1 = t1 + t2 + t3;
    return g;
}

[[nodiscard]] MomentVector population_gamma(const ValidatedHestonParams& params, double h);

/// cov(y_n, y_{n+m}) = e^{-(m-1)kh} cov(y_n, y_{n+1}).
[[nodiscard]] double cov_lag_m(const ValidatedHestonParams& params, double h, int m);

/// Named list of population values for an extension model.
struct ExtendedMomentSystem {
    std::string kind;
    std::vector<std::pair<std::string, double>> entries;

    [[nodiscard]] double at(const std::string& name) const;
    [[nodiscard]] std::optional<double> find(const std::string& name) const;
    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
};

/// Heston quantities that only the engine provides in closed form.
struct HestonHigherMoments {
    double cm3 = 0.0;          ///< E[(y - Ey)^3]
    double cm4 = 0.0;          ///< E[(y - Ey)^4]
    double cov_y_ysq1 = 0.0;   ///< cov(y_n, y_{n+1}^2)
};

[[nodiscard]] HestonHigherMoments heston_higher_moments(const ValidatedHestonParams& params, double h);

/// E[(v_n - theta)^m] for the variance-jump model, 1 <= m <= 4.
[[nodiscard]] double d2_variance_jump_moment(const ValidatedHestonParams& params, const JumpSpec& jump, int m);

/// Return-jump model: mean, variance, cov1, cov2, covsq1, cov_y_ysq1, cm3. With `with_cm4`
/// an eighth entry cm4 is appended (used when the jump law has two parameters).
[[nodiscard]] ExtendedMomentSystem d1_moment_system(const ValidatedHestonParams& params, const JumpSpec& jump,
                                                    double h, bool with_cm4 = false);

/// Variance-jump model: the same seven return statistics as D1, followed by the ladder
/// vcm1..vcm4 = E[(v - theta)^m].
[[nodiscard]] ExtendedMomentSystem d2_moment_system(const ValidatedHestonParams& params, const JumpSpec& jump,
                                                    double h);

/// Two-factor model: mean, variance, cov1, cov2, cm3, covsq1, cov_y_ysq1. These seven leave
/// one direction of the seven parameters unidentified, so `with_cov3` appends the lag-3
/// covariance for estimation.
[[nodiscard]] ExtendedMomentSystem d3_moment_system(const TwoFactorParams& params, double h, bool with_cov3 = false);

/// Per-factor integrated-variance statistics used by the two-factor system.
struct IntegratedVarianceStats {
    double var = 0.0;        ///< var(IV_n)
    double cov1 = 0.0;       ///< cov(IV_n, IV_{n+1})
    double cm3 = 0.0;        ///< E[(IV_n - E IV)^3]
    double cov_sq_lead = 0.0;  ///< cov(IV_n^2, IV_{n+1})
    double cov_sq_lag = 0.0;   ///< cov(IV_n, IV_{n+1}^2)
};

[[nodiscard]] IntegratedVarianceStats integrated_variance_stats(const CirFactor& factor, double h);

} // namespace svmm
