#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <variant>

#include <svmm/errors.hpp>

namespace svmm {

/// Heston parameters: drift mu, mean reversion k, long-run variance theta,
/// vol-of-vol sigma_v and price/variance correlation rho. All rates are per unit time.
struct HestonParams {
    double mu = 0.0;
    double k = 0.0;
    double theta = 0.0;
    double sigma_v = 0.0;
    double rho = 0.0;

    friend bool operator==(const HestonParams&, const HestonParams&) = default;
};

/// Proof that a HestonParams value passed `validate`. Only `validate` can build one.
class ValidatedHestonParams {
public:
    [[nodiscard]] const HestonParams& get() const noexcept { return p_; }
    [[nodiscard]] double mu() const noexcept { return p_.mu; }
    [[nodiscard]] double k() const noexcept { return p_.k; }
    [[nodiscard]] double theta() const noexcept { return p_.theta; }
    [[nodiscard]] double sigma_v() const noexcept { return p_.sigma_v; }
    [[nodiscard]] double rho() const noexcept { return p_.rho; }

    friend bool operator==(const ValidatedHestonParams&, const ValidatedHestonParams&) = default;

private:
    explicit ValidatedHestonParams(const HestonParams& p) : p_(p) {}
    friend ValidatedHestonParams validate(const HestonParams& params);

    HestonParams p_;
};

/// Checks positivity, |rho| <= 1 and the Feller condition sigma_v^2 <= 2 k theta.
/// sigma_v = 0 is accepted (degenerate constant-variance diffusion).
[[nodiscard]] ValidatedHestonParams validate(const HestonParams& params);

inline ValidatedHestonParams validate(const ValidatedHestonParams& params) { return params; }

struct SamplingGrid {
    double h = 1.0;
    std::int64_t n = 0;
    int substeps = 1;
};

void validate_grid(const SamplingGrid& grid);

/// Jump-size distribution. Only the two kinds below are supported.
struct JumpDist {
    enum class Kind { Normal, Exponential };
    Kind kind = Kind::Normal;
    double mean = 0.0;
    double sd = 0.0; ///< unused for Exponential

    [[nodiscard]] static JumpDist normal(double mean, double sd) { return {Kind::Normal, mean, sd}; }
    [[nodiscard]] static JumpDist exponential(double mean) { return {Kind::Exponential, mean, 0.0}; }

    /// E[j^n] for n >= 0.
    [[nodiscard]] double raw_moment(int n) const;
    [[nodiscard]] int parameter_count() const noexcept { return kind == Kind::Normal ? 2 : 1; }

    friend bool operator==(const JumpDist&, const JumpDist&) = default;
};

struct JumpSpec {
    double lambda = 0.0;
    JumpDist dist;

    friend bool operator==(const JumpSpec&, const JumpSpec&) = default;
};

void validate_jump(const JumpSpec& jump);

/// One square-root variance factor.
struct CirFactor {
    double k = 0.0;
    double theta = 0.0;
    double sigma_v = 0.0;

    friend bool operator==(const CirFactor&, const CirFactor&) = default;
};

struct TwoFactorParams {
    double mu = 0.0;
    CirFactor factor1;
    CirFactor factor2;

    friend bool operator==(const TwoFactorParams&, const TwoFactorParams&) = default;
};

/// Positivity and Feller per factor, plus a relative gap of at least 1e-6 between k1 and k2.
void validate_two_factor(const TwoFactorParams& params);

namespace model {
struct Heston {
    HestonParams params;
};
struct ReturnJump {
    HestonParams params;
    JumpSpec jump;
};
struct VarianceJump {
    HestonParams params;
    JumpSpec jump;
};
struct TwoFactor {
    TwoFactorParams params;
};
} // namespace model

using ModelSpec = std::variant<model::Heston, model::ReturnJump, model::VarianceJump, model::TwoFactor>;

void validate_model(const ModelSpec& spec);

[[nodiscard]] std::string model_name(const ModelSpec& spec);

/// E[v^m] = prod_{j<m} (theta + j sigma_v^2 / (2k)) under the stationary gamma law.
[[nodiscard]] double stationary_v_moment(const ValidatedHestonParams& params, int m);

/// Below this value of k*h the h~ family is evaluated by Taylor series.
inline constexpr double kSmallKh = 1e-8;

namespace detail {
template <class Scalar>
Scalar expm1_any(const Scalar& x)
{
    if constexpr (std::is_floating_point_v<Scalar>) {
        return std::expm1(x);
    } else {
        using std::exp;
        return exp(x) - Scalar(1);
    }
}
} // namespace detail

/// h~ = (1 - e^{-kh}) / k.
template <class Scalar>
Scalar h_tilde(const Scalar& k, const Scalar& h)
{
    const Scalar x = k * h;
    if (x < Scalar(kSmallKh)) {
        return h * (Scalar(1) - x / Scalar(2) + x * x / Scalar(6));
    }
    return -detail::expm1_any(Scalar(-x)) / k;
}

/// h - h~, evaluated without cancellation for small kh.
template <class Scalar>
Scalar h_minus_h_tilde(const Scalar& k, const Scalar& h)
{
    const Scalar x = k * h;
    if (x < Scalar(kSmallKh)) {
        return h * (x / Scalar(2) - x * x / Scalar(6));
    }
    return h - h_tilde(k, h);
}

/// d_h = h e^{-kh} - h~.
template <class Scalar>
Scalar d_h(const Scalar& k, const Scalar& h)
{
    using std::exp;
    const Scalar x = k * h;
    if (x < Scalar(kSmallKh)) {
        return h * (-x / Scalar(2) + x * x / Scalar(3));
    }
    return h * exp(Scalar(-x)) - h_tilde(k, h);
}

} // namespace svmm
