#include <svmm/model.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace svmm {

namespace {

// Relative slack on the Feller inequality so that sigma_v = sqrt(2 k theta) survives rounding.
constexpr double kFellerSlack = 1e-12;

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

void require_positive(double value, const char* field)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw Error(Errc::NonPositiveParam, std::string(field) + " must be positive and finite, got " + fmt(value));
    }
}

void require_feller(double k, double theta, double sigma_v, const std::string& prefix)
{
    const double lhs = sigma_v * sigma_v;
    const double rhs = 2.0 * k * theta;
    if (lhs > rhs * (1.0 + kFellerSlack)) {
        throw Error(Errc::FellerViolation, prefix + "sigma_v^2 = " + fmt(lhs) + " exceeds 2*k*theta = " + fmt(rhs)
                                               + " (field " + prefix + "sigma_v)");
    }
}

} // namespace

ValidatedHestonParams validate(const HestonParams& p)
{
    if (!std::isfinite(p.mu)) {
        throw Error(Errc::NonPositiveParam, "mu must be finite");
    }
    require_positive(p.k, "k");
    require_positive(p.theta, "theta");
    if (!(p.sigma_v >= 0.0) || !std::isfinite(p.sigma_v)) {
        throw Error(Errc::NonPositiveParam, "sigma_v must be non-negative and finite, got " + fmt(p.sigma_v));
    }
    if (!(std::abs(p.rho) <= 1.0)) {
        throw Error(Errc::CorrelationOutOfRange, "rho must lie in [-1, 1], got " + fmt(p.rho) + " (field rho)");
    }
    require_feller(p.k, p.theta, p.sigma_v, "");
    return ValidatedHestonParams(p);
}

void validate_grid(const SamplingGrid& grid)
{
    if (!(grid.h > 0.0) || !std::isfinite(grid.h)) {
        throw Error(Errc::InvalidGrid, "h must be positive, got " + fmt(grid.h));
    }
    if (grid.n < 3) {
        throw Error(Errc::InvalidGrid, "n must be at least 3, got " + std::to_string(grid.n));
    }
    if (grid.substeps < 1) {
        throw Error(Errc::InvalidGrid, "substeps must be at least 1, got " + std::to_string(grid.substeps));
    }
}

double JumpDist::raw_moment(int n) const
{
    if (n < 0) {
        throw Error(Errc::UnsupportedOrder, "negative moment order");
    }
    if (kind == Kind::Exponential) {
        double m = 1.0;
        for (int i = 1; i <= n; ++i) {
            m *= i * mean;
        }
        return m;
    }
    // E[j^n] = mean E[j^{n-1}] + (n-1) sd^2 E[j^{n-2}]
    double prev2 = 1.0;
    double prev1 = mean;
    if (n == 0) {
        return 1.0;
    }
    for (int i = 2; i <= n; ++i) {
        const double next = mean * prev1 + (i - 1) * sd * sd * prev2;
        prev2 = prev1;
        prev1 = next;
    }
    return prev1;
}

void validate_jump(const JumpSpec& jump)
{
    if (!(jump.lambda >= 0.0) || !std::isfinite(jump.lambda)) {
        throw Error(Errc::InvalidJumpSpec, "jump.lambda must be non-negative, got " + fmt(jump.lambda));
    }
    switch (jump.dist.kind) {
    case JumpDist::Kind::Normal:
        if (!std::isfinite(jump.dist.mean) || !(jump.dist.sd >= 0.0) || !std::isfinite(jump.dist.sd)) {
            throw Error(Errc::InvalidJumpSpec, "normal jumps need finite mean and sd >= 0");
        }
        break;
    case JumpDist::Kind::Exponential:
        if (!(jump.dist.mean > 0.0) || !std::isfinite(jump.dist.mean)) {
            throw Error(Errc::InvalidJumpSpec, "exponential jumps need mean > 0");
        }
        break;
    }
}

void validate_two_factor(const TwoFactorParams& p)
{
    if (!std::isfinite(p.mu)) {
        throw Error(Errc::NonPositiveParam, "mu must be finite");
    }
    const auto check = [](const CirFactor& f, const std::string& prefix) {
        require_positive(f.k, (prefix + "k").c_str());
        require_positive(f.theta, (prefix + "theta").c_str());
        require_positive(f.sigma_v, (prefix + "sigma_v").c_str());
        require_feller(f.k, f.theta, f.sigma_v, prefix);
    };
    check(p.factor1, "");
    check(p.factor2, "factor2.");
    const double gap = std::abs(p.factor1.k - p.factor2.k) / std::max(p.factor1.k, p.factor2.k);
    if (gap < 1e-6) {
        throw Error(Errc::NonPositiveParam, "factor rates k and factor2.k must differ by a relative gap of at least 1e-6");
    }
}

void validate_model(const ModelSpec& spec)
{
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, model::Heston>) {
                (void)validate(m.params);
            } else if constexpr (std::is_same_v<T, model::TwoFactor>) {
                validate_two_factor(m.params);
            } else {
                (void)validate(m.params);
                validate_jump(m.jump);
                if constexpr (std::is_same_v<T, model::VarianceJump>) {
                    if (m.jump.dist.kind != JumpDist::Kind::Exponential) {
                        throw Error(Errc::InvalidJumpSpec, "variance jumps must be exponential (non-negative sizes)");
                    }
                }
            }
        },
        spec);
}

std::string model_name(const ModelSpec& spec)
{
    switch (spec.index()) {
    case 0: return "heston";
    case 1: return "svj-return";
    case 2: return "svj-variance";
    default: return "two-factor";
    }
}

double stationary_v_moment(const ValidatedHestonParams& params, int m)
{
    if (m < 1) {
        throw Error(Errc::UnsupportedOrder, "stationary_v_moment needs m >= 1");
    }
    const double step = params.sigma_v() * params.sigma_v() / (2.0 * params.k());
    double out = 1.0;
    for (int j = 0; j < m; ++j) {
        out *= params.theta() + j * step;
    }
    return out;
}

} // namespace svmm
