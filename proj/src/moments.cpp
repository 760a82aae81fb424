#include <svmm/moments.hpp>

#include <cmath>

#include <svmm/engine_values.hpp>

namespace svmm {

namespace {

using LD = long double;

std::array<LD, 6> jump_moments(const JumpSpec& jump)
{
    std::array<LD, 6> m{};
    for (int i = 0; i < 6; ++i) {
        m[i] = static_cast<LD>(jump.dist.raw_moment(i + 1));
    }
    return m;
}

SymbolValues<LD> heston_point(const ValidatedHestonParams& p, double h)
{
    return symbol_values<LD>(p.theta(), p.sigma_v(), p.rho(), p.k(), h);
}

} // namespace

MomentVector population_gamma(const ValidatedHestonParams& p, double h)
{
    if (!(h > 0.0)) {
        throw Error(Errc::InvalidGrid, "h must be positive");
    }
    return population_gamma_t<double>(p.mu(), p.k(), p.theta(), p.sigma_v(), p.rho(), h);
}

double cov_lag_m(const ValidatedHestonParams& p, double h, int m)
{
    if (m < 1) {
        throw Error(Errc::UnsupportedShape, "lag must be >= 1");
    }
    return std::exp(-(m - 1) * p.k() * h) * population_gamma(p, h).cov1;
}

double ExtendedMomentSystem::at(const std::string& name) const
{
    if (auto v = find(name)) {
        return *v;
    }
    throw Error(Errc::UnsupportedShape, "moment system has no entry '" + name + "'");
}

std::optional<double> ExtendedMomentSystem::find(const std::string& name) const
{
    for (const auto& [n, v] : entries) {
        if (n == name) {
            return v;
        }
    }
    return std::nullopt;
}

HestonHigherMoments heston_higher_moments(const ValidatedHestonParams& p, double h)
{
    const auto x = heston_point(p, h);
    const auto g = population_gamma(p, h);
    HestonHigherMoments out;
    out.cm3 = static_cast<double>(engine_value(EngineQuantity::CentralMoment3, x));
    out.cm4 = static_cast<double>(engine_value(EngineQuantity::CentralMoment4, x));
    out.cov_y_ysq1 = static_cast<double>(engine_value(EngineQuantity::Cross121, x)) + 2.0 * g.mean * g.cov1;
    return out;
}

double d2_variance_jump_moment(const ValidatedHestonParams& p, const JumpSpec& jump, int m)
{
    if (m < 1 || m > 4) {
        throw Error(Errc::UnsupportedOrder, "variance-jump moments are supported for 1 <= m <= 4");
    }
    validate_jump(jump);
    static const std::array<CompiledPoly<LD>, 5> compiled = [] {
        std::array<CompiledPoly<LD>, 5> c;
        for (int i = 0; i <= 4; ++i) {
            c[static_cast<std::size_t>(i)] = CompiledPoly<LD>(variance_jump_engine().stationary_v_moment(i));
        }
        return c;
    }();
    // E[(v - theta)^m] = sum_i C(m,i) E[v^i] (-theta)^{m-i}
    const auto x = symbol_values<LD>(p.theta(), p.sigma_v(), p.rho(), p.k(), 1.0, 0.0, jump.lambda, jump_moments(jump));
    LD out = 0;
    LD binom = 1;
    for (int i = 0; i <= m; ++i) {
        const LD vi = compiled[static_cast<std::size_t>(i)](x);
        out += binom * vi * std::pow(static_cast<LD>(-p.theta()), m - i);
        binom = binom * (m - i) / (i + 1);
    }
    return static_cast<double>(out);
}

ExtendedMomentSystem d1_moment_system(const ValidatedHestonParams& p, const JumpSpec& jump, double h, bool with_cm4)
{
    validate_jump(jump);
    const auto g = population_gamma(p, h);
    const auto hm = heston_higher_moments(p, h);
    const double lh = jump.lambda * h;
    const double ej = lh * jump.dist.raw_moment(1);
    const double var_j = lh * jump.dist.raw_moment(2);
    const double cm3_j = lh * jump.dist.raw_moment(3);

    ExtendedMomentSystem s{"svj-return", {}};
    s.entries = {
        {"mean", g.mean + ej},
        {"variance", g.variance + var_j},
        {"cov1", g.cov1},
        {"cov2", g.cov2},
        {"covsq1", g.covsq1 + 2.0 * ej * g.cov1},
        {"cov_y_ysq1", hm.cov_y_ysq1 + 2.0 * ej * g.cov1},
        {"cm3", hm.cm3 + cm3_j},
    };
    if (with_cm4) {
        // fourth central moment of a compound Poisson sum: kappa4 + 3 kappa2^2
        const double cm4_j = lh * jump.dist.raw_moment(4) + 3.0 * var_j * var_j;
        s.entries.emplace_back("cm4", hm.cm4 + 6.0 * g.variance * var_j + cm4_j);
    }
    return s;
}

ExtendedMomentSystem d2_moment_system(const ValidatedHestonParams& p, const JumpSpec& jump, double h)
{
    validate_jump(jump);
    const auto x = symbol_values<LD>(p.theta(), p.sigma_v(), p.rho(), p.k(), h, 0.0, jump.lambda, jump_moments(jump));
    const auto value = [&](EngineQuantity q) { return static_cast<double>(engine_value(q, x, true)); };
    const double theta_bar = p.theta() + jump.lambda * jump.dist.raw_moment(1) / p.k();
    const double mean = (p.mu() - theta_bar / 2.0) * h;
    const double cov1 = value(EngineQuantity::Cross111);

    ExtendedMomentSystem s{"svj-variance", {}};
    s.entries = {
        {"mean", mean},
        {"variance", value(EngineQuantity::CentralMoment2)},
        {"cov1", cov1},
        {"cov2", value(EngineQuantity::Cross112)},
        {"covsq1", value(EngineQuantity::Cross211) + 2.0 * mean * cov1},
        {"cov_y_ysq1", value(EngineQuantity::Cross121) + 2.0 * mean * cov1},
        {"cm3", value(EngineQuantity::CentralMoment3)},
    };
    for (int m = 1; m <= 4; ++m) {
        s.entries.emplace_back("vcm" + std::to_string(m), d2_variance_jump_moment(p, jump, m));
    }
    return s;
}

IntegratedVarianceStats integrated_variance_stats(const CirFactor& f, double h)
{
    const auto x = symbol_values<LD>(f.theta, f.sigma_v, 0.0L, f.k, h);
    const auto value = [&](EngineQuantity q) { return static_cast<double>(engine_value(q, x)); };
    IntegratedVarianceStats s;
    s.var = value(EngineQuantity::IvVariance);
    s.cov1 = value(EngineQuantity::IvCov1);
    s.cm3 = value(EngineQuantity::IvCm3);
    // IV = d + theta h, so cov(IV^2, IV') = E[d^2 d'] + 2 theta h E[d d'].
    s.cov_sq_lead = value(EngineQuantity::IvCross211) + 2.0 * f.theta * h * s.cov1;
    s.cov_sq_lag = value(EngineQuantity::IvCross121) + 2.0 * f.theta * h * s.cov1;
    return s;
}

ExtendedMomentSystem d3_moment_system(const TwoFactorParams& p, double h, bool with_cov3)
{
    validate_two_factor(p);
    const auto s1 = integrated_variance_stats(p.factor1, h);
    const auto s2 = integrated_variance_stats(p.factor2, h);
    const double th1 = p.factor1.theta;
    const double th2 = p.factor2.theta;
    const double mh = p.mu * h;
    const double w1 = 0.25 * (2.0 - 2.0 * mh + th2 * h);
    const double w2 = 0.25 * (2.0 - 2.0 * mh + th1 * h);

    ExtendedMomentSystem s{"two-factor", {}};
    s.entries = {
        {"mean", mh - 0.5 * (th1 + th2) * h},
        {"variance", 0.25 * s1.var + 0.25 * s2.var + (th1 + th2) * h},
        {"cov1", 0.25 * (s1.cov1 + s2.cov1)},
        {"cov2", 0.25 * (std::exp(-p.factor1.k * h) * s1.cov1 + std::exp(-p.factor2.k * h) * s2.cov1)},
        // the I* cross term contributes E[(IV - E IV) (I*)^2] = var(IV)
        {"cm3", -0.125 * (s1.cm3 + s2.cm3) - 1.5 * (s1.var + s2.var)},
        {"covsq1", -0.125 * s1.cov_sq_lead - w1 * s1.cov1 - 0.125 * s2.cov_sq_lead - w2 * s2.cov1},
        {"cov_y_ysq1", -0.125 * s1.cov_sq_lag - w1 * s1.cov1 - 0.125 * s2.cov_sq_lag - w2 * s2.cov1},
    };
    if (with_cov3) {
        s.entries.emplace_back("cov3", 0.25 * (std::exp(-2.0 * p.factor1.k * h) * s1.cov1
                                               + std::exp(-2.0 * p.factor2.k * h) * s2.cov1));
    }
    return s;
}

} // namespace svmm
