#include <doctest.h>

#include <cmath>

#include <svmm/engine.hpp>
#include <svmm/engine_values.hpp>
#include <svmm/moments.hpp>

using namespace svmm;

namespace {

// Baseline Heston point used across the suite.
const HestonParams kBase{0.125, 0.1, 0.25, 0.1, -0.7};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST_CASE("engine reproduces the closed-form moment vector")
{
    const auto p = validate(kBase);
    for (double h : {1.0, 0.25, 5.0}) {
        const auto closed = population_gamma(p, h);
        const auto eng = engine_gamma<HighPrecision>(p.mu(), p.k(), p.theta(), p.sigma_v(), p.rho(), h);
        CHECK(rel(static_cast<double>(eng.variance), closed.variance) < 1e-12);
        CHECK(rel(static_cast<double>(eng.cov1), closed.cov1) < 1e-12);
        CHECK(rel(static_cast<double>(eng.cov2), closed.cov2) < 1e-12);
        CHECK(rel(static_cast<double>(eng.covsq1), closed.covsq1) < 1e-10);
    }
}

TEST_CASE("baseline moment values")
{
    const auto g = population_gamma(validate(kBase), 1.0);
    CHECK(g.variance == doctest::Approx(0.2614889).epsilon(1e-6));
    CHECK(g.cov1 == doctest::Approx(0.0107539).epsilon(1e-5));
}

namespace {

long double at(const Poly& p, double theta, double sigma, double rho, double k, double h, double v0 = 0.0)
{
    return evaluate(p, symbol_values<long double>(theta, sigma, rho, k, h, v0));
}

// e^{-rate k t} int_0^t e^{rate k s} g(s) ds by composite Simpson.
long double simpson_oracle(const Poly& g, int rate, long double k, long double t)
{
    const int n = 4000;
    const long double step = t / n;
    long double sum = 0;
    for (int i = 0; i <= n; ++i) {
        const long double s = i * step;
        auto x = symbol_values<long double>(0.3L, 0.2L, -0.4L, k, 1.0L);
        x[static_cast<std::size_t>(Sym::E)] = std::exp(-k * s);
        x[static_cast<std::size_t>(Sym::H)] = s;
        const long double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        sum += w * std::exp(rate * k * s) * evaluate(g, x);
    }
    return std::exp(-rate * k * t) * sum * step / 3;
}

} // namespace

TEST_CASE("time integration agrees with quadrature")
{
    const Poly E = Poly::symbol(Sym::E);
    const Poly H = Poly::symbol(Sym::H);
    const Poly th = Poly::symbol(Sym::theta);
    const Poly g = E.pow(2) * H + Rational(3) * Poly::symbol(Sym::kinv) * E * H.pow(2) * th - frac(5, 2) * H.pow(3) + E.pow(3);
    for (int rate : {0, 1, 2, 3, 4}) {
        const Poly r = ito_integrate(g, rate);
        for (double k : {0.1, 1.7}) {
            for (double t : {0.5, 2.0}) {
                const long double got = at(r, 0.3, 0.2, -0.4, k, t);
                CHECK(rel(static_cast<double>(got), static_cast<double>(simpson_oracle(g, rate, k, t))) < 1e-9);
            }
        }
    }
}

TEST_CASE("stationary variance moments follow the gamma law")
{
    const auto& eng = heston_engine();
    const double theta = 0.25, sigma = 0.1, k = 0.1;
    double prod = 1.0;
    for (int m = 1; m <= 5; ++m) {
        prod *= theta + (m - 1) * sigma * sigma / (2 * k);
        CHECK(rel(static_cast<double>(at(eng.stationary_v_moment(m), theta, sigma, 0, k, 1)), prod) < 1e-14);
    }
}

TEST_CASE("low-order state moment fixed points")
{
    const auto& eng = heston_engine();
    const double theta = 0.3, sigma = 0.25, k = 0.8, h = 1.3;
    const double E = std::exp(-k * h);
    const auto stat = [&](const MomentIndex& idx) {
        return static_cast<double>(at(eng.close_stationary(eng.cond_moment(idx)), theta, sigma, 0.2, k, h));
    };
    CHECK(rel(stat(MomentIndex(1, 1, 0)), theta * (1 - E) / k) < 1e-13);
    CHECK(rel(stat(MomentIndex(2, 0, 0)), theta * (1 - E * E) / (2 * k)) < 1e-13);
    CHECK(rel(stat(MomentIndex(2, 1, 0)), theta * sigma / (k * k) * (1 - E) - theta * sigma / k * h * E * E) < 1e-12);
    CHECK(std::abs(stat(MomentIndex(1, 0, 0))) < 1e-15);
    CHECK(rel(stat(MomentIndex(0, 0, 2)), theta * h) < 1e-13);

    const Poly iv = eng.expect_stationary(eng.centered_integrated_variance().pow(2));
    CHECK(rel(static_cast<double>(at(iv, theta, sigma, 0.2, k, h)),
              theta * sigma * sigma / (k * k) * (h - (1 - E) / k))
          < 1e-12);
}

TEST_CASE("conditional mean of the end variance")
{
    const auto& eng = heston_engine();
    const double theta = 0.3, sigma = 0.25, k = 0.8, h = 1.3, v0 = 0.45;
    CHECK(rel(static_cast<double>(at(eng.conditional_v_moment(1), theta, sigma, 0, k, h, v0)),
              theta + (v0 - theta) * std::exp(-k * h))
          < 1e-14);
}

TEST_CASE("q never survives beyond first power")
{
    const auto& eng = heston_engine();
    for (int l = 2; l <= 4; ++l) {
        CHECK(eng.central_moment_return(l).degree(Sym::q) <= 1);
    }
    CHECK(eng.cross_moment(2, 2, 1).degree(Sym::q) <= 1);
}

TEST_CASE("lag-m covariance decays geometrically")
{
    const auto p = validate(kBase);
    for (int m : {1, 2, 3, 10}) {
        CHECK(rel(cross_moment_value(1, 1, m, p, 1.0), cov_lag_m(p, 1.0, m)) < 1e-10);
    }
}

TEST_CASE("variance-jump engine collapses to Heston without jumps")
{
    const auto& a = heston_engine();
    const auto& b = variance_jump_engine();
    const std::array<long double, 6> jm{0.05L, 0.005L, 7.5e-4L, 1.5e-4L, 3.75e-5L, 1.125e-5L};
    const auto x = symbol_values<long double>(0.25L, 0.1L, -0.7L, 0.1L, 1.0L, 0.0L, 0.0L, jm);
    for (int l = 2; l <= 4; ++l) {
        CHECK(rel(static_cast<double>(evaluate(b.central_moment_return(l), x)),
                  static_cast<double>(evaluate(a.central_moment_return(l), x)))
              < 1e-10);
    }
    CHECK(rel(static_cast<double>(evaluate(b.cross_moment(2, 1, 1), x)),
              static_cast<double>(evaluate(a.cross_moment(2, 1, 1), x)))
          < 1e-10);
}

TEST_CASE("jump-augmented stationary mean")
{
    const auto& b = variance_jump_engine();
    const double theta = 0.2, k = 0.5, lambda = 0.3, mj = 0.1;
    std::array<long double, 6> jm{};
    long double f = 1;
    for (int i = 0; i < 6; ++i) {
        f *= (i + 1);
        jm[i] = f * std::pow(mj, i + 1);
    }
    const auto x = symbol_values<long double>(theta, 0.3L, 0.0L, k, 1.0L, 0.0L, lambda, jm);
    CHECK(rel(static_cast<double>(evaluate(b.stationary_v_moment(1), x)), theta + lambda * mj / k) < 1e-14);
}

TEST_CASE("engine guards its shape limits")
{
    const auto& eng = heston_engine();
    CHECK_THROWS_AS((void)eng.cond_moment(MomentIndex(4, 2, 1)), Error);
    CHECK_THROWS_AS((void)eng.cross_moment(3, 2, 1), Error);
    CHECK_THROWS_AS((void)eng.cross_moment(1, 1, 0), Error);
    CHECK_THROWS_AS((void)eng.cross_moment(1, 1, MomentEngine::kMaxLag + 1), Error);
}
