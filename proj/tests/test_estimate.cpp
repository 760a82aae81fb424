#include <doctest.h>

#include <cmath>

#include <svmm/estimate.hpp>
#include <svmm/moments.hpp>

#include "support.hpp"

using namespace svmm;
using svmm::testing::rel_err;

namespace {

SampleMoments population_as_sample(const ValidatedHestonParams& p, double h, int lags)
{
    const auto g = population_gamma(p, h);
    SampleMoments s;
    s.n = 0;
    s.mean = g.mean;
    s.variance = g.variance;
    for (int m = 1; m <= lags; ++m) {
        s.cov_lags.push_back(cov_lag_m(p, h, m));
    }
    s.covsq1 = g.covsq1;
    return s;
}

} // namespace

TEST_CASE("sample moments use the stated divisors")
{
    const ReturnSeries y{1.0, {1, -1, 1, -1}};
    const auto s = sample_moments(y, 2);
    CHECK(s.mean == 0.0);
    CHECK(s.variance == 1.0);
    CHECK(s.cov(1) == doctest::Approx(-1.0));
    CHECK(s.cov(2) == doctest::Approx(1.0));
    // y^2 is constant, so its covariance with anything vanishes
    CHECK(s.covsq1 == 0.0);
}

TEST_CASE("constant series has no variance and no viable k")
{
    const ReturnSeries y{1.0, std::vector<double>(2000, 0.01)};
    const auto s = sample_moments(y, 3);
    CHECK(std::abs(s.variance) < 1e-30);
    CHECK(std::abs(s.cov(1)) < 1e-30);
    CHECK_THROWS_AS((void)mm_estimate(y), EstimationError);
    try {
        (void)mm_estimate(y);
    } catch (const EstimationError& e) {
        CHECK(e.code() == Errc::NoValidLagRatio);
    }
}

TEST_CASE("k lag sign guard")
{
    std::vector<int> skipped;
    CHECK_THROWS_AS((void)estimate_k_from_lags<double>({0.01, -0.001}, 1.0, 2, &skipped), Error);
    CHECK(skipped == std::vector<int>{2});
    skipped.clear();
    const double k = estimate_k_from_lags<double>({0.01, -0.001, 0.01 * std::exp(-0.2)}, 1.0, 3, &skipped);
    CHECK(skipped == std::vector<int>{2});
    CHECK(k == doctest::Approx(0.1));
}

TEST_CASE("population moments recover the baseline parameters")
{
    const auto p = validate(HestonParams{0.125, 0.1, 0.25, 0.1, -0.7});
    for (int M : {2, 5, 10}) {
        const auto r = mm_estimate_from_moments(population_as_sample(p, 1.0, M), 1.0, {M, 0});
        CHECK(rel_err(r.params.k, 0.1) < 1e-12);
        CHECK(rel_err(r.params.theta, 0.25) < 1e-12);
        CHECK(rel_err(r.params.mu, 0.125) < 1e-12);
        CHECK(rel_err(r.params.sigma_v, 0.1) < 1e-10);
        CHECK(rel_err(r.params.rho, -0.7) < 1e-10);
        CHECK(r.diagnostics.empty());
    }
}

TEST_CASE("population round trip on a random grid")
{
    for (const auto& pt : svmm::testing::random_heston_grid(100, 20261014)) {
        const auto p = validate(pt.params);
        const auto r = mm_estimate_from_moments(population_as_sample(p, pt.h, 2), pt.h);
        CHECK(rel_err(r.params.k, p.k()) < 1e-10);
        CHECK(rel_err(r.params.theta, p.theta()) < 1e-10);
        CHECK(rel_err(r.params.mu, p.mu()) < 1e-10);
        CHECK(rel_err(r.params.sigma_v, p.sigma_v()) < 1e-10);
        CHECK(rel_err(r.params.rho, p.rho()) < 1e-10);
    }
}

TEST_CASE("estimator map agrees with the full estimator")
{
    const auto p = validate(HestonParams{0.125, 0.1, 0.25, 0.1, -0.7});
    const auto g = population_gamma(p, 1.0);
    const auto m = estimator_map<double>(g, 1.0);
    CHECK(rel_err(m[0], 0.1) < 1e-12);
    CHECK(rel_err(m[1], 0.25) < 1e-12);
    CHECK(rel_err(m[2], 0.1) < 1e-10);
    CHECK(rel_err(m[3], 0.125) < 1e-12);
    CHECK(rel_err(m[4], -0.7) < 1e-10);
}

TEST_CASE("negative sigma estimate is an explicit failure")
{
    SampleMoments s;
    s.mean = 0.0;
    s.variance = 0.26;
    s.cov_lags = {0.0107, 0.0107 * std::exp(-0.1)};
    s.covsq1 = 1.0;  // far outside what any valid parameter set produces
    try {
        (void)mm_estimate_from_moments(s, 1.0);
        FAIL("expected failure");
    } catch (const EstimationError& e) {
        CHECK(e.code() == Errc::NegativeSigmaV2);
        CHECK(e.partial().params.k == doctest::Approx(0.1));
        CHECK(std::isfinite(e.partial().params.theta));
        CHECK(std::isnan(e.partial().params.sigma_v));
    }
}

TEST_CASE("rho clamp is reported")
{
    const auto p = validate(HestonParams{0.125, 0.1, 0.25, 0.1, -0.7});
    auto s = population_as_sample(p, 1.0, 2);
    s.covsq1 *= 0.6;
    const auto r = mm_estimate_from_moments(s, 1.0);
    if (std::abs(r.params.rho) == 1.0) {
        REQUIRE(!r.diagnostics.empty());
        CHECK(r.diagnostics.front().rfind("rho_clamped:", 0) == 0);
    }
}

TEST_CASE("shifting log prices leaves estimates unchanged")
{
    const auto path = simulate(model::Heston{{0.125, 0.1, 0.25, 0.1, -0.7}}, SamplingGrid{1.0, 5000, 5}, 3);
    std::vector<double> a{1.0}, b{std::exp(2.5)};
    for (double y : path.returns.values) {
        a.push_back(a.back() * std::exp(y));
        b.push_back(b.back() * std::exp(y));
    }
    const auto ra = returns_from_prices(a, 1.0);
    const auto rb = returns_from_prices(b, 1.0);
    const auto ea = mm_estimate(ra);
    const auto eb = mm_estimate(rb);
    CHECK(ea.params.k == doctest::Approx(eb.params.k).epsilon(1e-9));
    CHECK(ea.params.theta == doctest::Approx(eb.params.theta).epsilon(1e-9));
}

TEST_CASE("too short for the estimator")
{
    CHECK_THROWS_AS((void)mm_estimate(ReturnSeries{1.0, std::vector<double>(500, 0.1)}), Error);
    CHECK_THROWS_AS((void)sample_moments(ReturnSeries{1.0, {0.1, 0.2, 0.3}}, 3), Error);
}
