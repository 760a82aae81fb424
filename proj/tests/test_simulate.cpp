#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <svmm/estimate.hpp>
#include <svmm/moments.hpp>
#include <svmm/simulate.hpp>

using namespace svmm;

namespace {

const HestonParams kBase{0.125, 0.1, 0.25, 0.1, -0.7};

double mean_of(const std::vector<double>& x)
{
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double var_of(const std::vector<double>& x)
{
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) {
        s += (v - m) * (v - m);
    }
    return s / static_cast<double>(x.size());
}

// two-sample Kolmogorov-Smirnov statistic
double ks_statistic(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) {
            ++i;
        }
        while (j < b.size() && b[j] <= x) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

} // namespace

TEST_CASE("gamma parameterisation of the stationary draw")
{
    const auto p = validate(kBase);
    auto rng = make_stream(5, 0, StreamRole::Init);
    std::vector<double> x(100000);
    for (double& v : x) {
        v = draw_stationary_variance(p, rng);
    }
    // shape 5, scale 0.05
    const double sd = std::sqrt(5 * 0.05 * 0.05);
    CHECK(std::abs(mean_of(x) - 0.25) < 3 * sd / std::sqrt(1e5));
    CHECK(std::abs(var_of(x) - 0.0125) < 0.03 * 0.0125);
    CHECK(*std::min_element(x.begin(), x.end()) > 0.0);

    auto rng2 = make_stream(5, 0, StreamRole::Init);
    CHECK(draw_stationary_variance(validate(HestonParams{0.1, 0.5, 0.3, 0.0, 0.0}), rng2) == 0.3);
}

TEST_CASE("constant variance gives Gaussian returns")
{
    const HestonParams p{0.1, 0.5, 0.2, 0.0, 0.3};
    SimulationOptions opt;
    opt.record_variance = true;
    opt.stationary_start = false;
    const auto path = simulate(model::Heston{p}, SamplingGrid{0.5, 200000, 4}, 3, opt);
    REQUIRE(path.variance_path);
    for (double v : *path.variance_path) {
        REQUIRE(v == doctest::Approx(0.2).epsilon(1e-12));
    }
    const auto& y = path.returns.values;
    const double var = 0.2 * 0.5;
    CHECK(std::abs(mean_of(y) - (0.1 - 0.1) * 0.5) < 3.5 * std::sqrt(var / y.size()));
    CHECK(std::abs(var_of(y) - var) < 3.5 * var * std::sqrt(2.0 / y.size()));
    const auto s = sample_moments(path.returns, 3);
    for (int m = 1; m <= 3; ++m) {
        CHECK(std::abs(s.cov(m)) < 4 * var / std::sqrt(static_cast<double>(y.size())));
    }
}

TEST_CASE("baseline path matches population moments")
{
    const auto path = simulate(model::Heston{kBase}, SamplingGrid{1.0, 400000, 20}, 8);
    const auto g = population_gamma(validate(kBase), 1.0);
    CHECK(g.mean == doctest::Approx(0.0));
    CHECK(g.variance == doctest::Approx(0.2614889).epsilon(1e-6));
    const auto& y = path.returns.values;
    // the mean has long-run variance 0.4875 rather than var(y)
    CHECK(std::abs(mean_of(y)) < 3 * std::sqrt(0.4875 / y.size()));
    CHECK(std::abs(var_of(y) / g.variance - 1.0) < 0.01);
}

TEST_CASE("simulation is a pure function of its inputs")
{
    const std::vector<ModelSpec> models = {
        model::Heston{kBase},
        model::ReturnJump{kBase, {0.3, JumpDist::normal(-0.05, 0.1)}},
        model::VarianceJump{kBase, {0.5, JumpDist::exponential(0.05)}},
        model::TwoFactor{{0.1, {0.1, 0.15, 0.08}, {1.0, 0.1, 0.2}}},
    };
    for (const auto& m : models) {
        SimulationOptions opt;
        opt.record_variance = true;
        opt.replication = 4;
        const auto a = simulate(m, SamplingGrid{1.0, 5000, 5}, 42, opt);
        const auto b = simulate(m, SamplingGrid{1.0, 5000, 5}, 42, opt);
        CHECK(a.returns.values == b.returns.values);
        CHECK(*a.variance_path == *b.variance_path);
        for (double v : *a.variance_path) {
            REQUIRE(v >= 0.0);
        }
        opt.replication = 5;
        const auto c = simulate(m, SamplingGrid{1.0, 5000, 5}, 42, opt);
        CHECK(a.returns.values != c.returns.values);
        CHECK(a.seed == 42);
    }
}

TEST_CASE("stationary start keeps the gamma law")
{
    SimulationOptions opt;
    opt.record_variance = true;
    const int thin = 100;
    const auto path = simulate(model::Heston{kBase}, SamplingGrid{1.0, 2000 * thin, 10}, 19, opt);
    std::vector<double> sampled;
    for (std::size_t i = thin - 1; i < path.variance_path->size(); i += thin) {
        sampled.push_back((*path.variance_path)[i]);
    }
    const auto p = validate(kBase);
    auto rng = make_stream(1234, 0, StreamRole::Init);
    std::vector<double> fresh(sampled.size());
    for (double& v : fresh) {
        v = draw_stationary_variance(p, rng);
    }
    const double n = static_cast<double>(sampled.size());
    // critical value of the two-sample test at alpha = 0.01
    CHECK(ks_statistic(sampled, fresh) < 1.628 * std::sqrt(2.0 / n));
}

TEST_CASE("lag covariances decay geometrically")
{
    const auto path = simulate(model::Heston{kBase}, SamplingGrid{1.0, 1000000, 10}, 23);
    const int blocks = 20;
    const auto len = path.returns.values.size() / blocks;
    std::vector<std::array<double, 5>> ratios;
    for (int b = 0; b < blocks; ++b) {
        ReturnSeries part{1.0, std::vector<double>(path.returns.values.begin() + b * len,
                                                   path.returns.values.begin() + (b + 1) * len)};
        const auto s = sample_moments(part, 5);
        std::array<double, 5> r{};
        for (int m = 2; m <= 5; ++m) {
            r[m - 1] = s.cov(m) / s.cov(1);
        }
        ratios.push_back(r);
    }
    const auto s = sample_moments(path.returns, 5);
    for (int m = 2; m <= 5; ++m) {
        double mean = 0.0, sq = 0.0;
        for (const auto& r : ratios) {
            mean += r[m - 1];
        }
        mean /= blocks;
        for (const auto& r : ratios) {
            sq += (r[m - 1] - mean) * (r[m - 1] - mean);
        }
        const double se = std::sqrt(sq / (blocks - 1) / blocks);
        const double truth = std::exp(-0.1 * (m - 1));
        CHECK_MESSAGE(std::abs(s.cov(m) / s.cov(1) - truth) < 3.5 * se, "lag " << m);
    }
}

TEST_CASE("halving the substep leaves moments unchanged within MC error")
{
    const auto a = simulate(model::Heston{kBase}, SamplingGrid{1.0, 1000000, 10}, 31);
    const auto b = simulate(model::Heston{kBase}, SamplingGrid{1.0, 1000000, 20}, 32);
    const auto sa = sample_moments(a.returns, 2);
    const auto sb = sample_moments(b.returns, 2);
    const double n = 1e6;
    // var(y^2) is about 3 var(y)^2 plus the volatility clustering term; 5 is generous
    const double se_var = std::sqrt(2.0 / n * 5) * sa.variance;
    CHECK(std::abs(sa.variance - sb.variance) < 3 * se_var);
    CHECK(std::abs(sa.mean - sb.mean) < 3 * std::sqrt(2 * 0.4875 / n));
}

TEST_CASE("returns from prices")
{
    const double e = std::exp(1.0);
    const auto r = returns_from_prices({1.0, e, e * e, e * e * e}, 1.0);
    REQUIRE(r.size() == 3);
    for (double v : r.values) {
        CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    }
    const auto c = returns_from_prices(std::vector<double>(10, 3.7), 0.5);
    CHECK(c.size() == 9);
    CHECK(c.h == 0.5);
    for (double v : c.values) {
        CHECK(v == 0.0);
    }
    try {
        (void)returns_from_prices({1.0, 2.0, 0.0, 3.0}, 1.0);
        FAIL("expected NonPositivePrice");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::NonPositivePrice);
        CHECK(std::string(err.what()).find('2') != std::string::npos);
    }
    CHECK_THROWS_AS((void)returns_from_prices({1.0, 2.0, 3.0}, 1.0), Error);
}

TEST_CASE("grid validation")
{
    CHECK_THROWS_AS((void)simulate(model::Heston{kBase}, SamplingGrid{0.0, 100, 1}, 1), Error);
    CHECK_THROWS_AS((void)simulate(model::Heston{kBase}, SamplingGrid{1.0, 100, 0}, 1), Error);
}
