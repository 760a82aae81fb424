#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>

#include <svmm/asymptotics.hpp>

#include "support.hpp"

using namespace svmm;
using svmm::testing::rel_err;

namespace {

const HestonParams kBase{0.125, 0.1, 0.25, 0.1, -0.7};

} // namespace

TEST_CASE("exact long-run variance of the mean")
{
    CHECK(sigma11_exact(validate(kBase), 1.0) == doctest::Approx(0.4875).epsilon(1e-14));
    CHECK(sigma11_exact(validate(HestonParams{0.1, 0.4, 0.3, 0.0, 0.5}), 2.0) == doctest::Approx(0.6));
    for (const auto& pt : svmm::testing::random_heston_grid(100, 99)) {
        const auto p = validate(pt.params);
        CHECK(rel_err(sigma11_from_covariances(p, pt.h), sigma11_exact(p, pt.h)) < 1e-12);
    }
}

TEST_CASE("covariance constants")
{
    const auto c = appendix_c_constants(validate(kBase), 1.0);
    const double ht = -std::expm1(-0.1) / 0.1;
    CHECK(c.C == doctest::Approx(ht * ht / (4 * -std::expm1(-0.2))).epsilon(1e-14));
    // the quoted 1.248964 is rounded from a 6-digit intermediate
    CHECK(std::abs(c.C - 1.248964) < 1e-5);
    CHECK(c.Cy == doctest::Approx(-5.0).epsilon(1e-12));
    CHECK(c.F1 == doctest::Approx(std::pow((1 - std::exp(-0.1)) / 0.1, 3) * std::exp(-0.1) / 8));
    CHECK(c.C53 == doctest::Approx(-c.F1 / (1 - std::exp(-0.3))));
    for (const auto& pt : svmm::testing::random_heston_grid(100, 5)) {
        const auto t = appendix_c_constants(validate(pt.params), pt.h);
        for (const auto& [name, v] : t.entries()) {
            CHECK_MESSAGE(std::isfinite(v), name);
        }
        CHECK(t.C > 0.0);
    }
}

TEST_CASE("HAC of white noise reduces to the variance")
{
    Rng rng(11);
    boost::random::normal_distribution<double> z(0.0, 0.5);
    ReturnSeries y{1.0, std::vector<double>(200000)};
    for (double& v : y.values) {
        v = z(rng);
    }
    const auto s = sigma_hac(y);
    CHECK(s.bandwidth == static_cast<int>(std::floor(1.2 * std::cbrt(200000.0))));
    CHECK(s.value(0, 0) == doctest::Approx(0.25).epsilon(0.03));
    // z^1 of a normal has variance 2 sd^4
    CHECK(s.value(1, 1) == doctest::Approx(2 * std::pow(0.25, 2)).epsilon(0.05));
    CHECK(s.provenance[0][0] == Provenance::Hac);
}

TEST_CASE("HAC matrices are PSD on simulated data")
{
    for (int rep = 0; rep < 50; ++rep) {
        SimulationOptions opt;
        opt.replication = static_cast<std::uint64_t>(rep);
        const auto path = simulate(model::Heston{kBase}, SamplingGrid{1.0, 20000, 4}, 2024, opt);
        const auto s = sigma_hac(path.returns, validate(kBase));
        CHECK((s.value - s.value.transpose()).cwiseAbs().maxCoeff() == 0.0);
        const Eigen::SelfAdjointEigenSolver<Matrix5> es(s.value);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
    }
}

TEST_CASE("HAC requires enough data")
{
    CHECK_THROWS_AS((void)sigma_hac(ReturnSeries{1.0, std::vector<double>(20, 0.1)}), Error);
}

TEST_CASE("Jacobian of the estimator map")
{
    const auto p = validate(kBase);
    const auto g = population_gamma(p, 1.0);
    const auto J = jacobian_g(g, 1.0);
    CHECK(J.value(0, 0) == 0.0);
    CHECK(J.value(0, 1) == 0.0);
    CHECK(J.value(0, 2) == 1.0 / g.cov1);
    CHECK(J.value(0, 3) == -1.0 / g.cov2);
    CHECK(J.value(0, 4) == 0.0);
    CHECK(J.step_drift <= 1e-4);

    // first-order Taylor check along every parameter direction
    const Matrix5 Jinv = J.value.inverse();
    const std::array<double, 5> truth{0.1, 0.25, 0.1, 0.125, -0.7};
    for (int i = 0; i < 5; ++i) {
        Eigen::Matrix<double, 5, 1> dtheta = Eigen::Matrix<double, 5, 1>::Zero();
        dtheta(i) = 1e-5;
        const auto out = estimator_map<double>(MomentVector::from_eigen(g.to_eigen() + Jinv * dtheta), 1.0);
        for (int j = 0; j < 5; ++j) {
            CHECK(std::abs(out[static_cast<std::size_t>(j)] - truth[static_cast<std::size_t>(j)] - dtheta(j)) < 1e-8);
        }
    }
    MomentVector bad = g;
    bad.cov2 = -bad.cov2;
    CHECK_THROWS_AS((void)jacobian_g(bad, 1.0), Error);
}

TEST_CASE("delta-method standard errors")
{
    const auto se = param_covariance(Matrix5::Identity(), Matrix5::Identity(), 100);
    for (double v : se) {
        CHECK(v == doctest::Approx(0.1));
    }
    const auto p = validate(kBase);
    auto g = population_gamma(p, 1.0);
    const auto J = jacobian_g(g, 1.0).value;
    Matrix5 S = Matrix5::Identity() * 0.3;
    S(0, 0) = 0.4875;
    const auto a = param_covariance(S, J, 100000);
    const auto b = param_covariance(S, J, 400000);
    for (int i = 0; i < 5; ++i) {
        CHECK(a[static_cast<std::size_t>(i)] == doctest::Approx(2 * b[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
}

TEST_CASE("estimate with standard errors")
{
    const auto path = simulate(model::Heston{kBase}, SamplingGrid{1.0, 100000, 10}, 77);
    SigmaMatrix sigma;
    const auto r = mm_estimate_with_stderr(path.returns, {}, &sigma);
    REQUIRE(r.stderr_);
    CHECK(r.stderr_->mu > 0.0);
    CHECK(r.stderr_->k > 0.0);
    CHECK(sigma.bandwidth == hac_bandwidth(100000));
}
