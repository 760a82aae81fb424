#include <doctest.h>

#include <cmath>

#include <svmm/estimate.hpp>
#include <svmm/moments.hpp>
#include <svmm/simulate.hpp>

#include <boost/random/normal_distribution.hpp>

#include "support.hpp"

using namespace svmm;
using svmm::testing::rel_err;

namespace {

const HestonParams kBase{0.125, 0.1, 0.25, 0.1, -0.7};

} // namespace

TEST_CASE("return-jump fixed point with normal jumps")
{
    const JumpSpec jump{0.2, JumpDist::normal(0.01, 0.02)};
    const auto target = d1_moment_system(validate(kBase), jump, 1.0, true);
    const auto r = extension_estimate_from(model::ReturnJump{{}, jump}, target, 1.0);
    CHECK(r.residual_norm < 1e-8);
    const auto& m = std::get<model::ReturnJump>(r.model);
    CHECK(rel_err(m.params.k, 0.1) < 1e-5);
    CHECK(rel_err(m.params.theta, 0.25) < 1e-5);
    CHECK(rel_err(m.params.rho, -0.7) < 1e-5);
    CHECK(rel_err(m.jump.lambda, 0.2) < 1e-4);
    CHECK(rel_err(m.jump.dist.sd, 0.02) < 1e-4);
}

TEST_CASE("return-jump model nests Heston")
{
    const auto p = validate(kBase);
    const auto g = population_gamma(p, 1.0);
    const auto hm = heston_higher_moments(p, 1.0);
    ExtendedMomentSystem target{"heston", {{"mean", g.mean}, {"variance", g.variance}, {"cov1", g.cov1},
                                           {"cov2", g.cov2}, {"covsq1", g.covsq1}, {"cov_y_ysq1", hm.cov_y_ysq1},
                                           {"cm3", hm.cm3}, {"cm4", hm.cm4}}};
    const auto r = extension_estimate_from(model::ReturnJump{{}, {0.1, JumpDist::normal(0, 1)}}, target, 1.0);
    const auto& m = std::get<model::ReturnJump>(r.model);
    CHECK(r.residual_norm < 1e-6);
    CHECK(m.jump.lambda * m.jump.dist.raw_moment(2) < 1e-6);
    CHECK(rel_err(m.params.k, 0.1) < 1e-3);
    CHECK(rel_err(m.params.theta, 0.25) < 1e-3);
}

TEST_CASE("variance-jump fixed point")
{
    const HestonParams p{0.125, 0.5, 0.2, 0.2, -0.5};
    const JumpSpec jump{0.5, JumpDist::exponential(0.05)};
    const auto target = d2_moment_system(validate(p), jump, 1.0);
    const auto r = extension_estimate_from(model::VarianceJump{{}, jump}, target, 1.0);
    CHECK(r.residual_norm < 1e-8);
    const auto& m = std::get<model::VarianceJump>(r.model);
    CHECK(rel_err(m.params.k, 0.5) < 1e-4);
    CHECK(rel_err(m.jump.lambda, 0.5) < 1e-3);
    CHECK(rel_err(m.jump.dist.mean, 0.05) < 1e-3);
}

TEST_CASE("two-factor fixed point, canonical ordering")
{
    const TwoFactorParams p{0.1, {1.5, 0.1, 0.3}, {0.1, 0.15, 0.1}};
    const auto target = d3_moment_system(p, 1.0, true);
    const auto r = extension_estimate_from(model::TwoFactor{}, target, 1.0);
    CHECK(r.residual_norm < 1e-8);
    const auto& m = std::get<model::TwoFactor>(r.model).params;
    CHECK(m.factor1.k < m.factor2.k);
    CHECK(rel_err(m.factor1.k, 0.1) < 1e-4);
    CHECK(rel_err(m.factor2.k, 1.5) < 1e-4);
    CHECK(rel_err(m.factor1.theta, 0.15) < 1e-4);
    CHECK(rel_err(m.mu, 0.1) < 1e-4);
}

TEST_CASE("extension estimator rejects unsupported requests")
{
    ExtendedMomentSystem t{"x", {{"variance", 1.0}}};
    CHECK_THROWS_AS((void)extension_estimate_from(model::Heston{kBase}, t, 1.0), Error);
    CHECK_THROWS_AS((void)extension_estimate_from(model::VarianceJump{kBase, {0.1, JumpDist::normal(0, 1)}}, t, 1.0),
                    Error);
}

TEST_CASE("batch standard errors of iid normal statistics")
{
    Rng rng(7);
    boost::random::normal_distribution<double> z;
    ReturnSeries s{1.0, std::vector<double>(200000)};
    for (auto& v : s.values) {
        v = z(rng);
    }
    const auto se = batch_standard_errors(s, 50);
    const double n = static_cast<double>(s.size());
    // 50 batches give the SE to about 10% relative accuracy
    CHECK(rel_err(se.at("mean"), 1 / std::sqrt(n)) < 0.35);
    CHECK(rel_err(se.at("variance"), std::sqrt(2 / n)) < 0.35);
    CHECK(rel_err(se.at("cov1"), 1 / std::sqrt(n)) < 0.35);
    CHECK(rel_err(se.at("cm4"), std::sqrt(96 / n)) < 0.35);
}

TEST_CASE("return-jump fit on a jump-free path drops the jump component")
{
    SimulationOptions opt;
    opt.replication = 0;
    const auto path = simulate(model::ReturnJump{kBase, {0.0, JumpDist::normal(0, 0)}}, SamplingGrid{1.0, 400000, 20},
                               3, opt);
    const auto r = extension_estimate(model::ReturnJump{{}, {0.1, JumpDist::normal(0, 1)}}, path.returns);
    const auto& m = std::get<model::ReturnJump>(r.model);
    bool dropped = false;
    for (const auto& d : r.diagnostics) {
        dropped = dropped || d == "jump_component_dropped";
    }
    CHECK(dropped);
    CHECK(m.jump.lambda == 0.0);
    // theta and mu are pinned by the first two moments; replication spread at this N is about 0.001
    CHECK(std::abs(m.params.theta - 0.25) < 0.005);
    CHECK(std::abs(m.params.mu - 0.125) < 0.005);
}
