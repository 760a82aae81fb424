#include <doctest.h>

#include <svmm/verify.hpp>

using namespace svmm;

TEST_CASE("engine verification report")
{
    const auto lines = verify_engine(20, 1e-10, 3);
    REQUIRE(lines.size() == 7);
    for (const auto& l : lines) {
        CHECK_MESSAGE(l.pass, l.identity);
    }
    // an impossible tolerance must fail the numeric identities but not the exact ones
    const auto strict = verify_engine(5, -1.0, 3);
    CHECK_FALSE(strict[1].pass);
    CHECK(strict[5].pass);
}

TEST_CASE("random parameter grid respects its ranges")
{
    for (const auto& pt : random_parameter_grid(200, 17)) {
        const auto& p = pt.params;
        CHECK((p.k >= 0.05 && p.k <= 3.0));
        CHECK(p.sigma_v * p.sigma_v <= 2 * p.k * p.theta);
        CHECK((pt.h == 0.5 || pt.h == 1.0 || pt.h == 2.0));
        (void)validate(p);
    }
}
