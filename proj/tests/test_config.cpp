#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <svmm/config.hpp>
#include <svmm/estimate.hpp>

using namespace svmm;

namespace {

std::string temp_file(const std::string& name, const std::string& text)
{
    const auto path = (std::filesystem::temp_directory_path() / ("svmm_test_" + name)).string();
    std::ofstream(path) << text;
    return path;
}

} // namespace

TEST_CASE("config grammar")
{
    const auto c = Config::parse("# comment\n  mu = 0.2  # trailing\n\nk=0.5\nk = 0.7\njump.lambda = 0.3\n");
    CHECK(c.get_double("mu", 0) == 0.2);
    CHECK(c.get_double("k", 0) == 0.7);
    CHECK(c.get_double("theta", 0.25) == 0.25);
    CHECK(c.entries().size() == 3);
    CHECK(c.unknown_keys({"mu", "k"}) == std::vector<std::string>{"jump.lambda"});
    CHECK(c.unknown_keys({"mu", "k", "jump.*"}).empty());
    CHECK(Config::parse("N = 100K").get_int("N", 0) == 100000);
    CHECK(Config::parse("N = 4e6").get_int("N", 0) == 4000000);
    CHECK_THROWS_AS((void)Config::parse("N = 1.5").get_int("N", 0), Error);
    CHECK_THROWS_AS((void)Config::parse("just words"), Error);
    CHECK_THROWS_AS((void)Config::parse("mu = abc").get_double("mu", 0), Error);
    CHECK_THROWS_AS((void)Config::parse("x = maybe").get_bool("x", false), Error);
    CHECK_THROWS_AS((void)Config::load("/nonexistent/file.cfg"), Error);
}

TEST_CASE("models from config")
{
    const auto base = model_from_config(Config::parse("setting = S0\nrho = -0.3"));
    const auto& h = std::get<model::Heston>(base);
    CHECK(h.params == HestonParams{0.125, 0.1, 0.25, 0.1, -0.3});
    CHECK(model_cli_name(base) == "heston");

    const auto d1 = model_from_config(Config::parse("setting = S0\nmodel = svj-return\njump.lambda = 0.2\n"
                                                    "jump.dist = normal\njump.mean = 0.01\njump.sd = 0.02"));
    const auto& rj = std::get<model::ReturnJump>(d1);
    CHECK(rj.jump.lambda == 0.2);
    CHECK(rj.jump.dist == JumpDist::normal(0.01, 0.02));

    const auto d2 = model_from_config(Config::parse("setting = S0\njump.lambda = 0.5\njump.dist = exponential\n"
                                                    "jump.mean = 0.05"),
                                      std::string("svj-variance"));
    CHECK(std::get<model::VarianceJump>(d2).jump.dist == JumpDist::exponential(0.05));

    const auto d3 = model_from_config(Config::parse("model = two-factor\nmu = 0.1\nfactor1.k = 0.1\nfactor1.theta = 0.15\n"
                                                    "factor1.sigma_v = 0.08\nfactor2.k = 1\nfactor2.theta = 0.1\n"
                                                    "factor2.sigma_v = 0.2"));
    CHECK(std::get<model::TwoFactor>(d3).params.factor2.k == 1.0);

    CHECK_THROWS_AS((void)model_from_config(Config::parse("setting = S0\nmodel = garch")), Error);
    CHECK_THROWS_AS((void)model_from_config(Config::parse("setting = S0\nsigma_v = 2")), Error);
    CHECK(grid_from_config(Config::parse("h = 0.5\nN = 1000\nsubsteps = 4")).n == 1000);
    CHECK_THROWS_AS((void)grid_from_config(Config::parse("h = -1")), Error);
}

TEST_CASE("experiment specs from config")
{
    const auto s = experiment_from_config(Config::parse("settings = S0,mine\nsetting.mine = 0.1,0.2,0.3,0.2,0.1\n"
                                                        "N = 25K,100K\nh = 0.5,1\nreplications = 10\ntables = grid,scaling"));
    REQUIRE(s.settings.size() == 2);
    CHECK(s.settings[1].name == "mine");
    CHECK(s.settings[1].params.theta == 0.3);
    CHECK(s.N_list == std::vector<std::int64_t>{25000, 100000});
    CHECK(s.h_list == std::vector<double>{0.5, 1.0});
    CHECK(s.replications == 10);
    CHECK(s.tables.size() == 2);
    CHECK(experiment_from_config(Config::parse("")).settings[0].name == "S0");
    CHECK_THROWS_AS((void)experiment_from_config(Config::parse("settings = S7")), Error);
}

TEST_CASE("CSV round trip is exact")
{
    const auto path = simulate(model::Heston{{0.125, 0.1, 0.25, 0.1, -0.7}}, SamplingGrid{1.0, 100000, 2}, 9,
                               SimulationOptions{0, true, true, -1});
    const auto text = returns_csv(path);
    CHECK(text.rfind("index,log_return,variance\n", 0) == 0);
    const auto file = temp_file("returns.csv", text);
    const auto back = read_returns_csv(file, 1.0);
    CHECK(back.values == path.returns.values);
    const auto a = mm_estimate(path.returns);
    const auto b = mm_estimate(back);
    CHECK(a.params == b.params);
    std::remove(file.c_str());

    const auto prices = temp_file("prices.csv", "date,price\n1,100\n2,101\n3,99.5\n4,100.25\n");
    CHECK(read_prices_csv(prices) == std::vector<double>{100, 101, 99.5, 100.25});
    std::remove(prices.c_str());
    const auto bare = temp_file("bare.csv", "0.1\n-0.2\n0.05\n");
    CHECK(read_returns_csv(bare, 2.0).values.size() == 3);
    std::remove(bare.c_str());
    CHECK_THROWS_AS((void)read_returns_csv("/nonexistent.csv", 1.0), Error);
}
