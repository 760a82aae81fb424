// svmm command-line front end.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <svmm/asymptotics.hpp>
#include <svmm/config.hpp>
#include <svmm/engine.hpp>
#include <svmm/estimate.hpp>
#include <svmm/experiments.hpp>
#include <svmm/moments.hpp>
#include <svmm/simulate.hpp>
#include <svmm/verify.hpp>

using json = nlohmann::ordered_json;
using namespace svmm;

namespace {

constexpr const char* kSchema = "svmm/1";

/// Thrown for bad flag combinations that CLI11 cannot detect itself.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json heston_json(const HestonParams& p)
{
    return {{"mu", num(p.mu)}, {"k", num(p.k)}, {"theta", num(p.theta)}, {"sigma_v", num(p.sigma_v)}, {"rho", num(p.rho)}};
}

json jump_json(const JumpSpec& j)
{
    json out{{"lambda", num(j.lambda)}, {"dist", j.dist.kind == JumpDist::Kind::Normal ? "normal" : "exponential"},
             {"mean", num(j.dist.mean)}};
    if (j.dist.kind == JumpDist::Kind::Normal) {
        out["sd"] = num(j.dist.sd);
    }
    return out;
}

json model_json(const ModelSpec& m)
{
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, model::Heston>) {
                return heston_json(x.params);
            } else if constexpr (std::is_same_v<T, model::ReturnJump> || std::is_same_v<T, model::VarianceJump>) {
                auto j = heston_json(x.params);
                j["jump"] = jump_json(x.jump);
                return j;
            } else {
                const auto f = [](const CirFactor& c) {
                    return json{{"k", num(c.k)}, {"theta", num(c.theta)}, {"sigma_v", num(c.sigma_v)}};
                };
                return json{{"mu", num(x.params.mu)}, {"factor1", f(x.params.factor1)}, {"factor2", f(x.params.factor2)}};
            }
        },
        m);
}

Config load_config(const std::string& path, const std::vector<std::string>& known)
{
    auto c = Config::load(path);
    for (const auto& key : c.unknown_keys(known)) {
        std::cerr << "warning: unknown config key '" << key << "' in " << path << '\n';
    }
    return c;
}

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(Errc::IoError, "cannot write " + path);
    }
    out << text;
    if (!out) {
        throw Error(Errc::IoError, "write failed for " + path);
    }
}

ModelSpec model_kind(const std::string& name)
{
    const HestonParams p;
    if (name == "heston") {
        return model::Heston{p};
    }
    if (name == "svj-return") {
        return model::ReturnJump{p, {}};
    }
    if (name == "svj-variance") {
        return model::VarianceJump{p, {0.0, JumpDist::exponential(0.0)}};
    }
    if (name == "two-factor") {
        return model::TwoFactor{};
    }
    throw UsageError("--model must be heston, svj-return, svj-variance or two-factor");
}

struct SimulateArgs {
    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> model;
};

int run_simulate(const SimulateArgs& a)
{
    const auto cfg = load_config(a.config, model_config_keys());
    const auto model = model_from_config(cfg, a.model);
    const auto grid = grid_from_config(cfg);
    const auto path = simulate(model, grid, *a.seed, simulation_options_from_config(cfg));
    write_text(a.out, returns_csv(path));
    return 0;
}

struct EstimateArgs {
    std::string returns, prices, config, out, model = "heston", jump_dist;
    std::optional<double> h;
    int M = 2;
    bool stderr_ = false;
};

int run_estimate(const EstimateArgs& a)
{
    if (a.returns.empty() == a.prices.empty()) {
        throw UsageError("exactly one of --returns or --prices is required");
    }
    double h = 1.0;
    if (!a.config.empty()) {
        h = load_config(a.config, model_config_keys()).get_double("h", 1.0);
    }
    if (a.h) {
        h = *a.h;
    }
    const auto series = a.returns.empty() ? returns_from_prices(read_prices_csv(a.prices), h) : read_returns_csv(a.returns, h);

    json out{{"schema", kSchema}, {"command", "estimate"}, {"model", a.model}, {"n", series.size()}, {"h", h}};
    double wall = 0.0;
    if (a.model == "heston") {
        EstimatorConfig cfg;
        cfg.M = a.M;
        EstimateResult r;
        SigmaMatrix sigma;
        if (a.stderr_) {
            r = mm_estimate_with_stderr(series, cfg, &sigma);
        } else {
            r = mm_estimate(series, cfg);
        }
        out["M"] = a.M;
        out["params"] = heston_json(r.params);
        out["diagnostics"] = r.diagnostics;
        if (r.stderr_) {
            out["stderr"] = heston_json(*r.stderr_);
            json prov = json::array();
            for (const auto& row : sigma.provenance) {
                json jr = json::array();
                for (auto p : row) {
                    jr.push_back(p == Provenance::Exact ? "exact" : "hac");
                }
                prov.push_back(jr);
            }
            out["sigma_provenance"] = prov;
            out["hac_bandwidth"] = sigma.bandwidth;
            out["hac_sigma11"] = num(sigma.hac11);
        }
        wall = r.wall_time;
    } else {
        if (a.stderr_) {
            throw UsageError("--stderr is only available for --model heston");
        }
        auto kind = model_kind(a.model);
        if (!a.jump_dist.empty()) {
            const auto dist = a.jump_dist == "exponential" ? JumpDist::exponential(0.0) : JumpDist::normal(0.0, 0.0);
            if (a.jump_dist != "normal" && a.jump_dist != "exponential") {
                throw UsageError("--jump-dist must be normal or exponential");
            }
            if (auto* m = std::get_if<model::ReturnJump>(&kind)) {
                m->jump.dist = dist;
            } else if (auto* v = std::get_if<model::VarianceJump>(&kind)) {
                v->jump.dist = dist;
            }
        }
        const auto r = extension_estimate(kind, series);
        out["params"] = model_json(r.model);
        out["residual_norm"] = num(r.residual_norm);
        out["converged"] = r.converged;
        out["iterations"] = r.iterations;
        out["diagnostics"] = r.diagnostics;
        wall = r.wall_time;
    }
    write_text(a.out, out.dump(2) + "\n");
    // timing is not part of the data
    std::fprintf(stderr, "estimation time %.6f s\n", wall);
    return 0;
}

int run_moments(const std::string& config, const std::optional<std::string>& model_name, const std::string& out_path)
{
    const auto cfg = load_config(config, model_config_keys());
    const auto model = model_from_config(cfg, model_name);
    const double h = cfg.get_double("h", 1.0);
    if (!(h > 0.0)) {
        throw Error(Errc::InvalidGrid, "h must be positive");
    }
    json moments = json::object();
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, model::Heston>) {
                const auto p = validate(m.params);
                const auto g = population_gamma(p, h);
                const auto hm = heston_higher_moments(p, h);
                moments = {{"mean", g.mean},     {"variance", g.variance},   {"cov1", g.cov1},
                           {"cov2", g.cov2},     {"covsq1", g.covsq1},       {"cov_y_ysq1", hm.cov_y_ysq1},
                           {"cm3", hm.cm3},      {"cm4", hm.cm4},            {"sigma11", sigma11_exact(p, h)}};
                for (int lag = 3; lag <= 5; ++lag) {
                    moments["cov" + std::to_string(lag)] = cov_lag_m(p, h, lag);
                }
            } else {
                ExtendedMomentSystem sys;
                if constexpr (std::is_same_v<T, model::ReturnJump>) {
                    sys = d1_moment_system(validate(m.params), m.jump, h, true);
                } else if constexpr (std::is_same_v<T, model::VarianceJump>) {
                    sys = d2_moment_system(validate(m.params), m.jump, h);
                } else {
                    sys = d3_moment_system(m.params, h, true);
                }
                for (const auto& [name, value] : sys.entries) {
                    moments[name] = num(value);
                }
            }
        },
        model);
    json out{{"schema", kSchema}, {"command", "moments"}, {"model", model_cli_name(model)}, {"h", h},
             {"params", model_json(model)}, {"moments", moments}};
    write_text(out_path, out.dump(2) + "\n");
    return 0;
}

int run_derive(int order, bool jumps, const std::string& out_path)
{
    const auto& eng = jumps ? variance_jump_engine() : heston_engine();
    const Poly p = eng.central_moment_return(order);
    write_text(out_path, p.to_string() + "\n");
    return 0;
}

int run_verify(int grid, double tol, std::uint64_t seed)
{
    bool all = true;
    for (const auto& line : verify_engine(grid, tol, seed)) {
        all = all && line.pass;
        char buf[256];
        if (line.identity.find("symbolic") != std::string::npos) {
            std::snprintf(buf, sizeof buf, "%s %s: exact rational equality\n", line.pass ? "PASS" : "FAIL",
                          line.identity.c_str());
        } else {
            std::snprintf(buf, sizeof buf, "%s %s: max rel err %.3e over %s (tol %.1e)\n", line.pass ? "PASS" : "FAIL",
                          line.identity.c_str(), line.max_rel_err, line.detail.c_str(), tol);
        }
        std::cout << buf;
    }
    return all ? 0 : 1;
}

int run_experiment_cmd(const std::string& spec_path, bool paper, const std::string& out_dir, std::optional<int> threads)
{
    auto spec = experiment_from_config(load_config(spec_path, experiment_config_keys()));
    if (paper) {
        spec = paper_scale(spec);
    }
    if (threads) {
        spec.threads = *threads;
    }
    const auto table = run_experiment(spec);
    std::ostringstream tables;
    for (const auto& name : spec.tables) {
        const std::string csv = name == "grid" ? grid_csv(table) : scaling_csv(scaling_analysis(table));
        if (out_dir.empty()) {
            tables << "# table: " << name << '\n' << csv;
        } else {
            std::filesystem::create_directories(out_dir);
            write_text((std::filesystem::path(out_dir) / (name + ".csv")).string(), csv);
        }
    }
    if (out_dir.empty()) {
        std::cout << tables.str();
        std::cerr << summary_text(table);
    } else {
        std::cout << summary_text(table);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Moment-method estimation for affine stochastic-volatility models"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "simulate log-returns to CSV");
    simulate_cmd->add_option("--config", sim.config, "key = value model file")->required()->check(CLI::ExistingFile);
    simulate_cmd->add_option("--seed", sim.seed, "master seed")->required();
    simulate_cmd->add_option("--out", sim.out, "output CSV (default stdout)");
    simulate_cmd->add_option("--model", sim.model, "heston|svj-return|svj-variance|two-factor");

    EstimateArgs est;
    auto* estimate_cmd = app.add_subcommand("estimate", "estimate parameters from returns or prices");
    // --h is the observation interval here, so help is long-form only
    estimate_cmd->set_help_flag("--help", "print this help message and exit");
    estimate_cmd->add_option("--returns", est.returns, "CSV with a log_return column")->check(CLI::ExistingFile);
    estimate_cmd->add_option("--prices", est.prices, "CSV with a price column")->check(CLI::ExistingFile);
    estimate_cmd->add_option("--config", est.config, "config file supplying h")->check(CLI::ExistingFile);
    estimate_cmd->add_option("--h", est.h, "observation interval (default 1)");
    estimate_cmd->add_option("--model", est.model, "heston|svj-return|svj-variance|two-factor");
    estimate_cmd->add_option("--jump-dist", est.jump_dist, "normal|exponential (jump models)");
    estimate_cmd->add_option("--M", est.M, "lag depth for k")->check(CLI::Range(2, 10));
    estimate_cmd->add_flag("--stderr", est.stderr_, "add delta-method standard errors");
    estimate_cmd->add_option("--out", est.out, "output JSON (default stdout)");

    std::string moments_config, moments_out;
    std::optional<std::string> moments_model;
    auto* moments_cmd = app.add_subcommand("moments", "population moments for a configured model");
    moments_cmd->add_option("--config", moments_config, "key = value model file")->required()->check(CLI::ExistingFile);
    moments_cmd->add_option("--model", moments_model, "heston|svj-return|svj-variance|two-factor");
    moments_cmd->add_option("--out", moments_out, "output JSON (default stdout)");

    int order = 2;
    bool derive_jumps = false;
    std::string derive_out;
    auto* derive_cmd = app.add_subcommand("derive", "print the symbolic central return moment");
    derive_cmd->add_option("--order", order, "moment order l")->required()->check(CLI::Range(1, 6));
    derive_cmd->add_flag("--variance-jumps", derive_jumps, "use the variance-jump engine");
    derive_cmd->add_option("--out", derive_out, "output file (default stdout)");

    int grid = 100;
    double tol = 1e-10;
    std::uint64_t verify_seed = 1;
    auto* verify_cmd = app.add_subcommand("verify", "engine against closed forms");
    verify_cmd->add_option("--grid", grid, "number of random parameter sets")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--tol", tol, "relative tolerance");
    verify_cmd->add_option("--seed", verify_seed, "grid seed");

    std::string spec_path, exp_out;
    bool paper = false;
    std::optional<int> threads;
    auto* experiment_cmd = app.add_subcommand("experiment", "Monte Carlo replication study");
    experiment_cmd->add_option("--spec", spec_path, "experiment spec file")->required()->check(CLI::ExistingFile);
    experiment_cmd->add_flag("--paper-scale", paper, "400 replications; a single-N spec moves to N = 400K");
    experiment_cmd->add_option("--out", exp_out, "directory for CSV tables (default stdout)");
    experiment_cmd->add_option("--threads", threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app.help() : subs.front()->help());
        return 2;
    }

    try {
        if (*simulate_cmd) {
            return run_simulate(sim);
        }
        if (*estimate_cmd) {
            return run_estimate(est);
        }
        if (*moments_cmd) {
            return run_moments(moments_config, moments_model, moments_out);
        }
        if (*derive_cmd) {
            return run_derive(order, derive_jumps, derive_out);
        }
        if (*verify_cmd) {
            return run_verify(grid, tol, verify_seed);
        }
        if (*experiment_cmd) {
            return run_experiment_cmd(spec_path, paper, exp_out, threads);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << app.get_subcommands().front()->help();
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: IoError: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
