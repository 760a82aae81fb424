#include <svmm/estimate.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <optional>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace svmm {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFellerShrink = 1.0 - 1e-12;

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

enum class Kind { ReturnJump, VarianceJump, TwoFactor };

// A natural-units box for one coordinate: log-uniform when `log_scale`.
struct Range {
    double lo, hi;
    bool log_scale;
};

struct Problem {
    Kind kind;
    JumpDist::Kind jump_kind = JumpDist::Kind::Normal;
    bool nested = false;  ///< jump models with lambda fixed at 0 (the five Heston coordinates)
    JumpDist nested_dist;
    double h = 1.0;
    int extra_lags = 0;  ///< return jumps: also match cov3..cov<extra_lags>
    std::vector<std::string> names;
    Vec target;
    Vec scale;

    [[nodiscard]] int dim() const
    {
        if (nested) {
            return 5;
        }
        switch (kind) {
        case Kind::ReturnJump: return jump_kind == JumpDist::Kind::Normal ? 8 : 7;
        case Kind::VarianceJump: return 7;
        case Kind::TwoFactor: return 7;
        }
        return 0;
    }

    [[nodiscard]] ModelSpec decode(const Vec& x) const
    {
        if (kind == Kind::TwoFactor) {
            TwoFactorParams p;
            p.mu = x(0);
            p.factor1.k = std::exp(x(1));
            p.factor1.theta = std::exp(x(2));
            p.factor1.sigma_v = std::sqrt(2.0 * p.factor1.k * p.factor1.theta) * sigmoid(x(3)) * kFellerShrink;
            p.factor2.k = std::exp(x(4));
            p.factor2.theta = std::exp(x(5));
            p.factor2.sigma_v = std::sqrt(2.0 * p.factor2.k * p.factor2.theta) * sigmoid(x(6)) * kFellerShrink;
            return model::TwoFactor{p};
        }
        HestonParams p;
        p.mu = x(0);
        p.k = std::exp(x(1));
        p.theta = std::exp(x(2));
        p.sigma_v = std::sqrt(2.0 * p.k * p.theta) * sigmoid(x(3)) * kFellerShrink;
        p.rho = std::tanh(x(4));
        JumpSpec j;
        if (nested) {
            j.dist = nested_dist;
        } else {
            j.lambda = std::exp(x(5));
            if (kind == Kind::ReturnJump && jump_kind == JumpDist::Kind::Normal) {
                j.dist = JumpDist::normal(x(6), std::exp(x(7)));
            } else {
                j.dist = JumpDist::exponential(std::exp(x(6)));
            }
        }
        if (kind == Kind::ReturnJump) {
            return model::ReturnJump{p, j};
        }
        return model::VarianceJump{p, j};
    }

    [[nodiscard]] Vec encode_natural(const std::vector<double>& n) const
    {
        // n holds natural coordinates, with the sigma slot given as a Feller fraction in (0, 1)
        Vec x(dim());
        if (kind == Kind::TwoFactor) {
            x << n[0], std::log(n[1]), std::log(n[2]), logit(n[3]), std::log(n[4]), std::log(n[5]), logit(n[6]);
            return x;
        }
        x(0) = n[0];
        x(1) = std::log(n[1]);
        x(2) = std::log(n[2]);
        x(3) = logit(n[3]);
        x(4) = std::atanh(n[4]);
        if (nested) {
            return x;
        }
        x(5) = std::log(n[5]);
        if (kind == Kind::ReturnJump && jump_kind == JumpDist::Kind::Normal) {
            x(6) = n[6];
            x(7) = std::log(n[7]);
        } else {
            x(6) = std::log(n[6]);
        }
        return x;
    }

    [[nodiscard]] ExtendedMomentSystem population(const ModelSpec& m) const
    {
        return std::visit(
            [&](const auto& s) -> ExtendedMomentSystem {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, model::ReturnJump>) {
                    const auto p = validate(s.params);
                    auto sys = d1_moment_system(p, s.jump, h, jump_kind == JumpDist::Kind::Normal);
                    // iid return jumps leave every autocovariance at its Heston value
                    for (int m = 3; m <= extra_lags; ++m) {
                        sys.entries.emplace_back("cov" + std::to_string(m), cov_lag_m(p, h, m));
                    }
                    return sys;
                } else if constexpr (std::is_same_v<T, model::VarianceJump>) {
                    return d2_moment_system(validate(s.params), s.jump, h);
                } else if constexpr (std::is_same_v<T, model::TwoFactor>) {
                    return d3_moment_system(s.params, h, true);
                } else {
                    throw Error(Errc::UnsupportedShape, "not an extension model");
                }
            },
            m);
    }

    /// Scaled residuals; empty on any domain failure.
    [[nodiscard]] std::optional<Vec> residuals(const Vec& x) const
    {
        try {
            const auto sys = population(decode(x));
            Vec r(static_cast<Eigen::Index>(names.size()));
            for (std::size_t i = 0; i < names.size(); ++i) {
                r(static_cast<Eigen::Index>(i)) = (sys.at(names[i]) - target(static_cast<Eigen::Index>(i)))
                                                  / scale(static_cast<Eigen::Index>(i));
            }
            if (!r.allFinite()) {
                return std::nullopt;
            }
            return r;
        } catch (const Error&) {
            return std::nullopt;
        }
    }
};

int moment_order(const std::string& name)
{
    if (name == "mean") {
        return 1;
    }
    const bool lag_cov = name.size() > 3 && name.compare(0, 3, "cov") == 0 && std::isdigit(static_cast<unsigned char>(name[3]));
    if (name == "variance" || lag_cov) {
        return 2;
    }
    if (name == "cm4") {
        return 4;
    }
    return 3;
}

struct LmOutcome {
    Vec x;
    double cost = kInf;
    bool converged = false;
    int iterations = 0;
};

std::optional<Mat> jacobian(const Problem& pb, const Vec& x, const Vec& r0)
{
    Mat J(r0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double step = 1e-6 * std::max(1.0, std::abs(x(j)));
        Vec xp = x, xm = x;
        xp(j) += step;
        xm(j) -= step;
        const auto rp = pb.residuals(xp);
        const auto rm = pb.residuals(xm);
        if (rp && rm) {
            J.col(j) = (*rp - *rm) / (2.0 * step);
        } else if (rp) {
            J.col(j) = (*rp - r0) / step;
        } else if (rm) {
            J.col(j) = (r0 - *rm) / step;
        } else {
            return std::nullopt;
        }
    }
    return J;
}

LmOutcome levenberg_marquardt(const Problem& pb, Vec x, int max_iterations)
{
    LmOutcome out;
    auto r = pb.residuals(x);
    if (!r) {
        return out;
    }
    double cost = r->squaredNorm();
    double damping = 1e-3;
    int it = 0;
    for (; it < max_iterations; ++it) {
        if (cost < 1e-30) {
            out.converged = true;
            break;
        }
        const auto J = jacobian(pb, x, *r);
        if (!J) {
            break;
        }
        const Mat A = J->transpose() * *J;
        const Vec g = J->transpose() * *r;
        if (g.lpNorm<Eigen::Infinity>() < 1e-15) {
            out.converged = true;
            break;
        }
        bool accepted = false;
        bool tiny_step = false;
        while (damping < 1e14) {
            Mat M = A;
            M.diagonal() += damping * (A.diagonal().array() + 1e-12).matrix();
            const Vec dx = M.ldlt().solve(-g);
            const Vec xn = x + dx;
            const auto rn = pb.residuals(xn);
            if (rn && rn->squaredNorm() < cost) {
                const double drop = cost - rn->squaredNorm();
                tiny_step = dx.norm() < 1e-12 * (1.0 + x.norm()) || drop < 1e-14 * cost;
                x = xn;
                r = rn;
                cost = rn->squaredNorm();
                damping = std::max(damping / 3.0, 1e-12);
                accepted = true;
                break;
            }
            damping *= 4.0;
        }
        if (!accepted || tiny_step) {
            out.converged = true;
            ++it;
            break;
        }
    }
    out.x = x;
    out.cost = cost;
    out.iterations = it;
    return out;
}

double draw(const Range& r, double u)
{
    if (r.log_scale) {
        return std::exp(std::log(r.lo) + u * (std::log(r.hi) - std::log(r.lo)));
    }
    return r.lo + u * (r.hi - r.lo);
}

std::vector<Range> start_boxes(const Problem& pb)
{
    const double var = std::max(pb.target(1), 1e-12);
    const double theta = var / pb.h;
    const double sd = std::sqrt(var);
    const double mu0 = pb.target(0) / pb.h + theta / 2.0;
    const Range mu{mu0 - 0.1 * theta, mu0 + 0.1 * theta, false};
    const Range k{0.02 / pb.h, 2.0 / pb.h, true};
    const Range frac{0.1, 0.95, false};
    if (pb.kind == Kind::TwoFactor) {
        const Range th{0.1 * theta, 0.9 * theta, false};
        return {mu, k, th, frac, k, th, frac};
    }
    std::vector<Range> b{mu, k, {0.4 * theta, 1.1 * theta, false}, frac, {-0.9, 0.9, false}, {0.02 / pb.h, 1.0 / pb.h, true}};
    if (pb.kind == Kind::ReturnJump && pb.jump_kind == JumpDist::Kind::Normal) {
        b.push_back({-0.5 * sd, 0.5 * sd, false});
        b.push_back({0.02 * sd, 0.5 * sd, true});
    } else if (pb.kind == Kind::ReturnJump) {
        b.push_back({0.02 * sd, 0.5 * sd, true});
    } else {
        b.push_back({0.02 * theta, 0.5 * theta, true});
    }
    return b;
}

// Latin hypercube in the unit cube, one stratum per start and coordinate.
std::vector<std::vector<double>> latin_hypercube(int starts, int dim, std::uint64_t seed)
{
    Rng rng(seed);
    boost::random::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(starts), std::vector<double>(static_cast<std::size_t>(dim)));
    std::vector<int> perm(static_cast<std::size_t>(starts));
    for (int d = 0; d < dim; ++d) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = starts - 1; i > 0; --i) {
            const int j = static_cast<int>(unif(rng) * (i + 1));
            std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(std::min(j, i))]);
        }
        for (int s = 0; s < starts; ++s) {
            pts[static_cast<std::size_t>(s)][static_cast<std::size_t>(d)] = (perm[static_cast<std::size_t>(s)] + unif(rng)) / starts;
        }
    }
    return pts;
}

ModelSpec canonical(const ModelSpec& m)
{
    if (const auto* tf = std::get_if<model::TwoFactor>(&m)) {
        if (tf->params.factor1.k > tf->params.factor2.k) {
            auto p = tf->params;
            std::swap(p.factor1, p.factor2);
            return model::TwoFactor{p};
        }
    }
    return m;
}

struct MultiStart {
    LmOutcome best;
    int best_index = -1;
    int failed = 0;
};

MultiStart multistart(const Problem& pb, const std::optional<std::vector<double>>& seeded, const ExtensionConfig& config)
{
    const auto boxes = start_boxes(pb);
    const auto unit = latin_hypercube(config.starts, pb.dim(), config.solver_seed);
    std::vector<Vec> starts;
    if (seeded) {
        starts.push_back(pb.encode_natural(*seeded));
    }
    for (const auto& u : unit) {
        if (static_cast<int>(starts.size()) >= config.starts) {
            break;
        }
        std::vector<double> n(u.size());
        for (std::size_t d = 0; d < u.size(); ++d) {
            n[d] = draw(boxes[d], u[d]);
        }
        starts.push_back(pb.encode_natural(n));
    }

    // short runs from every start, then the most promising ones are polished
    MultiStart ms;
    std::vector<std::pair<LmOutcome, int>> probes;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        auto o = levenberg_marquardt(pb, starts[i], config.probe_iterations);
        if (!std::isfinite(o.cost)) {
            ++ms.failed;
            continue;
        }
        probes.emplace_back(std::move(o), static_cast<int>(i));
    }
    std::stable_sort(probes.begin(), probes.end(),
                     [](const auto& a, const auto& b) { return a.first.cost < b.first.cost; });
    const std::size_t polish = std::min<std::size_t>(probes.size(), static_cast<std::size_t>(config.polish_count));
    for (std::size_t i = 0; i < polish; ++i) {
        auto o = probes[i].first.converged ? probes[i].first
                                           : levenberg_marquardt(pb, probes[i].first.x, config.polish_iterations);
        if (!probes[i].first.converged) {
            o.iterations += probes[i].first.iterations;
        }
        if (o.cost < ms.best.cost) {
            ms.best = o;
            ms.best_index = probes[i].second;
        }
    }
    return ms;
}

} // namespace

ExtensionResult extension_estimate_from(const ModelSpec& kind, const ExtendedMomentSystem& target, double h,
                                        const ExtensionConfig& config, const ExtendedMomentSystem* standard_errors)
{
    const auto t0 = std::chrono::steady_clock::now();
    if (!(h > 0.0)) {
        throw Error(Errc::InvalidGrid, "h must be positive");
    }
    if (config.starts < 1) {
        throw Error(Errc::ConfigError, "at least one start is required");
    }
    Problem pb;
    if (const auto* m = std::get_if<model::ReturnJump>(&kind)) {
        pb.kind = Kind::ReturnJump;
        pb.jump_kind = m->jump.dist.kind;
    } else if (const auto* m = std::get_if<model::VarianceJump>(&kind)) {
        pb.kind = Kind::VarianceJump;
        pb.jump_kind = m->jump.dist.kind;
        if (pb.jump_kind != JumpDist::Kind::Exponential) {
            throw Error(Errc::InvalidJumpSpec, "variance jumps must be exponential");
        }
    } else if (std::holds_alternative<model::TwoFactor>(kind)) {
        pb.kind = Kind::TwoFactor;
    } else {
        throw Error(Errc::UnsupportedShape, "extension_estimate needs an extension model");
    }
    pb.h = h;

    // the population system fixes which statistics are matched
    std::vector<std::string> names;
    switch (pb.kind) {
    case Kind::ReturnJump:
        names = {"mean", "variance", "cov1", "cov2", "covsq1", "cov_y_ysq1", "cm3"};
        if (pb.jump_kind == JumpDist::Kind::Normal) {
            names.emplace_back("cm4");
        }
        // longer lags pin down k much better, as for the closed-form estimator with M = 10
        if (standard_errors) {
            for (int m = 3; m <= kExtendedLags && target.find("cov" + std::to_string(m)); ++m) {
                names.push_back("cov" + std::to_string(m));
                pb.extra_lags = m;
            }
        }
        break;
    case Kind::VarianceJump: names = {"mean", "variance", "cov1", "cov2", "covsq1", "cov_y_ysq1", "cm3"}; break;
    case Kind::TwoFactor: names = {"mean", "variance", "cov1", "cov2", "covsq1", "cov_y_ysq1", "cm3", "cov3"}; break;
    }
    pb.names = names;
    pb.target.resize(static_cast<Eigen::Index>(names.size()));
    pb.scale.resize(pb.target.size());
    const double sd = std::sqrt(std::max(target.at("variance"), 0.0));
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double v = target.at(names[i]);
        pb.target(static_cast<Eigen::Index>(i)) = v;
        double scale = std::max(std::abs(v), config.floor * std::pow(sd, moment_order(names[i])));
        if (standard_errors) {
            const auto se = standard_errors->find(names[i]);
            if (!se || !(*se > 0.0) || !std::isfinite(*se)) {
                throw Error(Errc::DegenerateGamma, "missing or non-positive standard error for " + names[i]);
            }
            scale = *se;
        }
        pb.scale(static_cast<Eigen::Index>(i)) = scale;
        if (!(pb.scale(static_cast<Eigen::Index>(i)) > 0.0)) {
            throw Error(Errc::DegenerateGamma, "target statistics are degenerate (zero variance)");
        }
    }

    // seed the jump models from the plain Heston estimate when it exists
    std::optional<std::vector<double>> seeded;
    if (pb.kind != Kind::TwoFactor) {
        try {
            SampleMoments sm;
            sm.n = 0;
            sm.mean = target.at("mean");
            sm.variance = target.at("variance");
            sm.cov_lags = {target.at("cov1"), target.at("cov2")};
            while (pb.extra_lags > static_cast<int>(sm.cov_lags.size())) {
                sm.cov_lags.push_back(target.at("cov" + std::to_string(sm.cov_lags.size() + 1)));
            }
            sm.covsq1 = target.at("covsq1");
            const auto est = mm_estimate_from_moments(sm, h, {static_cast<int>(sm.cov_lags.size()), 0}).params;
            std::vector<double> n{est.mu, est.k, est.theta, std::clamp(est.sigma_v / std::sqrt(2 * est.k * est.theta), 0.05, 0.95),
                                  std::clamp(est.rho, -0.95, 0.95), 0.05 / h};
            if (pb.kind == Kind::ReturnJump && pb.jump_kind == JumpDist::Kind::Normal) {
                n.push_back(0.0);
                n.push_back(0.1 * sd);
            } else if (pb.kind == Kind::ReturnJump) {
                n.push_back(0.1 * sd);
            } else {
                n.push_back(0.1 * est.theta);
            }
            seeded = n;
        } catch (const Error&) {
        }
    }

    auto ms = multistart(pb, seeded, config);
    if (ms.best_index < 0) {
        throw Error(Errc::SolverDidNotConverge, "no start produced a finite residual");
    }

    ExtensionResult res;
    res.diagnostics.push_back("best_start:" + std::to_string(ms.best_index));
    if (ms.failed > 0) {
        res.diagnostics.push_back("starts_failed:" + std::to_string(ms.failed));
    }
    // With standard-error weights the squared residual norm is a GMM distance. The jump part
    // is kept only if it lowers that distance by more than the chi-square critical value.
    if (standard_errors && config.nested_test && pb.kind != Kind::TwoFactor && seeded) {
        Problem nested = pb;
        nested.nested = true;
        nested.nested_dist = pb.jump_kind == JumpDist::Kind::Normal ? JumpDist::normal(0.0, 0.0)
                                                                      : JumpDist::exponential(1.0);
        const auto nm = multistart(nested, std::vector<double>(seeded->begin(), seeded->begin() + 5), config);
        if (nm.best_index >= 0 && nm.best.converged) {
            const int df = pb.dim() - nested.dim();
            const double critical = boost::math::quantile(boost::math::chi_squared(df), 1.0 - config.nested_alpha);
            const double gain = nm.best.cost - ms.best.cost;
            std::ostringstream os;
            os.precision(6);
            os << "jump_test:gain=" << gain << ",critical=" << critical;
            res.diagnostics.push_back(os.str());
            if (gain <= critical) {
                pb = nested;
                ms = nm;
                res.diagnostics.push_back("jump_component_dropped");
            }
        }
    }
    const auto& best = ms.best;
    res.model = canonical(pb.decode(best.x));
    res.residual_norm = std::sqrt(best.cost);
    res.converged = best.converged;
    res.iterations = best.iterations;
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!res.converged) {
        throw Error(Errc::SolverDidNotConverge,
                    "best start did not converge; residual norm " + std::to_string(res.residual_norm) + " after " + std::to_string(res.iterations) + " iterations");
    }
    return res;
}

ExtendedMomentSystem batch_standard_errors(const ReturnSeries& returns, int batches)
{
    validate_series(returns);
    const auto n = returns.values.size();
    if (batches < 2 || n / static_cast<std::size_t>(batches) < 10) {
        throw Error(Errc::SeriesTooShort, "need at least 10 observations per batch");
    }
    const std::size_t len = n / static_cast<std::size_t>(batches);
    std::vector<ExtendedMomentSystem> parts;
    for (int b = 0; b < batches; ++b) {
        const auto first = returns.values.begin() + static_cast<std::ptrdiff_t>(b * len);
        parts.push_back(extended_sample_moments(ReturnSeries{returns.h, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(len))}));
    }
    ExtendedMomentSystem out{"standard_error", {}};
    for (std::size_t i = 0; i < parts[0].entries.size(); ++i) {
        double mean = 0.0, sq = 0.0;
        for (const auto& p : parts) {
            mean += p.entries[i].second;
        }
        mean /= batches;
        for (const auto& p : parts) {
            sq += (p.entries[i].second - mean) * (p.entries[i].second - mean);
        }
        // the full-sample statistic behaves like the mean of the batch statistics
        out.entries.emplace_back(parts[0].entries[i].first, std::sqrt(sq / (batches - 1) / batches));
    }
    return out;
}

ExtensionResult extension_estimate(const ModelSpec& kind, const ReturnSeries& returns, const ExtensionConfig& config)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto target = extended_sample_moments(returns);
    ExtensionResult res;
    if (config.weight_by_standard_errors) {
        const auto se = batch_standard_errors(returns, config.se_batches);
        res = extension_estimate_from(kind, target, returns.h, config, &se);
    } else {
        res = extension_estimate_from(kind, target, returns.h, config);
    }
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace svmm
