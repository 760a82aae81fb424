#include <svmm/simulate.hpp>

#include <cmath>
#include <string>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

namespace svmm {

namespace {

using Normal = boost::random::normal_distribution<double>;

struct Factor {
    double k, theta, sigma;
};

class JumpSampler {
public:
    JumpSampler(const JumpSpec& jump, double dt) : dist_(jump.dist), active_(jump.lambda > 0.0)
    {
        if (active_) {
            count_ = boost::random::poisson_distribution<int, double>(jump.lambda * dt);
        }
    }

    /// Sum of the jumps arriving in one substep.
    double operator()(Rng& rng)
    {
        if (!active_) {
            return 0.0;
        }
        const int n = count_(rng);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            if (dist_.kind == JumpDist::Kind::Normal) {
                sum += dist_.mean + dist_.sd * normal_(rng);
            } else {
                sum += dist_.mean * unit_exp_(rng);
            }
        }
        return sum;
    }

private:
    JumpDist dist_;
    bool active_;
    boost::random::poisson_distribution<int, double> count_;
    Normal normal_;
    boost::random::exponential_distribution<double> unit_exp_;
};

double gamma_draw(double k, double theta, double sigma, Rng& rng)
{
    if (sigma == 0.0) {
        return theta;
    }
    const double shape = 2.0 * k * theta / (sigma * sigma);
    const double scale = sigma * sigma / (2.0 * k);
    return boost::random::gamma_distribution<double>(shape, scale)(rng);
}

int burn_in_intervals(const SimulationOptions& opt, double k, double h)
{
    if (opt.burn_in >= 0) {
        return opt.burn_in;
    }
    return std::max(50, static_cast<int>(std::ceil(10.0 / (k * h))));
}

// One-factor path: Heston, return jumps or variance jumps depending on the samplers.
PathBundle simulate_one_factor(const ValidatedHestonParams& p, const JumpSpec* return_jump,
                               const JumpSpec* variance_jump, const SamplingGrid& grid, std::uint64_t seed,
                               const SimulationOptions& opt)
{
    const double dt = grid.h / grid.substeps;
    const double sdt = std::sqrt(dt);
    const double mu = p.mu(), k = p.k(), theta = p.theta(), sigma = p.sigma_v(), rho = p.rho();
    const double q = std::sqrt(1.0 - rho * rho);

    Rng rng_v = make_stream(seed, opt.replication, StreamRole::Wv);
    Rng rng_w = make_stream(seed, opt.replication, StreamRole::W);
    Rng rng_j = make_stream(seed, opt.replication, StreamRole::Jumps);
    Rng rng_i = make_stream(seed, opt.replication, StreamRole::Init);
    Normal zv_dist;
    Normal zw_dist;
    JumpSampler rjump(return_jump ? *return_jump : JumpSpec{}, dt);
    JumpSampler vjump(variance_jump ? *variance_jump : JumpSpec{}, dt);

    double v = theta;
    int burn = 0;
    if (variance_jump) {
        // no closed-form stationary law: start at the stationary mean and discard a burn-in
        v = theta + variance_jump->lambda * variance_jump->dist.raw_moment(1) / k;
        burn = opt.stationary_start ? burn_in_intervals(opt, k, grid.h) : 0;
    } else if (opt.stationary_start) {
        v = gamma_draw(k, theta, sigma, rng_i);
    }

    PathBundle out;
    out.seed = seed;
    out.returns.h = grid.h;
    out.returns.values.resize(static_cast<std::size_t>(grid.n));
    if (opt.record_variance) {
        out.variance_path.emplace(static_cast<std::size_t>(grid.n));
    }

    const std::int64_t total = grid.n + burn;
    for (std::int64_t i = 0; i < total; ++i) {
        double y = 0.0;
        for (int s = 0; s < grid.substeps; ++s) {
            const double zv = zv_dist(rng_v);
            const double zw = zw_dist(rng_w);
            const double vp = v > 0.0 ? v : 0.0;
            const double sv = std::sqrt(vp) * sdt;
            y += (mu - 0.5 * vp) * dt + sv * (rho * zv + q * zw) + rjump(rng_j);
            v += k * (theta - v) * dt + sigma * sv * zv + vjump(rng_j);
        }
        if (i >= burn) {
            const auto idx = static_cast<std::size_t>(i - burn);
            out.returns.values[idx] = y;
            if (out.variance_path) {
                (*out.variance_path)[idx] = v > 0.0 ? v : 0.0;
            }
        }
    }
    return out;
}

PathBundle simulate_two_factor(const TwoFactorParams& p, const SamplingGrid& grid, std::uint64_t seed,
                               const SimulationOptions& opt)
{
    const double dt = grid.h / grid.substeps;
    const double sdt = std::sqrt(dt);
    const Factor f1{p.factor1.k, p.factor1.theta, p.factor1.sigma_v};
    const Factor f2{p.factor2.k, p.factor2.theta, p.factor2.sigma_v};

    Rng rng_v1 = make_stream(seed, opt.replication, StreamRole::Wv);
    Rng rng_v2 = make_stream(seed, opt.replication, StreamRole::Wv2);
    Rng rng_w = make_stream(seed, opt.replication, StreamRole::W);
    Rng rng_i = make_stream(seed, opt.replication, StreamRole::Init);
    Normal z1_dist, z2_dist, zw_dist;

    double v1 = f1.theta;
    double v2 = f2.theta;
    if (opt.stationary_start) {
        v1 = gamma_draw(f1.k, f1.theta, f1.sigma, rng_i);
        v2 = gamma_draw(f2.k, f2.theta, f2.sigma, rng_i);
    }

    PathBundle out;
    out.seed = seed;
    out.returns.h = grid.h;
    out.returns.values.resize(static_cast<std::size_t>(grid.n));
    if (opt.record_variance) {
        out.variance_path.emplace(static_cast<std::size_t>(grid.n));
    }

    for (std::int64_t i = 0; i < grid.n; ++i) {
        double y = 0.0;
        for (int s = 0; s < grid.substeps; ++s) {
            const double z1 = z1_dist(rng_v1);
            const double z2 = z2_dist(rng_v2);
            const double zw = zw_dist(rng_w);
            const double p1 = v1 > 0.0 ? v1 : 0.0;
            const double p2 = v2 > 0.0 ? v2 : 0.0;
            // the two return shocks are independent of each other and of the factors, so
            // they combine into a single normal with variance v1 + v2
            y += (p.mu - 0.5 * (p1 + p2)) * dt + std::sqrt(p1 + p2) * sdt * zw;
            v1 += f1.k * (f1.theta - v1) * dt + f1.sigma * std::sqrt(p1) * sdt * z1;
            v2 += f2.k * (f2.theta - v2) * dt + f2.sigma * std::sqrt(p2) * sdt * z2;
        }
        const auto idx = static_cast<std::size_t>(i);
        out.returns.values[idx] = y;
        if (out.variance_path) {
            (*out.variance_path)[idx] = (v1 > 0.0 ? v1 : 0.0) + (v2 > 0.0 ? v2 : 0.0);
        }
    }
    return out;
}

} // namespace

void validate_series(const ReturnSeries& series)
{
    if (!(series.h > 0.0) || !std::isfinite(series.h)) {
        throw Error(Errc::InvalidGrid, "h must be positive");
    }
    if (series.values.size() < 3) {
        throw Error(Errc::SeriesTooShort, "a return series needs at least 3 values, got "
                                              + std::to_string(series.values.size()));
    }
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        if (!std::isfinite(series.values[i])) {
            throw Error(Errc::ConfigError, "non-finite return at index " + std::to_string(i));
        }
    }
}

Rng make_stream(std::uint64_t master_seed, std::uint64_t replication, StreamRole role)
{
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32),
                      static_cast<std::uint32_t>(role)};
    return Rng(seq);
}

double draw_stationary_variance(const ValidatedHestonParams& params, Rng& rng)
{
    return gamma_draw(params.k(), params.theta(), params.sigma_v(), rng);
}

double draw_stationary_variance(const CirFactor& factor, Rng& rng)
{
    return gamma_draw(factor.k, factor.theta, factor.sigma_v, rng);
}

PathBundle simulate(const ModelSpec& model, const SamplingGrid& grid, std::uint64_t seed, const SimulationOptions& options)
{
    validate_grid(grid);
    validate_model(model);
    PathBundle out = std::visit(
        [&](const auto& m) -> PathBundle {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, model::Heston>) {
                return simulate_one_factor(validate(m.params), nullptr, nullptr, grid, seed, options);
            } else if constexpr (std::is_same_v<T, model::ReturnJump>) {
                return simulate_one_factor(validate(m.params), &m.jump, nullptr, grid, seed, options);
            } else if constexpr (std::is_same_v<T, model::VarianceJump>) {
                return simulate_one_factor(validate(m.params), nullptr, &m.jump, grid, seed, options);
            } else {
                return simulate_two_factor(m.params, grid, seed, options);
            }
        },
        model);
    out.model = model;
    return out;
}

ReturnSeries returns_from_prices(const std::vector<double>& prices, double h)
{
    if (prices.size() < 4) {
        throw Error(Errc::SeriesTooShort, "need at least 4 prices, got " + std::to_string(prices.size()));
    }
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            throw Error(Errc::NonPositivePrice, "price at index " + std::to_string(i) + " is not positive");
        }
    }
    ReturnSeries out;
    out.h = h;
    out.values.resize(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i) {
        out.values[i - 1] = std::log(prices[i]) - std::log(prices[i - 1]);
    }
    validate_series(out);
    return out;
}

} // namespace svmm
