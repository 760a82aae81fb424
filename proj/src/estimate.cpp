#include <svmm/estimate.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace svmm {

namespace {

std::string num(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

} // namespace

SampleMoments sample_moments(const ReturnSeries& returns, int m_max)
{
    validate_series(returns);
    const auto& y = returns.values;
    const auto n = static_cast<std::int64_t>(y.size());
    if (m_max < 2 || n <= m_max) {
        throw Error(Errc::SeriesTooShort, "need N > m_max >= 2 (N = " + std::to_string(n) + ")");
    }
    SampleMoments s;
    s.n = n;
    double sum = 0.0, sum_sq = 0.0;
    for (double v : y) {
        sum += v;
        sum_sq += v * v;
    }
    s.mean = sum / n;
    const double mean_sq = sum_sq / n;
    double var = 0.0;
    for (double v : y) {
        var += (v - s.mean) * (v - s.mean);
    }
    s.variance = var / n;

    s.cov_lags.resize(static_cast<std::size_t>(m_max));
    for (int m = 1; m <= m_max; ++m) {
        double c = 0.0;
        for (std::int64_t i = 0; i + m < n; ++i) {
            c += (y[i] - s.mean) * (y[i + m] - s.mean);
        }
        s.cov_lags[static_cast<std::size_t>(m - 1)] = c / static_cast<double>(n - m);
    }
    double c = 0.0;
    for (std::int64_t i = 0; i + 1 < n; ++i) {
        c += (y[i] * y[i] - mean_sq) * (y[i + 1] - s.mean);
    }
    s.covsq1 = c / static_cast<double>(n - 1);
    return s;
}

double estimate_k(const SampleMoments& moments, double h, int M, std::vector<int>* skipped)
{
    // covariances at rounding level relative to E[y^2] carry no information
    const double tol = 64.0 * std::numeric_limits<double>::epsilon() * (moments.mean * moments.mean + moments.variance);
    return estimate_k_from_lags<double>(moments.cov_lags, h, M, skipped, tol);
}

EstimateResult mm_estimate_from_moments(const SampleMoments& s, double h, const EstimatorConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    EstimateResult res;
    res.params = HestonParams{std::nan(""), std::nan(""), std::nan(""), std::nan(""), std::nan("")};
    const auto fail = [&](Errc code, const std::string& msg) {
        res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        throw EstimationError(code, msg, res);
    };

    std::vector<int> skipped;
    double k = 0.0;
    try {
        k = estimate_k(s, h, config.M, &skipped);
    } catch (const Error& e) {
        if (e.code() != Errc::NoValidLagRatio) {
            throw;
        }
        fail(Errc::NoValidLagRatio, "every lag covariance ratio is non-positive");
    }
    for (int m : skipped) {
        res.diagnostics.push_back("k_lag_skipped:" + std::to_string(m));
    }
    res.params.k = k;
    if (!(k > 0.0)) {
        fail(Errc::NonPositiveMeanReversion, "estimated k is not positive: " + num(k));
    }

    const auto r = invert_moments<double>(k, s.mean, s.variance, s.cov(1), s.covsq1, h);
    res.params.theta = r.theta;
    if (!(r.theta > 0.0)) {
        fail(Errc::NegativeTheta, "estimated theta is not positive: " + num(r.theta));
    }
    res.params.mu = r.mu;
    if (!(r.sigma_v2 > 0.0)) {
        res.diagnostics.push_back("sigma_v2:" + num(r.sigma_v2));
        fail(Errc::NegativeSigmaV2, "estimated sigma_v^2 is not positive: " + num(r.sigma_v2));
    }
    res.params.sigma_v = std::sqrt(r.sigma_v2);
    double rho = r.rho;
    if (rho > 1.0 || rho < -1.0) {
        res.diagnostics.push_back("rho_clamped:" + num(rho));
        rho = rho > 1.0 ? 1.0 : -1.0;
    }
    res.params.rho = rho;
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

EstimateResult mm_estimate(const ReturnSeries& returns, const EstimatorConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    if (config.M < 2 || config.M > 10) {
        throw Error(Errc::ConfigError, "M must be between 2 and 10");
    }
    if (returns.size() < config.min_n) {
        throw Error(Errc::SeriesTooShort, "need at least " + std::to_string(config.min_n) + " returns, got "
                                              + std::to_string(returns.size()));
    }
    const auto s = sample_moments(returns, std::max(config.M, 2));
    try {
        auto res = mm_estimate_from_moments(s, returns.h, config);
        res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return res;
    } catch (const EstimationError& e) {
        auto partial = e.partial();
        partial.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        throw EstimationError(e.code(), e.message(), partial);
    }
}

ExtendedMomentSystem extended_sample_moments(const ReturnSeries& returns)
{
    const auto s = sample_moments(returns, kExtendedLags);
    const auto& y = returns.values;
    const auto n = static_cast<std::int64_t>(y.size());
    double sum_sq = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : y) {
        sum_sq += v * v;
        const double c = v - s.mean;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    const double mean_sq = sum_sq / n;
    double c = 0.0;
    for (std::int64_t i = 0; i + 1 < n; ++i) {
        c += (y[i] - s.mean) * (y[i + 1] * y[i + 1] - mean_sq);
    }
    ExtendedMomentSystem out{"sample", {}};
    out.entries = {
        {"mean", s.mean},
        {"variance", s.variance},
        {"cov1", s.cov(1)},
        {"cov2", s.cov(2)},
        {"covsq1", s.covsq1},
        {"cov_y_ysq1", c / static_cast<double>(n - 1)},
        {"cm3", m3 / n},
        {"cm4", m4 / n},
        {"cov3", s.cov(3)},
    };
    for (int m = 4; m <= kExtendedLags; ++m) {
        out.entries.emplace_back("cov" + std::to_string(m), s.cov(m));
    }
    return out;
}

} // namespace svmm
