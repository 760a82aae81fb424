#include <svmm/asymptotics.hpp>

#include <chrono>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace svmm {

double sigma11_exact(const ValidatedHestonParams& p, double h)
{
    return sigma11_exact_t<double>(p.k(), p.theta(), p.sigma_v(), p.rho(), h);
}

double sigma11_from_covariances(const ValidatedHestonParams& p, double h)
{
    const auto g = population_gamma(p, h);
    return g.variance + 2.0 * g.cov1 / -std::expm1(-p.k() * h);
}

std::vector<std::pair<std::string, double>> ConstantsTable::entries() const
{
    return {{"D1", D1},   {"D2", D2},   {"D3", D3},   {"D31", D31}, {"D32", D32}, {"D33", D33}, {"F1", F1},
            {"F2", F2},   {"F3", F3},   {"F4", F4},   {"F5", F5},   {"F6", F6},   {"F7", F7},   {"F8", F8},
            {"C2", C2},   {"C3", C3},   {"C4", C4},   {"C", C},     {"Cy", Cy},   {"C51", C51}, {"C52", C52},
            {"C53", C53}};
}

ConstantsTable appendix_c_constants(const ValidatedHestonParams& p, double h)
{
    const double mu = p.mu(), k = p.k(), th = p.theta(), s = p.sigma_v(), rho = p.rho();
    const double s2 = s * s, s3 = s2 * s, s4 = s2 * s2;
    const double E = std::exp(-k * h);
    const double E2 = E * E;
    const double ht = h_tilde(k, h);
    const double one_m_E = -std::expm1(-k * h);
    const double one_m_E2 = -std::expm1(-2.0 * k * h);
    const double one_m_E3 = -std::expm1(-3.0 * k * h);
    const double mh = mu * h;
    const auto g = population_gamma(p, h);
    const double Ey2 = g.mean * g.mean + g.variance;

    ConstantsTable c;
    c.D1 = -mh * ht - rho * s / k * (ht - h * E) + 0.5 * th * ht * (h - ht)
           + s2 / (4 * k * k) * (ht + ht * E - 2 * h * E) + ht;
    c.D2 = -mh * ht * E - rho * s / k * E * (h - 2 * h * E + ht) + th / 4 * ht * (ht - 3 * ht * E + 2 * h * E)
           + s2 / (4 * k * k) * E * (3 * ht * E - 4 * h * E - ht + 2 * h) + ht * E;
    c.D3 = mh * mh * E + mh * th * (2 * ht * E - ht - h * E) - s2 / k * mh * (h - ht) * E
           + 2 * mu * h * h * rho * s * E + rho * rho * s2 / k * (k * h * h + h - ht) - rho * rho * s / k * (h - ht)
           - rho * th * s / k * (ht - 3 * ht * E + 2 * h * E2 + k * h * h * E - k * h * ht * E)
           - rho * s3 / (k * k) * (2 * h * E - 2 * ht + k * h * h) * E + th * (ht + h * E - 2 * ht * E)
           + th * th / 4 * (h - ht) * (2 * ht + E * h - 3 * E * ht) + s / k * (h - ht)
           + th * s2 / (8 * k * k) * (-4 * ht + 5 * ht * E - 5 * ht * E2 + 4 * h * E2)
           + s4 / (8 * k * k * k) * E * (2 * k * h * h - 3 * ht - 2 * h - 3 * ht * E + 8 * h * E);
    const double a = 2 * th * th + 3 * th * s2 / k + s4 / (k * k);
    const double b = th * th + th * s2 / k + s4 / (2 * k * k);
    c.D33 = 3 * (a * (1 + 2 * std::exp(k * h)) / (1 + E) + b * one_m_E / (1 + E));
    c.D32 = 3 * a;
    c.D31 = 3 * (th * th + 2 * th * s2 / k + s4 / (2 * k * k) - th * s2 / (k * (1 + E)));

    c.F1 = ht * ht * ht * E / 8;
    c.F2 = th * ht * ht * ht / 8 - 0.5 * c.D2 * ht;
    c.F3 = 0.5 * c.D1 * th * ht - 0.5 * c.D3 * ht + 0.5 * ht * E * Ey2;
    c.F4 = 3 * c.F1 * (th + s2 / k);
    c.F5 = c.F2 - 3 * c.F1 * (th + s2 / k);
    c.F6 = c.F1 * c.D33;
    c.F7 = c.F1 * c.D32 + c.F2 * (2 * th + s2 / k);
    c.F8 = c.F3 - c.F1 * c.D31 + c.F2 * (2 * th + s2 / k);

    const double vol_term = s2 / (4 * k) + th / 2;
    c.C2 = (ht - h * E) / one_m_E * (s2 / (2 * k * k) - rho * s / k) - ht * ht / one_m_E2 * vol_term + 1 / k;
    c.C3 = E * h * ht / one_m_E * (s2 / (4 * k) - rho * s / 2) - E * ht * ht / one_m_E2 * vol_term;
    c.C4 = E2 * h * ht / one_m_E * (s2 / (4 * k) - rho * s / 2) - ht * ht / one_m_E2 * vol_term;
    c.C = ht * ht / (4 * one_m_E2);
    c.Cy = -ht / (2 * one_m_E);
    c.C51 = c.F6 / one_m_E3 - c.F7 / one_m_E2 + c.F8 / one_m_E;
    c.C52 = c.F4 / one_m_E3 + c.F5 / one_m_E2;
    c.C53 = -c.F1 / one_m_E3;
    return c;
}

int hac_bandwidth(std::int64_t n)
{
    return static_cast<int>(std::floor(1.2 * std::cbrt(static_cast<double>(n))));
}

SigmaMatrix sigma_hac(const ReturnSeries& returns, const std::optional<ValidatedHestonParams>& exact_params)
{
    validate_series(returns);
    const auto& y = returns.values;
    const auto n = static_cast<std::int64_t>(y.size());
    const int L = hac_bandwidth(n);
    if (n < 10 * std::max(L, 1) || n < 4) {
        throw Error(Errc::SeriesTooShort, "HAC needs N >= 10 * bandwidth");
    }
    double mean = 0.0, mean_sq = 0.0;
    for (double v : y) {
        mean += v;
        mean_sq += v * v;
    }
    mean /= n;
    mean_sq /= n;

    // rows i = 0..n-3 so that every component is defined
    const std::int64_t T = n - 2;
    Eigen::Matrix<double, Eigen::Dynamic, 5> X(T, 5);
    for (std::int64_t i = 0; i < T; ++i) {
        const double c0 = y[i] - mean, c1 = y[i + 1] - mean, c2 = y[i + 2] - mean;
        X(i, 0) = y[i];
        X(i, 1) = c0 * c0;
        X(i, 2) = c0 * c1;
        X(i, 3) = c0 * c2;
        X(i, 4) = (y[i] * y[i] - mean_sq) * c1;
    }
    X.rowwise() -= X.colwise().mean();

    SigmaMatrix out;
    out.bandwidth = L;
    Matrix5 S = X.transpose() * X / static_cast<double>(T);
    for (int l = 1; l <= L; ++l) {
        const double w = 1.0 - static_cast<double>(l) / (L + 1);
        const Matrix5 G = X.topRows(T - l).transpose() * X.bottomRows(T - l) / static_cast<double>(T);
        S += w * (G + G.transpose());
    }
    S = 0.5 * (S + S.transpose());
    out.value = S;
    out.hac11 = S(0, 0);
    for (auto& row : out.provenance) {
        row.fill(Provenance::Hac);
    }
    if (exact_params) {
        Matrix5 candidate = S;
        candidate(0, 0) = sigma11_exact(*exact_params, returns.h);
        const Eigen::SelfAdjointEigenSolver<Matrix5> es(candidate, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff())) {
            out.value = candidate;
            out.provenance[0][0] = Provenance::Exact;
        } else {
            out.diagnostics.push_back("sigma11_exact_rejected:not_psd");
        }
    }
    return out;
}

namespace {

Matrix5 fd_rows(const MomentVector& gamma, double h, double rel)
{
    const Eigen::Matrix<double, 5, 1> g0 = gamma.to_eigen();
    const double fallback = std::sqrt(std::abs(gamma.variance));
    Matrix5 J = Matrix5::Zero();
    for (int j = 0; j < 5; ++j) {
        const double scale = g0(j) != 0.0 ? std::abs(g0(j)) : fallback;
        const double step = rel * scale;
        Eigen::Matrix<double, 5, 1> gp = g0, gm = g0;
        gp(j) += step;
        gm(j) -= step;
        const auto fp = estimator_map<double>(MomentVector::from_eigen(gp), h);
        const auto fm = estimator_map<double>(MomentVector::from_eigen(gm), h);
        for (int i = 0; i < 5; ++i) {
            J(i, j) = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * step);
        }
    }
    return J;
}

} // namespace

JacobianMatrix jacobian_g(const MomentVector& gamma, double h)
{
    if (!(gamma.cov1 * gamma.cov2 > 0.0)) {
        throw Error(Errc::DegenerateGamma, "cov1 * cov2 must be positive");
    }
    const Matrix5 fine = fd_rows(gamma, h, 1e-6);
    const Matrix5 coarse = fd_rows(gamma, h, 1e-5);
    JacobianMatrix out;
    out.value = fine;
    out.value.row(0) << 0.0, 0.0, 1.0 / (h * gamma.cov1), -1.0 / (h * gamma.cov2), 0.0;
    double drift = 0.0;
    for (int i = 1; i < 5; ++i) {
        const double row_scale = fine.row(i).cwiseAbs().maxCoeff();
        for (int j = 0; j < 5; ++j) {
            drift = std::max(drift, std::abs(fine(i, j) - coarse(i, j)) / std::max(row_scale, 1e-300));
        }
    }
    out.step_drift = drift;
    return out;
}

std::array<double, 5> param_covariance(const Matrix5& sigma, const Matrix5& jac, std::int64_t n)
{
    const Matrix5 V = jac * sigma * jac.transpose() / static_cast<double>(n);
    std::array<double, 5> out{};
    for (int i = 0; i < 5; ++i) {
        out[static_cast<std::size_t>(i)] = std::sqrt(std::max(V(i, i), 0.0));
    }
    return out;
}

EstimateResult mm_estimate_with_stderr(const ReturnSeries& returns, const EstimatorConfig& config,
                                       SigmaMatrix* sigma_out)
{
    const auto t0 = std::chrono::steady_clock::now();
    EstimateResult res = mm_estimate(returns, config);
    const auto s = sample_moments(returns, 2);
    std::optional<ValidatedHestonParams> vp;
    try {
        vp = validate(res.params);
    } catch (const Error&) {
        res.diagnostics.push_back("sigma11_exact_skipped:invalid_estimate");
    }
    auto sigma = sigma_hac(returns, vp);
    for (const auto& d : sigma.diagnostics) {
        res.diagnostics.push_back(d);
    }
    const auto jac = jacobian_g(s.gamma(), returns.h);
    if (jac.step_drift > 1e-4) {
        res.diagnostics.push_back("jacobian_step_drift:" + std::to_string(jac.step_drift));
    }
    if (config.M != 2) {
        // the Jacobian is that of the lag-2 estimator
        res.diagnostics.push_back("stderr_uses_lag2_jacobian");
    }
    const auto se = param_covariance(sigma.value, jac.value, returns.size());
    res.stderr_ = HestonParams{se[3], se[0], se[1], se[2], se[4]};
    if (sigma_out) {
        *sigma_out = std::move(sigma);
    }
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace svmm
