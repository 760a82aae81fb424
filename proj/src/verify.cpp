#include <svmm/verify.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/random/uniform_real_distribution.hpp>

#include <svmm/engine.hpp>
#include <svmm/engine_values.hpp>
#include <svmm/moments.hpp>
#include <svmm/simulate.hpp>

namespace svmm {

std::vector<GridPoint> random_parameter_grid(int count, std::uint64_t seed)
{
    Rng rng(seed);
    boost::random::uniform_real_distribution<double> u(0.0, 1.0);
    const double hs[] = {0.5, 1.0, 2.0};
    std::vector<GridPoint> out;
    while (static_cast<int>(out.size()) < count) {
        HestonParams p;
        p.k = std::exp(std::log(0.05) + u(rng) * (std::log(3.0) - std::log(0.05)));
        p.theta = 0.05 + 0.45 * u(rng);
        p.sigma_v = std::sqrt(2 * p.k * p.theta) * (0.1 + 0.9 * u(rng));
        p.rho = -0.95 + 1.9 * u(rng);
        p.mu = -0.2 + 0.5 * u(rng);
        const double h = hs[static_cast<int>(u(rng) * 3) % 3];
        out.push_back({p, h});
    }
    return out;
}

Poly iv_variance_target()
{
    const Poly th = Poly::symbol(Sym::theta);
    const Poly s2 = Poly::symbol(Sym::sigma_v, 2);
    const Poly kinv = Poly::symbol(Sym::kinv);
    const Poly h_tilde = kinv * (Poly(1) - Poly::symbol(Sym::E));
    return th * s2 * kinv.pow(2) * (Poly::symbol(Sym::H) - h_tilde);
}

Poly x2i_target()
{
    const Poly th = Poly::symbol(Sym::theta);
    const Poly s = Poly::symbol(Sym::sigma_v);
    const Poly kinv = Poly::symbol(Sym::kinv);
    const Poly E = Poly::symbol(Sym::E);
    // kh e^{-2kh} = H E^2 / kinv
    return th * s * kinv.pow(2) * (Poly(1) - E) - th * s * kinv * Poly::symbol(Sym::H) * E.pow(2);
}

std::vector<VerifyLine> verify_engine(int grid, double tol, std::uint64_t seed)
{
    if (grid < 1) {
        throw Error(Errc::ConfigError, "grid size must be positive");
    }
    const char* names[] = {"E[y]", "var(y)", "cov1", "cov2", "covsq1"};
    std::array<double, 5> worst{};
    for (const auto& pt : random_parameter_grid(grid, seed)) {
        const auto& p = pt.params;
        const HighPrecision mu(p.mu), k(p.k), th(p.theta), s(p.sigma_v), rho(p.rho), h(pt.h);
        const auto closed = population_gamma_t<HighPrecision>(mu, k, th, s, rho, h);
        const auto eng = engine_gamma<HighPrecision>(mu, k, th, s, rho, h);
        const auto a = closed.to_eigen();
        const auto b = eng.to_eigen();
        for (int i = 0; i < 5; ++i) {
            const HighPrecision diff = abs(a(i) - b(i));
            const HighPrecision scale = abs(a(i));
            const double err = scale > 0 ? static_cast<double>(diff / scale) : static_cast<double>(diff);
            worst[static_cast<std::size_t>(i)] = std::max(worst[static_cast<std::size_t>(i)], err);
        }
    }
    std::vector<VerifyLine> out;
    for (std::size_t i = 0; i < 5; ++i) {
        std::ostringstream d;
        d << grid << " points";
        out.push_back({names[i], worst[i] <= tol, worst[i], d.str()});
    }

    const auto& eng = heston_engine();
    const Poly iv = eng.expect_stationary(eng.centered_integrated_variance().pow(2));
    const Poly x2i = eng.close_stationary(eng.cond_moment(MomentIndex(2, 1, 0)));
    out.push_back({"var(IV) symbolic", iv == iv_variance_target(), 0.0, iv.to_string()});
    out.push_back({"cov(IE I, IE) symbolic", x2i == x2i_target(), 0.0, x2i.to_string()});
    return out;
}

} // namespace svmm
