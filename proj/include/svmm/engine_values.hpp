#pragma once

#include <array>
#include <map>
#include <mutex>
#include <utility>

#include <svmm/engine.hpp>
#include <svmm/moments.hpp>

namespace svmm {

/// Engine-derived quantities that the closed-form layer needs numerically.
enum class EngineQuantity {
    CentralMoment2,  ///< E[c^2], c = y - E y
    CentralMoment3,
    CentralMoment4,
    Cross111,        ///< E[c_n c_{n+1}]
    Cross112,        ///< E[c_n c_{n+2}]
    Cross211,        ///< E[c_n^2 c_{n+1}]
    Cross121,        ///< E[c_n c_{n+1}^2]
    IvVariance,      ///< E[d^2], d = IV - E IV
    IvCov1,          ///< E[d_n d_{n+1}]
    IvCm3,           ///< E[d^3]
    IvCross211,      ///< E[d_n^2 d_{n+1}]
    IvCross121,      ///< E[d_n d_{n+1}^2]
};

/// Symbolic polynomial for a quantity, derived once per process and cached.
[[nodiscard]] const Poly& engine_poly(EngineQuantity q, bool variance_jumps = false);

/// Numeric value of a cached engine polynomial.
template <class Scalar>
Scalar engine_value(EngineQuantity q, const SymbolValues<Scalar>& x, bool variance_jumps = false)
{
    static std::mutex mutex;
    static std::map<std::pair<int, bool>, CompiledPoly<Scalar>> compiled;
    const CompiledPoly<Scalar>* poly = nullptr;
    {
        std::lock_guard lock(mutex);
        const auto key = std::make_pair(static_cast<int>(q), variance_jumps);
        auto it = compiled.find(key);
        if (it == compiled.end()) {
            it = compiled.emplace(key, CompiledPoly<Scalar>(engine_poly(q, variance_jumps))).first;
        }
        poly = &it->second;
    }
    return (*poly)(x);
}

/// gamma computed entirely from engine output (independent of the closed forms).
template <class Scalar>
BasicMomentVector<Scalar> engine_gamma(const Scalar& mu, const Scalar& k, const Scalar& theta, const Scalar& sigma_v,
                                       const Scalar& rho, const Scalar& h)
{
    const auto x = symbol_values<Scalar>(theta, sigma_v, rho, k, h);
    BasicMomentVector<Scalar> g;
    g.mean = (mu - theta / Scalar(2)) * h;
    g.variance = engine_value(EngineQuantity::CentralMoment2, x);
    g.cov1 = engine_value(EngineQuantity::Cross111, x);
    g.cov2 = engine_value(EngineQuantity::Cross112, x);
    g.covsq1 = engine_value(EngineQuantity::Cross211, x) + Scalar(2) * g.mean * g.cov1;
    return g;
}

/// E[(y_n - Ey)^a (y_{n+lag} - Ey)^b] evaluated in 50-digit arithmetic.
[[nodiscard]] double cross_moment_value(int a, int b, int lag, const ValidatedHestonParams& params, double h);

/// E[(y_n - Ey)^l] evaluated in 50-digit arithmetic.
[[nodiscard]] double central_moment_value(int l, const ValidatedHestonParams& params, double h);

} // namespace svmm
