#include <svmm/engine_values.hpp>

namespace svmm {

namespace {

Poly derive_quantity(EngineQuantity q, const MomentEngine& engine)
{
    switch (q) {
    case EngineQuantity::CentralMoment2: return engine.central_moment_return(2);
    case EngineQuantity::CentralMoment3: return engine.central_moment_return(3);
    case EngineQuantity::CentralMoment4: return engine.central_moment_return(4);
    case EngineQuantity::Cross111: return engine.cross_moment(1, 1, 1);
    case EngineQuantity::Cross112: return engine.cross_moment(1, 1, 2);
    case EngineQuantity::Cross211: return engine.cross_moment(2, 1, 1);
    case EngineQuantity::Cross121: return engine.cross_moment(1, 2, 1);
    case EngineQuantity::IvVariance: return engine.expect_stationary(engine.centered_integrated_variance().pow(2));
    case EngineQuantity::IvCov1: {
        const auto d = engine.centered_integrated_variance();
        return engine.cross_forms(d, d, 1);
    }
    case EngineQuantity::IvCm3: return engine.expect_stationary(engine.centered_integrated_variance().pow(3));
    case EngineQuantity::IvCross211: {
        const auto d = engine.centered_integrated_variance();
        return engine.cross_forms(d.pow(2), d, 1);
    }
    case EngineQuantity::IvCross121: {
        const auto d = engine.centered_integrated_variance();
        return engine.cross_forms(d, d.pow(2), 1);
    }
    }
    return Poly();
}

} // namespace

const Poly& engine_poly(EngineQuantity q, bool variance_jumps)
{
    static std::mutex mutex;
    static std::map<std::pair<int, bool>, Poly> cache;
    std::lock_guard lock(mutex);
    const auto key = std::make_pair(static_cast<int>(q), variance_jumps);
    auto it = cache.find(key);
    if (it == cache.end()) {
        const MomentEngine& engine = variance_jumps ? variance_jump_engine() : heston_engine();
        it = cache.emplace(key, derive_quantity(q, engine)).first;
    }
    return it->second;
}

double cross_moment_value(int a, int b, int lag, const ValidatedHestonParams& p, double h)
{
    const Poly poly = heston_engine().cross_moment(a, b, lag);
    const auto x = symbol_values<HighPrecision>(p.theta(), p.sigma_v(), p.rho(), p.k(), h);
    return static_cast<double>(evaluate(poly, x));
}

double central_moment_value(int l, const ValidatedHestonParams& p, double h)
{
    const Poly poly = heston_engine().central_moment_return(l);
    const auto x = symbol_values<HighPrecision>(p.theta(), p.sigma_v(), p.rho(), p.k(), h);
    return static_cast<double>(evaluate(poly, x));
}

} // namespace svmm
