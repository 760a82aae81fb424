#include <svmm/engine.hpp>

#include <mutex>

#include <svmm/errors.hpp>

namespace svmm {

namespace {

Poly sym(Sym s, int power = 1) { return Poly::symbol(s, power); }

Poly jump_moment(int i)
{
    if (i < 1 || i > 6) {
        throw Error(Errc::OrderLimitExceeded, "jump moments are carried up to order 6");
    }
    return sym(static_cast<Sym>(static_cast<int>(Sym::j1) + i - 1));
}

Rational binomial(int n, int r)
{
    Rational out = 1;
    for (int i = 0; i < r; ++i) {
        out = out * (n - i) / (i + 1);
    }
    return out;
}

// h~ = kinv (1 - E)
Poly h_tilde_poly() { return sym(Sym::kinv) * (Poly(1) - sym(Sym::E)); }

} // namespace

MomentIndex::MomentIndex(int ie, int i, int istar, int jump_ou, int jump_sum)
{
    const std::array<int, kStateCount> v{ie, i, istar, jump_ou, jump_sum};
    for (std::size_t k = 0; k < kStateCount; ++k) {
        if (v[k] < 0 || v[k] > 255) {
            throw Error(Errc::OrderLimitExceeded, "moment index component out of range");
        }
        exp[k] = static_cast<std::uint8_t>(v[k]);
    }
}

int MomentIndex::order() const noexcept
{
    int o = 0;
    for (auto e : exp) {
        o += e;
    }
    return o;
}

StatePoly::StatePoly(const Poly& constant) { add(MomentIndex{}, constant); }

StatePoly StatePoly::var(StateVar v, const Poly& coef)
{
    MomentIndex idx;
    idx.exp[static_cast<std::size_t>(v)] = 1;
    StatePoly p;
    p.add(idx, coef);
    return p;
}

int StatePoly::order() const noexcept
{
    int o = 0;
    for (const auto& [idx, c] : terms_) {
        o = std::max(o, idx.order());
    }
    return o;
}

void StatePoly::add(const MomentIndex& idx, const Poly& c)
{
    if (c.is_zero()) {
        return;
    }
    auto [it, inserted] = terms_.try_emplace(idx, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) {
            terms_.erase(it);
        }
    }
}

StatePoly& StatePoly::operator+=(const StatePoly& rhs)
{
    for (const auto& [idx, c] : rhs.terms_) {
        add(idx, c);
    }
    return *this;
}

StatePoly& StatePoly::operator-=(const StatePoly& rhs)
{
    for (const auto& [idx, c] : rhs.terms_) {
        add(idx, -c);
    }
    return *this;
}

StatePoly operator*(const StatePoly& a, const StatePoly& b)
{
    StatePoly out;
    for (const auto& [ia, ca] : a.terms_) {
        for (const auto& [ib, cb] : b.terms_) {
            MomentIndex idx;
            for (std::size_t k = 0; k < kStateCount; ++k) {
                idx.exp[k] = static_cast<std::uint8_t>(ia.exp[k] + ib.exp[k]);
            }
            out.add(idx, ca * cb);
        }
    }
    return out;
}

StatePoly operator*(const Poly& c, const StatePoly& a)
{
    StatePoly out;
    for (const auto& [idx, coef] : a.terms_) {
        out.add(idx, c * coef);
    }
    return out;
}

StatePoly StatePoly::pow(int n) const
{
    StatePoly result(Poly(1));
    for (int i = 0; i < n; ++i) {
        result = result * *this;
    }
    return result;
}

Poly ito_integrate(const Poly& g, int rate)
{
    Poly out;
    for (const auto& [m, c] : g.terms()) {
        const int j = m[Sym::E];
        const int p = m[Sym::H];
        Monomial rest = m;
        rest[Sym::E] = 0;
        rest[Sym::H] = 0;
        const Poly coef = Poly::monomial(rest, c);
        const int b = rate - j;
        if (b == 0) {
            // e^{-rkt} int_0^t e^{rks} e^{-rks} s^p ds = E^r t^{p+1}/(p+1)
            out += coef * sym(Sym::E, rate) * sym(Sym::H, p + 1) * frac(1, p + 1);
            continue;
        }
        // G_q = e^{-rkt} int_0^t e^{bks} s^q ds;  G_0 = (E^j - E^r) kinv / b,
        // G_q = (E^j t^q - q G_{q-1}) kinv / b.
        const Poly scale = sym(Sym::kinv) * frac(1, b);
        Poly acc = (sym(Sym::E, j) - sym(Sym::E, rate)) * scale;
        for (int q = 1; q <= p; ++q) {
            acc = (sym(Sym::E, j) * sym(Sym::H, q) - Rational(q) * acc) * scale;
        }
        out += coef * acc;
    }
    return out;
}

MomentEngine::MomentEngine(Options options) : options_(options)
{
    if (options_.max_order < 1) {
        throw Error(Errc::OrderLimitExceeded, "max_order must be positive");
    }
}

Poly MomentEngine::cond_moment(const MomentIndex& idx) const
{
    if (idx.order() > options_.max_order) {
        throw Error(Errc::OrderLimitExceeded, "moment order " + std::to_string(idx.order()) + " exceeds max order "
                                                  + std::to_string(options_.max_order));
    }
    if (!options_.variance_jumps && (idx[StateVar::Y] != 0 || idx[StateVar::S] != 0)) {
        return Poly();
    }
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(idx); it != cache_.end()) {
            return it->second;
        }
    }
    Poly result = derive(idx);
    std::unique_lock lock(mutex_);
    return cache_.try_emplace(idx, std::move(result)).first->second;
}

// Drift of d(X^a I^b Is^c Y^d S^e) under the interval dynamics
//   dX = -kX dt + sqrt(v) dw^v,  dI = sqrt(v) dw^v,  dIs = sqrt(v) dw,
//   dY = -kY dt + dz,  dS = dz,
// followed by the integrating-factor solution of m' = -(a+d) k m + g.
Poly MomentEngine::derive(const MomentIndex& idx) const
{
    if (idx.order() == 0) {
        return Poly(1);
    }
    const int a = idx[StateVar::X];
    const int b = idx[StateVar::I];
    const int c = idx[StateVar::Is];
    const int d = idx[StateVar::Y];
    const int e = idx[StateVar::S];

    const Poly deterministic_v = sym(Sym::theta) + (sym(Sym::v0) - sym(Sym::theta)) * sym(Sym::E);

    auto shifted = [&](int da, int db, int dc, int dd, int de) {
        return MomentIndex(a + da, b + db, c + dc, d + dd, e + de);
    };
    // E[v * Z | v0] with v = theta + (v0 - theta) E + sigma_v X + Y.
    auto v_times = [&](const MomentIndex& z) {
        MomentIndex zx = z;
        zx.exp[static_cast<std::size_t>(StateVar::X)] += 1;
        Poly out = deterministic_v * cond_moment(z) + sym(Sym::sigma_v) * cond_moment(zx);
        if (options_.variance_jumps) {
            MomentIndex zy = z;
            zy.exp[static_cast<std::size_t>(StateVar::Y)] += 1;
            out += cond_moment(zy);
        }
        return out;
    };

    Poly g;
    if (a >= 2) {
        g += Rational(a * (a - 1), 2) * v_times(shifted(-2, 0, 0, 0, 0));
    }
    if (b >= 2) {
        g += Rational(b * (b - 1), 2) * v_times(shifted(0, -2, 0, 0, 0));
    }
    if (a >= 1 && b >= 1) {
        g += Rational(a * b) * v_times(shifted(-1, -1, 0, 0, 0));
    }
    if (c >= 2) {
        g += Rational(c * (c - 1), 2) * v_times(shifted(0, 0, -2, 0, 0));
    }
    if (options_.variance_jumps && (d > 0 || e > 0)) {
        // lambda E[(Y + j)^d (S + j)^e - Y^d S^e]
        Poly jumps;
        for (int i = 0; i <= d; ++i) {
            for (int l = 0; l <= e; ++l) {
                if (i == 0 && l == 0) {
                    continue;
                }
                jumps += binomial(d, i) * binomial(e, l) * jump_moment(i + l) * cond_moment(shifted(0, 0, 0, -i, -l));
            }
        }
        g += sym(Sym::lambda) * jumps;
    }
    return ito_integrate(g, a + d);
}

Poly MomentEngine::expect_given_start(const StatePoly& p) const
{
    Poly out;
    for (const auto& [idx, coef] : p.terms()) {
        const Poly m = cond_moment(idx);
        if (!m.is_zero()) {
            out += coef * m;
        }
    }
    return out;
}

Poly MomentEngine::stationary_v_moment(int m) const
{
    if (m < 0) {
        throw Error(Errc::UnsupportedOrder, "negative variance moment");
    }
    // Stationarity of E[v^m] under the generator:
    //   E[v^m] = (theta + (m-1) sigma_v^2 kinv / 2) E[v^{m-1}]
    //            + (lambda kinv / m) sum_{i=1}^m C(m,i) E[j^i] E[v^{m-i}]
    std::vector<Poly> mom{Poly(1)};
    for (int n = 1; n <= m; ++n) {
        Poly next = (sym(Sym::theta) + frac(n - 1, 2) * sym(Sym::sigma_v, 2) * sym(Sym::kinv)) * mom[n - 1];
        if (options_.variance_jumps) {
            Poly jumps;
            for (int i = 1; i <= n; ++i) {
                jumps += binomial(n, i) * jump_moment(i) * mom[n - i];
            }
            next += frac(1, n) * sym(Sym::lambda) * sym(Sym::kinv) * jumps;
        }
        mom.push_back(std::move(next));
    }
    return mom[m];
}

Poly MomentEngine::close_stationary(const Poly& p) const
{
    const int deg = p.degree(Sym::v0);
    std::vector<Poly> images;
    images.reserve(static_cast<std::size_t>(deg) + 1);
    for (int j = 0; j <= deg; ++j) {
        images.push_back(stationary_v_moment(j));
    }
    return p.substitute(Sym::v0, images);
}

Poly MomentEngine::conditional_v_moment(int j) const
{
    return expect_given_start(end_variance().pow(j));
}

StatePoly MomentEngine::centered_integrated_variance() const
{
    // IV = theta t + (v0 - theta) h~ + sigma_v kinv (I - X) [+ kinv (S - Y)];  E[IV] = (theta + lambda j1 kinv) t
    Poly v0_part = (sym(Sym::v0) - sym(Sym::theta)) * h_tilde_poly();
    StatePoly iv(v0_part);
    const Poly sk = sym(Sym::sigma_v) * sym(Sym::kinv);
    iv += StatePoly::var(StateVar::I, sk) - StatePoly::var(StateVar::X, sk);
    if (options_.variance_jumps) {
        iv += StatePoly::var(StateVar::S, sym(Sym::kinv)) - StatePoly::var(StateVar::Y, sym(Sym::kinv));
        iv -= StatePoly(sym(Sym::lambda) * sym(Sym::j1) * sym(Sym::kinv) * sym(Sym::H));
    }
    return iv;
}

StatePoly MomentEngine::centered_return() const
{
    // y - E[y] = -(IV - E IV)/2 + rho I + q Is
    StatePoly out = Poly(frac(-1, 2)) * centered_integrated_variance();
    out += StatePoly::var(StateVar::I, sym(Sym::rho));
    out += StatePoly::var(StateVar::Is, sym(Sym::q));
    return out;
}

StatePoly MomentEngine::end_variance() const
{
    StatePoly v(sym(Sym::theta) + (sym(Sym::v0) - sym(Sym::theta)) * sym(Sym::E));
    v += StatePoly::var(StateVar::X, sym(Sym::sigma_v));
    if (options_.variance_jumps) {
        v += StatePoly::var(StateVar::Y);
    }
    return v;
}

Poly MomentEngine::expect_stationary(const StatePoly& p) const
{
    return close_stationary(expect_given_start(p));
}

Poly MomentEngine::central_moment_return(int l) const
{
    if (l < 1) {
        throw Error(Errc::UnsupportedOrder, "central moment order must be >= 1");
    }
    if (l > options_.max_order) {
        throw Error(Errc::OrderLimitExceeded, "central moment order " + std::to_string(l) + " exceeds max order");
    }
    return expect_stationary(centered_return().pow(l));
}

Poly MomentEngine::cross_forms(const StatePoly& lead, const StatePoly& lagged, int lag) const
{
    if (lag < 1 || lag > kMaxLag) {
        throw Error(Errc::UnsupportedShape, "lag must lie in [1, " + std::to_string(kMaxLag) + "]");
    }
    // Condition the lagged factor on the variance at the start of its interval, then walk
    // that polynomial back one interval at a time through E[v_end^j | v_start].
    Poly tail = expect_given_start(lagged);
    std::vector<Poly> transition;
    for (int step = 1; step < lag; ++step) {
        const int deg = tail.degree(Sym::v0);
        while (static_cast<int>(transition.size()) <= deg) {
            transition.push_back(conditional_v_moment(static_cast<int>(transition.size())));
        }
        tail = tail.substitute(Sym::v0, transition);
    }
    const auto coeffs = tail.coefficients_in(Sym::v0);
    const StatePoly vend = end_variance();
    StatePoly link;
    StatePoly vpow(Poly(1));
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (!coeffs[j].is_zero()) {
            link += coeffs[j] * vpow;
        }
        vpow = vpow * vend;
    }
    return expect_stationary(lead * link);
}

Poly MomentEngine::cross_moment(int a, int b, int lag) const
{
    if (a < 1 || b < 1 || a + b > 4 || lag < 1 || lag > kMaxLag) {
        throw Error(Errc::UnsupportedShape, "cross_moment supports a, b >= 1, a + b <= 4 and 1 <= lag <= "
                                                + std::to_string(kMaxLag));
    }
    const StatePoly c = centered_return();
    return cross_forms(c.pow(a), c.pow(b), lag);
}

void MomentEngine::clear_cache()
{
    std::unique_lock lock(mutex_);
    cache_.clear();
}

std::size_t MomentEngine::cache_size() const
{
    std::shared_lock lock(mutex_);
    return cache_.size();
}

const MomentEngine& heston_engine()
{
    static const MomentEngine engine(MomentEngine::Options{6, false});
    return engine;
}

const MomentEngine& variance_jump_engine()
{
    static const MomentEngine engine(MomentEngine::Options{6, true});
    return engine;
}

} // namespace svmm
