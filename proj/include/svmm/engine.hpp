#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <shared_mutex>
#include <string>

#include <svmm/poly.hpp>
#include <svmm/poly_eval.hpp>

namespace svmm {

/// Stochastic state of one observation interval, in local time t measured from its start:
///
///   X  = e^{-kt} IE          = int_0^t e^{-k(t-s)} sqrt(v) dw^v
///   I  = int_0^t sqrt(v) dw^v
///   Is = int_0^t sqrt(v) dw   (w independent of w^v)
///   Y  = int_0^t e^{-k(t-s)} dz^v   (variance-jump engines only)
///   S  = z^v(t) - z^v(0)            (variance-jump engines only)
///
/// Conditional on v0 = v_{n-1}, v(t) = theta + (v0 - theta) e^{-kt} + sigma_v X + Y.
enum class StateVar : std::uint8_t { X, I, Is, Y, S };

inline constexpr std::size_t kStateCount = 5;

/// Exponents of (X, I, Is, Y, S); the first three are (n3, n4, n5) of the recursion.
struct MomentIndex {
    std::array<std::uint8_t, kStateCount> exp{};

    MomentIndex() = default;
    MomentIndex(int ie, int i, int istar, int jump_ou = 0, int jump_sum = 0);

    [[nodiscard]] int order() const noexcept;
    [[nodiscard]] int operator[](StateVar v) const noexcept { return exp[static_cast<std::size_t>(v)]; }

    friend auto operator<=>(const MomentIndex&, const MomentIndex&) = default;
};

/// Polynomial in the state variables with Poly coefficients.
class StatePoly {
public:
    using Terms = std::map<MomentIndex, Poly>;

    StatePoly() = default;
    StatePoly(const Poly& constant);  // NOLINT
    [[nodiscard]] static StatePoly var(StateVar v, const Poly& coef = Poly(1));

    [[nodiscard]] const Terms& terms() const noexcept { return terms_; }
    [[nodiscard]] int order() const noexcept;

    StatePoly& operator+=(const StatePoly& rhs);
    StatePoly& operator-=(const StatePoly& rhs);
    friend StatePoly operator+(StatePoly a, const StatePoly& b) { return a += b; }
    friend StatePoly operator-(StatePoly a, const StatePoly& b) { return a -= b; }
    friend StatePoly operator*(const StatePoly& a, const StatePoly& b);
    friend StatePoly operator*(const Poly& c, const StatePoly& a);
    [[nodiscard]] StatePoly pow(int n) const;

private:
    void add(const MomentIndex& idx, const Poly& c);

    Terms terms_;
};

/// e^{-rate k t} int_0^t e^{rate k s} g(s) ds, where E and H inside g denote e^{-ks} and s,
/// and E, H in the result denote e^{-kt} and t. rate = 0 is the plain integral.
[[nodiscard]] Poly ito_integrate(const Poly& g, int rate);

/// Recursive symbolic moment derivation for the Heston state (optionally with
/// compound-Poisson jumps in the variance).
///
/// Thread safety: the memo cache takes a shared lock for lookups and an exclusive
/// lock for insertion, so one engine may be used from several threads at once.
/// `clear_cache` must not race with other calls.
class MomentEngine {
public:
    struct Options {
        int max_order = 6;
        bool variance_jumps = false;
    };

    MomentEngine() : MomentEngine(Options{}) {}
    explicit MomentEngine(Options options);

    [[nodiscard]] const Options& options() const noexcept { return options_; }

    /// E[X^a I^b Is^c Y^d S^e | v0] at local time t.
    [[nodiscard]] Poly cond_moment(const MomentIndex& idx) const;

    /// Conditional expectation given v0 of a state polynomial over a full interval.
    [[nodiscard]] Poly expect_given_start(const StatePoly& p) const;

    /// E[v^m] under the stationary law (a polynomial free of v0).
    [[nodiscard]] Poly stationary_v_moment(int m) const;

    /// Replaces each v0^m by the stationary moment.
    [[nodiscard]] Poly close_stationary(const Poly& p) const;

    /// E[v(t)^j | v0] at the end of an interval.
    [[nodiscard]] Poly conditional_v_moment(int j) const;

    /// y - E[y] over one interval, as a state polynomial.
    [[nodiscard]] StatePoly centered_return() const;
    /// IV - E[IV] over one interval.
    [[nodiscard]] StatePoly centered_integrated_variance() const;
    /// v at the end of the interval.
    [[nodiscard]] StatePoly end_variance() const;

    /// E[(y_n - E y)^l], unconditional.
    [[nodiscard]] Poly central_moment_return(int l) const;

    /// E[(y_n - E y)^a (y_{n+lag} - E y)^b] for a, b >= 1, a + b <= 4, 1 <= lag <= kMaxLag.
    [[nodiscard]] Poly cross_moment(int a, int b, int lag) const;

    /// E[lead(state_n) * lagged(state_{n+lag})] under stationarity, lag >= 1.
    [[nodiscard]] Poly cross_forms(const StatePoly& lead, const StatePoly& lagged, int lag) const;

    /// E[p(state_n)] under stationarity.
    [[nodiscard]] Poly expect_stationary(const StatePoly& p) const;

    void clear_cache();
    [[nodiscard]] std::size_t cache_size() const;

    static constexpr int kMaxLag = 32;

private:
    Poly derive(const MomentIndex& idx) const;

    Options options_;
    mutable std::shared_mutex mutex_;
    mutable std::map<MomentIndex, Poly> cache_;
};

/// Shared process-wide engines (Heston and variance-jump), built lazily.
[[nodiscard]] const MomentEngine& heston_engine();
[[nodiscard]] const MomentEngine& variance_jump_engine();

} // namespace svmm
