#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace svmm {

using Rational = boost::multiprecision::cpp_rational;

/// n/d as an exact rational. The two-argument constructor of older Boost releases
/// rejects negative denominators, so the sign is moved to the numerator first.
inline Rational frac(long n, long d)
{
    return d < 0 ? Rational(-n, -d) : Rational(n, d);
}

/// Formal symbols of the moment engine's polynomial ring.
///
///  v0      variance at the start of the interval (v_{n-1})
///  theta, sigma_v, rho
///  q       sqrt(1 - rho^2); q^2 is always rewritten as 1 - rho^2
///  kinv    1/k
///  E       e^{-k t} (t = interval length once evaluated at the endpoint)
///  H       t
///  lambda  variance-jump intensity
///  j1..j6  raw jump-size moments E[j^i]
enum class Sym : std::uint8_t { v0, theta, sigma_v, rho, q, kinv, E, H, lambda, j1, j2, j3, j4, j5, j6 };

inline constexpr std::size_t kSymCount = 15;

[[nodiscard]] std::string_view sym_name(Sym s) noexcept;

using Exponents = std::array<std::uint8_t, kSymCount>;

struct Monomial {
    Exponents exp{};

    [[nodiscard]] std::uint8_t operator[](Sym s) const noexcept { return exp[static_cast<std::size_t>(s)]; }
    [[nodiscard]] std::uint8_t& operator[](Sym s) noexcept { return exp[static_cast<std::size_t>(s)]; }
    [[nodiscard]] int total_degree() const noexcept;

    friend Monomial operator*(const Monomial& a, const Monomial& b);
    friend auto operator<=>(const Monomial&, const Monomial&) = default;
};

/// Sparse multivariate polynomial with exact rational coefficients. Zero
/// coefficients are never stored, so structural equality is value equality.
class Poly {
public:
    using Terms = std::map<Monomial, Rational>;

    Poly() = default;
    Poly(const Rational& c);  // NOLINT: implicit constant promotion is intended
    Poly(long c) : Poly(Rational(c)) {}  // NOLINT
    Poly(int c) : Poly(Rational(c)) {}   // NOLINT

    [[nodiscard]] static Poly symbol(Sym s, int power = 1);
    [[nodiscard]] static Poly monomial(const Monomial& m, const Rational& c);

    [[nodiscard]] const Terms& terms() const noexcept { return terms_; }
    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
    [[nodiscard]] int degree(Sym s) const noexcept;

    Poly& operator+=(const Poly& rhs);
    Poly& operator-=(const Poly& rhs);
    Poly& operator*=(const Poly& rhs);
    Poly& operator*=(const Rational& c);

    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b);
    friend Poly operator*(Poly a, const Rational& c) { return a *= c; }
    friend Poly operator*(const Rational& c, Poly a) { return a *= c; }
    [[nodiscard]] Poly operator-() const;

    [[nodiscard]] Poly pow(int n) const;

    /// Coefficients of s^0, s^1, ... (each free of s).
    [[nodiscard]] std::vector<Poly> coefficients_in(Sym s) const;

    /// Replaces s^j by images[j]; images must cover degree(s).
    [[nodiscard]] Poly substitute(Sym s, const std::vector<Poly>& images) const;

    /// Canonical text: terms in ascending monomial order, e.g. `1/2*theta*kinv^2*E - H`.
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const Poly&, const Poly&) = default;

private:
    void add_term(const Monomial& m, const Rational& c);

    Terms terms_;
};

} // namespace svmm
