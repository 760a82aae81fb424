#include <svmm/poly.hpp>

#include <sstream>
#include <stdexcept>

namespace svmm {

std::string_view sym_name(Sym s) noexcept
{
    static constexpr std::array<std::string_view, kSymCount> names{
        "v0", "theta", "sigma_v", "rho", "q", "kinv", "E", "H", "lambda", "j1", "j2", "j3", "j4", "j5", "j6"};
    return names[static_cast<std::size_t>(s)];
}

int Monomial::total_degree() const noexcept
{
    int d = 0;
    for (auto e : exp) {
        d += e;
    }
    return d;
}

Monomial operator*(const Monomial& a, const Monomial& b)
{
    Monomial out;
    for (std::size_t i = 0; i < kSymCount; ++i) {
        const int e = a.exp[i] + b.exp[i];
        if (e > 255) {
            throw std::overflow_error("monomial exponent overflow");
        }
        out.exp[i] = static_cast<std::uint8_t>(e);
    }
    return out;
}

Poly::Poly(const Rational& c)
{
    if (c != 0) {
        terms_.emplace(Monomial{}, c);
    }
}

Poly Poly::symbol(Sym s, int power)
{
    Monomial m;
    m[s] = static_cast<std::uint8_t>(power);
    return monomial(m, Rational(1));
}

Poly Poly::monomial(const Monomial& m, const Rational& c)
{
    Poly p;
    p.add_term(m, c);
    return p;
}

int Poly::degree(Sym s) const noexcept
{
    int d = 0;
    for (const auto& [m, c] : terms_) {
        d = std::max<int>(d, m[s]);
    }
    return d;
}

// Inserts c*m, rewriting q^2 -> 1 - rho^2 so that q appears at most linearly.
void Poly::add_term(const Monomial& m, const Rational& c)
{
    if (c == 0) {
        return;
    }
    if (m[Sym::q] >= 2) {
        Monomial base = m;
        const int pairs = m[Sym::q] / 2;
        base[Sym::q] = static_cast<std::uint8_t>(m[Sym::q] % 2);
        // (1 - rho^2)^pairs expanded binomially
        Rational binom = 1;
        for (int i = 0; i <= pairs; ++i) {
            Monomial t = base;
            t[Sym::rho] = static_cast<std::uint8_t>(t[Sym::rho] + 2 * i);
            add_term(t, (i % 2 == 0 ? c : -c) * binom);
            binom = binom * (pairs - i) / (i + 1);
        }
        return;
    }
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) {
            terms_.erase(it);
        }
    }
}

Poly& Poly::operator+=(const Poly& rhs)
{
    for (const auto& [m, c] : rhs.terms_) {
        add_term(m, c);
    }
    return *this;
}

Poly& Poly::operator-=(const Poly& rhs)
{
    for (const auto& [m, c] : rhs.terms_) {
        add_term(m, -c);
    }
    return *this;
}

Poly operator*(const Poly& a, const Poly& b)
{
    Poly out;
    for (const auto& [ma, ca] : a.terms_) {
        for (const auto& [mb, cb] : b.terms_) {
            out.add_term(ma * mb, ca * cb);
        }
    }
    return out;
}

Poly& Poly::operator*=(const Poly& rhs)
{
    *this = *this * rhs;
    return *this;
}

Poly& Poly::operator*=(const Rational& c)
{
    if (c == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, coef] : terms_) {
        coef *= c;
    }
    return *this;
}

Poly Poly::operator-() const
{
    Poly out = *this;
    out *= Rational(-1);
    return out;
}

Poly Poly::pow(int n) const
{
    if (n < 0) {
        throw std::invalid_argument("negative polynomial power");
    }
    Poly result(1);
    Poly base = *this;
    while (n > 0) {
        if (n & 1) {
            result *= base;
        }
        n >>= 1;
        if (n > 0) {
            base *= base;
        }
    }
    return result;
}

std::vector<Poly> Poly::coefficients_in(Sym s) const
{
    std::vector<Poly> out(static_cast<std::size_t>(degree(s)) + 1);
    for (const auto& [m, c] : terms_) {
        Monomial rest = m;
        const auto j = rest[s];
        rest[s] = 0;
        out[j].add_term(rest, c);
    }
    return out;
}

Poly Poly::substitute(Sym s, const std::vector<Poly>& images) const
{
    const auto coeffs = coefficients_in(s);
    if (coeffs.size() > images.size()) {
        throw std::invalid_argument("substitute: not enough images for symbol power");
    }
    Poly out;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (!coeffs[j].is_zero()) {
            out += coeffs[j] * images[j];
        }
    }
    return out;
}

std::string Poly::to_string() const
{
    if (terms_.empty()) {
        return "0";
    }
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        Rational mag = c < 0 ? Rational(-c) : c;
        if (first) {
            os << (c < 0 ? "-" : "");
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        first = false;
        bool wrote = false;
        if (mag != 1 || m.total_degree() == 0) {
            os << mag;
            wrote = true;
        }
        for (std::size_t i = 0; i < kSymCount; ++i) {
            if (m.exp[i] == 0) {
                continue;
            }
            os << (wrote ? "*" : "") << sym_name(static_cast<Sym>(i));
            if (m.exp[i] > 1) {
                os << '^' << static_cast<int>(m.exp[i]);
            }
            wrote = true;
        }
    }
    return os.str();
}

} // namespace svmm
