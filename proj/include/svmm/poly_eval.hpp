#pragma once

#include <array>
#include <cmath>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <svmm/poly.hpp>

namespace svmm {

/// 50-digit float used where exact engine output must survive kinv-heavy cancellation.
using HighPrecision = boost::multiprecision::cpp_bin_float_50;

template <class Scalar>
using SymbolValues = std::array<Scalar, kSymCount>;

template <class Scalar>
Scalar to_scalar(const Rational& r)
{
    if constexpr (std::is_floating_point_v<Scalar>) {
        return r.template convert_to<Scalar>();
    } else {
        return Scalar(boost::multiprecision::numerator(r)) / Scalar(boost::multiprecision::denominator(r));
    }
}

/// A Poly with coefficients pre-converted to Scalar, for repeated evaluation.
template <class Scalar>
class CompiledPoly {
public:
    CompiledPoly() = default;
    explicit CompiledPoly(const Poly& p)
    {
        coefs_.reserve(p.size());
        exps_.reserve(p.size());
        max_exp_.fill(0);
        for (const auto& [m, c] : p.terms()) {
            coefs_.push_back(to_scalar<Scalar>(c));
            exps_.push_back(m.exp);
            for (std::size_t i = 0; i < kSymCount; ++i) {
                max_exp_[i] = std::max(max_exp_[i], static_cast<int>(m.exp[i]));
            }
        }
    }

    [[nodiscard]] Scalar operator()(const SymbolValues<Scalar>& x) const
    {
        std::array<std::vector<Scalar>, kSymCount> powers;
        for (std::size_t i = 0; i < kSymCount; ++i) {
            powers[i].resize(static_cast<std::size_t>(max_exp_[i]) + 1);
            powers[i][0] = Scalar(1);
            for (int e = 1; e <= max_exp_[i]; ++e) {
                powers[i][e] = powers[i][e - 1] * x[i];
            }
        }
        Scalar sum(0);
        for (std::size_t t = 0; t < coefs_.size(); ++t) {
            Scalar term = coefs_[t];
            for (std::size_t i = 0; i < kSymCount; ++i) {
                if (exps_[t][i] != 0) {
                    term *= powers[i][exps_[t][i]];
                }
            }
            sum += term;
        }
        return sum;
    }

    [[nodiscard]] std::size_t size() const noexcept { return coefs_.size(); }

private:
    std::vector<Scalar> coefs_;
    std::vector<Exponents> exps_;
    std::array<int, kSymCount> max_exp_{};
};

template <class Scalar>
Scalar evaluate(const Poly& p, const SymbolValues<Scalar>& x)
{
    return CompiledPoly<Scalar>(p)(x);
}

/// Symbol assignment for a single-factor model observed at step h.
/// `lambda` and `jump_moments` (E[j^1..j^6]) only matter for variance-jump polynomials.
template <class Scalar>
SymbolValues<Scalar> symbol_values(const Scalar& theta, const Scalar& sigma_v, const Scalar& rho, const Scalar& k,
                                   const Scalar& h, const Scalar& v0 = Scalar(0), const Scalar& lambda = Scalar(0),
                                   const std::array<Scalar, 6>& jump_moments = {})
{
    using std::exp;
    using std::sqrt;
    SymbolValues<Scalar> x;
    x[static_cast<std::size_t>(Sym::v0)] = v0;
    x[static_cast<std::size_t>(Sym::theta)] = theta;
    x[static_cast<std::size_t>(Sym::sigma_v)] = sigma_v;
    x[static_cast<std::size_t>(Sym::rho)] = rho;
    x[static_cast<std::size_t>(Sym::q)] = sqrt(Scalar(1) - rho * rho);
    x[static_cast<std::size_t>(Sym::kinv)] = Scalar(1) / k;
    x[static_cast<std::size_t>(Sym::E)] = exp(Scalar(-k * h));
    x[static_cast<std::size_t>(Sym::H)] = h;
    x[static_cast<std::size_t>(Sym::lambda)] = lambda;
    for (std::size_t i = 0; i < 6; ++i) {
        x[static_cast<std::size_t>(Sym::j1) + i] = jump_moments[i];
    }
    return x;
}

} // namespace svmm
