// q-Pochhammer symbols, Gaussian binomials, basic hypergeometric series and
// triple-product objects, all with certified truncation error bounds.
//
// Every infinite object is truncated only once a geometric (or theta-type)
// majorant for the tail is established; the returned err field bounds
// |true - value| including accumulated rounding at the working precision.

#pragma once

#include "hankel/real.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace hankel::qseries {

// Base of the q-series world. Either given directly or derived from the
// weight parameter k via q = exp(-1/(2 k^2)).
struct QParam {
    Real q;
    std::optional<Real> k_weight;

    static QParam from_q(Real q);
    static QParam from_k_weight(Real k);
};

template <typename T>
struct Approx {
    T value;
    Real err;
};

using SeriesValue = Approx<Real>;
using ComplexSeriesValue = Approx<Cplx>;

// Order argument for qpochhammer meaning the infinite product.
inline constexpr unsigned kInfinite = ~0u;

// (a;q)_n, or (a;q)_inf when n == kInfinite. The infinite product is cut at
// an index M where the logarithmic tail bound
//     sum_{j>=M} |a| q^j / (1 - |a| q^M)
// certifies err <= tol. A factor that lands exactly on zero makes the whole
// product exactly zero; a factor indistinguishable from zero at the working
// precision is rejected (a = q^{-j} ambiguity).
ComplexSeriesValue qpochhammer(const Cplx& a, const QParam& q, unsigned n, const Real& tol);
SeriesValue qpochhammer(const Real& a, const QParam& q, unsigned n, const Real& tol);

// Gaussian binomial [n k]_q as a cancellation-free product of positive
// factors. Exact-valued up to working-precision rounding.
Real qbinomial(unsigned n, unsigned k, const QParam& q);

// r+1_phi_r(num; den; q, z) = sum_n  prod(num;q)_n / [prod(den;q)_n (q;q)_n] z^n.
// Requires numerator.size() == denominator.size() + 1. Truncates once the
// one-step ratio majorant drops below 1 and the geometric tail certifies tol.
ComplexSeriesValue phi_series(const std::vector<Cplx>& numerator,
                              const std::vector<Cplx>& denominator, const QParam& q,
                              const Cplx& z, const Real& tol);

// Laurent coefficient c_k of the triple product: (-1)^k [q^{k(k+1)/2} + q^{k(k-1)/2}].
// Symmetric in k <-> -k.
Real theta_coefficient(long k, const QParam& q);

enum class TripleProductRoute {
    product,      // (q, z, 1/z; q)_inf as a product of three Pochhammers
    laurent_sum,  // sum_k c_k z^k with theta-tail truncation
};

// j(z) = (q, z, 1/z; q)_inf. Both routes must agree within combined err;
// z == 1 returns exactly zero (the (1-z) factor).
ComplexSeriesValue triple_product(const Cplx& z, const QParam& q, const Real& tol,
                                  TripleProductRoute route = TripleProductRoute::product);

// Both sides of the omega-generalized inner-sum identity
//   sum_{n>=k} w^n/(q;q)_n [n k]_q^2
//     = 1/(w;q)_inf sum_{j=0}^{k} (w;q)_j w^{2k-j} / ((q;q)_j (q;q)_{k-j}^2).
// The caller asserts |lhs - rhs| <= lhs.err + rhs.err.
std::pair<SeriesValue, SeriesValue> inner_sum_identity(unsigned k, const QParam& q,
                                                      const Real& omega, const Real& tol);

// Throws PrecisionExhausted when tol is below what the working precision can
// certify for a result of the given magnitude scale.
void require_feasible_tol(const Real& tol, const Real& scale, const char* where);

}  // namespace hankel::qseries
