// rho_0 = circle integral of sum_k |p_k(e^{i theta})|^2 for the four built-in
// indeterminate families, each evaluated by at least two independent routes
// that must agree within their combined certified errors. 1/(rho_0 + err) is
// the certified lower bound for lim_N lambda_N.

#pragma once

#include "hankel/qseries.hpp"
#include "hankel/real.hpp"

#include <string>
#include <utility>

namespace hankel::rho {

using qseries::ComplexSeriesValue;
using qseries::QParam;
using qseries::SeriesValue;

struct RhoValue {
    Real value;
    Real err;           // truncation + rounding bound on |true - value|
    std::string route;  // label of the formula used
};

// One sample of sum_k |p_k(e^{i theta})|^2 (the reciprocal of the circle
// density rho(e^{i theta})).
struct CircleDensitySample {
    Real theta;
    Real value;
};

// Al-Salam-Carlitz parameter pair; indeterminate range q < a < 1/q.
struct ASCParam {
    QParam q;
    Real a;

    static ASCParam make(QParam q, Real a);
};

struct FreudConstants {
    Real K0;  // Gamma(1/4) Gamma(5/4) / sqrt(pi)

    static FreudConstants compute();
};

// --- Stieltjes-Wigert ---

// Outer sum over k of q^{2(k+1/2)^2}/(q;q)_k times a 2phi1 evaluation.
RhoValue rho0_sw_direct(const QParam& q, const Real& tol);

// Transformed form: (1/(q;q)_inf) sum_k q^{2(k+1/2)^2} sum_{j<=k} q^j/(q;q)_j^2.
RhoValue rho0_sw_fast(const QParam& q, const Real& tol);

// --- Al-Salam-Carlitz ---

enum class AscInRoute {
    collapsed,   // 2 sum_k (-1)^k q^{k(k-1)/2} (q^{nk} - q^{-nk}) / ((1-q^{2n})(q;q)_inf)
    theta_pair,  // same with the paired coefficients c_k of the triple product
};

// I_n circle integrals. The alternating theta sums cancel to order
// q^{-n^2/2}; working precision is raised internally to absorb it.
SeriesValue asc_In(unsigned n, const QParam& q, const Real& tol,
                   AscInRoute route = AscInRoute::collapsed);

// Periodic-trapezoid evaluation of the I_n integral (grid doubling).
SeriesValue asc_In_quadrature(unsigned n, const QParam& q, const Real& tol);

// n -> infinity limit: the integral of the bare (e^{it}, e^{-it}; q)_inf.
SeriesValue asc_Ilimit_quadrature(const QParam& q, const Real& tol);

// Series route: prefactor times sum_n I_n (aq;q)_n/(q;q)_n (q/a)^n, with I_n
// from the series for n <= n_switch and quadrature beyond.
RhoValue rho0_asc(const ASCParam& p, const Real& tol, unsigned n_switch = 8);

// Quadrature route over the 3phi2 kernel representation.
RhoValue rho0_asc_quadrature(const ASCParam& p, const Real& tol);

// --- Freud-like weight (symmetrized quartic birth-death chain) ---

// delta_l(z) = sum_n (-1)^n z^{4n+l}/(4n+l)!, l in {0,1,2,3}; entire.
ComplexSeriesValue freud_delta(unsigned l, const Cplx& z, const Real& tol);

struct FreudBD {
    ComplexSeriesValue B;  // -delta_0(K0 sqrt(z/2))
    ComplexSeriesValue D;  // (4/pi) delta_2(K0 sqrt(z/2))
};
FreudBD freud_bd(const Cplx& z, const Real& tol);

// Closed kernel form [sinh(K0 cos(t/2)) sinh(K0 sin(t/2)) +
// sin(K0 cos(t/2)) sin(K0 sin(t/2))] / (pi sin t); the removable
// singularities at t = 0, pi are evaluated by a series limit below a cutoff.
CircleDensitySample freud_kernel(const Real& theta, const Real& tol);

// Double sum with the m+n even parity constraint.
RhoValue rho0_freud(const Real& tol);

// Periodic-trapezoid integration of freud_kernel.
RhoValue rho0_freud_quadrature(const Real& tol);

// --- q^{-1}-Hermite ---

// (1/(q;q)_inf) prod_{n>=1} [(1+q^n)^4 - 16 q^{2n} cos^2 theta].
CircleDensitySample qh_kernel(const Real& theta, const QParam& q, const Real& tol);

struct QHermiteRho {
    RhoValue expansion;  // truncated product expanded as a polynomial in cos^2
    RhoValue quadrature;
};

// Both routes, to be compared by the caller; they agree within combined err.
QHermiteRho rho0_qhermite(const QParam& q, const Real& tol);

// l = 1/(rho.value + rho.err): certified lower bound for lim_N lambda_N.
Real lower_bound(const RhoValue& rho);

}  // namespace hankel::rho
