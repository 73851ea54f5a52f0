#include "hankel/rho.hpp"

#include <mpfr.h>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hankel::rho {

namespace {

using qseries::kInfinite;
using qseries::qpochhammer;

struct NodeValue {
    Real value;
    Real err;
};

using Integrand = std::function<NodeValue(const Real& theta)>;

// (1/2pi) integral over one period of an analytic integrand symmetric under
// theta -> 2pi - theta. Periodic trapezoid with grid doubling; convergence is
// judged by successive differences (exponential for analytic integrands),
// node truncation errors are carried exactly.
NodeValue trapezoid_circle(const Integrand& f, const Real& tol, unsigned max_nodes = 1u << 17) {
    const Real two_pi = 2 * pi_value();
    unsigned m = 16;
    // full-circle sums: value and node-error tallies
    NodeValue f0 = f(Real(0));
    NodeValue fpi = f(pi_value());
    Real sum = f0.value + fpi.value;
    Real esum = f0.err + fpi.err;
    for (unsigned j = 1; j < m / 2; ++j) {
        NodeValue fv = f(two_pi * j / m);
        sum += 2 * fv.value;
        esum += 2 * fv.err;
    }
    Real prev = sum / m;
    Real last_diff(0);
    unsigned stable = 0;
    while (true) {
        for (unsigned j = 0; j < m / 2; ++j) {  // new odd nodes in (0, pi)
            NodeValue fv = f(two_pi * (2 * j + 1) / (2 * m));
            sum += 2 * fv.value;
            esum += 2 * fv.err;
        }
        m *= 2;
        Real cur = sum / m;
        last_diff = boost::multiprecision::abs(cur - prev);
        stable = (last_diff <= tol / 4) ? stable + 1 : 0;
        prev = cur;
        if (stable >= 2) return {cur, 2 * last_diff + esum / m + tol / 8};
        if (m > max_nodes)
            throw std::domain_error("trapezoid_circle: grid cap reached before convergence");
    }
}

// Demote a value computed at elevated precision back into the caller's
// scope, charging the extra rounding to err.
SeriesValue demote(const Real& value, const Real& err) {
    Real v = promoted(value);
    Real e = promoted(err) + boost::multiprecision::abs(v) * rounding_unit();
    return {v, e};
}

Real upper(const SeriesValue& s) { return boost::multiprecision::abs(s.value) + s.err; }
Real lower(const SeriesValue& s) { return boost::multiprecision::abs(s.value) - s.err; }

// err of x/y given |y| certified away from zero.
Real quotient_err(const Real& x, const Real& xe, const Real& y, const Real& ye) {
    Real ay = boost::multiprecision::abs(y);
    Real denom = ay - ye;
    return (xe + boost::multiprecision::abs(x / y) * ye) / denom +
           boost::multiprecision::abs(x / y) * 8 * rounding_unit();
}

}  // namespace

ASCParam ASCParam::make(QParam q, Real a) {
    if (!(a > q.q && a * q.q < 1))
        throw std::domain_error("ASCParam: need q < a < 1/q");
    return ASCParam{std::move(q), std::move(a)};
}

FreudConstants FreudConstants::compute() {
    Real g14 = tgamma(Real(1) / 4);
    Real g54 = tgamma(Real(5) / 4);
    return FreudConstants{g14 * g54 / sqrt(pi_value())};
}

// ---------------------------------------------------------------------------
// Stieltjes-Wigert
// ---------------------------------------------------------------------------

RhoValue rho0_sw_direct(const QParam& qp, const Real& tol) {
    qseries::require_feasible_tol(tol, Real(4), "rho0_sw_direct");
    const Real& q = qp.q;
    SeriesValue euler = qpochhammer(q, qp, kInfinite, tol / 64);
    Real elo = lower(euler);
    // phi_k <= sum_j q^j/(q;q)_j^2 <= 1/((1-q)(q;q)_inf^2)
    Real phi_bound = 1 / ((1 - q) * elo * elo);
    // sum of outer weights w_k = q^{2(k+1/2)^2}/(q;q)_k is at most g_0/((1-q^4) elo)
    Real weight_sum_bound = sqrt(q) / ((1 - q * q * q * q) * elo);
    Real inner_tol = tol / (3 * (1 + weight_sum_bound));

    Real g = sqrt(q);  // q^{2(k+1/2)^2} at k = 0
    Real poch(1);      // (q;q)_k
    Real q4k4 = q * q * q * q;  // q^{4k+4}
    Real qk1 = q;               // q^{k+1}
    Real total(0), errs(0), sum_abs(0);
    for (unsigned k = 0;; ++k) {
        Real w = g / poch;
        ComplexSeriesValue inner = qseries::phi_series(
            {Cplx(Real(0)), Cplx(qk1)}, {Cplx(q)}, qp, Cplx(q), inner_tol);
        total += w * inner.value.re;
        errs += w * inner.err;
        sum_abs += w * inner.value.re;
        Real gnext = g * q4k4;
        Real tail = phi_bound * gnext / (elo * (1 - q4k4 * q * q * q * q));
        if (tail <= tol / 3) {
            Real err = tail + errs + sum_abs * Real(32) * rounding_unit() * (k + 2);
            return {total, err, "direct"};
        }
        g = gnext;
        poch *= (1 - qk1);
        qk1 *= q;
        q4k4 *= q * q * q * q;
    }
}

RhoValue rho0_sw_fast(const QParam& qp, const Real& tol) {
    qseries::require_feasible_tol(tol, Real(4), "rho0_sw_fast");
    const Real& q = qp.q;
    SeriesValue euler = qpochhammer(q, qp, kInfinite, tol / 64);
    Real elo = lower(euler);
    Real inner_bound = 1 / ((1 - q) * elo * elo);  // T_k <= T_inf

    Real g = sqrt(q);
    Real q4k4 = q * q * q * q;
    Real qj(1);    // q^j at j = k
    Real poch(1);  // (q;q)_j at j = k
    Real prefix(0);
    Real total(0);
    for (unsigned k = 0;; ++k) {
        prefix += qj / (poch * poch);
        total += g * prefix;
        Real gnext = g * q4k4;
        Real tail = inner_bound * gnext / (1 - q4k4 * q * q * q * q);
        if (tail <= tol * elo / 3) {
            // the quotient magnifies the Euler-function error by total/E^2
            Real want = tol * elo * elo / (8 * (total + 1));
            if (euler.err > want) {
                euler = qpochhammer(q, qp, kInfinite, want);
                elo = lower(euler);
            }
            Real value = total / euler.value;
            Real err = quotient_err(total, tail + total * Real(16 * (k + 2)) * rounding_unit(),
                                    euler.value, euler.err);
            return {value, err, "fast"};
        }
        g = gnext;
        q4k4 *= q * q * q * q;
        qj *= q;
        poch *= (1 - qj);
    }
}

// ---------------------------------------------------------------------------
// Al-Salam-Carlitz
// ---------------------------------------------------------------------------

SeriesValue asc_In(unsigned n, const QParam& qp, const Real& tol, AscInRoute route) {
    qseries::require_feasible_tol(tol, Real(8), "asc_In");
    const Real& q = qp.q;

    if (n == 0) {
        // alternating series with strictly decreasing terms
        SeriesValue euler = qpochhammer(q, qp, kInfinite, tol / 16);
        Real s(0), qk(1), tri(1);
        unsigned k = 0;
        while (true) {
            s += (k % 2 == 0) ? tri : -tri;
            qk *= q;               // q^{k+1}
            tri *= qk;             // q^{(k+1)(k+2)/2}
            ++k;
            if (tri <= tol * lower(euler) / 4) break;
        }
        Real value = s / euler.value;
        Real err = quotient_err(s, tri + Real(8 * k) * rounding_unit(), euler.value, euler.err);
        return {value, err};
    }

    // Terms reach magnitude ~ q^{-n^2/2}; raise precision to keep the
    // cancellation harmless, then demote.
    double l2q = -std::log2(qp.q.convert_to<double>());
    unsigned elevated =
        working_bits() + static_cast<unsigned>(0.5 * double(n) * double(n) * l2q) + 96;
    PrecisionGuard guard{Precision(elevated)};
    Real qh = promoted(q);
    QParam qph = QParam::from_q(qh);
    Real tolh = promoted(tol);

    SeriesValue euler = qpochhammer(qh, qph, kInfinite, tolh / 16);
    Real qn = pow(qh, static_cast<int>(n));
    Real prefactor_den = (1 - pow(qh, 2 * static_cast<int>(n))) * euler.value;

    Real s(0), sum_abs(0);
    Real A(1);            // q^{k(k-1)/2} at k = 1
    Real qpow = qh;       // q^k used to advance A
    Real B = qn;          // q^{nk}
    Real C = 1 / qn;      // q^{-nk}
    unsigned k = 1;
    while (true) {
        if (k > 200000)
            throw std::domain_error("asc_In: series tail not certified within iteration cap");
        Real pair;
        if (route == AscInRoute::collapsed) {
            pair = 2 * A * (B - C);
        } else {
            // c_k = (-1)^k (q^{k(k+1)/2} + q^{k(k-1)/2}); the sign is applied below
            pair = (A * qpow + A) * (B - C);
        }
        if (k % 2 == 0) s -= pair; else s += pair;  // (-1)^k applied with flipped parity, fixed below
        sum_abs += boost::multiprecision::abs(pair);
        // magnitude majorant m_k = 2 q^{k(k-1)/2 - nk}; m_{k+1} = 2 q^{k(k+1)/2} q^{-n(k+1)}
        Real mk_next = 2 * A * qpow * C / qn;
        if (k > 2 * n) {
            Real ratio = pow(qh, static_cast<int>(k + 1 - n));  // bounds later one-step ratios
            if (ratio < 1) {
                Real tail = mk_next / (1 - ratio);
                if (tail <= tolh * boost::multiprecision::abs(prefactor_den) / 8) break;
            }
        }
        A *= qpow;
        qpow *= qh;
        B *= qn;
        C /= qn;
        ++k;
    }
    // s currently holds sum_k (-1)^{k+1} ... : fix overall sign.
    s = -s;
    Real tail_bits = 2 * A * qpow * C / qn / (1 - pow(qh, static_cast<int>(k + 1 - n)));
    Real value = s / prefactor_den;
    Real rough_err = (tail_bits + sum_abs * Real(16 * (k + 2)) * rounding_unit()) /
                         boost::multiprecision::abs(prefactor_den) +
                     boost::multiprecision::abs(value) *
                         (euler.err / (lower(euler))) +
                     boost::multiprecision::abs(value) * Real(16) * rounding_unit();
    return demote(value, rough_err);
}

namespace {

// |(e^{i t}; q)_inf|^2 node, optionally skipping the j = 0 factor (the n = 0
// integrand) and dividing by |1 - q^n e^{i t}|^2 for n >= 1.
NodeValue asc_integrand(const Real& theta, const QParam& qp, int n, const Real& node_tol) {
    Cplx z = unit_circle_point(theta);
    if (n == 0) {
        Cplx qz(qp.q * z.re, qp.q * z.im);
        ComplexSeriesValue p = qpochhammer(qz, qp, kInfinite, node_tol);
        Real w = norm_sq(p.value);
        Real err = 2 * abs(p.value) * p.err + p.err * p.err;
        return {w, err};
    }
    // (1;q)_inf = 0: the weight has a double zero at theta = 0
    if (z.im.is_zero() && z.re == 1) return {Real(0), Real(0)};
    ComplexSeriesValue p = qpochhammer(z, qp, kInfinite, node_tol);
    Real w = norm_sq(p.value);
    Real werr = 2 * abs(p.value) * p.err + p.err * p.err;
    if (n < 0) return {w, werr};  // limit integrand
    Real qn = pow(qp.q, n);
    Real den = 1 - 2 * qn * z.re + qn * qn;
    return {w / den, werr / den + (w / den) * Real(8) * rounding_unit()};
}

}  // namespace

SeriesValue asc_In_quadrature(unsigned n, const QParam& qp, const Real& tol) {
    qseries::require_feasible_tol(tol, Real(8), "asc_In_quadrature");
    Real node_tol = tol / 16;
    NodeValue r = trapezoid_circle(
        [&](const Real& th) { return asc_integrand(th, qp, static_cast<int>(n), node_tol); }, tol);
    return {r.value, r.err};
}

SeriesValue asc_Ilimit_quadrature(const QParam& qp, const Real& tol) {
    qseries::require_feasible_tol(tol, Real(8), "asc_Ilimit_quadrature");
    Real node_tol = tol / 16;
    NodeValue r = trapezoid_circle(
        [&](const Real& th) { return asc_integrand(th, qp, -1, node_tol); }, tol);
    return {r.value, r.err};
}

RhoValue rho0_asc(const ASCParam& p, const Real& tol, unsigned n_switch) {
    qseries::require_feasible_tol(tol, Real(16), "rho0_asc");
    const Real& q = p.q.q;
    const Real& a = p.a;
    const QParam& qp = p.q;

    SeriesValue aq_poch = qpochhammer(a * q, qp, kInfinite, tol / 64);
    SeriesValue euler = qpochhammer(q, qp, kInfinite, tol / 64);
    SeriesValue neg = qpochhammer(-q, qp, kInfinite, Real(tol / 64));
    Real elo = lower(euler);
    Real den = aq_poch.value * euler.value * euler.value;
    Real den_err = upper(euler) * upper(euler) * aq_poch.err +
                   2 * upper(aq_poch) * upper(euler) * euler.err;
    Real pref = 1 / den;

    // |I_n| <= 4 (-q;q)_inf^2 / (1-q)^2
    Real ibound = 4 * upper(neg) * upper(neg) / ((1 - q) * (1 - q));
    Real za = q / a;

    // the quotient magnifies the denominator error by |S/den|; tighten the
    // prefactor pieces so their share stays under tol/8
    {
        Real rho_scale = ibound / ((boost::multiprecision::abs(den) - den_err) * elo * (1 - za)) + 1;
        Real want = tol * boost::multiprecision::abs(den) / (8 * rho_scale);
        if (den_err > want) {
            aq_poch = qpochhammer(a * q, qp, kInfinite, want / 4);
            euler = qpochhammer(q, qp, kInfinite, want / 4);
            elo = lower(euler);
            den = aq_poch.value * euler.value * euler.value;
            den_err = upper(euler) * upper(euler) * aq_poch.err +
                      2 * upper(aq_poch) * upper(euler) * euler.err;
            pref = 1 / den;
        }
    }
    Real series_tol = tol * boost::multiprecision::abs(den) / 4;

    Real S(0), Serr(0);
    Real coeff(1);   // (aq;q)_n/(q;q)_n (q/a)^n, positive throughout
    Real qn(1);      // q^n
    Real za_pow(1);  // (q/a)^n
    for (unsigned n = 0;; ++n) {
        // per-term error budget telescopes: sum 1/((n+1)(n+2)) = 1
        Real in_tol = series_tol / (8 * coeff * Real((n + 1)) * Real((n + 2)));
        if (in_tol > Real("0.01")) in_tol = Real("0.01");
        SeriesValue In = (n <= n_switch) ? asc_In(n, qp, in_tol)
                                         : asc_In_quadrature(n, qp, in_tol);
        S += coeff * In.value;
        Serr += coeff * In.err;
        // coeff_m <= (q/a)^m / elo for m > n
        Real tail = ibound * za_pow * za / ((1 - za) * elo);
        if (tail <= series_tol) {
            Real value = pref * S;
            Real err = quotient_err(S, Serr + tail + boost::multiprecision::abs(S) *
                                                         Real(16 * (n + 2)) * rounding_unit(),
                                    den, den_err);
            return {value, err, "series"};
        }
        qn *= q;
        coeff *= (1 - a * qn) / (1 - qn) * za;
        za_pow *= za;
    }
}

RhoValue rho0_asc_quadrature(const ASCParam& p, const Real& tol) {
    qseries::require_feasible_tol(tol, Real(16), "rho0_asc_quadrature");
    const Real& q = p.q.q;
    const Real& a = p.a;
    const QParam& qp = p.q;

    SeriesValue aq_poch = qpochhammer(a * q, qp, kInfinite, tol / 64);
    SeriesValue euler = qpochhammer(q, qp, kInfinite, tol / 64);
    SeriesValue neg = qpochhammer(-q, qp, kInfinite, Real(tol / 64));
    Real den = aq_poch.value * euler.value * euler.value;
    Real den_err = upper(euler) * upper(euler) * aq_poch.err +
                   2 * upper(aq_poch) * upper(euler) * euler.err;
    {
        Real elo = lower(euler);
        Real ibound = 4 * upper(neg) * upper(neg) / ((1 - q) * (1 - q));
        Real rho_scale =
            ibound / ((boost::multiprecision::abs(den) - den_err) * elo * (1 - q / a)) + 1;
        Real want = tol * boost::multiprecision::abs(den) / (8 * rho_scale);
        if (den_err > want) {
            aq_poch = qpochhammer(a * q, qp, kInfinite, want / 4);
            euler = qpochhammer(q, qp, kInfinite, want / 4);
            den = aq_poch.value * euler.value * euler.value;
            den_err = upper(euler) * upper(euler) * aq_poch.err +
                      2 * upper(aq_poch) * upper(euler) * euler.err;
        }
    }

    Real quad_tol = tol * boost::multiprecision::abs(den) / 4;
    Real node_tol = quad_tol / 16;
    Cplx aq(a * q);
    NodeValue r = trapezoid_circle(
        [&](const Real& th) -> NodeValue {
            Cplx z = unit_circle_point(th);
            Cplx zb = z.conj();
            Cplx qz(q * z.re, q * z.im), qzb(q * zb.re, q * zb.im);
            ComplexSeriesValue pw = qpochhammer(qz, qp, kInfinite, node_tol);
            Real w = norm_sq(pw.value);
            Real werr = 2 * abs(pw.value) * pw.err + pw.err * pw.err;
            ComplexSeriesValue phi =
                qseries::phi_series({z, zb, aq}, {qz, qzb}, qp, Cplx(q / a), node_tol);
            Real v = w * phi.value.re;
            Real verr = w * (phi.err + boost::multiprecision::abs(phi.value.im)) +
                        werr * (boost::multiprecision::abs(phi.value.re) + phi.err);
            return {v, verr};
        },
        quad_tol);
    Real value = r.value / den;
    Real err = quotient_err(r.value, r.err, den, den_err);
    return {value, err, "quadrature"};
}

// ---------------------------------------------------------------------------
// Freud-like weight
// ---------------------------------------------------------------------------

ComplexSeriesValue freud_delta(unsigned l, const Cplx& z, const Real& tol) {
    if (l > 3) throw std::domain_error("freud_delta: l must be 0..3");
    qseries::require_feasible_tol(tol, Real(1), "freud_delta");
    Cplx z4 = z * z;
    z4 *= z4;
    Real fl(1);
    for (unsigned i = 2; i <= l; ++i) fl *= i;
    Cplx term(Real(1));
    for (unsigned i = 0; i < l; ++i) term *= z;
    term = term / Cplx(fl);
    Cplx sum = term;
    Real sum_abs = abs(term);
    Real z4mag = abs(z4);
    unsigned m = l;
    while (true) {
        Real ratio = z4mag / (Real(m + 1) * (m + 2) * (m + 3) * (m + 4));
        if (ratio < Real(1) / 2) {
            Real tail = abs(term) * ratio / (1 - ratio);
            if (tail <= tol / 2) {
                Real err = tail + sum_abs * Real(16) * rounding_unit() * (m + 2);
                return {sum, err};
            }
        }
        term *= z4;
        term = term / Cplx(Real(m + 1) * (m + 2) * (m + 3) * (m + 4));
        term = -term;
        sum += term;
        sum_abs += abs(term);
        m += 4;
    }
}

FreudBD freud_bd(const Cplx& z, const Real& tol) {
    Real k0 = FreudConstants::compute().K0;
    Cplx w = sqrt(Cplx(z.re / 2, z.im / 2));
    w *= Cplx(k0);
    ComplexSeriesValue d0 = freud_delta(0, w, tol / 2);
    ComplexSeriesValue d2 = freud_delta(2, w, tol / 2);
    Real four_over_pi = 4 / pi_value();
    return FreudBD{{-d0.value, d0.err}, {Cplx(four_over_pi) * d2.value, four_over_pi * d2.err}};
}

namespace {

NodeValue freud_kernel_node(const Real& theta, const Real& tol) {
    Real k0 = FreudConstants::compute().K0;
    Real half = theta / 2;
    Real ch, sh;
    mpfr_sin_cos(sh.backend().data(), ch.backend().data(), half.backend().data(), MPFR_RNDN);
    Real a = k0 * ch, b = k0 * sh;
    Real cutoff = ldexp(Real(1), -static_cast<int>(working_bits() / 4));

    Real st = sin(theta);
    if (boost::multiprecision::abs(st) >= cutoff) {
        Real v = (sinh(a) * sinh(b) + sin(a) * sin(b)) / (pi_value() * st);
        return {v, boost::multiprecision::abs(v) * Real(24) * rounding_unit() + tol / 16};
    }
    // Two-term series in the small factor; |remainder| = O(small^4).
    Real small2, v;
    if (boost::multiprecision::abs(sh) <= boost::multiprecision::abs(ch)) {
        small2 = b * b;
        v = k0 * ((sinh(a) + sin(a)) + small2 / 6 * (sinh(a) - sin(a))) / (2 * pi_value() * ch);
    } else {
        small2 = a * a;
        v = k0 * ((sinh(b) + sin(b)) + small2 / 6 * (sinh(b) - sin(b))) / (2 * pi_value() * sh);
    }
    Real err = small2 * small2 * Real(8) + boost::multiprecision::abs(v) * Real(24) * rounding_unit();
    return {v, err};
}

}  // namespace

CircleDensitySample freud_kernel(const Real& theta, const Real& tol) {
    qseries::require_feasible_tol(tol, Real(2), "freud_kernel");
    NodeValue nv = freud_kernel_node(theta, tol);
    return {promoted(theta), nv.value};
}

RhoValue rho0_freud(const Real& tol) {
    qseries::require_feasible_tol(tol, Real(2), "rho0_freud");
    Real k0 = FreudConstants::compute().K0;
    Real pre = k0 * k0 / pi_value();
    Real x = k0 * k0 / 4;  // (K0/2)^2; the (m,n) term weight is x^{m+n}

    // factorial table up to the truncation depth
    std::vector<Real> fact{Real(1)};
    auto factorial = [&fact](unsigned m) -> const Real& {
        while (fact.size() <= m) fact.push_back(fact.back() * Real(static_cast<unsigned>(fact.size())));
        return fact[m];
    };

    Real total(0);
    Real x2t(1);  // x^{2t}
    for (unsigned t = 0;; ++t) {
        Real diag(0);
        for (unsigned mm = 0; mm <= 2 * t; ++mm) {
            unsigned nn = 2 * t - mm;
            diag += x2t / (Real(2 * mm + 1) * Real(2 * nn + 1) * factorial(mm) * factorial(nn) *
                           factorial(2 * t));
        }
        total += diag;
        // next anti-diagonal bound: (2x)^{2t+2}/((2t+2)!)^2
        Real nb = pow(2 * x, 2 * static_cast<int>(t) + 2) /
                  (factorial(2 * t + 2) * factorial(2 * t + 2));
        if (2 * pre * nb <= tol / 2) {
            Real value = pre * total;
            Real err = 2 * pre * nb + value * Real(32 * (t + 2)) * rounding_unit();
            return {value, err, "double-sum"};
        }
        x2t *= x * x;
    }
}

RhoValue rho0_freud_quadrature(const Real& tol) {
    qseries::require_feasible_tol(tol, Real(2), "rho0_freud_quadrature");
    NodeValue r =
        trapezoid_circle([&](const Real& th) { return freud_kernel_node(th, tol / 8); }, tol);
    return {r.value, r.err, "quadrature"};
}

// ---------------------------------------------------------------------------
// q^{-1}-Hermite
// ---------------------------------------------------------------------------

namespace {

// Factor count M with prod_{n>M} within 1 +- bound of 1 on cos^2 in [0,1].
unsigned qh_factor_count(const Real& q, const Real& bound) {
    double l2q = -std::log2(q.convert_to<double>());
    double lb = -std::log2(std::min(bound.convert_to<double>(), 0.01) / 64.0);
    unsigned M = static_cast<unsigned>(lb / (2 * l2q)) + 2;
    return M;
}

// Relative half-width of the dropped c-dependent factors past M.
Real qh_tail_halfwidth(const QParam& qp, unsigned M) {
    Real q2m2 = pow(qp.q, 2 * static_cast<int>(M) + 2);
    return 32 * q2m2 / (1 - qp.q * qp.q);
}

NodeValue qh_kernel_node(const Real& theta, const QParam& qp, const Real& tol) {
    const Real& q = qp.q;
    Real c = cos(theta);
    c *= c;
    unsigned M = qh_factor_count(q, tol);
    Real head(1), qn(1);
    for (unsigned n = 1; n <= M; ++n) {
        qn *= q;
        Real one_qn = 1 + qn;
        Real A = one_qn * one_qn;
        A *= A;
        head *= (A - 16 * qn * qn * c);
    }
    SeriesValue euler = qpochhammer(q, qp, kInfinite, tol / 16);
    SeriesValue tailp = qpochhammer(-qn * q, qp, kInfinite, tol / 16);  // (-q^{M+1};q)_inf
    Real t4 = tailp.value * tailp.value;
    t4 *= t4;
    Real half = qh_tail_halfwidth(qp, M);
    Real v = head * t4 * (1 - half / 2) / euler.value;
    Real verr = boost::multiprecision::abs(v) *
                    (half + 4 * tailp.err / lower(tailp) + euler.err / lower(euler)) +
                boost::multiprecision::abs(v) * Real(8 * (M + 2)) * rounding_unit();
    return {v, verr};
}

}  // namespace

CircleDensitySample qh_kernel(const Real& theta, const QParam& qp, const Real& tol) {
    qseries::require_feasible_tol(tol, Real(4), "qh_kernel");
    NodeValue nv = qh_kernel_node(theta, qp, tol);
    return {promoted(theta), nv.value};
}

QHermiteRho rho0_qhermite(const QParam& qp, const Real& tol) {
    qseries::require_feasible_tol(tol, Real(8), "rho0_qhermite");
    const Real& q = qp.q;

    // (a) expand the truncated product as a polynomial in c = cos^2 theta and
    // integrate termwise against (1/2pi) int cos^{2k} = 4^{-k} binom(2k,k).
    unsigned M = qh_factor_count(q, tol / 2);
    std::vector<Real> coeff{Real(1)};
    Real qn(1);
    for (unsigned n = 1; n <= M; ++n) {
        qn *= q;
        Real one_qn = 1 + qn;
        Real A = one_qn * one_qn;
        A *= A;
        Real B = 16 * qn * qn;
        std::vector<Real> next(coeff.size() + 1, Real(0));
        for (size_t i = 0; i < coeff.size(); ++i) {
            next[i] += A * coeff[i];
            next[i + 1] -= B * coeff[i];
        }
        coeff.swap(next);
    }
    Real integral(0), wk(1);
    for (size_t k = 0; k < coeff.size(); ++k) {
        integral += coeff[k] * wk;
        wk *= Real(2 * k + 1) / Real(2 * k + 2);
    }
    SeriesValue euler = qpochhammer(q, qp, kInfinite, tol / 16);
    SeriesValue tailp = qpochhammer(-qn * q, qp, kInfinite, tol / 16);
    Real t4 = tailp.value * tailp.value;
    t4 *= t4;
    Real half = qh_tail_halfwidth(qp, M);
    Real value = integral * t4 * (1 - half / 2) / euler.value;
    Real err = boost::multiprecision::abs(value) *
                   (half + 4 * tailp.err / lower(tailp) + euler.err / lower(euler)) +
               boost::multiprecision::abs(value) * Real(16) * rounding_unit() * (M + 2);
    RhoValue expansion{value, err, "product-expansion"};

    NodeValue r = trapezoid_circle(
        [&](const Real& th) { return qh_kernel_node(th, qp, tol / 8); }, tol);
    RhoValue quadrature{r.value, r.err, "quadrature"};
    return {expansion, quadrature};
}

Real lower_bound(const RhoValue& rho) {
    if (!(rho.value > 0)) throw std::domain_error("lower_bound: rho must be positive");
    Real denom, l;
    mpfr_add(denom.backend().data(), rho.value.backend().data(), rho.err.backend().data(),
             MPFR_RNDU);
    mpfr_ui_div(l.backend().data(), 1, denom.backend().data(), MPFR_RNDD);
    return l;
}

}  // namespace hankel::rho
