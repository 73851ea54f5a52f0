#include "hankel/qseries.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hankel::qseries {

namespace {

constexpr unsigned kIterationCap = 200000;

void check_q(const Real& q) {
    if (!(q > 0 && q < 1)) throw std::domain_error("QParam: q must lie in (0,1)");
}

Real abs_or_self(const Cplx& z) { return z.is_real() ? Real(boost::multiprecision::abs(z.re)) : abs(z); }

// exp(x) - 1 with an upper-bound slant for small x >= 0.
Real expm1_up(const Real& x) {
    Real r;
    mpfr_expm1(r.backend().data(), x.backend().data(), MPFR_RNDU);
    return r;
}

}  // namespace

QParam QParam::from_q(Real q) {
    check_q(q);
    return QParam{std::move(q), std::nullopt};
}

QParam QParam::from_k_weight(Real k) {
    if (!(k > 0)) throw std::domain_error("QParam: k weight must be positive");
    Real q = exp(Real(-1) / (2 * k * k));
    check_q(q);
    return QParam{std::move(q), std::move(k)};
}

void require_feasible_tol(const Real& tol, const Real& scale, const char* where) {
    if (!(tol > 0)) throw std::domain_error(std::string(where) + ": tol must be positive");
    Real floor = (1 + boost::multiprecision::abs(scale)) * ldexp(Real(1), 12 - static_cast<int>(working_bits()));
    if (tol < floor) {
        // bits that would place the rounding floor at tol/2
        Real need = log2(2 * (1 + boost::multiprecision::abs(scale)) / tol) + 16;
        throw PrecisionExhausted(std::string(where) +
                                     ": requested tolerance is below the rounding floor at " +
                                     std::to_string(working_bits()) + " bits",
                                 static_cast<unsigned>(need.convert_to<double>()) + 1);
    }
}

ComplexSeriesValue qpochhammer(const Cplx& a, const QParam& qp, unsigned n, const Real& tol) {
    check_q(qp.q);
    const Real& q = qp.q;
    if (a.is_zero()) return {Cplx(Real(1)), Real(0)};

    if (n != kInfinite) {
        Cplx prod{Real(1)};
        Real qj(1);
        for (unsigned j = 0; j < n; ++j) {
            prod *= (Cplx(Real(1)) - Cplx(a.re * qj, a.im * qj));
            qj *= q;
        }
        Real err = n == 0 ? Real(0) : abs(prod) * Real(4 * (n + 1)) * rounding_unit();
        return {prod, err};
    }

    require_feasible_tol(tol, Real(1), "qpochhammer");
    const Real mag_a = abs_or_self(a);
    Cplx prod{Real(1)};
    Real qj(1);
    Real sum_abs(1);
    unsigned j = 0;
    while (true) {
        if (j > kIterationCap)
            throw std::domain_error("qpochhammer: iteration cap reached before tail certified");
        // Tail criterion at index M = j: all remaining |a| q^m are <= head.
        Real head = mag_a * qj;
        if (head < 1) {
            Real log_tail = head / ((1 - q) * (1 - head));
            Real trunc = abs(prod) * expm1_up(log_tail);
            if (trunc <= tol / 2) {
                Real err = trunc + sum_abs * Real(8) * rounding_unit() * (j + 2);
                return {prod, err};
            }
        }
        Cplx factor = Cplx(Real(1)) - Cplx(a.re * qj, a.im * qj);
        Real fmag = abs(factor);
        if (fmag <= (1 + head) * ldexp(Real(1), -static_cast<int>(working_bits() / 2)))
            throw std::domain_error(
                "qpochhammer: infinite product with a vanishing factor (a = q^{-j})");
        prod *= factor;
        sum_abs += abs(prod);
        qj *= q;
        ++j;
    }
}

SeriesValue qpochhammer(const Real& a, const QParam& qp, unsigned n, const Real& tol) {
    ComplexSeriesValue r = qpochhammer(Cplx(a), qp, n, tol);
    return {r.value.re, r.err};
}

Real qbinomial(unsigned n, unsigned k, const QParam& qp) {
    check_q(qp.q);
    if (k > n) throw std::domain_error("qbinomial: k > n");
    if (k > n - k) k = n - k;
    const Real& q = qp.q;
    Real num(1), den(1);
    Real qtop = pow(q, static_cast<int>(n - k));
    Real qi = q;
    for (unsigned i = 1; i <= k; ++i) {
        qtop *= q;  // q^{n-k+i}
        num *= (1 - qtop);
        den *= (1 - qi);
        qi *= q;
    }
    return num / den;
}

ComplexSeriesValue phi_series(const std::vector<Cplx>& numerator,
                              const std::vector<Cplx>& denominator, const QParam& qp,
                              const Cplx& z, const Real& tol) {
    check_q(qp.q);
    if (numerator.size() != denominator.size() + 1)
        throw std::domain_error("phi_series: need r+1 numerator and r denominator parameters");
    require_feasible_tol(tol, Real(1), "phi_series");
    const Real& q = qp.q;
    const Real zmag = abs_or_self(z);

    Cplx term{Real(1)};
    Cplx sum{Real(1)};
    Real sum_abs(1);
    Real qn(1);  // q^n
    const unsigned ops_per_term = 4 * static_cast<unsigned>(numerator.size() + denominator.size()) + 8;

    for (unsigned n = 0;; ++n) {
        if (n > kIterationCap)
            throw std::domain_error("phi_series: tail majorant not established within iteration cap");

        // One-step ratio majorant valid for every index >= n.
        Real ratio_hi = zmag;
        bool ratio_ok = true;
        for (const Cplx& a : numerator) ratio_hi *= (1 + abs_or_self(a) * qn);
        for (const Cplx& b : denominator) {
            Real d = 1 - abs_or_self(b) * qn;
            if (!(d > 0)) { ratio_ok = false; break; }
            ratio_hi /= d;
        }
        if (ratio_ok) ratio_hi /= (1 - qn * q);

        if (ratio_ok && ratio_hi < 1) {
            Real tail = abs(term) * ratio_hi / (1 - ratio_hi);
            if (tail <= tol / 2) {
                Real err = tail + sum_abs * Real(ops_per_term) * rounding_unit() * (n + 2);
                return {sum, err};
            }
        }
        if (!ratio_ok && zmag >= 1)
            throw std::domain_error("phi_series: divergent parameter/argument configuration");

        // Advance to term n+1.
        Cplx step = z;
        for (const Cplx& a : numerator) step *= (Cplx(Real(1)) - Cplx(a.re * qn, a.im * qn));
        for (const Cplx& b : denominator) {
            Cplx d = Cplx(Real(1)) - Cplx(b.re * qn, b.im * qn);
            if (abs(d).is_zero())
                throw std::domain_error("phi_series: denominator Pochhammer factor vanishes");
            step /= d;
        }
        step /= (Cplx(Real(1)) - Cplx(qn * q));
        term *= step;
        if (term.is_zero()) {  // numerator parameter q^{-m}: series terminates
            Real err = sum_abs * Real(ops_per_term) * rounding_unit() * (n + 2);
            return {sum, err};
        }
        sum += term;
        sum_abs += abs(term);
        qn *= q;
    }
}

Real theta_coefficient(long k, const QParam& qp) {
    check_q(qp.q);
    unsigned long m = static_cast<unsigned long>(k < 0 ? -k : k);
    Real lo = pow(qp.q, Real(m * (m - 1) / 2));
    Real hi = pow(qp.q, Real(m * (m + 1) / 2));
    Real c = lo + hi;
    return (m % 2 == 0) ? c : -c;
}

ComplexSeriesValue triple_product(const Cplx& z, const QParam& qp, const Real& tol,
                                  TripleProductRoute route) {
    check_q(qp.q);
    if (z.is_real() && z.re == 1) return {Cplx(Real(0)), Real(0)};
    if (z.is_zero()) throw std::domain_error("triple_product: z must be nonzero");
    require_feasible_tol(tol, Real(1), "triple_product");
    const Real& q = qp.q;

    if (route == TripleProductRoute::product) {
        Cplx zinv = Cplx(Real(1)) / z;
        ComplexSeriesValue pq = qpochhammer(Cplx(q), qp, kInfinite, tol / 8);
        ComplexSeriesValue pz = qpochhammer(z, qp, kInfinite, tol / 8);
        ComplexSeriesValue pzi = qpochhammer(zinv, qp, kInfinite, tol / 8);
        Cplx v = pq.value * pz.value * pzi.value;
        Real aq = abs(pq.value), az = abs(pz.value), azi = abs(pzi.value);
        Real err = az * azi * pq.err + aq * azi * pz.err + aq * az * pzi.err +
                   (pq.err + az) * (pz.err + azi) * pzi.err +  // crude higher-order cover
                   abs(v) * Real(16) * rounding_unit();
        return {v, err};
    }

    // Laurent route: c_0 + sum_{k>=1} c_k (z^k + z^{-k}).
    Cplx zinv = Cplx(Real(1)) / z;
    Real r = abs(z);
    if (abs(zinv) > r) r = abs(zinv);
    Cplx zk{Real(1)}, zmk{Real(1)};
    Cplx sum{theta_coefficient(0, qp)};
    Real sum_abs = abs(sum);
    Real qkk(1);  // q^{k(k-1)/2}, updated by multiplying q^{k-1}
    Real qpow(1); // q^{k-1} after k increments
    for (unsigned k = 1;; ++k) {
        if (k > kIterationCap)
            throw std::domain_error("triple_product: tail not certified within iteration cap");
        // g_k = 4 q^{k(k-1)/2} r^k majorizes |c_k (z^k + z^{-k})|; ratio q^k r.
        if (k > 1) { qkk *= qpow; qpow *= q; } else { qpow = q; }
        Real rk = pow(r, static_cast<int>(k));
        Real gk = 4 * qkk * rk;
        Real ratio = qpow * r;  // q^k r bounds every later one-step ratio
        if (ratio < 1) {
            Real tail = gk / (1 - ratio);  // covers term k and everything after
            if (tail <= tol / 2) {
                Real err = tail + sum_abs * Real(12) * rounding_unit() * (k + 2);
                return {sum, err};
            }
        }
        zk *= z;
        zmk *= zinv;
        Cplx t = (zk + zmk);
        Real ck = theta_coefficient(static_cast<long>(k), qp);
        t *= Cplx(ck);
        sum += t;
        sum_abs += abs(t);
    }
}

std::pair<SeriesValue, SeriesValue> inner_sum_identity(unsigned k, const QParam& qp,
                                                      const Real& omega, const Real& tol) {
    check_q(qp.q);
    if (!(omega > 0 && omega < 1)) throw std::domain_error("inner_sum_identity: omega in (0,1)");
    require_feasible_tol(tol, Real(1), "inner_sum_identity");
    const Real& q = qp.q;

    SeriesValue euler = qpochhammer(q, qp, kInfinite, tol / 16);
    Real euler_lo = euler.value - euler.err;  // certified lower bound on (q;q)_inf

    // LHS: sum_{n>=k} w^n/(q;q)_n [n k]_q^2, binomial updated by one-step ratio.
    Real lhs(0), lhs_abs(0);
    Real binom(1);                      // [n k]_q at n = k
    Real poch = qpochhammer(q, qp, k, tol).value;  // (q;q)_n at n = k (exact product)
    Real wn = pow(omega, static_cast<int>(k));
    Real qn = pow(q, static_cast<int>(k));  // q^n
    const Real qk = qn;
    const Real tail_scale = 1 / ((1 - omega) * euler_lo * euler_lo * euler_lo);
    unsigned steps = 0;
    for (unsigned n = k;; ++n, ++steps) {
        if (steps > kIterationCap)
            throw std::domain_error("inner_sum_identity: iteration cap");
        Real t = wn * binom * binom / poch;
        lhs += t;
        lhs_abs += t;
        Real tail = wn * omega * tail_scale;
        if (tail <= tol / 2) {
            Real err = tail + lhs_abs * Real(16) * rounding_unit() * (steps + 2);
            SeriesValue lhs_sv{lhs, err};

            // RHS: finite sum against 1/(w;q)_inf.
            SeriesValue womega = qpochhammer(omega, qp, kInfinite, tol / 16);
            Real rsum(0);
            Real wj(1);       // (w;q)_j
            Real qqj(1);      // (q;q)_j
            Real qj(1);       // q^j
            for (unsigned j = 0; j <= k; ++j) {
                Real qqkj = qpochhammer(q, qp, k - j, tol).value;
                rsum += wj * pow(omega, static_cast<int>(2 * k - j)) / (qqj * qqkj * qqkj);
                wj *= (1 - omega * qj);
                qqj *= (1 - q * qj);
                qj *= q;
            }
            Real denom = womega.value;
            Real rhs = rsum / denom;
            Real rerr = (boost::multiprecision::abs(rsum) * womega.err) /
                            (boost::multiprecision::abs(denom) * (boost::multiprecision::abs(denom) - womega.err)) +
                        boost::multiprecision::abs(rhs) * Real(16 * (k + 2)) * rounding_unit();
            return {lhs_sv, SeriesValue{rhs, rerr}};
        }
        // advance: n -> n+1
        qn *= q;
        poch *= (1 - qn);
        binom *= (1 - qn) / (1 - qn / qk);
        wn *= omega;
    }
}

}  // namespace hankel::qseries
