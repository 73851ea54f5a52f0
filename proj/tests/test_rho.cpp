#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hankel/rho.hpp"
#include "hankel/spectra.hpp"

#include <vector>

using namespace hankel;
using namespace hankel::rho;
using qseries::QParam;
using qseries::kInfinite;
using qseries::qpochhammer;

namespace {

QParam qof(const char* s) { return QParam::from_q(Real(s)); }

// Complex cosh/cos over Cplx, used only as closed-form oracles here.
Cplx ccosh(const Cplx& z) {
    return Cplx(cosh(z.re) * cos(z.im), sinh(z.re) * sin(z.im));
}
Cplx ccos(const Cplx& z) {
    return Cplx(cos(z.re) * cosh(z.im), -sin(z.re) * sinh(z.im));
}

}  // namespace

TEST_CASE("stieltjes-wigert rho_0: value and dual route") {
    PrecisionGuard g{Precision(320)};
    auto qp = qof("0.5");
    Real tol("1e-26");

    auto fast = rho0_sw_fast(qp, tol);
    auto direct = rho0_sw_direct(qp, tol);
    CHECK(abs(fast.value - direct.value) <= fast.err + direct.err);
    CHECK(fast.err + direct.err <= Real("1e-25"));

    // paper's q = 1/2 headline: rho_0 = 1/l with l = 0.3435... (4 digits)
    CHECK(fast.value >= Real("2.9078"));
    CHECK(fast.value <= Real("2.9164"));
    Real l = lower_bound(fast);
    CHECK(l >= Real("0.3430"));
    CHECK(l <= Real("0.3440"));

    // positivity splits: the k = 0 outer term alone is below rho_0
    Real euler = qpochhammer(qp.q, qp, kInfinite, Real("1e-40")).value;
    Real first_term = sqrt(qp.q) / euler;  // (1/(q;q)_inf) q^{1/2} T_0, T_0 = 1
    CHECK(first_term <= fast.value);
    CHECK(first_term > 0);

    for (const char* qs : {"0.3", "0.7"}) {
        auto q2 = qof(qs);
        auto f2 = rho0_sw_fast(q2, tol);
        auto d2 = rho0_sw_direct(q2, tol);
        CHECK(abs(f2.value - d2.value) <= f2.err + d2.err);
        CHECK(f2.err + d2.err <= Real("1e-25"));
    }
}

TEST_CASE("sw rho_0 agrees with the kernel trace route at q = 0.7") {
    auto qp = qof("0.7");
    auto src = moments::MomentSource::stieltjes_wigert(qp, Precision(64));
    auto r = rho0_sw_fast(qp, Real("1e-25"));
    Real prev_gap;
    for (unsigned N : {20u, 28u}) {
        PrecisionGuard g{Precision(moments::required_bits(src, N) + 64)};
        moments::HankelMatrix H(src, N);
        Real tr = spectra::trace_bound(spectra::kernel_matrix(spectra::beta_from_hankel(H)));
        CHECK(tr <= r.value + r.err);
        Real gap = promoted(r.value) - tr;
        CHECK(gap <= Real("0.01") * r.value);  // within a percent of rho_0 already
        if (N == 28) CHECK(gap < prev_gap);    // and still converging from below
        prev_gap = promoted(gap);
    }
}

TEST_CASE("asc I_n series, paired series, and quadrature agree") {
    PrecisionGuard g{Precision(320)};
    auto qp = qof("0.5");

    auto i0 = asc_In(0, qp, Real("1e-30"));
    // frozen from the independent alternating-series oracle
    CHECK(abs(i0.value - Real("2.113388773402317159382086605225304131371")) <= Real("1e-30"));

    for (unsigned n = 1; n <= 8; ++n) {
        auto collapsed = asc_In(n, qp, Real("1e-22"));
        auto paired = asc_In(n, qp, Real("1e-22"), AscInRoute::theta_pair);
        CHECK(abs(collapsed.value - paired.value) <= collapsed.err + paired.err);
        CHECK(collapsed.err + paired.err <= Real("1e-20"));
        CHECK(collapsed.value > 0);  // the integrand of I_n is nonnegative
    }

    for (unsigned n = 0; n <= 8; ++n) {
        auto series = asc_In(n, qp, Real("1e-16"));
        auto quad = asc_In_quadrature(n, qp, Real("1e-14"));
        CHECK(abs(series.value - quad.value) <= Real("1e-12"));
    }

    // I_n approaches the n-free integral
    auto limit = asc_Ilimit_quadrature(qp, Real("1e-14"));
    auto i32 = asc_In_quadrature(32, qp, Real("1e-14"));
    CHECK(limit.value > 0);
    CHECK(abs(i32.value - limit.value) <= Real("1e-8"));
}

TEST_CASE("asc rho_0 dual route and parameter range") {
    PrecisionGuard g{Precision(320)};
    auto qp = qof("0.5");
    auto p = ASCParam::make(qp, Real(1));

    auto series = rho0_asc(p, Real("1e-12"));
    auto quad = rho0_asc_quadrature(p, Real("1e-11"));
    CHECK(abs(series.value - quad.value) <= series.err + quad.err);
    CHECK(abs(series.value - quad.value) / series.value <= Real("1e-10"));

    // interior parameter values stay finite and positive
    for (const char* as : {"0.8", "1.25"}) {
        auto pa = ASCParam::make(qp, Real(as));
        auto r = rho0_asc_quadrature(pa, Real("1e-9"));
        CHECK(r.value > 0);
        CHECK(r.err < r.value);
    }

    CHECK_THROWS_AS(ASCParam::make(qp, Real("0.4")), std::domain_error);   // a <= q
    CHECK_THROWS_AS(ASCParam::make(qp, Real("2.5")), std::domain_error);   // a >= 1/q
}

TEST_CASE("freud delta functions against their closed forms") {
    PrecisionGuard g{Precision(256)};
    Real tol("1e-30");

    CHECK(freud_delta(0, Cplx(Real(0)), tol).value.re == 1);
    CHECK(freud_delta(2, Cplx(Real(0)), tol).value.re == 0);
    CHECK_THROWS_AS(freud_delta(4, Cplx(Real(0)), tol), std::domain_error);

    // delta_0(z) = (cosh(z sqrt(i)) + cos(z sqrt(i)))/2, sqrt(i) = e^{i pi/4}
    Cplx sqrt_i = unit_circle_point(pi_value() / 4);
    for (const Real& zr : {Real(1), Real("0.3"), Real("1.7")}) {
        Cplx w = Cplx(zr) * sqrt_i;
        Cplx d0_closed = (ccosh(w) + ccos(w)) / Cplx(Real(2));
        auto d0 = freud_delta(0, Cplx(zr), tol);
        CHECK(abs(d0.value - d0_closed) <= d0.err + Real("1e-28"));

        // delta_2(z) = (cosh(z sqrt(i)) - cos(z sqrt(i)))/(2i)
        Cplx d2_closed = (ccosh(w) - ccos(w)) / Cplx(Real(0), Real(2));
        auto d2 = freud_delta(2, Cplx(zr), tol);
        CHECK(abs(d2.value - d2_closed) <= d2.err + Real("1e-28"));
    }
}

TEST_CASE("freud B, D and K0") {
    PrecisionGuard g{Precision(256)};
    auto bd0 = freud_bd(Cplx(Real(0)), Real("1e-30"));
    CHECK(bd0.B.value.re == -1);
    CHECK(bd0.B.value.im == 0);
    CHECK(bd0.D.value.re == 0);

    // K0 = Gamma(1/4) Gamma(5/4)/sqrt(pi), frozen from an independent oracle
    Real k0 = FreudConstants::compute().K0;
    CHECK(abs(k0 - Real("1.854074677301371918433850347195260046218")) <= Real("1e-35"));
}

TEST_CASE("freud kernel: spot value, symmetry, Nevanlinna route") {
    PrecisionGuard g{Precision(256)};
    Real tol("1e-25");
    Real k0 = FreudConstants::compute().K0;

    // theta = pi/2: both half-angle factors are K0/sqrt(2)
    Real spot = freud_kernel(pi_value() / 2, tol).value;
    Real x = k0 / sqrt(Real(2));
    Real expect = (sinh(x) * sinh(x) + sin(x) * sin(x)) / pi_value();
    CHECK(abs(spot - expect) <= Real("1e-40"));

    for (const Real& th : {Real("0.4"), Real("1.1"), Real("2.9")}) {
        Real a = freud_kernel(th, tol).value;
        Real b = freud_kernel(2 * pi_value() - th, tol).value;
        CHECK(a > 0);
        CHECK(abs(a - b) <= Real("1e-40") * (1 + a));
    }

    // removable singularities: smooth limits near 0 and pi
    Real near0 = freud_kernel(Real("1e-30"), tol).value;
    Real limit0 = k0 * (sinh(k0) + sin(k0)) / (2 * pi_value());
    CHECK(abs(near0 - limit0) <= Real("1e-25"));

    // Nevanlinna route on 32 nodes
    for (unsigned j = 1; j <= 32; ++j) {
        Real th = 2 * pi_value() * j / 34;
        Cplx zx = unit_circle_point(th);
        Cplx zy = zx.conj();
        auto bx = freud_bd(zx, Real("1e-28"));
        auto by = freud_bd(zy, Real("1e-28"));
        Cplx nev = (bx.B.value * by.D.value - by.B.value * bx.D.value) / (zx - zy);
        Real direct = freud_kernel(th, Real("1e-28")).value;
        CHECK(abs(nev.re - direct) <= Real("1e-12"));
        CHECK(abs(nev.im) <= Real("1e-20"));
    }
}

TEST_CASE("freud rho_0: double sum vs quadrature, parity guard") {
    PrecisionGuard g{Precision(256)};
    auto sum = rho0_freud(Real("1e-20"));
    auto quad = rho0_freud_quadrature(Real("1e-13"));
    CHECK(abs(sum.value - quad.value) <= Real("1e-12"));

    // the (0,0) term K0^2/pi alone is a lower bound
    Real k0 = FreudConstants::compute().K0;
    CHECK(k0 * k0 / pi_value() <= sum.value);

    // dropping the parity constraint must move the value
    Real k02 = k0 * k0 / 4;  // (K0/2)^2
    Real all_pairs(0), even_pairs(0);
    std::vector<Real> fact{Real(1)};
    for (unsigned i = 1; i <= 40; ++i) fact.push_back(fact.back() * i);
    for (unsigned m = 0; m <= 18; ++m)
        for (unsigned n = 0; n <= 18; ++n) {
            Real t = pow(k02, static_cast<int>(m + n)) /
                     (Real(2 * m + 1) * Real(2 * n + 1) * fact[m] * fact[n] * fact[m + n]);
            all_pairs += t;
            if ((m + n) % 2 == 0) even_pairs += t;
        }
    Real pre = k0 * k0 / pi_value();
    CHECK(abs(pre * even_pairs - sum.value) <= Real("1e-18"));
    CHECK(abs(pre * all_pairs - sum.value) > Real("0.01"));
}

TEST_CASE("q-inverse-hermite kernel spot values and symmetry") {
    PrecisionGuard g{Precision(256)};
    auto qp = qof("0.5");
    Real tol("1e-25");

    // theta = pi/2 collapses every factor to (1+q^n)^4
    Real spot = qh_kernel(pi_value() / 2, qp, tol).value;
    Real euler = qpochhammer(qp.q, qp, kInfinite, Real("1e-35")).value;
    Real neg = qpochhammer(-qp.q, qp, kInfinite, Real("1e-35")).value;
    Real expect = neg * neg;
    expect *= expect;
    expect /= euler;
    CHECK(abs(spot - expect) <= Real("1e-20") * (1 + expect));

    for (const Real& th : {Real("0.3"), Real("0.9"), Real("1.4")}) {
        Real a = qh_kernel(th, qp, tol).value;
        Real b = qh_kernel(pi_value() - th, qp, tol).value;
        CHECK(a > 0);
        CHECK(abs(a - b) <= Real("1e-30") * (1 + a));
    }

    // Ismail-Masson product form with sinh(xi) = e^{i t}, principal branches
    for (unsigned j = 1; j <= 8; ++j) {
        Real th = pi_value() * j / 9;
        Cplx si = unit_circle_point(th);
        Cplx w = si.conj();
        Cplx eeta = w + sqrt(Cplx(Real(1)) + w * w);  // e^{eta}
        Cplx em = Cplx(Real(1)) / eeta;
        Cplx prod{Real(1)};
        Real qn(1);
        for (unsigned n = 0; n < 220; ++n) {
            Cplx an = Cplx(Real(1)) - Cplx(Real(2)) * em * Cplx(qn) * si - em * em * Cplx(qn * qn);
            Real qn1 = qn * qp.q;
            Cplx bn = Cplx(Real(1)) + Cplx(Real(2)) * eeta * Cplx(qn1) * si -
                      eeta * eeta * Cplx(qn1 * qn1);
            prod *= an * bn;
            qn *= qp.q;
        }
        Real euler_h = qpochhammer(qp.q, qp, kInfinite, Real("1e-35")).value;
        Cplx bd = Cplx(Real(0)) - eeta * prod / Cplx(2 * euler_h);
        Cplx kernel_im = bd / (si - w);
        Real direct = qh_kernel(th, qp, Real("1e-20")).value;
        CHECK(abs(kernel_im.re - direct) <= Real("1e-12"));
        CHECK(abs(kernel_im.im) <= Real("1e-15"));
    }
}

TEST_CASE("q-inverse-hermite rho_0 routes") {
    PrecisionGuard g{Precision(320)};
    auto qp = qof("0.5");
    auto r = rho0_qhermite(qp, Real("1e-14"));
    CHECK(abs(r.expansion.value - r.quadrature.value) <= Real("1e-12"));
    CHECK(abs(r.expansion.value - r.quadrature.value) <= r.expansion.err + r.quadrature.err);

    // the truncated product expanded in c equals the elementary-symmetric
    // (subset-sum) expansion of the same factors
    const unsigned M = 24;
    const Real& q = qp.q;
    std::vector<Real> conv{Real(1)};
    Real headA(1);
    {
        Real qn(1);
        for (unsigned n = 1; n <= M; ++n) {
            qn *= q;
            Real A = (1 + qn) * (1 + qn);
            A *= A;
            headA *= A;
            Real Bn = 16 * qn * qn;
            std::vector<Real> next(conv.size() + 1, Real(0));
            for (size_t i = 0; i < conv.size(); ++i) {
                next[i] += A * conv[i];
                next[i + 1] -= Bn * conv[i];
            }
            conv.swap(next);
        }
    }
    // e_k of y_n = B_n/A_n via the Newton-free product recurrence
    std::vector<Real> ek{Real(1)};
    {
        Real qn(1);
        for (unsigned n = 1; n <= M; ++n) {
            qn *= q;
            Real A = (1 + qn) * (1 + qn);
            A *= A;
            Real y = 16 * qn * qn / A;
            ek.push_back(Real(0));
            for (size_t k = ek.size() - 1; k >= 1; --k) ek[k] += y * ek[k - 1];
        }
    }
    for (size_t k = 0; k < conv.size(); ++k) {
        Real subset = headA * ek[k] * ((k % 2) ? -1 : 1);
        CHECK(abs(conv[k] - subset) <= abs(subset) * Real(1024) * rounding_unit() + Real("1e-60"));
    }

    // the k = 0 term (-q;q)_inf^4/(q;q)_inf majorizes rho_0: the kernel is
    // maximal at theta = pi/2 where all cos^2 terms vanish
    Real euler = qpochhammer(q, qp, kInfinite, Real("1e-30")).value;
    Real neg = qpochhammer(-q, qp, kInfinite, Real("1e-30")).value;
    Real k0term = neg * neg;
    k0term *= k0term;
    k0term /= euler;
    CHECK(r.expansion.value < k0term);
}

TEST_CASE("lower_bound is conservative and monotone") {
    PrecisionGuard g{Precision(256)};
    RhoValue unit{Real(1), Real("1e-20"), "test"};
    Real l = lower_bound(unit);
    CHECK(l <= 1);
    CHECK(1 - l <= Real("2e-20"));

    RhoValue bigger{Real(2), Real("1e-20"), "test"};
    CHECK(lower_bound(bigger) < lower_bound(unit));

    auto sw = rho0_sw_fast(qof("0.5"), Real("1e-25"));
    Real lsw = lower_bound(sw);
    CHECK(lsw >= Real("0.3430"));
    CHECK(lsw <= Real("0.3440"));
    CHECK_THROWS_AS(lower_bound(RhoValue{Real(-1), Real(0), "x"}), std::domain_error);
}

TEST_CASE("series err bounds survive doubled precision and halved tolerance") {
    auto qp = qof("0.5");
    auto run_lo = [&](auto&& f) {
        PrecisionGuard g{Precision(192)};
        return f();
    };
    auto run_hi = [&](auto&& f) {
        PrecisionGuard g{Precision(384)};
        return f();
    };

    {
        auto lo = run_lo([&] { return asc_In(3, qp, Real("1e-18")); });
        auto hi = run_hi([&] { return asc_In(3, qp, Real("5e-19")); });
        PrecisionGuard g{Precision(384)};
        CHECK(abs(promoted(lo.value) - hi.value) <= promoted(lo.err));
    }
    {
        auto lo = run_lo([&] { return rho0_sw_fast(qp, Real("1e-18")); });
        auto hi = run_hi([&] { return rho0_sw_fast(qp, Real("5e-19")); });
        PrecisionGuard g{Precision(384)};
        CHECK(abs(promoted(lo.value) - hi.value) <= promoted(lo.err));
    }
    {
        auto lo = run_lo([&] { return freud_delta(2, Cplx(Real("1.3"), Real("0.4")), Real("1e-18")); });
        auto hi = run_hi([&] { return freud_delta(2, Cplx(Real("1.3"), Real("0.4")), Real("5e-19")); });
        PrecisionGuard g{Precision(384)};
        CHECK(abs(promoted(lo.value.re) - hi.value.re) <= promoted(lo.err));
        CHECK(abs(promoted(lo.value.im) - hi.value.im) <= promoted(lo.err));
    }
    {
        auto eval_phi = [&](const Real& tol) {
            Cplx z = unit_circle_point(pi_value() / 5);
            return qseries::phi_series({z, z.conj(), Cplx(qp.q)},
                                       {Cplx(qp.q * z.re, qp.q * z.im),
                                        Cplx(qp.q * z.re, -qp.q * z.im)},
                                       qp, Cplx(qp.q / 2), tol);
        };
        auto lo = run_lo([&] { return eval_phi(Real("1e-18")); });
        auto hi = run_hi([&] { return eval_phi(Real("5e-19")); });
        PrecisionGuard g{Precision(384)};
        CHECK(abs(promoted(lo.value.re) - hi.value.re) <= promoted(lo.err));
        CHECK(abs(promoted(lo.value.im) - hi.value.im) <= promoted(lo.err));
    }
    {
        auto eval_tp = [&](const Real& tol) {
            return qseries::triple_product(unit_circle_point(Real(2)), qp, tol,
                                           qseries::TripleProductRoute::laurent_sum);
        };
        auto lo = run_lo([&] { return eval_tp(Real("1e-18")); });
        auto hi = run_hi([&] { return eval_tp(Real("5e-19")); });
        PrecisionGuard g{Precision(384)};
        CHECK(abs(promoted(lo.value.re) - hi.value.re) <= promoted(lo.err));
    }
}
