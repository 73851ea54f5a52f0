#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hankel/spectra.hpp"
#include "hankel/sweep.hpp"

#include <cmath>
#include <fstream>

using namespace hankel;
using moments::HankelMatrix;
using moments::MomentSource;

namespace {

qseries::QParam qof(const char* s) { return qseries::QParam::from_q(Real(s)); }

MomentSource file_source(const char* name, const char* text) {
    std::string path = std::string("/tmp/hankel_spec_") + name;
    std::ofstream(path) << text;
    return MomentSource::from_file(path);
}

// Small deterministic generator for property-test vectors.
struct Lcg {
    std::uint64_t state;
    explicit Lcg(std::uint64_t seed) : state(seed) {}
    Real next() {  // uniform in [-1, 1]
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return Real(static_cast<std::int64_t>(state >> 11)) / Real(std::int64_t(1) << 52) - 1;
    }
};

HankelMatrix sw_hankel(const qseries::QParam& qp, unsigned N) {
    MomentSource src = MomentSource::stieltjes_wigert(qp, Precision(64));
    return HankelMatrix(src, N);
}

}  // namespace

TEST_CASE("smallest_eig on explicit matrices") {
    PrecisionGuard g{Precision(256)};

    MomentSource one = file_source("m1.txt", "0 3.5\n");
    HankelMatrix H0(one, 0);
    auto e0 = spectra::smallest_eig(H0, Real("1e-20"));
    CHECK(e0.lo == Real("3.5"));
    CHECK(e0.hi == Real("3.5"));
    CHECK(e0.probes == 0);

    // [[2,1],[1,2]]: eigenvalues 1 and 3; the bisection midpoint lands on the
    // eigenvalue exactly and must dodge it
    MomentSource m22 = file_source("m22.txt", "0 2\n1 1\n2 2\n");
    HankelMatrix H1(m22, 1);
    auto e1 = spectra::smallest_eig(H1, Real("1e-24"));
    CHECK(e1.lo <= 1);
    CHECK(e1.hi >= 1);
    CHECK(e1.hi - e1.lo <= Real("1e-24"));

    // not positive definite: [[1,2],[2,1]]
    MomentSource bad = file_source("bad.txt", "0 1\n1 2\n2 1\n");
    HankelMatrix Hb(bad, 1);
    CHECK_THROWS_AS(spectra::smallest_eig(Hb, Real("1e-10")), NotPositiveDefinite);
    try {
        spectra::smallest_eig(Hb, Real("1e-10"));
    } catch (const NotPositiveDefinite& e) {
        CHECK(e.pivot() == 1);
    }
}

TEST_CASE("smallest_eig approaches the SW limit from above") {
    auto qp = qof("0.5");
    MomentSource src = MomentSource::stieltjes_wigert(qp, Precision(64));
    PrecisionGuard g{Precision(moments::required_bits(src, 16) + 64)};
    HankelMatrix H(src, 16);
    auto enc = spectra::smallest_eig(H, Real("1e-12"));
    CHECK(enc.mid() > Real("0.36052"));   // above the infinite-matrix limit
    CHECK(enc.mid() < Real("0.3615"));
}

TEST_CASE("largest_eig basics") {
    PrecisionGuard g{Precision(256)};
    spectra::KernelMatrix K1(1);
    K1.entry(0, 0) = Real("2.25");
    auto e = spectra::largest_eig(K1, Real("1e-20"));
    CHECK(e.lo == Real("2.25"));
    CHECK(e.hi == Real("2.25"));

    spectra::KernelMatrix K3(3);
    K3.entry(0, 0) = 1;
    K3.entry(1, 1) = 2;
    K3.entry(2, 2) = 3;
    auto e3 = spectra::largest_eig(K3, Real("1e-22"));
    CHECK(e3.lo <= 3);
    CHECK(e3.hi >= 3);
    CHECK(e3.width() <= Real("1e-22"));
}

TEST_CASE("beta triangle from Cholesky") {
    PrecisionGuard g{Precision(256)};

    MomentSource one = file_source("b1.txt", "0 4\n");
    HankelMatrix H0(one, 0);
    auto B0 = spectra::beta_from_hankel(H0);
    CHECK(abs(B0.beta(0, 0) - Real("0.5")) <= 8 * rounding_unit());  // s_0^{-1/2}

    // 2x2 identity Hankel: B must be the identity
    MomentSource id2 = file_source("id2.txt", "0 1\n1 0\n2 1\n");
    HankelMatrix Hi(id2, 1);
    auto Bi = spectra::beta_from_hankel(Hi);
    CHECK(Bi.beta(0, 0) == 1);
    CHECK(Bi.beta(1, 1) == 1);
    CHECK(Bi.beta(1, 0) == 0);

    // loss of positive definiteness surfaces the pivot order
    MomentSource bad = file_source("b_bad.txt", "0 1\n1 2\n2 1\n");
    try {
        spectra::beta_from_hankel(HankelMatrix(bad, 1));
        CHECK(false);
    } catch (const NotPositiveDefinite& e) {
        CHECK(e.pivot() == 1);
    }
    CHECK_THROWS_AS(spectra::sw_beta(2, 3, qof("0.5")), std::domain_error);
}

TEST_CASE("sw_beta closed form") {
    auto qp = qof("0.5");
    PrecisionGuard g{Precision(320)};

    // degree 0: q^{1/4} = s_0^{-1/2}
    Real b00 = spectra::sw_beta(0, 0, qp);
    CHECK(abs(b00 - pow(qp.q, Real("0.25"))) <= 8 * rounding_unit());
    CHECK(abs(b00 - 1 / sqrt(moments::sw_moment(0, qp))) <= 16 * rounding_unit());

    // sign pattern (-1)^{n+k}
    for (unsigned n = 0; n <= 6; ++n)
        for (unsigned k = 0; k <= n; ++k) {
            Real b = spectra::sw_beta(n, k, qp);
            CHECK(((n + k) % 2 == 0 ? b > 0 : b < 0));
        }

    // closed form vs Cholesky triangle, max |diff| <= 1e-25 at 256 bits
    {
        PrecisionGuard g2{Precision(256)};
        MomentSource src = MomentSource::stieltjes_wigert(qp, Precision(256));
        HankelMatrix H(src, 12);
        auto B = spectra::beta_from_hankel(H);
        Real maxdiff(0);
        for (unsigned n = 0; n <= 12; ++n)
            for (unsigned k = 0; k <= n; ++k)
                maxdiff = std::max(maxdiff, Real(abs(B.beta(n, k) - spectra::sw_beta(n, k, qp))));
        CHECK(maxdiff <= Real("1e-25"));
    }
}

TEST_CASE("kernel matrix and trace") {
    auto qp = qof("0.5");
    PrecisionGuard g{Precision(320)};
    MomentSource src = MomentSource::stieltjes_wigert(qp, Precision(320));

    HankelMatrix H(src, 8);
    auto B = spectra::beta_from_hankel(H);
    auto K = spectra::kernel_matrix(B);
    CHECK(abs(K.entry(0, 0) - 1 / moments::sw_moment(0, qp)) <= Real("1e-70"));

    // identity triangle gives the identity kernel
    spectra::CoeffTriangle I(2);
    I.beta(0, 0) = 1;
    I.beta(1, 1) = 1;
    I.beta(2, 2) = 1;
    auto KI = spectra::kernel_matrix(I);
    CHECK(KI.entry(0, 0) == 1);
    CHECK(KI.entry(2, 2) == 1);
    CHECK(KI.entry(1, 0) == 0);

    // diagonal K(n,n) equals the n-th outer term of the double-sum form:
    // q^{n+1/2}/(q;q)_n * sum_k q^{k(2k+1)} [n k]_q^2
    for (unsigned n = 0; n <= 8; ++n) {
        Real poch = qseries::qpochhammer(qp.q, qp, n, Real(1)).value;
        Real term(0);
        for (unsigned k = 0; k <= n; ++k) {
            Real b = qseries::qbinomial(n, k, qp);
            term += pow(qp.q, Real(k * (2 * k + 1))) * b * b;
        }
        term *= pow(qp.q, Real(n) + Real("0.5")) / poch;
        CHECK(abs(K.entry(n, n) - term) <= Real("1e-60") * (1 + term));
    }

    spectra::KernelMatrix D(3);
    D.entry(0, 0) = 1;
    D.entry(1, 1) = 2;
    D.entry(2, 2) = 3;
    CHECK(spectra::trace_bound(D) == 6);

    // N = 0: trace equals 1/lambda exactly (one eigenvalue)
    HankelMatrix H0(src, 0);
    auto B0 = spectra::beta_from_hankel(H0);
    auto K0 = spectra::kernel_matrix(B0);
    auto lam0 = spectra::smallest_eig(H0, Real("1e-30"));
    CHECK(abs(spectra::trace_bound(K0) * lam0.mid() - 1) <= Real("1e-70"));
}

TEST_CASE("duality, monotonicity, trace bound across N") {
    for (const char* qs : {"0.3", "0.5", "0.7"}) {
        auto qp = qof(qs);
        MomentSource src = MomentSource::stieltjes_wigert(qp, Precision(64));
        Real prev_hi;
        for (unsigned N = 0; N <= 10; ++N) {
            PrecisionGuard g{Precision(moments::required_bits(src, N) + 64)};
            HankelMatrix H(src, N);
            Real tol("1e-14");
            auto lam = spectra::smallest_eig(H, tol);
            auto B = spectra::beta_from_hankel(H);
            auto K = spectra::kernel_matrix(B);
            auto Lam = spectra::largest_eig(K, tol);
            CHECK(abs(lam.mid() * Lam.mid() - 1) <= Real("1e-10"));
            CHECK(1 / lam.lo <= spectra::trace_bound(K) + Real("1e-12"));
            if (N > 0) CHECK(lam.hi <= prev_hi + 2 * tol);
            prev_hi = promoted(lam.hi);
        }
    }
}

TEST_CASE("orthonormality residual of the triangle") {
    auto qp = qof("0.5");
    MomentSource src = MomentSource::stieltjes_wigert(qp, Precision(64));
    unsigned N = 16;
    unsigned bits = moments::required_bits(src, N) + 64;
    PrecisionGuard g{Precision(bits)};
    HankelMatrix H(src, N);
    auto B = spectra::beta_from_hankel(H);
    // residual max |B H B^T - I|
    Real maxres(0);
    for (unsigned i = 0; i <= N; ++i)
        for (unsigned j = 0; j <= i; ++j) {
            Real acc(0);
            for (unsigned m = 0; m <= i; ++m)
                for (unsigned n = 0; n <= j; ++n)
                    acc += B.beta(i, m) * H.entry(m, n) * B.beta(j, n);
            if (i == j) acc -= 1;
            maxres = std::max(maxres, Real(abs(acc)));
        }
    CHECK(maxres <= ldexp(Real(1), -static_cast<int>(working_bits() / 2)));
}

TEST_CASE("hamburger minima") {
    PrecisionGuard g{Precision(320)};
    auto qp = qof("0.5");

    MomentSource one = file_source("mu1.txt", "0 2.5\n");
    CHECK(abs(spectra::hamburger_mu(HankelMatrix(one, 0)) - Real("2.5")) <= 8 * rounding_unit());

    MomentSource id2 = file_source("mu_id.txt", "0 1\n1 0\n2 1\n");
    CHECK(abs(spectra::hamburger_mu(HankelMatrix(id2, 1)) - 1) <= 16 * rounding_unit());

    MomentSource src = MomentSource::stieltjes_wigert(qp, Precision(320));
    HankelMatrix H8(src, 8);
    auto lam8 = spectra::smallest_eig(H8, Real("1e-14"));
    CHECK(spectra::hamburger_mu(H8) >= lam8.lo);

    // mu'_N >= lambda_{N+1}
    HankelMatrix H7(src, 7);
    auto lam7 = spectra::smallest_eig(H7, Real("1e-14"));
    CHECK(spectra::hamburger_mu_shifted(src, 6) >= lam7.lo);

    // shifted source agrees with an explicitly shifted file
    MomentSource f = file_source("mu_f.txt", "0 4\n1 1\n2 3\n3 1\n4 2.5\n");
    MomentSource fs = file_source("mu_fs.txt", "0 3\n1 1\n2 2.5\n");
    CHECK(abs(spectra::hamburger_mu_shifted(f, 1) - spectra::hamburger_mu(HankelMatrix(fs, 1))) <=
          64 * rounding_unit());

    // N = 0 shifted minimum is s_2
    CHECK(abs(spectra::hamburger_mu_shifted(f, 0) - 3) <= 16 * rounding_unit());
}

TEST_CASE("pk_eval and the point-norm inequalities") {
    auto qp = qof("0.5");
    MomentSource src = MomentSource::stieltjes_wigert(qp, Precision(64));
    unsigned N = 12;
    PrecisionGuard g{Precision(moments::required_bits(src, N) + 64)};
    HankelMatrix H(src, N);
    auto B = spectra::beta_from_hankel(H);
    auto lam = spectra::smallest_eig(H, Real("1e-14"));
    auto K = spectra::kernel_matrix(B);

    // p_0 is constant; p_k(0) is the constant coefficient
    auto at7 = spectra::pk_eval(B, Cplx(Real(7)), N);
    CHECK(at7[0].re == B.beta(0, 0));
    auto at0 = spectra::pk_eval(B, Cplx(Real(0)), N);
    for (unsigned k = 0; k <= N; ++k) {
        CHECK(at0[k].re == B.beta(k, 0));
        CHECK(at0[k].im == 0);
    }
    CHECK_THROWS_AS(spectra::pk_eval(B, Cplx(Real(0)), N + 1), std::out_of_range);

    for (const Cplx& z0 : {Cplx(Real(0), Real("0.5")), Cplx(Real("0.25"), Real("0.25"))}) {
        // running sum of |p_k(z0)|^2 stays under 1/(lambda_N (1 - |z0|^2))
        auto pk = spectra::pk_eval(B, z0, N);
        Real ssq(0);
        for (const Cplx& p : pk) ssq += norm_sq(p);
        Real gamma = lam.lo;
        Real bigK = 1 / (gamma * (1 - norm_sq(z0)));
        CHECK(ssq <= bigK);

        Lcg rng(0x5eed5eedu);
        for (int rep = 0; rep < 12; ++rep) {
            // kernel quadratic form bounded by (1/gamma) sum |c|^2
            std::vector<Cplx> c;
            Real csq(0);
            for (unsigned j = 0; j <= N; ++j) {
                c.emplace_back(rng.next(), rng.next());
                csq += norm_sq(c.back());
            }
            Cplx quad{Real(0)};
            for (unsigned j = 0; j <= N; ++j)
                for (unsigned k = 0; k <= N; ++k)
                    quad += Cplx(K.entry(j, k)) * c[j] * c[k].conj();
            CHECK(quad.re <= csq / gamma + Real("1e-25"));

            // Cauchy-type bound for raw coefficient vectors inside the disc
            std::vector<Cplx> v;
            Real vsq(0);
            for (unsigned j = 0; j <= N; ++j) {
                v.emplace_back(rng.next(), rng.next());
                vsq += norm_sq(v.back());
            }
            Cplx pz{Real(0)};
            Cplx zpow{Real(1)};
            for (unsigned j = 0; j <= N; ++j) {
                pz += v[j] * zpow;
                zpow *= z0;
            }
            CHECK(norm_sq(pz) <= vsq / (1 - norm_sq(z0)) + Real("1e-25"));

            // pointwise bound |p(z0)|^2 <= K ||p||^2 for p expanded in the p_k
            Cplx pval{Real(0)};
            for (unsigned k = 0; k <= N; ++k) pval += c[k] * pk[k];
            CHECK(norm_sq(pval) <= bigK * csq + Real("1e-25"));
        }
    }
}

TEST_CASE("trace bound converges to rho_0 from below") {
    auto qp = qof("0.5");
    MomentSource src = MomentSource::stieltjes_wigert(qp, Precision(64));
    unsigned N = 16;
    PrecisionGuard g{Precision(moments::required_bits(src, N) + 64)};
    HankelMatrix H(src, N);
    auto K = spectra::kernel_matrix(spectra::beta_from_hankel(H));
    Real tr = spectra::trace_bound(K);
    auto rho = rho::rho0_sw_fast(qp, Real("1e-30"));
    CHECK(tr <= rho.value + rho.err);
    // the dropped diagonal terms carry weight q^{n+1/2}, so the gap is O(q^N)
    CHECK(rho.value - tr <= pow(qp.q, static_cast<int>(N)) * 8);
    CHECK(rho.value > tr);
    auto lam = spectra::smallest_eig(H, Real("1e-12"));
    CHECK(tr >= spectra::largest_eig(K, Real("1e-12")).lo - Real("1e-10"));
    CHECK(1 / lam.lo <= tr + Real("1e-10"));
}

TEST_CASE("enclosures agree with a dense Jacobi-rotation eigensolver") {
    // independent oracle: cyclic Jacobi sweeps in double precision on the
    // 4x4 Hilbert matrix (moments of the uniform measure on [0,1])
    PrecisionGuard g{Precision(256)};
    MomentSource src = file_source(
        "hilb.txt",
        "0 1\n1 0.5\n2 0.33333333333333333333333333333333\n3 0.25\n4 0.2\n"
        "5 0.16666666666666666666666666666667\n6 0.14285714285714285714285714285714\n");
    HankelMatrix H(src, 3);

    double A[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) A[i][j] = 1.0 / (i + j + 1);
    for (int sweepi = 0; sweepi < 60; ++sweepi)
        for (int p = 0; p < 4; ++p)
            for (int qi = p + 1; qi < 4; ++qi) {
                if (std::abs(A[p][qi]) < 1e-300) continue;
                double theta = 0.5 * std::atan2(2 * A[p][qi], A[qi][qi] - A[p][p]);
                double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < 4; ++k) {
                    double akp = A[k][p], akq = A[k][qi];
                    A[k][p] = c * akp - s * akq;
                    A[k][qi] = s * akp + c * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    double apk = A[p][k], aqk = A[qi][k];
                    A[p][k] = c * apk - s * aqk;
                    A[qi][k] = s * apk + c * aqk;
                }
            }
    double lm = A[0][0];
    for (int i = 1; i < 4; ++i) lm = std::min(lm, A[i][i]);

    auto enc = spectra::smallest_eig(H, Real("1e-20"));
    CHECK(abs(enc.mid() - Real(lm)) <= Real("1e-12"));  // double-precision oracle accuracy
}

TEST_CASE("spectral report bundles the order-N digest") {
    auto qp = qof("0.5");
    MomentSource src = MomentSource::stieltjes_wigert(qp, Precision(64));
    unsigned N = 8;
    PrecisionGuard g{Precision(moments::required_bits(src, N + 1) + 64)};
    auto r = spectra::spectral_report(src, N, Real("1e-12"));
    CHECK(r.mu >= r.lambda.lo);
    CHECK(r.trace_bound >= 1 / r.lambda.hi);
    CHECK(r.lambda.width() <= Real("1e-12"));
    CHECK(r.mu_shifted > 0);
}

TEST_CASE("enclosure endpoints demand representable tolerances") {
    MomentSource src = file_source("feas.txt", "0 2\n1 1\n2 2\n");
    PrecisionGuard build{Precision(192)};
    HankelMatrix H(src, 1);
    PrecisionGuard g{Precision(64)};
    CHECK_THROWS_AS(spectra::smallest_eig(H, Real("1e-40")), PrecisionExhausted);
}
