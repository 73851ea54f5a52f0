#include "hankel/spectra.hpp"

#include "interval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace hankel::spectra {

namespace {

using detail::raw;

enum class Verdict { pd, not_pd, unknown };

struct ProbeOutcome {
    Verdict v;
    unsigned pivot = 0;   // index where a negative or ambiguous pivot appeared
    Real gap_bits;        // log2(rad/|mid|) of the offending pivot, for escalation
};

// Fills the interval [lo,hi] for entry (i,j) of the shifted matrix at the
// current working precision. sigma may carry more bits than the workspace;
// directed rounding keeps the enclosure sound.
using EntryFiller = std::function<void(unsigned i, unsigned j, Real& lo, Real& hi)>;

// Interval Cholesky of the shifted matrix. Certifies pd when every pivot
// interval is strictly positive, not-pd when some pivot interval is strictly
// negative, unknown when a pivot straddles zero at this precision.
ProbeOutcome interval_cholesky(unsigned n, const EntryFiller& entry) {
    const size_t tri = static_cast<size_t>(n) * (n + 1) / 2;
    std::vector<Real> Llo(tri), Lhi(tri);
    auto at = [n](unsigned i, unsigned j) { return static_cast<size_t>(i) * (i + 1) / 2 + j; };

    Real alo, ahi, plo, phi, t;
    for (unsigned k = 0; k < n; ++k) {
        entry(k, k, alo, ahi);
        for (unsigned j = 0; j < k; ++j) {
            detail::iv_sq(plo, phi, Llo[at(k, j)], Lhi[at(k, j)]);
            detail::iv_sub_acc(alo, ahi, plo, phi);
        }
        if (mpfr_sgn(raw(ahi)) < 0) return {Verdict::not_pd, k, Real(0)};
        if (mpfr_sgn(raw(alo)) <= 0) {
            Real gap;
            mpfr_sub(raw(gap), raw(ahi), raw(alo), MPFR_RNDU);
            Real mid = (alo + ahi) / 2;
            Real denom = boost::multiprecision::abs(mid);
            Real bits = denom.is_zero() ? Real(working_bits())
                                        : log2(gap / denom + 1);
            return {Verdict::unknown, k, bits};
        }
        Real& dkl = Llo[at(k, k)];
        Real& dkh = Lhi[at(k, k)];
        detail::iv_sqrt_pos(dkl, dkh, alo, ahi);
        for (unsigned i = k + 1; i < n; ++i) {
            entry(i, k, alo, ahi);
            for (unsigned j = 0; j < k; ++j) {
                detail::iv_mul(plo, phi, Llo[at(i, j)], Lhi[at(i, j)], Llo[at(k, j)],
                               Lhi[at(k, j)], t);
                detail::iv_sub_acc(alo, ahi, plo, phi);
            }
            detail::iv_div_pos(Llo[at(i, k)], Lhi[at(i, k)], alo, ahi, dkl, dkh);
        }
    }
    return {Verdict::pd, 0, Real(0)};
}

struct BisectSetup {
    unsigned n;
    // entry filler for the matrix shifted by sigma (captured by reference)
    std::function<EntryFiller(const Real& sigma)> make_entry;
    bool pd_raises_lo;  // smallest_eig: pd at sigma means sigma < lambda
    const char* what;
};

class ProbeEngine {
  public:
    ProbeEngine(const BisectSetup& setup, unsigned ambient_bits)
        : setup_(setup),
          hint_(std::min(ambient_bits, 384u)),
          deep_cap_(std::max(16384u, 8 * ambient_bits + 1024)) {}

    // Certified verdict at sigma, escalating precision from `start` to `cap`.
    // Returns unknown only if cap was exhausted.
    Verdict attempt(const Real& sigma, unsigned cap, unsigned* pivot_out) {
        unsigned p = std::max(192u, hint_ / 2);
        while (p <= cap) {
            PrecisionGuard g{Precision(std::max(p, kMinPrecisionBits))};
            EntryFiller entry = setup_.make_entry(sigma);
            ProbeOutcome out = interval_cholesky(setup_.n, entry);
            ++probes_;
            if (p > peak_bits_) peak_bits_ = p;
            if (out.v != Verdict::unknown) {
                hint_ = p;
                if (pivot_out) *pivot_out = out.pivot;
                return out.v;
            }
            // jump past the observed ambiguity, at least doubling territory
            unsigned extra = 64;
            double gb = out.gap_bits.convert_to<double>();
            if (gb > 0 && gb < 1e9) extra = static_cast<unsigned>(gb) + 64;
            unsigned next = p + std::max(extra, p / 2);
            p = std::max(next, p + 64);
        }
        return Verdict::unknown;
    }

    unsigned probes() const { return probes_; }
    unsigned peak_bits() const { return peak_bits_; }
    unsigned hint() const { return hint_; }
    unsigned deep_cap() const { return deep_cap_; }

  private:
    const BisectSetup& setup_;
    unsigned hint_;
    unsigned deep_cap_;
    unsigned probes_ = 0;
    unsigned peak_bits_ = 0;
};

EigenEnclosure bisect(const BisectSetup& setup, Real lo, Real hi, const Real& tol,
                      unsigned* peak_bits) {
    const unsigned ambient = working_bits();
    if (!(tol > 0)) throw std::domain_error(std::string(setup.what) + ": tol must be positive");
    Real range = hi - lo;
    if (range > 0) {
        Real need = log2(range / tol) + 16;
        if (need > ambient)
            throw PrecisionExhausted(
                std::string(setup.what) + ": enclosure endpoints need more bits than the working precision",
                static_cast<unsigned>(need.convert_to<double>()) + 1);
    }

    ProbeEngine engine(setup, ambient);
    while (hi - lo > tol) {
        Real width = hi - lo;
        Real mid = lo + width / 2;
        const Real candidates[5] = {mid, mid - width / 32, mid + width / 32, mid - width / 16,
                                    mid + width / 16};
        bool decided = false;
        // shallow sweep dodges shifts that sit on an eigenvalue; the deep
        // retry serves genuinely ill-conditioned probes
        unsigned shallow_cap = std::max(8 * std::max(192u, engine.hint() / 2), 2048u);
        for (int pass = 0; pass < 2 && !decided; ++pass) {
            unsigned cap = pass == 0 ? shallow_cap : engine.deep_cap();
            unsigned ncand = pass == 0 ? 5 : 3;
            for (unsigned c = 0; c < ncand && !decided; ++c) {
                Verdict v = engine.attempt(candidates[c], cap, nullptr);
                if (v == Verdict::unknown) continue;
                const bool raises_lo = (v == Verdict::pd) == setup.pd_raises_lo;
                if (raises_lo) lo = candidates[c];
                else hi = candidates[c];
                decided = true;
            }
        }
        if (!decided)
            throw PrecisionExhausted(
                std::string(setup.what) + ": definiteness tests stay inconsistent up to " +
                    std::to_string(engine.deep_cap()) + " bits; raise precision",
                engine.deep_cap() * 2);
    }
    if (peak_bits) *peak_bits = engine.peak_bits();
    return EigenEnclosure{promoted(lo), promoted(hi), engine.probes()};
}

// Plain (non-interval) Cholesky at working precision; throws on a
// non-positive pivot with its index.
std::vector<Real> plain_cholesky(const moments::HankelMatrix& H) {
    const unsigned n = H.order();
    std::vector<Real> L(static_cast<size_t>(n) * (n + 1) / 2, Real(0));
    auto at = [](unsigned i, unsigned j) { return static_cast<size_t>(i) * (i + 1) / 2 + j; };
    for (unsigned k = 0; k < n; ++k) {
        Real d = H.entry(k, k);
        for (unsigned j = 0; j < k; ++j) d -= L[at(k, j)] * L[at(k, j)];
        if (!(d > 0))
            throw NotPositiveDefinite("cholesky: nonpositive pivot at order " + std::to_string(k),
                                      k);
        L[at(k, k)] = sqrt(d);
        for (unsigned i = k + 1; i < n; ++i) {
            Real s = H.entry(i, k);
            for (unsigned j = 0; j < k; ++j) s -= L[at(i, j)] * L[at(k, j)];
            L[at(i, k)] = s / L[at(k, k)];
        }
    }
    return L;
}

}  // namespace

EigenEnclosure smallest_eig(const moments::HankelMatrix& H, const Real& tol,
                            unsigned* peak_bits) {
    const unsigned n = H.order();
    if (n == 1) {
        Real v = promoted(H.entry(0, 0));
        if (!(v > 0)) throw NotPositiveDefinite("smallest_eig: 1x1 matrix not positive", 0);
        return EigenEnclosure{v, v, 0};
    }

    BisectSetup setup{
        n,
        [&H](const Real& sigma) -> EntryFiller {
            return [&H, &sigma](unsigned i, unsigned j, Real& lo, Real& hi) {
                const Real& s = H.entry(i, j);
                if (i == j) {
                    mpfr_sub(raw(lo), raw(s), raw(sigma), MPFR_RNDD);
                    mpfr_sub(raw(hi), raw(s), raw(sigma), MPFR_RNDU);
                } else {
                    mpfr_set(raw(lo), raw(s), MPFR_RNDD);
                    mpfr_set(raw(hi), raw(s), MPFR_RNDU);
                }
            };
        },
        /*pd_raises_lo=*/true,
        "smallest_eig",
    };

    // sigma = 0 feasibility: H itself must be positive definite.
    ProbeEngine gate(setup, working_bits());
    unsigned pivot = 0;
    Verdict v0 = gate.attempt(Real(0), gate.deep_cap(), &pivot);
    if (v0 == Verdict::not_pd)
        throw NotPositiveDefinite("smallest_eig: matrix is not positive definite (pivot " +
                                      std::to_string(pivot) + ")",
                                  pivot);
    if (v0 == Verdict::unknown)
        throw PrecisionExhausted("smallest_eig: definiteness of the unshifted matrix undecidable",
                                 gate.deep_cap() * 2);

    Real hi = H.entry(0, 0);
    for (unsigned k = 1; k < n; ++k)
        if (H.entry(k, k) < hi) hi = H.entry(k, k);
    EigenEnclosure enc = bisect(setup, Real(0), promoted(hi), tol, peak_bits);
    enc.probes += gate.probes();
    return enc;
}

EigenEnclosure largest_eig(const KernelMatrix& K, const Real& tol, unsigned* peak_bits) {
    const unsigned n = K.order();
    if (n == 1) {
        Real v = promoted(K.entry(0, 0));
        return EigenEnclosure{v, v, 0};
    }

    BisectSetup setup{
        n,
        [&K](const Real& sigma) -> EntryFiller {
            return [&K, &sigma](unsigned i, unsigned j, Real& lo, Real& hi) {
                const Real& s = K.entry(i, j);
                if (i == j) {
                    mpfr_sub(raw(lo), raw(sigma), raw(s), MPFR_RNDD);
                    mpfr_sub(raw(hi), raw(sigma), raw(s), MPFR_RNDU);
                } else {
                    mpfr_neg(raw(lo), raw(s), MPFR_RNDD);
                    mpfr_neg(raw(hi), raw(s), MPFR_RNDU);
                }
            };
        },
        /*pd_raises_lo=*/false,
        "largest_eig",
    };

    Real lo = K.entry(0, 0);
    Real tr = K.entry(0, 0);
    for (unsigned k = 1; k < n; ++k) {
        if (K.entry(k, k) > lo) lo = K.entry(k, k);
        tr += K.entry(k, k);
    }
    // trace >= lambda_max with strict margin for n >= 2; pad so the first
    // probes resolve at low precision
    Real hi = tr + tr / 8 + tol;
    return bisect(setup, promoted(lo), promoted(hi), tol, peak_bits);
}

CoeffTriangle beta_from_hankel(const moments::HankelMatrix& H) {
    const unsigned n = H.order();
    std::vector<Real> L = plain_cholesky(H);
    auto at = [](unsigned i, unsigned j) { return static_cast<size_t>(i) * (i + 1) / 2 + j; };
    CoeffTriangle B(n - 1);
    for (unsigned k = 0; k < n; ++k) {
        B.beta(k, k) = 1 / L[at(k, k)];
        for (unsigned j = 0; j < k; ++j) {
            Real s(0);
            for (unsigned m = j; m < k; ++m) s += L[at(k, m)] * B.beta(m, j);
            B.beta(k, j) = -s / L[at(k, k)];
        }
    }
    return B;
}

Real sw_beta(unsigned n, unsigned k, const qseries::QParam& q) {
    if (k > n) throw std::domain_error("sw_beta: k > n");
    // exponent n/2 + 1/4 + k^2 + k/2 as an exact quarter-integer
    unsigned long long quarters =
        2ull * n + 1 + 4ull * k * k + 2ull * k;
    Real e = Real(quarters) / 4;
    Real poch = qseries::qpochhammer(q.q, q, n, Real(1)).value;
    Real v = pow(q.q, e) * qseries::qbinomial(n, k, q) / sqrt(poch);
    return ((n + k) % 2 == 0) ? v : -v;
}

KernelMatrix kernel_matrix(const CoeffTriangle& B) {
    const unsigned n = B.max_degree() + 1;
    KernelMatrix K(n);
    for (unsigned j = 0; j < n; ++j)
        for (unsigned k = 0; k <= j; ++k) {
            Real s(0);
            for (unsigned m = 0; m <= k; ++m) s += B.beta(j, m) * B.beta(k, m);
            K.entry(j, k) = s;
        }
    return K;
}

Real trace_bound(const KernelMatrix& K) {
    Real s(0);
    for (unsigned k = 0; k < K.order(); ++k) s += K.entry(k, k);
    return s;
}

Real hamburger_mu(const moments::HankelMatrix& H) {
    const unsigned n = H.order();
    std::vector<Real> L = plain_cholesky(H);
    auto at = [](unsigned i, unsigned j) { return static_cast<size_t>(i) * (i + 1) / 2 + j; };
    // L y = e_0
    std::vector<Real> y(n, Real(0));
    y[0] = 1 / L[at(0, 0)];
    for (unsigned i = 1; i < n; ++i) {
        Real s(0);
        for (unsigned j = 0; j < i; ++j) s += L[at(i, j)] * y[j];
        y[i] = -s / L[at(i, i)];
    }
    // L^T w = y
    std::vector<Real> w(n, Real(0));
    for (unsigned ii = n; ii-- > 0;) {
        Real s = y[ii];
        for (unsigned j = ii + 1; j < n; ++j) s -= L[at(j, ii)] * w[j];
        w[ii] = s / L[at(ii, ii)];
    }
    if (!(w[0] > 0))
        throw NotPositiveDefinite("hamburger_mu: solver produced nonpositive (H^{-1})_{00}", 0);
    return 1 / w[0];
}

Real hamburger_mu_shifted(const moments::MomentSource& src, unsigned N) {
    moments::HankelMatrix Hs(src.shifted(), N);
    return hamburger_mu(Hs);
}

SpectralReport spectral_report(const moments::MomentSource& src, unsigned N, const Real& tol) {
    moments::HankelMatrix H(src, N);
    SpectralReport r;
    r.lambda = smallest_eig(H, tol);
    r.mu = hamburger_mu(H);
    r.mu_shifted = hamburger_mu_shifted(src, N);
    r.trace_bound = trace_bound(kernel_matrix(beta_from_hankel(H)));
    return r;
}

std::vector<Cplx> pk_eval(const CoeffTriangle& B, const Cplx& z, unsigned upto) {
    if (upto > B.max_degree()) throw std::out_of_range("pk_eval: upto beyond triangle degree");
    std::vector<Cplx> out;
    out.reserve(upto + 1);
    for (unsigned k = 0; k <= upto; ++k) {
        Cplx acc{B.beta(k, k)};
        for (unsigned j = k; j-- > 0;) {
            acc *= z;
            acc += Cplx(B.beta(k, j));
        }
        out.push_back(acc);
    }
    return out;
}

}  // namespace hankel::spectra
