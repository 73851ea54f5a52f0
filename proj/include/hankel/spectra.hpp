// Certified extremal eigenvalues of Hankel and kernel matrices, orthonormal
// polynomial coefficient triangles, and the Hamburger minima.
//
// Eigenvalue enclosures come from bisection on the shift parameter, with
// each definiteness test run as an interval Cholesky factorization under
// directed rounding: a probe either certifies positive definiteness,
// certifies a negative pivot, or raises its own precision and retries.

#pragma once

#include "hankel/moments.hpp"
#include "hankel/real.hpp"

#include <vector>

namespace hankel::spectra {

// Lower-triangular coefficients beta(k,j) of the orthonormal polynomials
// p_k(x) = sum_j beta(k,j) x^j, with beta(k,k) > 0.
class CoeffTriangle {
  public:
    explicit CoeffTriangle(unsigned max_degree)
        : n_(max_degree), b_((static_cast<size_t>(max_degree) + 1) * (max_degree + 2) / 2, Real(0)) {}

    unsigned max_degree() const { return n_; }
    const Real& beta(unsigned k, unsigned j) const { return b_[idx(k, j)]; }
    Real& beta(unsigned k, unsigned j) { return b_[idx(k, j)]; }

  private:
    size_t idx(unsigned k, unsigned j) const {
        if (j > k || k > n_) throw std::out_of_range("CoeffTriangle: index out of range");
        return static_cast<size_t>(k) * (k + 1) / 2 + j;
    }
    unsigned n_;
    std::vector<Real> b_;
};

// Symmetric positive definite Gram matrix of the p_k on the unit circle,
// K(j,k) = sum_{m<=min(j,k)} beta(j,m) beta(k,m).
class KernelMatrix {
  public:
    explicit KernelMatrix(unsigned order)
        : order_(order), k_(static_cast<size_t>(order) * (order + 1) / 2, Real(0)) {}

    unsigned order() const { return order_; }
    const Real& entry(unsigned j, unsigned k) const { return k_[idx(j, k)]; }
    Real& entry(unsigned j, unsigned k) { return k_[idx(j, k)]; }

  private:
    size_t idx(unsigned j, unsigned k) const {
        if (j < k) std::swap(j, k);
        if (j >= order_) throw std::out_of_range("KernelMatrix: index out of range");
        return static_cast<size_t>(j) * (j + 1) / 2 + k;
    }
    unsigned order_;
    std::vector<Real> k_;
};

// Certified interval [lo, hi] containing the target eigenvalue; probes
// counts the definiteness tests performed.
struct EigenEnclosure {
    Real lo;
    Real hi;
    unsigned probes = 0;

    Real mid() const { return (lo + hi) / 2; }
    Real width() const { return hi - lo; }
};

struct SpectralReport {
    EigenEnclosure lambda;
    Real mu;
    Real mu_shifted;
    Real trace_bound;
};

// Enclosure of the minimal eigenvalue of H by bisection on the shift;
// initial bracket [0, min_k H(k,k)]. peak_bits, when non-null, receives the
// largest probe precision used.
EigenEnclosure smallest_eig(const moments::HankelMatrix& H, const Real& tol,
                            unsigned* peak_bits = nullptr);

// Enclosure of the maximal eigenvalue of K; initial upper bracket trace(K).
EigenEnclosure largest_eig(const KernelMatrix& K, const Real& tol,
                           unsigned* peak_bits = nullptr);

// B = L^{-1} for the Cholesky factorization H = L L^T; rows of B are the
// orthonormal polynomial coefficients. B H B^T = I at working tolerance.
CoeffTriangle beta_from_hankel(const moments::HankelMatrix& H);

// Closed-form Stieltjes-Wigert coefficient
//   beta_{n,k} = (-1)^{n+k} q^{n/2 + 1/4} (q;q)_n^{-1/2} [n k]_q q^{k^2 + k/2}.
Real sw_beta(unsigned n, unsigned k, const qseries::QParam& q);

KernelMatrix kernel_matrix(const CoeffTriangle& B);

// sum_k K(k,k); upper bound for 1/lambda_N.
Real trace_bound(const KernelMatrix& K);

// mu_N = 1/(H^{-1})_{00}: the minimum of the Hankel form on the hyperplane
// v_0 = 1, via a linear solve.
Real hamburger_mu(const moments::HankelMatrix& H);

// mu'_N: the same minimum for the shifted moment sequence s_{n+2}.
Real hamburger_mu_shifted(const moments::MomentSource& src, unsigned N);

// p_k(z) for k = 0..upto by Horner evaluation of the triangle rows.
std::vector<Cplx> pk_eval(const CoeffTriangle& B, const Cplx& z, unsigned upto);

// Bundled spectral digest at order N: the lambda enclosure, both Hamburger
// minima, and the kernel trace bound. mu >= lambda.lo and
// trace_bound >= 1/lambda.hi by construction.
SpectralReport spectral_report(const moments::MomentSource& src, unsigned N, const Real& tol);

}  // namespace hankel::spectra
