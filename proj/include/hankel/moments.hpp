// Moment sequences s_n for the supported families and their Hankel matrices
// H_jk = s_{j+k}. Sources are immutable after construction; file and
// recurrence sources are fully materialized up front.

#pragma once

#include "hankel/qseries.hpp"
#include "hankel/real.hpp"

#include <filesystem>
#include <memory>
#include <vector>

namespace hankel::moments {

class MomentSource {
  public:
    enum class Kind { stieltjes_wigert, jacobi_recurrence, file };

    // Unbounded index range marker for max_index().
    static constexpr unsigned kUnbounded = ~0u;

    // s_n = q^{-(n+1)^2/2}, the Stieltjes-Wigert moments.
    static MomentSource stieltjes_wigert(const qseries::QParam& q, Precision prec);

    // s_n = (J^n)_{00} * s0 for the symmetric tridiagonal J with the given
    // diagonal b and positive off-diagonal a. Moments are precomputed for
    // n <= min(|b|, |a|).
    static MomentSource jacobi_recurrence(std::vector<Real> diag, std::vector<Real> offdiag,
                                          Precision prec, const Real& s0 = Real(1));

    // Text format: optional "# precision-bits: P" first line, then strictly
    // increasing "n value" lines from n = 0; decimal or hex-float values;
    // '#' comment lines allowed.
    static MomentSource from_file(const std::filesystem::path& path);

    Real moment(unsigned n) const;
    unsigned max_index() const;  // kUnbounded for SW sources
    Kind kind() const;
    Precision precision() const;
    const qseries::QParam* sw_param() const;  // non-null only for SW sources

    // Source replaying s'_n = s_{n+2}.
    MomentSource shifted() const;

  private:
    struct Impl;
    MomentSource(std::shared_ptr<const Impl> impl, unsigned offset)
        : impl_(std::move(impl)), offset_(offset) {}
    std::shared_ptr<const Impl> impl_;
    unsigned offset_ = 0;
};

// Stieltjes-Wigert moment at the current working precision.
Real sw_moment(unsigned n, const qseries::QParam& q);

// (J^n)_{00} * s0 for caller-supplied recurrence coefficients.
Real moments_from_jacobi(const std::vector<Real>& diag, const std::vector<Real>& offdiag,
                         unsigned n, const Real& s0 = Real(1));

// Working precision that makes entry rounding negligible against the
// eigenvalue targets: SW uses (N+1)^2 log2(1/q)/2 + 128 guard bits, table
// sources the entry exponent spread + 128.
unsigned required_bits(const MomentSource& src, unsigned N);

// (N+1) x (N+1) Hankel matrix; stores the defining moments s_0..s_{2N} and
// exposes entry(j,k) = s_{j+k}. Construction enforces the precision
// precheck above.
class HankelMatrix {
  public:
    HankelMatrix(const MomentSource& src, unsigned N);

    unsigned order() const { return order_; }
    const Real& entry(unsigned j, unsigned k) const { return s_[j + k]; }
    const Real& moment(unsigned m) const { return s_[m]; }

  private:
    unsigned order_;
    std::vector<Real> s_;  // s_0 .. s_{2N}
};

}  // namespace hankel::moments
