// Directed-rounding interval kernels used by the certified Cholesky probes.
// Private to the library; endpoints live at the current working precision.

#pragma once

#include "hankel/real.hpp"

#include <mpfr.h>

namespace hankel::detail {

inline mpfr_ptr raw(Real& x) { return x.backend().data(); }
inline mpfr_srcptr raw(const Real& x) { return x.backend().data(); }

// out = a*b with the stated rounding.
inline void mul_dir(Real& out, const Real& a, const Real& b, mpfr_rnd_t r) {
    mpfr_mul(raw(out), raw(a), raw(b), r);
}

// Interval product [xl,xh]*[yl,yh] -> [plo,phi] by sign analysis; at most two
// multiplications except when both intervals straddle zero.
inline void iv_mul(Real& plo, Real& phi, const Real& xl, const Real& xh, const Real& yl,
                   const Real& yh, Real& t) {
    const int sxl = mpfr_sgn(raw(xl)), sxh = mpfr_sgn(raw(xh));
    const int syl = mpfr_sgn(raw(yl)), syh = mpfr_sgn(raw(yh));
    if (sxl >= 0) {
        if (syl >= 0) { mul_dir(plo, xl, yl, MPFR_RNDD); mul_dir(phi, xh, yh, MPFR_RNDU); }
        else if (syh <= 0) { mul_dir(plo, xh, yl, MPFR_RNDD); mul_dir(phi, xl, yh, MPFR_RNDU); }
        else { mul_dir(plo, xh, yl, MPFR_RNDD); mul_dir(phi, xh, yh, MPFR_RNDU); }
    } else if (sxh <= 0) {
        if (syl >= 0) { mul_dir(plo, xl, yh, MPFR_RNDD); mul_dir(phi, xh, yl, MPFR_RNDU); }
        else if (syh <= 0) { mul_dir(plo, xh, yh, MPFR_RNDD); mul_dir(phi, xl, yl, MPFR_RNDU); }
        else { mul_dir(plo, xl, yh, MPFR_RNDD); mul_dir(phi, xl, yl, MPFR_RNDU); }
    } else {
        if (syl >= 0) { mul_dir(plo, xl, yh, MPFR_RNDD); mul_dir(phi, xh, yh, MPFR_RNDU); }
        else if (syh <= 0) { mul_dir(plo, xh, yl, MPFR_RNDD); mul_dir(phi, xl, yl, MPFR_RNDU); }
        else {
            mpfr_mul(raw(t), raw(xl), raw(yh), MPFR_RNDD);
            mpfr_mul(raw(plo), raw(xh), raw(yl), MPFR_RNDD);
            if (mpfr_cmp(raw(t), raw(plo)) < 0) mpfr_set(raw(plo), raw(t), MPFR_RNDD);
            mpfr_mul(raw(t), raw(xl), raw(yl), MPFR_RNDU);
            mpfr_mul(raw(phi), raw(xh), raw(yh), MPFR_RNDU);
            if (mpfr_cmp(raw(t), raw(phi)) > 0) mpfr_set(raw(phi), raw(t), MPFR_RNDU);
        }
    }
}

// Interval square of [xl,xh] -> [plo,phi].
inline void iv_sq(Real& plo, Real& phi, const Real& xl, const Real& xh) {
    const int sl = mpfr_sgn(raw(xl)), sh = mpfr_sgn(raw(xh));
    if (sl >= 0) { mul_dir(plo, xl, xl, MPFR_RNDD); mul_dir(phi, xh, xh, MPFR_RNDU); }
    else if (sh <= 0) { mul_dir(plo, xh, xh, MPFR_RNDD); mul_dir(phi, xl, xl, MPFR_RNDU); }
    else {
        mpfr_set_zero(raw(plo), 1);
        mul_dir(phi, xl, xl, MPFR_RNDU);
        Real t;
        mul_dir(t, xh, xh, MPFR_RNDU);
        if (mpfr_cmp(raw(t), raw(phi)) > 0) mpfr_set(raw(phi), raw(t), MPFR_RNDU);
    }
}

// acc -= [plo,phi], outward.
inline void iv_sub_acc(Real& alo, Real& ahi, const Real& plo, const Real& phi) {
    mpfr_sub(raw(alo), raw(alo), raw(phi), MPFR_RNDD);
    mpfr_sub(raw(ahi), raw(ahi), raw(plo), MPFR_RNDU);
}

// [slo,shi] / [dl,dh] with dl > 0, outward.
inline void iv_div_pos(Real& qlo, Real& qhi, const Real& slo, const Real& shi, const Real& dl,
                       const Real& dh) {
    if (mpfr_sgn(raw(slo)) >= 0) mpfr_div(raw(qlo), raw(slo), raw(dh), MPFR_RNDD);
    else mpfr_div(raw(qlo), raw(slo), raw(dl), MPFR_RNDD);
    if (mpfr_sgn(raw(shi)) >= 0) mpfr_div(raw(qhi), raw(shi), raw(dl), MPFR_RNDU);
    else mpfr_div(raw(qhi), raw(shi), raw(dh), MPFR_RNDU);
}

// sqrt of [xl,xh] with xl > 0, outward.
inline void iv_sqrt_pos(Real& rlo, Real& rhi, const Real& xl, const Real& xh) {
    mpfr_sqrt(raw(rlo), raw(xl), MPFR_RNDD);
    mpfr_sqrt(raw(rhi), raw(xh), MPFR_RNDU);
}

}  // namespace hankel::detail
