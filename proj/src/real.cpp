#include "hankel/real.hpp"

#include <mpfr.h>

#include <cmath>

namespace hankel {

namespace {

thread_local unsigned t_working_bits = 128;

// boost's default_precision is counted in decimal digits; request enough
// digits that the backend mantissa is at least the asked-for bit count.
unsigned digits10_for_bits(unsigned bits) {
    return static_cast<unsigned>((static_cast<std::uint64_t>(bits) * 301 + 999) / 1000) + 2;
}

}  // namespace

unsigned working_bits() { return t_working_bits; }

void set_working_bits(unsigned bits) {
    if (bits < kMinPrecisionBits) bits = kMinPrecisionBits;
    t_working_bits = bits;
    Real::default_precision(digits10_for_bits(bits));
}

PrecisionGuard::PrecisionGuard(Precision p) : saved_bits_(t_working_bits) {
    set_working_bits(p.bits);
}

PrecisionGuard::~PrecisionGuard() { set_working_bits(saved_bits_); }

Real promoted(const Real& x) {
    Real r;  // fresh value at working precision
    mpfr_set(r.backend().data(), x.backend().data(), MPFR_RNDN);
    return r;
}

Real rounding_unit() {
    Real u(1);
    return ldexp(u, 1 - static_cast<int>(t_working_bits));
}

Real pi_value() {
    Real p;
    mpfr_const_pi(p.backend().data(), MPFR_RNDN);
    return p;
}

int decimal_digits_for_bits(unsigned bits) {
    int d = static_cast<int>(bits * 0.30102999566398119521);
    return d < 10 ? 10 : d;
}

std::string to_decimal(const Real& x, int significant_digits) {
    if (significant_digits < 2) significant_digits = 2;
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Re", significant_digits - 1, x.backend().data());
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
}

Cplx& Cplx::operator*=(const Cplx& o) {
    Real r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = r;
    return *this;
}

Cplx& Cplx::operator/=(const Cplx& o) {
    Real d = o.re * o.re + o.im * o.im;
    if (d.is_zero()) throw std::domain_error("Cplx: division by zero");
    Real r = (re * o.re + im * o.im) / d;
    im = (im * o.re - re * o.im) / d;
    re = r;
    return *this;
}

Real abs(const Cplx& z) { return hypot(z.re, z.im); }

Real norm_sq(const Cplx& z) { return z.re * z.re + z.im * z.im; }

Cplx sqrt(const Cplx& z) {
    using boost::multiprecision::sqrt;
    if (z.im.is_zero()) {
        if (z.re >= 0) return Cplx(sqrt(z.re), Real(0));
        return Cplx(Real(0), sqrt(-z.re));  // principal: +i sqrt(|re|)
    }
    Real m = abs(z);
    if (z.re >= 0) {
        Real u = sqrt((m + z.re) / 2);
        return Cplx(u, z.im / (2 * u));
    }
    Real v = sqrt((m - z.re) / 2);
    if (z.im < 0) v = -v;
    return Cplx(z.im / (2 * v), v);
}

Cplx unit_circle_point(const Real& theta) {
    Real s, c;
    mpfr_sin_cos(s.backend().data(), c.backend().data(), theta.backend().data(), MPFR_RNDN);
    return Cplx(c, s);
}

}  // namespace hankel
