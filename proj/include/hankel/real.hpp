// Arbitrary-precision scalar layer: working-precision control, complex
// arithmetic over MPFR reals, and the exception taxonomy shared by all
// modules.
//
// Precision model: a thread-local working precision (in bits) is installed
// with PrecisionGuard. Freshly constructed Real values pick it up; values
// imported from another precision scope must be passed through promoted()
// so that subsequent arithmetic carries at least the working mantissa.

#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hankel {

namespace mp = boost::multiprecision;

using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

inline constexpr unsigned kMinPrecisionBits = 64;

// Binary digits of working precision. bits >= 64 always.
struct Precision {
    unsigned bits;

    explicit Precision(unsigned b) : bits(b) {
        if (b < kMinPrecisionBits)
            throw std::invalid_argument("Precision: need at least " +
                                        std::to_string(kMinPrecisionBits) + " bits");
    }
};

// Raised when a requested tolerance or verdict cannot be certified at any
// admissible precision; carries an estimate of the bits that would suffice.
class PrecisionExhausted : public std::runtime_error {
  public:
    PrecisionExhausted(const std::string& what, unsigned required_bits)
        : std::runtime_error(what), required_bits_(required_bits) {}
    unsigned required_bits() const { return required_bits_; }

  private:
    unsigned required_bits_;
};

// Raised when a Cholesky-style factorization certifies a non-positive pivot;
// pivot() is the order at which positive definiteness is lost.
class NotPositiveDefinite : public std::runtime_error {
  public:
    NotPositiveDefinite(const std::string& what, unsigned pivot)
        : std::runtime_error(what), pivot_(pivot) {}
    unsigned pivot() const { return pivot_; }

  private:
    unsigned pivot_;
};

// Thread-local working precision management.
unsigned working_bits();
void set_working_bits(unsigned bits);

class PrecisionGuard {
  public:
    explicit PrecisionGuard(Precision p);
    explicit PrecisionGuard(unsigned bits) : PrecisionGuard(Precision(bits)) {}
    ~PrecisionGuard();
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

  private:
    unsigned saved_bits_;
};

// Fresh copy carried at (at least) the current working precision. Raising
// precision is value-preserving, so this never loses information.
Real promoted(const Real& x);

// 2^(1-working_bits): one-op relative rounding bound at working precision.
Real rounding_unit();

// pi at working precision.
Real pi_value();

// Decimal rendering with an explicit digit count (used by the CLI layer so
// certified values are never silently rounded to machine precision).
std::string to_decimal(const Real& x, int significant_digits);
int decimal_digits_for_bits(unsigned bits);

// Complex number over Real. Kept as explicit re/im arithmetic: several
// operations evaluate exactly on the unit circle and must not detour
// through polar form.
struct Cplx {
    Real re;
    Real im;

    Cplx() : re(0), im(0) {}
    Cplx(Real r) : re(std::move(r)), im(0) {}  // NOLINT: implicit by design
    Cplx(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    bool is_real() const { return im.is_zero(); }

    Cplx conj() const { return Cplx(re, -im); }

    Cplx& operator+=(const Cplx& o) { re += o.re; im += o.im; return *this; }
    Cplx& operator-=(const Cplx& o) { re -= o.re; im -= o.im; return *this; }
    Cplx& operator*=(const Cplx& o);
    Cplx& operator/=(const Cplx& o);
};

inline Cplx operator+(Cplx a, const Cplx& b) { a += b; return a; }
inline Cplx operator-(Cplx a, const Cplx& b) { a -= b; return a; }
inline Cplx operator*(Cplx a, const Cplx& b) { a *= b; return a; }
inline Cplx operator/(Cplx a, const Cplx& b) { a /= b; return a; }
inline Cplx operator-(const Cplx& a) { return Cplx(-a.re, -a.im); }

Real abs(const Cplx& z);
Real norm_sq(const Cplx& z);
Cplx sqrt(const Cplx& z);              // principal branch
Cplx unit_circle_point(const Real& theta);  // e^{i theta}

}  // namespace hankel
