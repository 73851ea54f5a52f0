#include "hankel/moments.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hankel::moments {

struct MomentSource::Impl {
    Kind kind;
    unsigned bits;
    // SW
    std::optional<qseries::QParam> q;
    // table kinds
    std::vector<Real> table;
};

namespace {

Real parse_moment_value(const std::string& tok, unsigned line_no) {
    Real v;
    if (mpfr_set_str(v.backend().data(), tok.c_str(), 0, MPFR_RNDN) != 0)
        throw std::runtime_error("moment file: unparsable value '" + tok + "' at line " +
                                 std::to_string(line_no));
    if (!mpfr_number_p(v.backend().data()))
        throw std::runtime_error("moment file: non-finite value at line " + std::to_string(line_no));
    return v;
}

}  // namespace

MomentSource MomentSource::stieltjes_wigert(const qseries::QParam& q, Precision prec) {
    PrecisionGuard guard(prec);
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::stieltjes_wigert;
    impl->bits = prec.bits;
    impl->q = qseries::QParam::from_q(promoted(q.q));
    if (q.k_weight) impl->q->k_weight = promoted(*q.k_weight);
    return MomentSource(std::move(impl), 0);
}

MomentSource MomentSource::jacobi_recurrence(std::vector<Real> diag, std::vector<Real> offdiag,
                                             Precision prec, const Real& s0) {
    for (const Real& a : offdiag)
        if (!(a > 0))
            throw std::domain_error("jacobi_recurrence: off-diagonal entries must be positive");
    PrecisionGuard guard(prec);
    unsigned max_n = static_cast<unsigned>(std::min(diag.size(), offdiag.size()));
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::jacobi_recurrence;
    impl->bits = prec.bits;
    impl->table.reserve(max_n + 1);
    std::vector<Real> w(max_n + 1, Real(0));
    w[0] = 1;
    impl->table.push_back(promoted(s0));
    for (unsigned n = 1; n <= max_n; ++n) {
        std::vector<Real> nw(max_n + 1, Real(0));
        for (unsigned i = 0; i < n; ++i) {  // support of w is 0..n-1
            if (!w[i].is_zero()) {
                nw[i] += diag[i] * w[i];
                nw[i + 1] += offdiag[i] * w[i];
                if (i > 0) nw[i - 1] += offdiag[i - 1] * w[i];
            }
        }
        w.swap(nw);
        impl->table.push_back(w[0] * impl->table[0]);
    }
    return MomentSource(std::move(impl), 0);
}

MomentSource MomentSource::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("moment file: cannot open " + path.string());
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::file;
    impl->bits = working_bits();

    std::string line;
    unsigned line_no = 0;
    bool first_content = true;
    std::optional<PrecisionGuard> guard;
    unsigned expect = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = line;
        while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
            trimmed.erase(trimmed.begin());
        if (trimmed.empty()) continue;
        if (trimmed[0] == '#') {
            if (first_content) {
                std::istringstream hs(trimmed.substr(1));
                std::string key;
                hs >> key;
                if (key == "precision-bits:") {
                    unsigned bits = 0;
                    if (!(hs >> bits) || bits < kMinPrecisionBits)
                        throw std::runtime_error("moment file: bad precision-bits header");
                    impl->bits = bits;
                    guard.emplace(Precision(bits));
                }
                first_content = false;
            }
            continue;
        }
        first_content = false;
        std::istringstream ls(trimmed);
        long idx = -1;
        std::string value_tok;
        if (!(ls >> idx >> value_tok))
            throw std::runtime_error("moment file: malformed line " + std::to_string(line_no));
        if (idx != static_cast<long>(expect))
            throw std::runtime_error("moment file: index gap at line " + std::to_string(line_no) +
                                     " (expected " + std::to_string(expect) + ")");
        std::string rest;
        if (ls >> rest)
            throw std::runtime_error("moment file: trailing tokens at line " + std::to_string(line_no));
        impl->table.push_back(parse_moment_value(value_tok, line_no));
        ++expect;
    }
    if (impl->table.empty()) throw std::runtime_error("moment file: no moment entries");
    return MomentSource(std::move(impl), 0);
}

Real MomentSource::moment(unsigned n) const {
    unsigned idx = n + offset_;
    if (idx < n) throw std::out_of_range("moment index overflow");
    if (impl_->kind == Kind::stieltjes_wigert) return sw_moment(idx, *impl_->q);
    if (idx >= impl_->table.size())
        throw std::out_of_range("moment index " + std::to_string(idx) +
                                " beyond source (max " +
                                std::to_string(impl_->table.size() - 1) + ")");
    return impl_->table[idx];
}

unsigned MomentSource::max_index() const {
    if (impl_->kind == Kind::stieltjes_wigert) return kUnbounded;
    unsigned n = static_cast<unsigned>(impl_->table.size());
    return n - 1 >= offset_ ? n - 1 - offset_ : 0;
}

MomentSource::Kind MomentSource::kind() const { return impl_->kind; }

Precision MomentSource::precision() const { return Precision(impl_->bits); }

const qseries::QParam* MomentSource::sw_param() const {
    return impl_->kind == Kind::stieltjes_wigert ? &*impl_->q : nullptr;
}

MomentSource MomentSource::shifted() const { return MomentSource(impl_, offset_ + 2); }

Real sw_moment(unsigned n, const qseries::QParam& q) {
    unsigned long long np1 = static_cast<unsigned long long>(n) + 1;
    if (np1 > (1ull << 31))
        throw PrecisionExhausted("sw_moment: exponent (n+1)^2/2 exceeds representable range",
                                 ~0u);
    unsigned long long sq = np1 * np1;
    // magnitude admission: exponent of q^{-sq/2} must stay inside mpfr's range
    double mag_bits = 0.5 * static_cast<double>(sq) *
                      (-std::log2(q.q.convert_to<double>()));
    if (mag_bits > 0.9 * static_cast<double>(mpfr_get_emax()))
        throw PrecisionExhausted("sw_moment: moment magnitude q^{-(n+1)^2/2} exceeds exponent range",
                                 static_cast<unsigned>(mag_bits));
    Real e = -Real(sq) / 2;
    return pow(q.q, e);
}

Real moments_from_jacobi(const std::vector<Real>& diag, const std::vector<Real>& offdiag,
                         unsigned n, const Real& s0) {
    unsigned avail = static_cast<unsigned>(std::min(diag.size(), offdiag.size()));
    if (n > avail)
        throw std::out_of_range("moments_from_jacobi: coefficients defined only up to index " +
                                std::to_string(avail));
    for (const Real& a : offdiag)
        if (!(a > 0))
            throw std::domain_error("moments_from_jacobi: off-diagonal entries must be positive");
    std::vector<Real> w(n + 1, Real(0));
    w[0] = 1;
    for (unsigned t = 1; t <= n; ++t) {
        std::vector<Real> nw(n + 1, Real(0));
        for (unsigned i = 0; i < t; ++i) {
            if (!w[i].is_zero()) {
                nw[i] += diag[i] * w[i];
                if (i + 1 <= n) nw[i + 1] += offdiag[i] * w[i];
                if (i > 0) nw[i - 1] += offdiag[i - 1] * w[i];
            }
        }
        w.swap(nw);
    }
    return w[0] * s0;
}

unsigned required_bits(const MomentSource& src, unsigned N) {
    if (const qseries::QParam* q = src.sw_param()) {
        double l2q = -std::log2(q->q.convert_to<double>());
        double need = 0.5 * static_cast<double>(N + 1) * static_cast<double>(N + 1) * l2q;
        return static_cast<unsigned>(need) + 128;
    }
    long emax = 0, emin = 0;
    bool any = false;
    for (unsigned m = 0; m <= 2 * N; ++m) {
        Real s = src.moment(m);
        if (s.is_zero()) continue;
        long e = static_cast<long>(mpfr_get_exp(s.backend().data()));
        if (!any) { emax = emin = e; any = true; }
        if (e > emax) emax = e;
        if (e < emin) emin = e;
    }
    long spread = any ? emax - emin : 0;
    return static_cast<unsigned>(spread) + 128;
}

HankelMatrix::HankelMatrix(const MomentSource& src, unsigned N) : order_(N + 1) {
    unsigned need = required_bits(src, N);
    if (working_bits() < need)
        throw PrecisionExhausted("hankel: working precision below the moment-magnitude precheck of " +
                                     std::to_string(need) + " bits",
                                 need);
    s_.reserve(2 * N + 1);
    for (unsigned m = 0; m <= 2 * N; ++m) s_.push_back(promoted(src.moment(m)));
}

}  // namespace hankel::moments
