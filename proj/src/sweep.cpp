#include "hankel/sweep.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace hankel::sweep {

namespace {

unsigned entry_bits(const moments::MomentSource& src, unsigned N) {
    return std::max(moments::required_bits(src, N) + 64, working_bits());
}

std::string fmt(const Real& x, unsigned prec_bits) {
    return to_decimal(x, decimal_digits_for_bits(prec_bits));
}

}  // namespace

LambdaSequence lambda_sequence(const moments::MomentSource& src, unsigned N_max, const Real& tol) {
    LambdaSequence seq;
    if (const qseries::QParam* q = src.sw_param()) seq.q = q->q;
    seq.entries.reserve(N_max + 1);
    for (unsigned N = 0; N <= N_max; ++N) {
        unsigned bits = entry_bits(src, N);
        PrecisionGuard guard{Precision(bits)};
        moments::HankelMatrix H(src, N);
        unsigned peak = bits;
        spectra::EigenEnclosure enc = spectra::smallest_eig(H, promoted(tol), &peak);
        seq.entries.push_back(LambdaEntry{N, std::move(enc), std::max(bits, peak)});
    }
    return seq;
}

Extrapolation extrapolate_midpoints(const std::vector<Real>& mids, const Real& width_bound) {
    if (mids.size() < 4)
        throw std::domain_error("extrapolate: need at least 4 sequence entries");

    Real scale(0);
    for (const Real& m : mids) scale = std::max(scale, Real(boost::multiprecision::abs(m)));
    Real noise_floor = scale * ldexp(Real(1), -static_cast<int>(working_bits() / 2)) +
                       4 * width_bound;

    std::vector<std::vector<Real>> rows{mids};
    while (rows.back().size() >= 3) {
        const std::vector<Real>& x = rows.back();
        std::vector<Real> next;
        next.reserve(x.size() - 2);
        bool unstable = false;
        for (size_t i = 0; i + 2 < x.size(); ++i) {
            Real d1 = x[i + 1] - x[i];
            Real d2 = x[i + 2] - 2 * x[i + 1] + x[i];
            if (boost::multiprecision::abs(d2) <= noise_floor) {
                unstable = true;
                break;
            }
            next.push_back(x[i] - d1 * d1 / d2);
        }
        if (unstable || next.empty()) break;
        rows.push_back(std::move(next));
    }

    if (rows.size() == 1) {
        // acceleration unusable: last midpoint with the spread of the final three
        const std::vector<Real>& x = rows[0];
        Real a = x[x.size() - 1], b = x[x.size() - 2], c = x[x.size() - 3];
        Real lo = std::min({a, b, c}), hi = std::max({a, b, c});
        return {a, hi - lo + width_bound};
    }
    const std::vector<Real>& deep = rows.back();
    Real est = deep.back();
    Real prev_est = deep.size() >= 2 ? deep[deep.size() - 2] : rows[rows.size() - 2].back();
    return {est, boost::multiprecision::abs(est - prev_est) + width_bound};
}

Extrapolation extrapolate(const LambdaSequence& seq) {
    std::vector<Real> mids;
    mids.reserve(seq.entries.size());
    Real wmax(0);
    for (const LambdaEntry& e : seq.entries) {
        mids.push_back(e.enclosure.mid());
        wmax = std::max(wmax, Real(e.enclosure.width()));
    }
    return extrapolate_midpoints(mids, wmax);
}

std::vector<SweepRow> figure1_sweep(const std::vector<qseries::QParam>& grid, unsigned N_max,
                                    const Real& tol,
                                    std::vector<LambdaSequence>* sequences_out) {
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (const qseries::QParam& qp : grid) {
        SweepRow row;
        row.q = qp.q;
        row.N_max = N_max;
        if (sequences_out) sequences_out->emplace_back();
        try {
            moments::MomentSource src = moments::MomentSource::stieltjes_wigert(
                qp, Precision(std::max(working_bits(), 128u)));
            LambdaSequence seq = lambda_sequence(src, N_max, tol);
            Extrapolation ex = extrapolate(seq);
            if (sequences_out) sequences_out->back() = seq;
            Real rho_tol = std::max(Real(ldexp(Real(1), 16 - static_cast<int>(working_bits()))),
                                    Real("1e-25"));
            rho::RhoValue r = rho::rho0_sw_fast(qp, rho_tol);
            Real l = rho::lower_bound(r);
            row.lambda_last = seq.entries.back().enclosure.mid();
            row.s = ex.value;
            row.s_err = ex.err_estimate;
            row.l = l;
            row.l_err = r.err / (r.value * (r.value + r.err));
            row.pct_error = 100 * (ex.value - l) / ex.value;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

DeterminacyReport determinacy_probe(const moments::MomentSource& src, unsigned N_max,
                                    const Real& tol) {
    if (N_max < 4) return {Real(0), "inconclusive", true};
    LambdaSequence seq = lambda_sequence(src, N_max, tol);
    Real first = seq.entries.front().enclosure.mid();
    Real half = seq.entries[N_max / 2].enclosure.mid();
    Real last = seq.entries.back().enclosure.mid();
    Real trend = last / half;
    std::string verdict = "inconclusive";
    if (last >= Real("0.9") * half) verdict = "indeterminate-consistent";
    else if (last <= Real("0.01") * first) verdict = "determinate-consistent";
    return {trend, verdict, true};
}

std::string sweep_csv(const std::vector<SweepRow>& rows, unsigned prec_bits) {
    std::ostringstream out;
    out << "q,N_max,lambda_last,s,l,pct_error,s_err,l_err,error\n";
    for (const SweepRow& r : rows) {
        if (!r.error.empty()) {
            std::string msg = r.error;
            for (char& c : msg)
                if (c == ',' || c == '\n') c = ';';
            out << fmt(r.q, prec_bits) << ',' << r.N_max << ",,,,,,," << msg << '\n';
            continue;
        }
        out << fmt(r.q, prec_bits) << ',' << r.N_max << ',' << fmt(r.lambda_last, prec_bits)
            << ',' << fmt(r.s, prec_bits) << ',' << fmt(r.l, prec_bits) << ','
            << fmt(r.pct_error, prec_bits) << ',' << fmt(r.s_err, prec_bits) << ','
            << fmt(r.l_err, prec_bits) << ",\n";
    }
    return out.str();
}

std::string sweep_json(const std::vector<SweepRow>& rows, unsigned prec_bits, bool verbose,
                       const std::vector<LambdaSequence>* sequences) {
    nlohmann::json arr = nlohmann::json::array();
    for (size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        nlohmann::json j;
        j["q"] = fmt(r.q, prec_bits);
        j["N_max"] = r.N_max;
        if (!r.error.empty()) {
            j["error"] = r.error;
        } else {
            j["lambda_last"] = fmt(r.lambda_last, prec_bits);
            j["s"] = fmt(r.s, prec_bits);
            j["l"] = fmt(r.l, prec_bits);
            j["pct_error"] = fmt(r.pct_error, prec_bits);
            j["s_err"] = fmt(r.s_err, prec_bits);
            j["l_err"] = fmt(r.l_err, prec_bits);
            if (verbose && sequences && i < sequences->size()) {
                nlohmann::json encs = nlohmann::json::array();
                for (const LambdaEntry& e : (*sequences)[i].entries) {
                    encs.push_back({{"N", e.N},
                                    {"lo", fmt(e.enclosure.lo, prec_bits)},
                                    {"hi", fmt(e.enclosure.hi, prec_bits)},
                                    {"probes", e.enclosure.probes},
                                    {"prec_bits", e.bits_used}});
                }
                j["enclosures"] = std::move(encs);
            }
        }
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string lambda_csv(const LambdaSequence& seq, const Extrapolation& ex, unsigned prec_bits) {
    std::ostringstream out;
    out << "N,lambda_lo,lambda_hi,probes,prec_bits\n";
    for (const LambdaEntry& e : seq.entries)
        out << e.N << ',' << fmt(e.enclosure.lo, prec_bits) << ','
            << fmt(e.enclosure.hi, prec_bits) << ',' << e.enclosure.probes << ',' << e.bits_used
            << '\n';
    out << "extrapolated_s," << fmt(ex.value, prec_bits) << ',' << fmt(ex.err_estimate, prec_bits)
        << ",,\n";
    return out.str();
}

std::string lambda_json(const LambdaSequence& seq, const Extrapolation& ex, unsigned prec_bits,
                        bool verbose) {
    nlohmann::json j;
    if (seq.q) j["q"] = fmt(*seq.q, prec_bits);
    j["s"] = fmt(ex.value, prec_bits);
    j["s_err"] = fmt(ex.err_estimate, prec_bits);
    nlohmann::json encs = nlohmann::json::array();
    for (const LambdaEntry& e : seq.entries) {
        nlohmann::json je{{"N", e.N},
                          {"lo", fmt(e.enclosure.lo, prec_bits)},
                          {"hi", fmt(e.enclosure.hi, prec_bits)}};
        if (verbose) {
            je["probes"] = e.enclosure.probes;
            je["prec_bits"] = e.bits_used;
        }
        encs.push_back(std::move(je));
    }
    j["entries"] = std::move(encs);
    return j.dump(2) + "\n";
}

}  // namespace hankel::sweep
