// lambda_N sequences over N and q-grids, extrapolation to the infinite
// matrix limit, percentage errors against the certified lower bound, and the
// CSV/JSON renderings of all of it.

#pragma once

#include "hankel/moments.hpp"
#include "hankel/rho.hpp"
#include "hankel/spectra.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hankel::sweep {

struct LambdaEntry {
    unsigned N;
    spectra::EigenEnclosure enclosure;
    unsigned bits_used;
};

struct LambdaSequence {
    std::optional<Real> q;  // set for Stieltjes-Wigert sources
    std::vector<LambdaEntry> entries;
};

// Enclosures for N = 0..N_max with per-N precision escalation driven by the
// moment-magnitude precheck.
LambdaSequence lambda_sequence(const moments::MomentSource& src, unsigned N_max, const Real& tol);

struct Extrapolation {
    Real value;
    Real err_estimate;
};

// Iterated Aitken delta-squared on the enclosure midpoints; falls back to
// the last midpoint (err = spread of the final three) when the accelerated
// denominators sink below the noise floor. Needs >= 4 entries.
Extrapolation extrapolate(const LambdaSequence& seq);
Extrapolation extrapolate_midpoints(const std::vector<Real>& mids, const Real& width_bound);

struct SweepRow {
    Real q;
    unsigned N_max = 0;
    Real lambda_last;
    Real s;
    Real s_err;
    Real l;
    Real l_err;
    Real pct_error;
    std::string error;  // nonempty when this row failed
};

// Per-q pipeline: lambda_sequence + extrapolate + 1/rho_0 lower bound.
// Row failures are reported in-place; the sweep continues. sequences_out,
// when non-null, receives the per-q lambda sequences (empty on row failure).
std::vector<SweepRow> figure1_sweep(const std::vector<qseries::QParam>& grid, unsigned N_max,
                                    const Real& tol,
                                    std::vector<LambdaSequence>* sequences_out = nullptr);

// Finite-N trend heuristic; cannot decide the limit and says so.
struct DeterminacyReport {
    Real trend;           // lambda_{N_max} / lambda_{N_max/2} midpoint ratio
    std::string verdict;  // indeterminate-consistent | determinate-consistent | inconclusive
    bool heuristic = true;
};

DeterminacyReport determinacy_probe(const moments::MomentSource& src, unsigned N_max,
                                    const Real& tol);

// Deterministic renderings; numbers are decimal strings carrying
// prec_bits-derived digit counts.
std::string sweep_csv(const std::vector<SweepRow>& rows, unsigned prec_bits);
std::string sweep_json(const std::vector<SweepRow>& rows, unsigned prec_bits, bool verbose,
                       const std::vector<LambdaSequence>* sequences = nullptr);
std::string lambda_csv(const LambdaSequence& seq, const Extrapolation& ex, unsigned prec_bits);
std::string lambda_json(const LambdaSequence& seq, const Extrapolation& ex, unsigned prec_bits,
                        bool verbose);

}  // namespace hankel::sweep
