// Command-line front door: lambda sequences, rho_0 evaluations, the
// percentage-error sweep, and the cross-validation suites.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 precision exhaustion, 4 non-positive-definite input.

#include "hankel/moments.hpp"
#include "hankel/qseries.hpp"
#include "hankel/rho.hpp"
#include "hankel/spectra.hpp"
#include "hankel/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace hankel;

struct RunConfig {
    std::string family;
    std::string q_str;
    std::string a_str;
    std::string k_weight_str;
    unsigned N_max = 48;
    unsigned prec_bits = 256;
    std::string tol_str = "1e-12";
    std::string q_grid = "0.05:0.05:0.90";
    std::string path;
    std::string output = "csv";
    std::string out_path;
    std::string suite;
    bool verbose = false;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(cfg.out_path);
    if (!out) throw ConfigError("cannot open output file " + cfg.out_path);
    out << text;
}

qseries::QParam q_param(const RunConfig& cfg) {
    if (!cfg.q_str.empty() && !cfg.k_weight_str.empty())
        throw ConfigError("give either --q or --k-weight, not both");
    if (!cfg.q_str.empty()) return qseries::QParam::from_q(Real(cfg.q_str));
    if (!cfg.k_weight_str.empty()) return qseries::QParam::from_k_weight(Real(cfg.k_weight_str));
    throw ConfigError("this family needs --q (or --k-weight)");
}

qseries::QParam q_param_or_default(const RunConfig& cfg) {
    if (cfg.q_str.empty() && cfg.k_weight_str.empty())
        return qseries::QParam::from_q(Real("0.5"));
    return q_param(cfg);
}

// Recurrence coefficient file: '#' comments, optional "# s0: <value>"
// header, then lines "k b_k a_k" with k counting up from 0.
void parse_jacobi_file(const std::string& path, std::vector<Real>& diag,
                       std::vector<Real>& offdiag, Real& s0) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open recurrence file " + path);
    std::string line;
    unsigned expect = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "#") {
            std::string key;
            if (ls >> key && key == "s0:") {
                std::string v;
                if (!(ls >> v)) throw ConfigError("recurrence file: bad s0 header");
                s0 = Real(v);
            }
            continue;
        }
        unsigned k = static_cast<unsigned>(std::stoul(first));
        if (k != expect) throw ConfigError("recurrence file: index gap at k=" + first);
        std::string b, a;
        if (!(ls >> b >> a)) throw ConfigError("recurrence file: need 'k b_k a_k' per line");
        diag.emplace_back(b);
        offdiag.emplace_back(a);
        ++expect;
    }
    if (diag.empty()) throw ConfigError("recurrence file: no coefficient lines");
}

moments::MomentSource make_source(const RunConfig& cfg) {
    if (cfg.family == "stieltjes-wigert")
        return moments::MomentSource::stieltjes_wigert(q_param(cfg), Precision(cfg.prec_bits));
    if (cfg.family == "file") {
        if (cfg.path.empty()) throw ConfigError("--family file needs --path");
        return moments::MomentSource::from_file(cfg.path);
    }
    if (cfg.family == "jacobi") {
        if (cfg.path.empty()) throw ConfigError("--family jacobi needs --path");
        std::vector<Real> diag, offdiag;
        Real s0(1);
        parse_jacobi_file(cfg.path, diag, offdiag, s0);
        return moments::MomentSource::jacobi_recurrence(std::move(diag), std::move(offdiag),
                                                        Precision(cfg.prec_bits), s0);
    }
    throw ConfigError("unknown family '" + cfg.family +
                      "' (expected stieltjes-wigert, file, or jacobi)");
}

int cmd_lambda(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(cfg.prec_bits)};
    Real tol(cfg.tol_str);
    moments::MomentSource src = make_source(cfg);
    sweep::LambdaSequence seq = sweep::lambda_sequence(src, cfg.N_max, tol);
    sweep::Extrapolation ex;
    if (seq.entries.size() >= 4) {
        ex = sweep::extrapolate(seq);
    } else {
        ex.value = seq.entries.back().enclosure.mid();
        ex.err_estimate = seq.entries.back().enclosure.width();
    }
    emit(cfg, cfg.output == "json" ? sweep::lambda_json(seq, ex, cfg.prec_bits, cfg.verbose)
                                   : sweep::lambda_csv(seq, ex, cfg.prec_bits));
    return 0;
}

int cmd_rho0(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(cfg.prec_bits)};
    Real tol(cfg.tol_str);
    std::vector<rho::RhoValue> routes;
    if (cfg.family == "stieltjes-wigert") {
        qseries::QParam qp = q_param(cfg);
        routes.push_back(rho::rho0_sw_fast(qp, tol));
        routes.push_back(rho::rho0_sw_direct(qp, tol));
    } else if (cfg.family == "al-salam-carlitz") {
        if (cfg.a_str.empty()) throw ConfigError("al-salam-carlitz needs --a");
        rho::ASCParam p = rho::ASCParam::make(q_param(cfg), Real(cfg.a_str));
        routes.push_back(rho::rho0_asc(p, tol));
        routes.push_back(rho::rho0_asc_quadrature(p, tol));
    } else if (cfg.family == "freud-quartic") {
        routes.push_back(rho::rho0_freud(tol));
        routes.push_back(rho::rho0_freud_quadrature(tol));
    } else if (cfg.family == "q-inverse-hermite") {
        rho::QHermiteRho r = rho::rho0_qhermite(q_param(cfg), tol);
        routes.push_back(std::move(r.expansion));
        routes.push_back(std::move(r.quadrature));
    } else {
        throw ConfigError("unknown rho0 family '" + cfg.family + "'");
    }

    const int digits = decimal_digits_for_bits(cfg.prec_bits);
    Real agreement = abs(routes[0].value - routes[1].value);
    if (cfg.output == "json") {
        nlohmann::json j;
        j["family"] = cfg.family;
        nlohmann::json rs = nlohmann::json::array();
        for (const rho::RhoValue& r : routes)
            rs.push_back({{"route", r.route},
                          {"value", to_decimal(r.value, digits)},
                          {"err", to_decimal(r.err, 6)},
                          {"l", to_decimal(rho::lower_bound(r), digits)}});
        j["routes"] = std::move(rs);
        j["l"] = to_decimal(rho::lower_bound(routes[0]), digits);
        j["route_disagreement"] = to_decimal(agreement, 6);
        emit(cfg, j.dump(2) + "\n");
    } else {
        std::ostringstream out;
        out << "family,route,value,err,l\n";
        for (const rho::RhoValue& r : routes)
            out << cfg.family << ',' << r.route << ',' << to_decimal(r.value, digits) << ','
                << to_decimal(r.err, 6) << ',' << to_decimal(rho::lower_bound(r), digits) << '\n';
        out << "# route disagreement: " << to_decimal(agreement, 6) << "\n";
        emit(cfg, out.str());
    }
    if (!(agreement <= routes[0].err + routes[1].err)) {
        std::cerr << "rho0: routes disagree beyond their combined certified errors\n";
        return 1;
    }
    return 0;
}

std::vector<qseries::QParam> parse_grid(const std::string& text) {
    auto c1 = text.find(':');
    auto c2 = text.rfind(':');
    if (c1 == std::string::npos || c2 == c1)
        throw ConfigError("--q-grid must be start:step:stop");
    Real start(text.substr(0, c1));
    Real step(text.substr(c1 + 1, c2 - c1 - 1));
    Real stop(text.substr(c2 + 1));
    if (!(step > 0)) throw ConfigError("--q-grid step must be positive");
    std::vector<qseries::QParam> grid;
    for (Real v = start; v <= stop + step / 2; v += step) {
        if (!(v > 0 && v < 1)) throw ConfigError("--q-grid values must lie in (0,1)");
        grid.push_back(qseries::QParam::from_q(v));
    }
    if (grid.empty()) throw ConfigError("--q-grid produced no points");
    return grid;
}

int cmd_figure1(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(cfg.prec_bits)};
    Real tol(cfg.tol_str);
    std::vector<qseries::QParam> grid = parse_grid(cfg.q_grid);
    std::vector<sweep::LambdaSequence> seqs;
    std::vector<sweep::SweepRow> rows =
        sweep::figure1_sweep(grid, cfg.N_max, tol, cfg.verbose ? &seqs : nullptr);
    emit(cfg, cfg.output == "json" ? sweep::sweep_json(rows, cfg.prec_bits, cfg.verbose, &seqs)
                                   : sweep::sweep_csv(rows, cfg.prec_bits));
    unsigned ok = 0;
    for (const sweep::SweepRow& r : rows)
        if (r.error.empty()) ++ok;
    return ok > 0 ? 0 : 1;
}

// --- verification suites -------------------------------------------------

struct SuiteResult {
    std::string name;
    bool pass;
    std::string detail;
};

using SuiteFn = std::function<SuiteResult(const RunConfig&)>;

template <typename T>
bool check_close(const T& a, const T& b, const Real& bound) {
    return abs(Real(a - b)) <= bound;
}

SuiteResult suite_qpochhammer(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(cfg.prec_bits)};
    Real tol(cfg.tol_str);
    for (const char* qs : {"0.3", "0.5", "0.7"}) {
        auto qp = qseries::QParam::from_q(Real(qs));
        for (const char* as : {"0.7", "-0.4", "0.99"}) {
            Real a(as);
            Real prod(1), qn(1);
            for (unsigned n = 0; n <= 64; ++n) {
                Real direct = qseries::qpochhammer(a, qp, n, tol).value;
                if (!check_close(direct, prod, (abs(prod) + 1) * Real(260) * rounding_unit()))
                    return {"qpochhammer", false, "finite product recurrence broke at n=" +
                                                      std::to_string(n)};
                prod *= (1 - a * qn);
                qn *= qp.q;
            }
            // err bound validated by recomputation at doubled precision
            auto v_lo = qseries::qpochhammer(a, qp, qseries::kInfinite, tol);
            Real hi_val;
            {
                PrecisionGuard g2{Precision(cfg.prec_bits * 2)};
                hi_val = qseries::qpochhammer(promoted(a), qseries::QParam::from_q(promoted(qp.q)),
                                              qseries::kInfinite, promoted(tol) / 2)
                             .value;
            }
            if (!check_close(v_lo.value, promoted(hi_val), v_lo.err + rounding_unit()))
                return {"qpochhammer", false, "err bound failed doubled-precision validation"};
        }
    }
    return {"qpochhammer", true, {}};
}

SuiteResult suite_qbinomial(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(cfg.prec_bits)};
    auto qp = q_param_or_default(cfg);
    for (unsigned n = 0; n <= 32; ++n)
        for (unsigned k = 0; k <= n; ++k) {
            Real b1 = qseries::qbinomial(n, k, qp);
            Real b2 = qseries::qbinomial(n, n - k, qp);
            if (!check_close(b1, b2, (b1 + 1) * Real(1024) * rounding_unit()))
                return {"qbinomial", false, "symmetry failed"};
            if (k >= 1 && k <= n - 1) {
                Real pascal = qseries::qbinomial(n - 1, k - 1, qp) +
                              pow(qp.q, static_cast<int>(k)) * qseries::qbinomial(n - 1, k, qp);
                if (!check_close(b1, pascal, (b1 + 1) * Real(1024) * rounding_unit()))
                    return {"qbinomial", false, "Pascal recurrence failed"};
            }
        }
    return {"qbinomial", true, {}};
}

SuiteResult suite_triple_product(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(cfg.prec_bits)};
    Real tol(cfg.tol_str);
    for (const char* qs : {"0.3", "0.5", "0.7"}) {
        auto qp = qseries::QParam::from_q(Real(qs));
        for (unsigned j = 1; j <= 16; ++j) {
            Real theta = 2 * pi_value() * j / 17;
            Cplx z = unit_circle_point(theta);
            auto a = qseries::triple_product(z, qp, tol, qseries::TripleProductRoute::product);
            auto b = qseries::triple_product(z, qp, tol, qseries::TripleProductRoute::laurent_sum);
            if (!(abs(a.value - b.value) <= a.err + b.err))
                return {"triple-product", false,
                        "route disagreement at q=" + std::string(qs) + " node " + std::to_string(j)};
        }
    }
    return {"triple-product", true, {}};
}

SuiteResult suite_identities(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(cfg.prec_bits)};
    Real tol(cfg.tol_str);
    for (const char* qs : {"0.3", "0.5", "0.7"}) {
        auto qp = qseries::QParam::from_q(Real(qs));
        for (unsigned k = 0; k <= 8; ++k)
            for (const Real& w : {Real("0.25"), qp.q, Real("0.9")}) {
                auto [lhs, rhs] = qseries::inner_sum_identity(k, qp, w, tol);
                if (!(abs(lhs.value - rhs.value) <= lhs.err + rhs.err))
                    return {"identities", false,
                            "inner-sum identity failed at q=" + std::string(qs) +
                                " k=" + std::to_string(k)};
            }
    }
    return {"identities", true, {}};
}

SuiteResult suite_sw_rho(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(cfg.prec_bits)};
    Real tol(cfg.tol_str);
    auto qp = q_param_or_default(cfg);
    auto f = rho::rho0_sw_fast(qp, tol);
    auto d = rho::rho0_sw_direct(qp, tol);
    if (!(abs(f.value - d.value) <= f.err + d.err))
        return {"sw-rho", false, "route disagreement"};
    return {"sw-rho", true, {}};
}

SuiteResult suite_duality(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(std::max(cfg.prec_bits, 320u))};
    auto qp = q_param_or_default(cfg);
    unsigned N_max = std::min(cfg.N_max, 12u);
    auto src = moments::MomentSource::stieltjes_wigert(qp, Precision(working_bits()));
    for (unsigned N = 0; N <= N_max; ++N) {
        unsigned bits = std::max(moments::required_bits(src, N) + 64, working_bits());
        PrecisionGuard g{Precision(bits)};
        moments::HankelMatrix H(src, N);
        auto lam = spectra::smallest_eig(H, Real("1e-14"));
        auto K = spectra::kernel_matrix(spectra::beta_from_hankel(H));
        auto Lam = spectra::largest_eig(K, Real("1e-14"));
        if (!(abs(lam.mid() * Lam.mid() - 1) <= Real("1e-10")))
            return {"duality", false, "lambda_min * Lambda_max != 1 at N=" + std::to_string(N)};
        if (!(1 / lam.lo <= spectra::trace_bound(K) + Real("1e-10")))
            return {"duality", false, "trace bound violated at N=" + std::to_string(N)};
    }
    return {"duality", true, {}};
}

SuiteResult suite_hamburger(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(std::max(cfg.prec_bits, 320u))};
    auto qp = q_param_or_default(cfg);
    unsigned N_max = std::min(cfg.N_max, 10u);
    auto src = moments::MomentSource::stieltjes_wigert(qp, Precision(working_bits()));
    for (unsigned N = 0; N <= N_max; ++N) {
        unsigned bits = std::max(moments::required_bits(src, N + 1) + 64, working_bits());
        PrecisionGuard g{Precision(bits)};
        moments::HankelMatrix H(src, N);
        moments::HankelMatrix H1(src, N + 1);
        Real mu = spectra::hamburger_mu(H);
        Real mus = spectra::hamburger_mu_shifted(src, N);
        auto lam = spectra::smallest_eig(H, Real("1e-12"));
        auto lam1 = spectra::smallest_eig(H1, Real("1e-12"));
        if (!(mu >= lam.lo)) return {"hamburger", false, "mu_N < lambda_N at N=" + std::to_string(N)};
        if (!(mus >= lam1.lo))
            return {"hamburger", false, "mu'_N < lambda_{N+1} at N=" + std::to_string(N)};
    }
    return {"hamburger", true, {}};
}

SuiteResult suite_point_bound(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(std::max(cfg.prec_bits, 320u))};
    auto qp = q_param_or_default(cfg);
    unsigned N = std::min(cfg.N_max, 12u);
    unsigned bits = 0;
    auto src = moments::MomentSource::stieltjes_wigert(qp, Precision(working_bits()));
    bits = std::max(moments::required_bits(src, N) + 64, working_bits());
    PrecisionGuard g{Precision(bits)};
    moments::HankelMatrix H(src, N);
    auto lam = spectra::smallest_eig(H, Real("1e-12"));
    auto B = spectra::beta_from_hankel(H);
    for (const Cplx& z0 : {Cplx(Real(0), Real("0.5")), Cplx(Real("0.25"), Real("0.25"))}) {
        auto pk = spectra::pk_eval(B, z0, N);
        Real ssq(0);
        for (const Cplx& p : pk) ssq += norm_sq(p);
        Real bound = 1 / (lam.lo * (1 - norm_sq(z0)));
        if (!(ssq <= bound)) return {"point-bound", false, "point bound violated"};
    }
    return {"point-bound", true, {}};
}

SuiteResult suite_asc(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(std::max(cfg.prec_bits, 256u))};
    auto qp = q_param_or_default(cfg);
    Real tol(cfg.tol_str);
    for (unsigned n = 0; n <= 4; ++n) {
        auto s = rho::asc_In(n, qp, tol);
        auto p = rho::asc_In(n, qp, tol, rho::AscInRoute::theta_pair);
        auto qd = rho::asc_In_quadrature(n, qp, std::max(tol, Real("1e-13")));
        if (!(abs(s.value - p.value) <= s.err + p.err))
            return {"asc", false, "series routes disagree at n=" + std::to_string(n)};
        if (!(abs(s.value - qd.value) <= s.err + qd.err))
            return {"asc", false, "series vs quadrature disagree at n=" + std::to_string(n)};
    }
    rho::ASCParam p = rho::ASCParam::make(qp, Real(1) / qp.q / 2 + qp.q / 2);
    auto ra = rho::rho0_asc(p, std::max(tol, Real("1e-10")));
    auto rq = rho::rho0_asc_quadrature(p, std::max(tol, Real("1e-10")));
    if (!(abs(ra.value - rq.value) <= ra.err + rq.err))
        return {"asc", false, "rho routes disagree"};
    return {"asc", true, {}};
}

SuiteResult suite_freud(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(std::max(cfg.prec_bits, 256u))};
    Real tol(cfg.tol_str);
    auto rs = rho::rho0_freud(tol);
    auto rq = rho::rho0_freud_quadrature(std::max(tol, Real("1e-13")));
    if (!(abs(rs.value - rq.value) <= rs.err + rq.err))
        return {"freud", false, "sum vs quadrature disagree"};
    // Nevanlinna route against the closed kernel form on 8 nodes
    for (unsigned j = 1; j <= 8; ++j) {
        Real theta = pi_value() * j / 9;
        Cplx x = unit_circle_point(theta);
        Cplx y = x.conj();
        auto bdx = rho::freud_bd(x, Real("1e-25"));
        auto bdy = rho::freud_bd(y, Real("1e-25"));
        Cplx nev = (bdx.B.value * bdy.D.value - bdy.B.value * bdx.D.value) / (x - y);
        Real direct = rho::freud_kernel(theta, Real("1e-25")).value;
        if (!(abs(nev.re - direct) <= Real("1e-12")))
            return {"freud", false, "Nevanlinna route mismatch at node " + std::to_string(j)};
    }
    return {"freud", true, {}};
}

SuiteResult suite_qhermite(const RunConfig& cfg) {
    PrecisionGuard guard{Precision(std::max(cfg.prec_bits, 256u))};
    auto qp = q_param_or_default(cfg);
    Real tol = std::max(Real(cfg.tol_str), Real("1e-13"));
    auto r = rho::rho0_qhermite(qp, tol);
    if (!(abs(r.expansion.value - r.quadrature.value) <= r.expansion.err + r.quadrature.err))
        return {"qhermite", false, "expansion vs quadrature disagree"};
    auto spot = rho::qh_kernel(pi_value() / 2, qp, Real("1e-25"));
    auto euler = qseries::qpochhammer(qp.q, qp, qseries::kInfinite, Real("1e-30"));
    auto negq = qseries::qpochhammer(-qp.q, qp, qseries::kInfinite, Real("1e-30"));
    Real expect = negq.value * negq.value;
    expect *= expect;
    expect /= euler.value;
    if (!(abs(spot.value - expect) <= Real("1e-20") * (1 + expect)))
        return {"qhermite", false, "theta=pi/2 spot value mismatch"};
    return {"qhermite", true, {}};
}

int cmd_verify(const RunConfig& cfg) {
    const std::vector<std::pair<std::string, SuiteFn>> suites = {
        {"qpochhammer", suite_qpochhammer}, {"qbinomial", suite_qbinomial},
        {"triple-product", suite_triple_product}, {"identities", suite_identities},
        {"sw-rho", suite_sw_rho}, {"duality", suite_duality},
        {"hamburger", suite_hamburger}, {"point-bound", suite_point_bound},
        {"asc", suite_asc}, {"freud", suite_freud}, {"qhermite", suite_qhermite}};
    bool all_pass = true;
    bool any_run = false;
    for (const auto& [name, fn] : suites) {
        if (!cfg.suite.empty() && name.find(cfg.suite) == std::string::npos) continue;
        any_run = true;
        SuiteResult r = fn(cfg);
        std::cout << r.name << ": " << (r.pass ? "PASS" : "FAIL") << (r.detail.empty() ? "" : " — ")
                  << r.detail << "\n";
        if (!r.pass) all_pass = false;
    }
    if (!any_run) throw ConfigError("--suite matched no suite");
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    if (const char* env = std::getenv("HANKEL_INDET_PREC_BITS")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0' && v >= 64) cfg.prec_bits = static_cast<unsigned>(v);
    }

    CLI::App app{"Certified lower bounds for the smallest eigenvalues of Hankel matrices "
                 "of indeterminate moment problems"};
    app.require_subcommand(1);

    auto add_common = [&cfg](CLI::App* sub) {
        sub->add_option("--q", cfg.q_str, "q parameter in (0,1)");
        sub->add_option("--k-weight", cfg.k_weight_str,
                        "weight parameter k with q = exp(-1/(2 k^2))");
        sub->add_option("--prec-bits", cfg.prec_bits, "working precision in bits (>= 64)");
        sub->add_option("--tol", cfg.tol_str, "target tolerance");
        sub->add_option("--output", cfg.output, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--out", cfg.out_path, "write output to this file");
        sub->add_flag("--verbose", cfg.verbose, "include per-N enclosures in JSON output");
    };

    CLI::App* lambda = app.add_subcommand("lambda", "smallest-eigenvalue sequence over N");
    lambda->add_option("--family", cfg.family, "stieltjes-wigert | file | jacobi")->required();
    lambda->add_option("--N-max", cfg.N_max, "largest Hankel order N");
    lambda->add_option("--path", cfg.path, "moment or recurrence file");
    add_common(lambda);

    CLI::App* rho0 = app.add_subcommand("rho0", "rho_0 and the lower bound 1/rho_0");
    rho0->add_option("--family", cfg.family,
                     "stieltjes-wigert | al-salam-carlitz | freud-quartic | q-inverse-hermite")
        ->required();
    rho0->add_option("--a", cfg.a_str, "Al-Salam-Carlitz parameter, q < a < 1/q");
    add_common(rho0);

    CLI::App* fig = app.add_subcommand("figure1", "percentage-error sweep over a q grid");
    fig->add_option("--q-grid", cfg.q_grid, "grid as start:step:stop");
    fig->add_option("--N-max", cfg.N_max, "largest Hankel order N per grid point");
    add_common(fig);

    CLI::App* verify = app.add_subcommand("verify", "run the cross-validation suites");
    verify->add_option("--suite", cfg.suite, "run only suites whose name contains this");
    verify->add_option("--N-max", cfg.N_max, "matrix-order scale for the spectral suites");
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (cfg.prec_bits < kMinPrecisionBits) {
        std::cerr << "config error: --prec-bits must be at least " << kMinPrecisionBits << "\n";
        return 2;
    }

    try {
        set_working_bits(cfg.prec_bits);
        if (lambda->parsed()) return cmd_lambda(cfg);
        if (rho0->parsed()) return cmd_rho0(cfg);
        if (fig->parsed()) return cmd_figure1(cfg);
        if (verify->parsed()) {
            if (verify->count("--N-max") == 0) cfg.N_max = 8;  // suite-sized default
            return cmd_verify(cfg);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const PrecisionExhausted& e) {
        std::cerr << "precision exhausted: " << e.what();
        if (e.required_bits() != ~0u && e.required_bits() > 0)
            std::cerr << " (estimated requirement: " << e.required_bits() << " bits)";
        std::cerr << "\n";
        return 3;
    } catch (const NotPositiveDefinite& e) {
        std::cerr << "input matrix not positive definite: " << e.what() << "\n";
        return 4;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
