// SPDX-License-Identifier: Apache-2.0
#pragma once

// Experiment recipes behind the command-line driver. Each writes its files
// into an output directory and returns a short summary for stderr.

#include "thermo/io.hpp"
#include "thermo/thermo.hpp"

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace thermo {

struct RunResult {
    std::vector<std::string> outputs;  // file names relative to the output directory
    std::string summary;               // human-readable, for stderr
};

namespace detail {

inline void require_planar(const ExperimentConfig& cfg, const char* what) {
    if (cfg.cocycle.d() != 2)
        throw Error(ErrorKind::DimensionUnsupported, std::string(what) + " needs 2x2 matrices");
}

inline std::vector<GibbsRatioRow> gibbs_rows_for(const ExperimentConfig& cfg, const GFunction& g, double t, int M,
                                                 std::size_t n_max, std::vector<SpectralData>& spectral) {
    spectral.push_back(leading_eigen(cfg.shift, cfg.cocycle, g, t, M));
    return gibbs_ratio_report(spectral.back(), cfg.shift, cfg.cocycle, g, n_max);
}

// blow-up when every band growth for n >= 6 is at least 1.5, stable when every
// one for 6 <= n <= 10 lies in [0.9, 1.1].
inline std::string classify_band(const std::vector<GibbsRatioRow>& rows) {
    bool blow = true, stable = true, any = false;
    for (const auto& r : rows) {
        if (r.n < 6) continue;
        any = true;
        if (!(r.band_growth >= 1.5)) blow = false;
        if (r.n <= 10 && !(r.band_growth >= 0.9 && r.band_growth <= 1.1)) stable = false;
    }
    if (!any) return "too-short";
    if (blow) return "ratio-blow-up";
    if (stable) return "stable-band";
    return "indeterminate";
}

} // namespace detail

inline RunResult run_pressure_scan(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    RunResult res;
    const auto grid = cfg.t_grid.values();
    auto curve = pressure_curve(cfg.shift, cfg.cocycle, cfg.psi, grid, cfg.n);
    auto g = rpf_solve(cfg.shift, cfg.psi);

    std::vector<SpectralData> spectral;
    std::vector<double> log_rho;
    if (cfg.cocycle.d() == 2) {
        for (double t : grid) {
            spectral.push_back(leading_eigen(cfg.shift, cfg.cocycle, g, t, cfg.M));
            log_rho.push_back(spectral.back().log_rho());
        }
    }
    pressure_curve_table(curve, log_rho, g.log_lambda).write(out / "pressure_curve.csv");
    write_json(out / "spectral.json", spectral_json(spectral));
    res.outputs = {"pressure_curve.csv", "spectral.json"};

    Json summary;
    summary["p_top_psi"] = format_real(g.log_lambda);
    if (grid.size() >= 3) {
        auto conv = convexity_report(curve);
        summary["shape"] = to_string(conv.shape);
        summary["kink_t"] = conv.kink_t ? Json(format_real(*conv.kink_t)) : Json(nullptr);
    } else {
        summary["shape"] = to_string(CurveShape::Indeterminate);
        summary["kink_t"] = nullptr;
    }
    write_json(out / "curve_summary.json", summary);
    res.outputs.push_back("curve_summary.json");

    std::ostringstream s;
    s << "pressure-scan: " << grid.size() << " t values, n = " << cfg.n << "\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& e = curve.estimates[i];
        s << "  t = " << e.t << "  p_n = " << e.p_n << "  [" << e.lower << ", " << e.upper << "]";
        if (i < log_rho.size()) s << "  log rho + P(psi) = " << log_rho[i] + g.log_lambda;
        s << "\n";
    }
    res.summary = s.str();
    return res;
}

struct PhaseOptions {
    double lambda = 2.0;
    double theta = 0.70710678118654752;
    std::size_t word_n_max = 50;
};

inline double phase_threshold(double lambda) { return -std::log(4.5) / std::log(lambda); }

inline RunResult run_phase_transition(const ExperimentConfig& cfg_in, const PhaseOptions& opt,
                                      const std::filesystem::path& out) {
    if (!(opt.lambda > 1.0)) throw Error(ErrorKind::Validation, "field 'lambda': must exceed 1");
    ExperimentConfig cfg = cfg_in;
    cfg.cocycle = diagonal_swap_rotation_cocycle(opt.lambda, opt.theta);
    if (cfg.shift.q() != 3) cfg.shift = full_shift(3);
    if (cfg.psi.values.size() != 3) cfg.psi = Potential::zero(3);
    RunResult res;
    const double threshold = phase_threshold(opt.lambda);

    // Word-level facts, compared bit for bit.
    CsvTable facts({"n", "norm_power", "expected_power", "power_exact", "norm_swap_word", "swap_exact"});
    bool all_exact = true;
    for (std::size_t n = 1; n <= opt.word_n_max; ++n) {
        Word ones(n, 0);
        Word sw(n, 0);
        sw.push_back(1);
        sw.insert(sw.end(), n, 0);
        double np = spectral_norm(product(cfg.cocycle, ones));
        double expect = std::pow(opt.lambda, double(n));
        double ns = spectral_norm(product(cfg.cocycle, sw));
        bool pe = np == expect, se = ns == 1.0;
        all_exact = all_exact && pe && se;
        facts.row({std::to_string(n), format_real(np), format_real(expect), pe ? "1" : "0", format_real(ns),
                   se ? "1" : "0"});
    }
    facts.write(out / "word_facts.csv");

    // Brackets with the Bernoulli(0, 1/2, 1/2) witness for t < 0.
    const auto grid = cfg.t_grid.values();
    CsvTable br({"t", "n", "p_n", "lower", "upper", "witness", "log2", "log3"});
    auto chain = MarkovChainSpec::bernoulli({0.0, 0.5, 0.5});
    bool brackets_ok = true;
    for (double t : grid) {
        auto e = truncated_pressure(cfg.shift, cfg.cocycle, cfg.psi, t, cfg.n);
        double wv = std::numeric_limits<double>::quiet_NaN();
        if (t < 0) {
            WitnessOptions wo;
            wo.seed = cfg.seed;
            wv = variational_witness(cfg.shift, cfg.cocycle, cfg.psi, t, chain, wo).value;
            e = with_witness(e, wv);
            brackets_ok = brackets_ok && e.lower >= std::log(2.0) - 1e-9 && e.upper <= std::log(3.0) + 1e-9;
        }
        br.row({format_real(t), std::to_string(cfg.n), format_real(e.p_n), format_real(e.lower), format_real(e.upper),
                format_real(wv), format_real(std::log(2.0)), format_real(std::log(3.0))});
    }
    br.write(out / "phase_brackets.csv");

    auto g = rpf_solve(cfg.shift, cfg.psi);
    const int M = cfg.gibbs.M > 0 ? cfg.gibbs.M : cfg.M;
    CsvTable gib(kGibbsHeader);
    std::vector<SpectralData> spectral;
    Json verdicts = Json::array();
    for (double t : cfg.gibbs.t_values) {
        auto rows = detail::gibbs_rows_for(cfg, g, t, M, cfg.gibbs.n_max, spectral);
        append_gibbs_rows(gib, t, rows);
        verdicts.push_back({{"t", format_real(t)},
                            {"below_threshold", t < threshold},
                            {"band", detail::classify_band(rows)}});
    }
    gib.write(out / "gibbs_report.csv");
    write_json(out / "spectral.json", spectral_json(spectral));

    Json summary;
    summary["lambda"] = format_real(opt.lambda);
    summary["theta"] = format_real(opt.theta);
    summary["threshold"] = format_real(threshold);
    summary["word_facts_exact"] = all_exact;
    summary["word_n_max"] = opt.word_n_max;
    summary["brackets_within_log2_log3"] = brackets_ok;
    summary["gibbs"] = verdicts;
    write_json(out / "phase_summary.json", summary);
    res.outputs = {"word_facts.csv", "phase_brackets.csv", "gibbs_report.csv", "spectral.json", "phase_summary.json"};

    std::ostringstream s;
    s << "phase-transition: lambda = " << opt.lambda << ", threshold -log(4.5)/log(lambda) = " << threshold << "\n"
      << "  word facts exact for n <= " << opt.word_n_max << ": " << (all_exact ? "yes" : "NO") << "\n"
      << "  brackets within [log 2, log 3] for t < 0: " << (brackets_ok ? "yes" : "NO") << "\n";
    for (const auto& v : verdicts) s << "  t = " << v["t"].get<std::string>() << ": " << v["band"].get<std::string>() << "\n";
    res.summary = s.str();
    return res;
}

inline RunResult run_typicality(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    auto r = certify(cfg.shift, cfg.cocycle, cfg.typicality.max_period, cfg.typicality.max_connect);
    write_json(out / "typicality.json", typicality_json(r, cfg.shift.q()));
    RunResult res;
    res.outputs = {"typicality.json"};
    std::ostringstream s;
    s << "typicality: " << (r.certified ? "certified" : "inconclusive");
    if (r.certificate)
        s << " with p = " << format_word(r.certificate->p, cfg.shift.q())
          << ", z = " << format_word(r.certificate->z, cfg.shift.q())
          << ", independence sv = " << r.certificate->min_independence_sv;
    s << "\n  " << r.reason << "\n";
    res.summary = s.str();
    return res;
}

inline RunResult run_ldp(const ExperimentConfig& cfg, LdpMode mode, double epsilon, const std::filesystem::path& out) {
    if (!(epsilon > 0)) throw Error(ErrorKind::Validation, "field 'epsilon': must be positive");
    auto g = rpf_solve(cfg.shift, cfg.psi);
    LdpOptions opt;
    opt.mode = mode;
    opt.xi_window = cfg.ldp.xi_window;
    opt.seed = cfg.seed;
    auto tab = ldp_tail_rates(cfg.shift, cfg.cocycle, g, epsilon, cfg.ldp.n_min, cfg.ldp.n_max, opt);
    ldp_table_csv(tab).write(out / "ldp_rates.csv");
    Json summary;
    summary["mode"] = to_string(tab.mode);
    summary["epsilon"] = format_real(tab.epsilon);
    summary["lambda1"] = format_real(tab.lambda1);
    summary["lambda2"] = format_real(tab.lambda2);
    summary["rate_fit"] = format_real(tab.rate_fit);
    summary["negative"] = tab.negative;
    summary["zero_mass_flagged"] = tab.empty_flagged;
    summary["xi_err_bound"] = format_real(tab.xi_err_bound);
    summary["xi_degenerate_mass"] = format_real(tab.xi_degenerate_mass);
    write_json(out / "ldp_summary.json", summary);
    RunResult res;
    res.outputs = {"ldp_rates.csv", "ldp_summary.json"};
    std::ostringstream s;
    s << "ldp: mode " << to_string(mode) << ", epsilon " << epsilon << ", fitted rate " << tab.rate_fit
      << (tab.empty_flagged ? " (some n had zero deviation mass)" : "") << "\n";
    res.summary = s.str();
    return res;
}

inline RunResult run_gibbs_check(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    detail::require_planar(cfg, "gibbs-check");
    auto g = rpf_solve(cfg.shift, cfg.psi);
    const int M = cfg.gibbs.M > 0 ? cfg.gibbs.M : cfg.M;
    CsvTable gib(kGibbsHeader);
    std::vector<SpectralData> spectral;
    std::ostringstream s;
    s << "gibbs-check: M = " << M << ", n <= " << cfg.gibbs.n_max << "\n";
    for (double t : cfg.gibbs.t_values) {
        auto rows = detail::gibbs_rows_for(cfg, g, t, M, cfg.gibbs.n_max, spectral);
        append_gibbs_rows(gib, t, rows);
        s << "  t = " << t << ": " << detail::classify_band(rows) << ", last band growth " << rows.back().band_growth
          << "\n";
    }
    gib.write(out / "gibbs_report.csv");
    write_json(out / "spectral.json", spectral_json(spectral));
    RunResult res;
    res.outputs = {"gibbs_report.csv", "spectral.json"};
    res.summary = s.str();
    return res;
}

inline RunResult run_lyapunov(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    auto g = rpf_solve(cfg.shift, cfg.psi);
    auto exact = lyapunov_exact(cfg.cocycle, gibbs_markov_measure(g, cfg.lyapunov.exact_depth));
    auto mc = lyapunov_mc(cfg.cocycle, MarkovChainSpec::gibbs(g), cfg.lyapunov.length, cfg.lyapunov.reps, cfg.seed);
    auto entry = [](const LyapunovReport& r, const char* method) {
        Json j;
        j["method"] = method;
        j["n"] = r.n;
        j["lambda1"] = format_real(r.lambda1);
        j["lambda2"] = format_real(r.lambda2);
        j["stderr1"] = format_real(r.stderr1);
        j["stderr2"] = format_real(r.stderr2);
        j["reps"] = r.reps;
        return j;
    };
    Json j = Json::array({entry(exact, "exact-cylinder"), entry(mc, "monte-carlo")});
    write_json(out / "lyapunov.json", j);
    RunResult res;
    res.outputs = {"lyapunov.json"};
    std::ostringstream s;
    s << "lyapunov: exact (n = " << exact.n << ") lambda1 = " << exact.lambda1 << "; monte carlo (n = " << mc.n
      << ", " << mc.reps << " reps) lambda1 = " << mc.lambda1 << " +- " << mc.stderr1 << "\n";
    res.summary = s.str();
    return res;
}

} // namespace thermo
