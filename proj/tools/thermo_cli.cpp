// SPDX-License-Identifier: Apache-2.0
// thermo: experiment driver. Machine-readable files go to --out; summaries go
// to stderr. Exit codes: 0 ok, 2 validation, 3 non-convergence, 1 other.

#include "thermo/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int exit_code(thermo::ErrorKind k) {
    switch (k) {
    case thermo::ErrorKind::Validation: return 2;
    case thermo::ErrorKind::NoConvergence: return 3;
    default: return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    using namespace thermo;
    CLI::App app{"Thermodynamic formalism experiments for one-step matrix cocycles over subshifts of finite type"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::size_t threads = 0;
    std::optional<std::uint64_t> seed;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (default: output_dir from the config)");
        sub->add_option("--threads", threads, "worker threads (0 = hardware)");
        sub->add_option("--seed", seed, "overrides the config seed");
    };

    auto* scan = app.add_subcommand("pressure-scan", "truncated pressure, brackets and log rho_t over the t grid");
    add_common(scan);

    PhaseOptions phase;
    auto* pt = app.add_subcommand("phase-transition", "elliptic-with-swap example: word facts, brackets, Gibbs ratios");
    add_common(pt);
    pt->add_option("--lambda", phase.lambda, "hyperbolic strength, > 1")->capture_default_str();
    pt->add_option("--theta", phase.theta, "rotation in turns (irrational proxy)")->capture_default_str();

    auto* typ = app.add_subcommand("typicality", "search for a 1-typicality certificate");
    add_common(typ);

    std::string mode_name;
    std::optional<double> epsilon;
    auto* ldp = app.add_subcommand("ldp", "exact deviation masses and fitted rate");
    add_common(ldp);
    ldp->add_option("--mode", mode_name, "norm | vector-norm | gap | xi-star-norm (default from config)");
    ldp->add_option("--epsilon", epsilon, "deviation size (default from config)");

    auto* gib = app.add_subcommand("gibbs-check", "Gibbs ratio report at the configured t values");
    add_common(gib);

    auto* lyap = app.add_subcommand("lyapunov", "Lyapunov exponents of the Gibbs measure");
    add_common(lyap);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        set_threads(unsigned(threads));
        ExperimentConfig cfg = load_config(config_path);
        RunInfo run;
        run.config_path = config_path;
        if (seed) {
            cfg.seed = *seed;
            run.overrides["seed"] = std::to_string(*seed);
        }
        run.seed = cfg.seed;
        run.threads = thread_count();
        std::filesystem::path out = out_dir.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out_dir);
        std::filesystem::create_directories(out);

        RunResult res;
        if (scan->parsed()) {
            run.subcommand = "pressure-scan";
            res = run_pressure_scan(cfg, out);
        } else if (pt->parsed()) {
            run.subcommand = "phase-transition";
            run.overrides["lambda"] = format_real(phase.lambda);
            run.overrides["theta"] = format_real(phase.theta);
            res = run_phase_transition(cfg, phase, out);
        } else if (typ->parsed()) {
            run.subcommand = "typicality";
            res = run_typicality(cfg, out);
        } else if (ldp->parsed()) {
            run.subcommand = "ldp";
            LdpMode mode = cfg.ldp.mode;
            if (!mode_name.empty()) {
                try {
                    mode = parse_ldp_mode(mode_name);
                } catch (const Error&) {
                    throw Error(ErrorKind::Validation, "field 'mode': unknown ldp mode '" + mode_name + "'");
                }
            }
            double eps = epsilon.value_or(cfg.ldp.epsilon);
            run.overrides["mode"] = to_string(mode);
            run.overrides["epsilon"] = format_real(eps);
            res = run_ldp(cfg, mode, eps, out);
        } else if (gib->parsed()) {
            run.subcommand = "gibbs-check";
            res = run_gibbs_check(cfg, out);
        } else if (lyap->parsed()) {
            run.subcommand = "lyapunov";
            res = run_lyapunov(cfg, out);
        }
        run.outputs = res.outputs;
        write_json(out / "manifest.json", manifest_json(cfg, run));
        std::cerr << res.summary;
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
