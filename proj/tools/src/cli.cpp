#include "epiwave/io/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "epiwave/error.hpp"
#include "epiwave/io/config.hpp"
#include "epiwave/io/csv.hpp"
#include "epiwave/io/oracles.hpp"
#include "epiwave/parabolic_model.hpp"
#include "epiwave/relaxed_model.hpp"
#include "epiwave/study.hpp"

namespace epiwave::io {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config;
    std::optional<double> tau;
    std::optional<std::string> out;
    std::vector<double> taus;
    std::optional<double> q1;
    std::optional<double> q2;
};

RunConfig load(const Options& o) {
    RunConfig cfg = load_config(o.config);
    if (o.tau) {
        if (!(*o.tau >= 0.0)) throw Error(ErrorCode::ConfigError, "--tau must be nonnegative");
        cfg.solver.tau = *o.tau;
    }
    if (o.out) cfg.output.directory = *o.out;
    if (!o.taus.empty()) {
        for (double t : o.taus)
            if (!(t > 0.0)) throw Error(ErrorCode::ConfigError, "--taus entries must be positive");
        cfg.study.taus = o.taus;
    }
    if (o.q1) cfg.study.q1 = *o.q1;
    if (o.q2) cfg.study.q2 = *o.q2;
    return cfg;
}

bool wants(const RunConfig& cfg, const char* format) {
    for (const auto& f : cfg.output.formats)
        if (f == format) return true;
    return false;
}

Run svir_baseline(const RunConfig& cfg, const Mesh& m) {
    return run_parabolic(baseline_spec(to_svir(cfg), m), to_solver(cfg), m);
}

Run svir_relaxed(const RunConfig& cfg, const Run* baseline, const Mesh& m) {
    const ModelSpec spec = compatibility_setup(to_svir(cfg), cfg.study.q1, cfg.study.q2, baseline,
                                               to_sweep_options(cfg), m);
    return run_relaxed(spec, to_solver(cfg), m);
}

bool svir_needs_baseline(const RunConfig& cfg) {
    return cfg.study.q1 != 1.0 || (cfg.study.q2 != 1.0 && cfg.study.use_baseline_g1);
}

Run single_run(const RunConfig& cfg, const Mesh& m) {
    const double tau = cfg.solver.tau;
    if (cfg.model.kind == ModelKind::Scalar) {
        const ModelSpec spec = scalar_spec(cfg, m);
        return tau > 0.0 ? run_relaxed(spec, to_solver(cfg), m) : run_parabolic(spec, to_solver(cfg), m);
    }
    if (tau == 0.0) return svir_baseline(cfg, m);
    if (svir_needs_baseline(cfg)) {
        const Run base = svir_baseline(cfg, m);
        return svir_relaxed(cfg, &base, m);
    }
    return svir_relaxed(cfg, nullptr, m);
}

void report_picard(const Run& run, std::ostream& out) {
    std::size_t worst = 0, accelerated = 0;
    for (const auto& p : run.picard) {
        worst = std::max(worst, p.sweeps);
        if (p.accelerated) ++accelerated;
    }
    out << "picard: max sweeps " << worst << ", accelerated steps " << accelerated << ", unconverged steps "
        << run.unconverged_steps() << "\n";
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load(o);
    const Mesh m = to_mesh(cfg);
    const Run run = single_run(cfg, m);
    SliceOptions so;
    so.front_compartment = cfg.model.kind == ModelKind::Svir ? std::size_t{kI} : std::size_t{0};
    so.front_threshold = cfg.study.threshold;
    write_slices(run, m, cfg.output.directory, so);
    out << "tau " << format_double(run.tau) << ", " << run.slices.size() << " slices written to "
        << cfg.output.directory << "\n";
    report_picard(run, out);
    if (run.unconverged_steps() > 0) err << "warning: some time steps did not reach picard_tol\n";
    return 0;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& /*err*/) {
    const RunConfig cfg = load(o);
    if (cfg.model.kind != ModelKind::Svir) throw Error(ErrorCode::ConfigError, "sweep requires model.kind: svir");
    if (cfg.study.taus.empty()) throw Error(ErrorCode::ConfigError, "study.taus is empty");
    const Mesh m = to_mesh(cfg);
    const SweepResult res = run_sweep(to_svir(cfg), cfg.study.taus, to_sweep_options(cfg), to_solver(cfg), m);
    write_sweep(res, cfg.output.directory, wants(cfg, "gnuplot"));
    out << "tau,sup_diff,energy_diff,asymptotic\n";
    for (std::size_t q = 0; q < res.taus.size(); ++q)
        out << format_double(res.taus[q]) << "," << format_double(res.sup_diffs[q]) << ","
            << format_double(res.energy_diffs[q]) << "," << (res.asymptotic[q] ? 1 : 0) << "\n";
    out << "window floor " << format_double(res.floor) << "\n";
    if (res.sup_fit) {
        out << "fitted_rate " << format_double(res.sup_fit->rate) << " (sup norm, " << res.sup_fit->points
            << " points)\n";
    } else {
        out << "fitted_rate none (fewer than 3 points above the window floor)\n";
    }
    if (res.energy_fit) out << "energy_rate " << format_double(res.energy_fit->rate) << "\n";
    return 0;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& /*err*/) {
    const RunConfig cfg = load(o);
    const Mesh m = to_mesh(cfg);
    Run baseline, relaxed;
    if (cfg.model.kind == ModelKind::Scalar) {
        RunConfig zero = cfg;
        zero.solver.tau = 0.0;
        baseline = run_parabolic(scalar_spec(zero, m), to_solver(cfg), m);
        relaxed = run_relaxed(scalar_spec(cfg, m), to_solver(cfg), m);
    } else {
        baseline = svir_baseline(cfg, m);
        relaxed = svir_relaxed(cfg, &baseline, m);
    }
    const NormReport r = diff_norms(relaxed.slices, baseline.slices, m);
    const double tau = cfg.solver.tau;
    std::string csv = "tau,l2_H,h1_V,sup_t_V,sup_t_H_slope,sup_abs,energy\n";
    csv += format_double(tau) + "," + format_double(r.l2_H) + "," + format_double(r.h1_V) + "," +
           format_double(r.sup_t_V) + "," + format_double(r.sup_t_H_slope) + "," + format_double(r.sup_abs) + "," +
           format_double(r.energy(tau)) + "\n";
    std::error_code ec;
    fs::create_directories(cfg.output.directory, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create '" + cfg.output.directory + "': " + ec.message());
    write_text(fs::path(cfg.output.directory) / "compare.csv", csv);
    out << csv;
    return 0;
}

int cmd_validate(std::ostream& out) {
    bool all = true;
    for (const auto& r : run_oracle_suite()) {
        char line[160];
        std::snprintf(line, sizeof line, "%s %s: %.4g %s %.4g\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured,
                      r.at_least ? ">=" : "<", r.limit);
        out << line;
        all = all && r.pass;
    }
    return all ? 0 : 1;
}

void add_common(CLI::App* sub, Options& o, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "YAML run configuration");
    if (config_required) c->required();
    sub->add_option("--tau", o.tau, "relaxation time, overrides solver.tau");
    sub->add_option("--out", o.out, "output directory, overrides output.directory");
    sub->add_option("--taus", o.taus, "comma-separated tau list, overrides study.taus")->delimiter(',');
    sub->add_option("--q1", o.q1, "zeroth-order compatibility weight");
    sub->add_option("--q2", o.q2, "first-order compatibility weight");
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Age-structured reaction-diffusion solver with relaxed diffusion", "epiwave"};
    app.require_subcommand(1);
    Options o;
    auto* run = app.add_subcommand("run", "one solve; writes slice CSVs");
    auto* sweep = app.add_subcommand("sweep", "tau sweep against the unrelaxed baseline");
    auto* compare = app.add_subcommand("compare", "relaxed vs unrelaxed difference norms");
    auto* validate = app.add_subcommand("validate", "built-in oracle suite");
    add_common(run, o, true);
    add_common(sweep, o, true);
    add_common(compare, o, true);
    add_common(validate, o, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "epiwave: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (*run) return cmd_run(o, out, err);
        if (*sweep) return cmd_sweep(o, out, err);
        if (*compare) return cmd_compare(o, out, err);
        return cmd_validate(out);
    } catch (const Error& e) {
        err << "epiwave: " << e.what() << "\n";
        return e.code() == ErrorCode::ConfigError ? 2 : 1;
    } catch (const std::exception& e) {
        err << "epiwave: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace epiwave::io
