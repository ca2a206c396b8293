// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "epiwave/io/config.hpp"
#include "epiwave/io/oracles.hpp"
#include "epiwave/parabolic_model.hpp"
#include "epiwave/relaxed_model.hpp"
#include "epiwave/study.hpp"
#include "oracles.hpp"

using namespace epiwave;

namespace {

constexpr double kPi = std::numbers::pi;

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail, double seconds) {
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", pass ? "PASS" : "FAIL", id, title, detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

class Clock {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

const std::vector<double> kTaus = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2};

Mesh desk(double t_max = 1.0) { return build_mesh(t_max, 1.0, 20, 21); }

// Sup over ages a >= t and x of |y - q cos(pi x)| / |q| on the final slice.
double mode_error(const epiwave::Run& run, const Mesh& m, double q) {
    const StateField& y = run.final_slice();
    double err = 0.0;
    for (std::size_t j = run.time_index.back(); j < y.ages(); ++j)
        for (std::size_t i = 0; i < m.nx; ++i) err = std::max(err, std::abs(y.value(0, j, i) - q * std::cos(kPi * m.x(i))));
    return err / std::abs(q);
}

double renewal_error(std::size_t na, double reference) {
    const Mesh m = build_mesh(1.0, 1.0, na, 3);
    const epiwave::Run run = run_parabolic(io::renewal_spec(2.0, 1.0, m), SolverConfig{}, m);
    double total = 0.0;
    for (std::size_t k = 0; k < run.birth_values.size(); ++k)
        total += (k == 0 || k + 1 == run.birth_values.size() ? 0.5 : 1.0) * run.birth_values[k](0, 0);
    return std::abs(total * m.dt - reference) / reference;
}

// Largest relative violation of Lambda(s u + t v) = s Lambda(u) + t Lambda(v).
double bilinearity_defect(const Mesh& m) {
    const ModelSpec spec = build_svir(SvirParams::reference(1.0), m);
    std::mt19937 rng(17);
    const StateField u = oracle::random_field(4, m, rng), v = oracle::random_field(4, m, rng);
    StateField c = u;
    for (std::size_t q = 0; q < c.size(); ++q) c.values()[q] = 2.0 * u.values()[q] - 0.5 * v.values()[q];
    const LambdaField lu = lambda_op(spec.kernels, u, m), lv = lambda_op(spec.kernels, v, m),
                      lc = lambda_op(spec.kernels, c, m);
    double worst = 0.0, scale = 0.0;
    for (std::size_t h = 0; h < 4; ++h)
        for (std::size_t k = 0; k < 4; ++k)
            for (std::size_t j = 0; j < m.age_nodes(); ++j)
                for (std::size_t i = 0; i < m.nx; ++i) {
                    const double want = 2.0 * lu.entry(h, k, j, i) - 0.5 * lv.entry(h, k, j, i);
                    worst = std::max(worst, std::abs(lc.entry(h, k, j, i) - want));
                    scale = std::max(scale, std::abs(want));
                }
    return scale > 0.0 ? worst / scale : worst;
}

// |<Lap u, v> - <u, Lap v>| and the largest <Lap u, u> under trapezoid weights.
std::pair<double, double> summation_by_parts(const Mesh& m) {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const auto w = oracle::trapezoid(m.nx - 1, m.dx);
    double asym = 0.0, energy = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> u(m.nx), v(m.nx), lu(m.nx), lv(m.nx);
        for (auto& x : u) x = d(rng);
        for (auto& x : v) x = d(rng);
        laplacian_neumann_line(u, m.dx, lu);
        laplacian_neumann_line(v, m.dx, lv);
        double a = 0.0, b = 0.0, e = 0.0;
        for (std::size_t i = 0; i < m.nx; ++i) {
            a += w[i] * lu[i] * v[i];
            b += w[i] * u[i] * lv[i];
            e += w[i] * lu[i] * u[i];
        }
        asym = std::max(asym, std::abs(a - b) / std::max(1.0, std::abs(a)));
        energy = std::max(energy, e);
    }
    return {asym, energy};
}

bool partition_holds(const Mesh& m) {
    std::set<GridCell> seen;
    std::size_t count = 0;
    for (long t0 = -static_cast<long>(m.na); t0 <= static_cast<long>(m.nt); ++t0)
        for (const GridCell& c : characteristic_cells(m, CharacteristicId{t0})) {
            if (characteristic_through(c.first, c.second).t0_index != t0) return false;
            seen.insert(c);
            ++count;
        }
    return count == seen.size() && count == m.time_nodes() * m.age_nodes();
}

}  // namespace

int main() {
    Clock clock;
    const SvirParams svir = SvirParams::reference(1.0);
    const SolverConfig cfg;

    // 1. Convergence rate on the desk mesh, beta1 = beta0 = beta, y1 = 0.
    const Mesh m1 = desk();
    const SweepResult s1 = run_sweep(svir, kTaus, SweepOptions{}, cfg, m1);
    {
        const double rate = s1.fitted_rate;
        const bool pass = s1.sup_fit && rate >= 0.8 && rate <= 1.2;
        report(1, "tau convergence rate", pass,
               fmt("sup-norm rate %.3f over %zu points, need [0.8, 1.2]", rate, s1.sup_fit ? s1.sup_fit->points : 0),
               clock.lap());
    }

    // 2. Energy-norm rate with mismatched first-order data against the compatible setup.
    {
        const Mesh m = desk();
        SweepOptions mismatched;
        mismatched.q2 = 0.0;
        mismatched.use_baseline_g1 = false;
        mismatched.slope_law = BirthSlopeLaw::Compatible;
        mismatched.initial_slope = InitialSlope::Zero;
        SweepOptions compatible;
        compatible.slope_law = BirthSlopeLaw::Compatible;
        compatible.initial_slope = InitialSlope::Compatible;
        const SweepResult a = run_sweep(svir, kTaus, mismatched, cfg, m);
        const SweepResult b = run_sweep(svir, kTaus, compatible, cfg, m);
        const bool fitted = a.energy_fit && b.energy_fit;
        const double ra = fitted ? a.energy_fit->rate : std::nan("");
        const double rb = fitted ? b.energy_fit->rate : std::nan("");
        const bool pass = fitted && ra >= 0.4 && rb - ra >= 0.2;
        report(2, "compatibility ordering", pass,
               fmt("energy rate mismatched %.3f (need >= 0.4), compatible %.3f, gap %.3f (need >= 0.2)", ra, rb,
                   rb - ra),
               clock.lap());
    }

    // 3. tau -> 0 consistency against the na = 20 / na = 40 discretization floor.
    {
        const Mesh m = desk();
        const double floor = grid_floor(svir, cfg, m);
        ModelSpec spec = compatibility_setup(svir, 1.0, 1.0, nullptr, SweepOptions{}, m);
        spec.tau = 1e-8;
        const epiwave::Run relaxed = run_relaxed(spec, cfg, m);
        const epiwave::Run base = run_parabolic(baseline_spec(svir, m), cfg, m);
        const double diff = diff_norms(relaxed.slices, base.slices, m).sup_abs;
        report(3, "tau -> 0 consistency", diff <= 10.0 * floor,
               fmt("sup |y(1e-8) - y(0)| = %.3e, floor %.3e, need <= 10x floor", diff, floor), clock.lap());
    }

    // 4. Finite propagation speed: I at x = 0 for tau = 100 over T = 5.
    {
        const Mesh m = desk(5.0);
        const epiwave::Run base = run_parabolic(baseline_spec(svir, m), cfg, m);
        ModelSpec spec = compatibility_setup(svir, 1.0, 1.0, nullptr, SweepOptions{}, m);
        spec.tau = 100.0;
        const epiwave::Run slow = run_relaxed(spec, cfg, m);
        const double threshold = 1e-6 * initial_front_scale(base, m);
        double peak = 0.0;
        std::size_t first = 0;
        for (std::size_t k = 0; k < slow.x0_totals.size(); ++k) {
            const double v = slow.x0_totals[k][kI];
            if (v > peak) peak = v;
            if (first == 0 && v > threshold) first = k;
        }
        const bool flat = peak <= threshold;
        const bool parabolic_reaches = base.x0_totals[base.time_index[1]][kI] > threshold;
        std::string detail = fmt("tau=100 peak I(x=0) %.3e vs threshold %.3e", peak, threshold);
        if (!flat) detail += fmt(" (first exceeded at t=%.2f)", m.time(first));
        detail += fmt("; tau=0 %s threshold at first stored step; tau=100 unconverged steps %zu",
                      parabolic_reaches ? "exceeds" : "does not exceed", slow.unconverged_steps());
        report(4, "finite propagation speed", flat && parabolic_reaches, detail, clock.lap());
    }

    // 5. Heat eigenmode.
    const double sigma = 0.1, lambda = sigma * kPi * kPi, t5 = 0.5;
    {
        auto err = [&](std::size_t na, std::size_t nx) {
            const Mesh m = build_mesh(t5, 1.0, na, nx);
            return mode_error(run_parabolic(io::eigenmode_spec(sigma, 0.0, m), cfg, m), m, std::exp(-lambda * t5));
        };
        const double coarse = err(40, 41), fine = err(80, 81);
        report(5, "heat eigenmode", coarse < 0.05 && coarse / fine >= 1.8,
               fmt("relative error %.4f (need < 0.05), refinement ratio %.3f (need >= 1.8)", coarse, coarse / fine),
               clock.lap());
    }

    // 6. Telegrapher eigenmode against RK4.
    {
        const double tau = 0.1;
        const Mesh m = build_mesh(t5, 1.0, 40, 41);
        const double q = oracle::rk4_mode(tau, lambda, 1.0, 0.0, t5, 100000);
        const double e = mode_error(run_relaxed(io::eigenmode_spec(sigma, tau, m), cfg, m), m, q);
        report(6, "telegrapher eigenmode", e < 0.05, fmt("relative error %.4f vs RK4 (need < 0.05)", e), clock.lap());
    }

    // 7. Renewal total births against the brute-force Volterra solution.
    {
        const double reference = oracle::renewal_total_births(2.0, 1.0, 1.0, 1.0, 1e-4);
        const double coarse = renewal_error(20, reference), fine = renewal_error(40, reference);
        report(7, "renewal oracle", coarse / fine >= 1.8,
               fmt("relative error %.4f -> %.4f under da halving, ratio %.3f (need >= 1.8)", coarse, fine,
                   coarse / fine),
               clock.lap());
    }

    // 8. Invariant suites.
    {
        std::vector<std::string> broken;
        const Mesh m = build_mesh(1.0, 1.0, 8, 11);
        const double bil = bilinearity_defect(m);
        if (bil > 1e-12) broken.push_back(fmt("bilinearity %.2e", bil));
        const auto [asym, energy] = summation_by_parts(m);
        if (asym > 1e-12 || energy > 1e-12) broken.push_back(fmt("summation by parts %.2e / %.2e", asym, energy));
        if (!partition_holds(build_mesh(1.7, 0.5, 5, 3)) || !partition_holds(build_mesh(0.5, 2.0, 8, 3)))
            broken.push_back("mesh partition");
        if (!(s1.max_contraction < 1.0)) broken.push_back(fmt("Picard contraction %.3f", s1.max_contraction));
        io::RunConfig rc = io::load_config(std::string(EPIWAVE_CONFIG_DIR) + "/svir_desk.yaml");
        rc.solver.tau = 1.0 / 3.0;
        if (!(io::parse_config_string(io::serialize_config(rc)) == rc)) broken.push_back("config round trip");
        SweepOptions serial;
        serial.threads = 1;
        const SweepResult again = run_sweep(svir, kTaus, serial, cfg, m1);
        if (again.sup_diffs != s1.sup_diffs || again.energy_diffs != s1.energy_diffs) broken.push_back("determinism");
        std::string detail = fmt("bilinearity %.1e, SBP %.1e, partition, contraction %.3f, round trip, determinism",
                                 bil, asym, s1.max_contraction);
        if (!broken.empty()) {
            detail = "broken:";
            for (const auto& b : broken) detail += " " + b + ";";
        }
        report(8, "invariant suites", broken.empty(), detail, clock.lap());
    }

    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
