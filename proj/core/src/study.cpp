#include "epiwave/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <future>
#include <limits>
#include <string>
#include <thread>

#include "epiwave/birth.hpp"
#include "epiwave/error.hpp"
#include "epiwave/parabolic_model.hpp"
#include "epiwave/relaxed_model.hpp"

namespace epiwave {

std::size_t worker_count(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("EPIWAVE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

RateFit fit_rate(const std::vector<double>& taus, const std::vector<double>& diffs, const std::vector<bool>& use) {
    if (taus.size() != diffs.size() || taus.size() != use.size()) {
        throw Error(ErrorCode::LengthMismatch, "rate fit inputs differ in length");
    }
    std::vector<double> lx, ly;
    for (std::size_t q = 0; q < taus.size(); ++q)
        if (use[q] && taus[q] > 0.0 && diffs[q] > 0.0) {
            lx.push_back(std::log10(taus[q]));
            ly.push_back(std::log10(diffs[q]));
        }
    if (lx.size() < 3) {
        throw Error(ErrorCode::FitUnderdetermined,
                    "rate fit needs at least 3 asymptotic points, have " + std::to_string(lx.size()));
    }
    const double k = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t q = 0; q < lx.size(); ++q) {
        mx += lx[q];
        my += ly[q];
    }
    mx /= k;
    my /= k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t q = 0; q < lx.size(); ++q) {
        sxx += (lx[q] - mx) * (lx[q] - mx);
        sxy += (lx[q] - mx) * (ly[q] - my);
    }
    if (!(sxx > 0.0)) throw Error(ErrorCode::FitUnderdetermined, "rate fit needs distinct tau values");
    RateFit fit;
    fit.rate = sxy / sxx;
    fit.intercept = my - fit.rate * mx;
    fit.points = lx.size();
    double ss = 0.0;
    for (std::size_t q = 0; q < lx.size(); ++q) {
        const double r = ly[q] - (fit.intercept + fit.rate * lx[q]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / k);
    return fit;
}

namespace {

std::vector<double> age_integrated(const StateField& y, std::size_t compartment, const Mesh& m) {
    const auto wa = age_weights(m);
    std::vector<double> out(m.nx, 0.0);
    for (std::size_t j = 0; j < y.ages(); ++j)
        for (std::size_t i = 0; i < m.nx; ++i) out[i] += wa[j] * y.value(compartment, j, i);
    return out;
}

}  // namespace

FrontTrajectory front_tracker(const Run& run, double threshold, const Mesh& m, std::size_t compartment) {
    if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidParam, "front threshold must be positive");
    FrontTrajectory out;
    for (std::size_t s = 0; s < run.slices.size(); ++s) {
        if (compartment >= run.slices[s].n()) throw Error(ErrorCode::OutOfRange, "front compartment out of range");
        const auto p = age_integrated(run.slices[s], compartment, m);
        for (std::size_t i = 0; i < m.nx; ++i)
            if (p[i] > threshold) {
                out.emplace_back(m.time(run.time_index[s]), m.x(i));
                break;
            }
    }
    return out;
}

double initial_front_scale(const Run& run, const Mesh& m, std::size_t compartment) {
    const auto p = age_integrated(run.slices.front(), compartment, m);
    return *std::ranges::max_element(p);
}

ModelSpec baseline_spec(const SvirParams& base, const Mesh& m) {
    ModelSpec spec = build_svir(base, m);
    spec.tau = 0.0;
    const MatrixTable beta = newborn_routing(base.beta, base.routing, spec.n, m);
    spec.births = make_compatible(beta, spec.linear, 1.0, 1.0, m);
    return spec;
}

ModelSpec compatibility_setup(const SvirParams& base, double q1, double q2, const Run* baseline, const SweepOptions& opts,
                              const Mesh& m) {
    ModelSpec spec = build_svir(base, m);
    const MatrixTable beta = newborn_routing(base.beta, base.routing, spec.n, m);
    if (opts.slope_law == BirthSlopeLaw::Compatible) {
        spec.births = make_compatible(beta, spec.linear, q1, q2, m);
    } else {
        spec.births = BirthLaws::zeros(spec.n, m);
        for (std::size_t q = 0; q < beta.data().size(); ++q) spec.births.beta0.data()[q] = q1 * beta.data()[q];
        spec.births.beta1 = spec.births.beta0;
    }

    const bool need_g0 = q1 != 1.0;
    const bool need_g1 = q2 != 1.0 && opts.use_baseline_g1;
    if ((need_g0 || need_g1) && baseline == nullptr) {
        throw Error(ErrorCode::MissingBaseline, "q1 = " + std::to_string(q1) + ", q2 = " + std::to_string(q2) +
                                                    " needs the baseline's a = 0 traces");
    }
    auto scaled = [](const std::vector<Slice>& trace, double s) {
        std::vector<Slice> out = trace;
        for (auto& sl : out)
            for (double& v : sl.data()) v *= s;
        return out;
    };
    if (need_g0) {
        if (baseline->birth_values.size() != m.time_nodes()) {
            throw Error(ErrorCode::LengthMismatch, "baseline trace does not cover every time node");
        }
        spec.births.g0 = scaled(baseline->birth_values, 1.0 - q1);
    }
    if (need_g1) {
        if (baseline->birth_slopes.size() != m.time_nodes()) {
            throw Error(ErrorCode::LengthMismatch, "baseline trace does not cover every time node");
        }
        spec.births.g1 = scaled(baseline->birth_slopes, 1.0 - q2);
    }
    if (opts.initial_slope == InitialSlope::Compatible) spec.y1 = derived_initial_slope(spec, m);
    return spec;
}

namespace {

// Runs job(q) for q in [0, count) on at most `workers` threads.
template <class Job>
void parallel_for(std::size_t count, std::size_t workers, Job job) {
    workers = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(count, 1));
    if (workers == 1) {
        for (std::size_t q = 0; q < count; ++q) job(q);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> futures;
    for (std::size_t w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&] {
            for (std::size_t q = next++; q < count; q = next++) job(q);
        }));
    }
    for (auto& f : futures) f.get();
}

double sup_abs(const Run& run) {
    double s = 0.0;
    for (const auto& sl : run.slices)
        for (double v : sl.values()) s = std::max(s, std::abs(v));
    return s;
}

}  // namespace

SweepResult run_sweep(const SvirParams& base, const std::vector<double>& taus, const SweepOptions& opts,
                      const SolverConfig& cfg, const Mesh& m) {
    for (double t : taus)
        if (!(t > 0.0)) throw Error(ErrorCode::InvalidParam, "sweep taus must be positive");

    const Run baseline = run_parabolic(baseline_spec(base, m), cfg, m);

    // Window floor: how far the relaxed scheme at tau = 0 sits from the
    // baseline, bounded below by the Picard tolerance.
    ModelSpec zero = compatibility_setup(base, opts.q1, opts.q2, &baseline, opts, m);
    zero.tau = 0.0;
    const Run relaxed_zero = run_relaxed(zero, cfg, m);
    const NormReport zero_diff = diff_norms(relaxed_zero.slices, baseline.slices, m);

    SweepResult res;
    res.taus = taus;
    res.floor = std::max(zero_diff.sup_abs, cfg.picard_tol * sup_abs(baseline));
    const std::size_t count = taus.size();
    res.reports.resize(count);
    res.front_positions.resize(count);
    res.max_sweeps.resize(count);
    std::vector<double> contraction(count, 0.0);
    const double threshold = opts.front_threshold * initial_front_scale(baseline, m);

    parallel_for(count, worker_count(opts.threads), [&](std::size_t q) {
        ModelSpec spec = compatibility_setup(base, opts.q1, opts.q2, &baseline, opts, m);
        spec.tau = taus[q];
        const Run run = run_relaxed(spec, cfg, m);
        res.reports[q] = diff_norms(run.slices, baseline.slices, m);
        res.front_positions[q] = front_tracker(run, threshold, m);
        contraction[q] = run.max_contraction_ratio(2);
        std::size_t worst = 0;
        for (const auto& p : run.picard) worst = std::max(worst, p.sweeps);
        res.max_sweeps[q] = worst;
    });

    for (std::size_t q = 0; q < count; ++q) {
        res.sup_diffs.push_back(res.reports[q].sup_abs);
        res.energy_diffs.push_back(res.reports[q].energy(taus[q]));
        res.asymptotic.push_back(res.reports[q].sup_abs > 10.0 * res.floor);
        res.max_contraction = std::max(res.max_contraction, contraction[q]);
    }
    try {
        res.sup_fit = fit_rate(res.taus, res.sup_diffs, res.asymptotic);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::FitUnderdetermined) throw;
    }
    try {
        res.energy_fit = fit_rate(res.taus, res.energy_diffs, res.asymptotic);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::FitUnderdetermined) throw;
    }
    res.fitted_rate = res.sup_fit ? res.sup_fit->rate : std::numeric_limits<double>::quiet_NaN();
    return res;
}

SweepResult tau_sweep(const SvirParams& base, const std::vector<double>& taus, const SweepOptions& opts,
                      const SolverConfig& cfg, const Mesh& m) {
    SweepResult res = run_sweep(base, taus, opts, cfg, m);
    if (!res.sup_fit) res.sup_fit = fit_rate(res.taus, res.sup_diffs, res.asymptotic);
    return res;
}

double grid_floor(const SvirParams& base, const SolverConfig& cfg, const Mesh& m) {
    const Mesh fine = build_mesh(m.t_max, m.a_max, 2 * m.na, 2 * m.nx - 1);
    SolverConfig fine_cfg = cfg;
    fine_cfg.store_every = 2 * cfg.store_every;
    const Run coarse_run = run_parabolic(baseline_spec(base, m), cfg, m);
    const Run fine_run = run_parabolic(baseline_spec(base, fine), fine_cfg, fine);
    double worst = 0.0;
    for (std::size_t s = 0; s < coarse_run.slices.size(); ++s) {
        const std::size_t kf = 2 * coarse_run.time_index[s];
        const auto it = std::ranges::find(fine_run.time_index, kf);
        if (it == fine_run.time_index.end()) continue;
        const StateField& a = coarse_run.slices[s];
        const StateField& b = fine_run.slices[static_cast<std::size_t>(it - fine_run.time_index.begin())];
        for (std::size_t c = 0; c < a.n(); ++c)
            for (std::size_t j = 0; j < a.ages(); ++j)
                for (std::size_t i = 0; i < a.nx(); ++i)
                    worst = std::max(worst, std::abs(a.value(c, j, i) - b.value(c, 2 * j, 2 * i)));
    }
    return worst;
}

}  // namespace epiwave
