#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "epiwave/fields.hpp"
#include "epiwave/model.hpp"
#include "epiwave/svir.hpp"

namespace epiwave {

enum class InitialSlope {
    Zero,        // y1 = 0
    Compatible,  // y1 = sigma Lap y0 - (L + Lambda(y0)) y0
};

enum class BirthSlopeLaw {
    Compatible,      // beta1, betaL, beta_grad from the transport derivative of the zeroth-order law, scaled by q2
    MatchZeroOrder,  // beta1 = beta0, betaL = beta_grad = 0
};

struct SweepOptions {
    double q1 = 1.0;
    double q2 = 1.0;
    bool use_baseline_g1 = true;  // g1 = (1 - q2) dy(a=0) of the baseline; false drops it
    InitialSlope initial_slope = InitialSlope::Zero;
    BirthSlopeLaw slope_law = BirthSlopeLaw::MatchZeroOrder;
    double front_threshold = 1e-6;  // relative to the initial sup of age-integrated I
    std::size_t threads = 0;        // 0: EPIWAVE_THREADS or hardware concurrency
};

struct RateFit {
    double rate = 0.0;
    double intercept = 0.0;  // log10 diff at tau = 1
    std::size_t points = 0;
    double residual = 0.0;   // RMS of log10 residuals
};

using FrontTrajectory = std::vector<std::pair<double, double>>;  // (time, x)

struct SweepResult {
    std::vector<double> taus;
    std::vector<double> sup_diffs;
    std::vector<double> energy_diffs;
    std::vector<NormReport> reports;
    std::vector<bool> asymptotic;  // sup diff above the window floor
    double floor = 0.0;
    std::optional<RateFit> sup_fit;
    std::optional<RateFit> energy_fit;
    double fitted_rate = 0.0;      // sup-norm rate, NaN if no fit
    std::vector<FrontTrajectory> front_positions;
    double max_contraction = 0.0;  // worst Picard ratio after the second sweep
    std::vector<std::size_t> max_sweeps;
};

// Least-squares slope of log10(diff) against log10(tau) over the masked
// points. Throws FitUnderdetermined with fewer than three points.
RateFit fit_rate(const std::vector<double>& taus, const std::vector<double>& diffs, const std::vector<bool>& use);

// (time, smallest x with age-integrated compartment density above threshold)
// per stored slice; slices that never exceed it are skipped.
FrontTrajectory front_tracker(const Run& run, double threshold, const Mesh& m, std::size_t compartment = kI);

// Sup over x of the age-integrated compartment at t = 0.
double initial_front_scale(const Run& run, const Mesh& m, std::size_t compartment = kI);

// SVIR spec with birth laws beta0 = q1 beta and the chosen slope law, g0 and
// g1 read from the baseline's a = 0 traces. Throws MissingBaseline when a
// trace is needed and none is given.
ModelSpec compatibility_setup(const SvirParams& base, double q1, double q2, const Run* baseline, const SweepOptions& opts,
                              const Mesh& m);

// Model used for the unrelaxed baseline: births compatible at both orders.
ModelSpec baseline_spec(const SvirParams& base, const Mesh& m);

// Runs the baseline once and one relaxed run per tau. Fits are optional in
// the result.
SweepResult run_sweep(const SvirParams& base, const std::vector<double>& taus, const SweepOptions& opts,
                      const SolverConfig& cfg, const Mesh& m);

// run_sweep, then requires the sup-norm fit (FitUnderdetermined otherwise).
SweepResult tau_sweep(const SvirParams& base, const std::vector<double>& taus, const SweepOptions& opts,
                      const SolverConfig& cfg, const Mesh& m);

// Sup difference between parabolic runs on m and on the mesh with both steps
// halved, compared on the shared nodes at the shared stored times.
double grid_floor(const SvirParams& base, const SolverConfig& cfg, const Mesh& m);

// Worker count from EPIWAVE_THREADS, else hardware concurrency.
std::size_t worker_count(std::size_t requested = 0);

}  // namespace epiwave
