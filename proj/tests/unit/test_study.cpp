#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "epiwave/error.hpp"
#include "epiwave/parabolic_model.hpp"
#include "epiwave/relaxed_model.hpp"
#include "epiwave/study.hpp"

using namespace epiwave;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no throw";
    return ErrorCode::IoError;
}

Mesh small_mesh() { return build_mesh(0.5, 1.0, 20, 21); }

}  // namespace

TEST(FitRate, RecoversPowerLaw) {
    const std::vector<double> taus = {1e-4, 1e-3, 1e-2, 1e-1};
    std::vector<double> diffs;
    for (double t : taus) diffs.push_back(3.0 * std::pow(t, 1.3));
    const RateFit f = fit_rate(taus, diffs, {true, true, true, true});
    EXPECT_NEAR(f.rate, 1.3, 1e-12);
    EXPECT_NEAR(f.intercept, std::log10(3.0), 1e-12);
    EXPECT_EQ(f.points, 4u);
    EXPECT_NEAR(f.residual, 0.0, 1e-12);
}

TEST(FitRate, MaskedPointsIgnored) {
    const std::vector<double> taus = {1e-5, 1e-4, 1e-3, 1e-2};
    const std::vector<double> diffs = {1.0, 1e-4, 1e-3, 1e-2};
    const RateFit f = fit_rate(taus, diffs, {false, true, true, true});
    EXPECT_NEAR(f.rate, 1.0, 1e-12);
    EXPECT_EQ(f.points, 3u);
}

TEST(FitRate, Underdetermined) {
    EXPECT_EQ(code_of([] { fit_rate({1e-3, 1e-2, 1e-1}, {1e-3, 1e-2, 1e-1}, {true, false, true}); }),
              ErrorCode::FitUnderdetermined);
    // Comparing a run against itself leaves no positive difference to fit.
    EXPECT_EQ(code_of([] { fit_rate({1e-3, 1e-2, 1e-1}, {0.0, 0.0, 0.0}, {true, true, true}); }),
              ErrorCode::FitUnderdetermined);
    EXPECT_EQ(code_of([] { fit_rate({1e-2, 1e-2, 1e-2}, {1.0, 2.0, 3.0}, {true, true, true}); }),
              ErrorCode::FitUnderdetermined);
    EXPECT_EQ(code_of([] { fit_rate({1e-2, 1e-1}, {1.0, 2.0, 3.0}, {true, true, true}); }), ErrorCode::LengthMismatch);
}

TEST(FrontTracker, ZeroRunHasNoFront) {
    const Mesh m = small_mesh();
    SvirParams p = SvirParams::reference(1.0);
    p.I0 = 0.0;
    const epiwave::Run run = run_parabolic(baseline_spec(p, m), SolverConfig{}, m);
    EXPECT_TRUE(front_tracker(run, 1e-8, m).empty());
    EXPECT_EQ(initial_front_scale(run, m), 0.0);
    EXPECT_EQ(code_of([&] { front_tracker(run, 0.0, m); }), ErrorCode::InvalidParam);
    EXPECT_EQ(code_of([&] { front_tracker(run, 1.0, m, 7); }), ErrorCode::OutOfRange);
}

TEST(FrontTracker, BaselineFrontMovesLeft) {
    const Mesh m = small_mesh();
    const epiwave::Run run = run_parabolic(baseline_spec(SvirParams::reference(1.0), m), SolverConfig{}, m);
    const double scale = initial_front_scale(run, m);
    EXPECT_NEAR(scale, 10.0 / m.dx, 1e-9);
    const FrontTrajectory front = front_tracker(run, 1e-6 * scale, m);
    ASSERT_EQ(front.size(), run.slices.size());
    EXPECT_DOUBLE_EQ(front.front().second, m.x(m.nx - 2));
    for (std::size_t s = 1; s < front.size(); ++s) {
        EXPECT_GT(front[s].first, front[s - 1].first);
        EXPECT_LE(front[s].second, front[s - 1].second);
    }
    EXPECT_LT(front.back().second, front.front().second);
}

TEST(Compatibility, FullWeightsNeedNoBaseline) {
    const Mesh m = small_mesh();
    const ModelSpec spec = compatibility_setup(SvirParams::reference(1.0), 1.0, 1.0, nullptr, SweepOptions{}, m);
    EXPECT_TRUE(spec.births.g0.empty());
    EXPECT_TRUE(spec.births.g1.empty());
    EXPECT_EQ(spec.births.beta0, spec.births.beta1);
}

TEST(Compatibility, ZeroWeightReplaysBaselineBirths) {
    const Mesh m = small_mesh();
    const SvirParams p = SvirParams::reference(1.0);
    const epiwave::Run base = run_parabolic(baseline_spec(p, m), SolverConfig{}, m);
    const ModelSpec spec = compatibility_setup(p, 0.0, 0.0, &base, SweepOptions{}, m);
    EXPECT_TRUE(spec.births.beta0.is_zero());
    ASSERT_EQ(spec.births.g0.size(), m.time_nodes());
    for (std::size_t k = 0; k < m.time_nodes(); ++k) {
        EXPECT_EQ(spec.births.g0[k], base.birth_values[k]);
        EXPECT_EQ(spec.births.g1[k], base.birth_slopes[k]);
    }
    SweepOptions no_g1;
    no_g1.use_baseline_g1 = false;
    EXPECT_TRUE(compatibility_setup(p, 0.0, 0.0, &base, no_g1, m).births.g1.empty());
}

TEST(Compatibility, SlopeLaws) {
    const Mesh m = small_mesh();
    const SvirParams p = SvirParams::reference(1.0);
    SweepOptions opts;
    opts.slope_law = BirthSlopeLaw::Compatible;
    opts.initial_slope = InitialSlope::Compatible;
    const ModelSpec spec = compatibility_setup(p, 1.0, 1.0, nullptr, opts, m);
    const ModelSpec base = baseline_spec(p, m);
    EXPECT_EQ(spec.births.beta1, base.births.beta1);
    EXPECT_EQ(spec.births.betaL, base.births.betaL);
    EXPECT_FALSE(spec.births.betaL.is_zero());
    EXPECT_EQ(spec.y1, derived_initial_slope(spec, m));
}

TEST(Compatibility, MissingBaseline) {
    const Mesh m = small_mesh();
    const SvirParams p = SvirParams::reference(1.0);
    EXPECT_EQ(code_of([&] { compatibility_setup(p, 0.5, 1.0, nullptr, SweepOptions{}, m); }),
              ErrorCode::MissingBaseline);
    EXPECT_EQ(code_of([&] { compatibility_setup(p, 1.0, 0.5, nullptr, SweepOptions{}, m); }),
              ErrorCode::MissingBaseline);
    SweepOptions no_g1;
    no_g1.use_baseline_g1 = false;
    EXPECT_NO_THROW(compatibility_setup(p, 1.0, 0.5, nullptr, no_g1, m));
}

TEST(Sweep, DeterministicAcrossThreadCounts) {
    const Mesh m = small_mesh();
    const SvirParams p = SvirParams::reference(1.0);
    const std::vector<double> taus = {1e-3, 3e-3, 1e-2};
    SweepOptions one, four;
    one.threads = 1;
    four.threads = 4;
    const SweepResult a = run_sweep(p, taus, one, SolverConfig{}, m);
    const SweepResult b = run_sweep(p, taus, four, SolverConfig{}, m);
    EXPECT_EQ(a.sup_diffs, b.sup_diffs);
    EXPECT_EQ(a.energy_diffs, b.energy_diffs);
    EXPECT_EQ(a.front_positions, b.front_positions);
    EXPECT_EQ(a.floor, b.floor);
}

TEST(Sweep, FirstOrderInTau) {
    const Mesh m = small_mesh();
    const SweepResult res = tau_sweep(SvirParams::reference(1.0), {1e-4, 3e-4, 1e-3, 3e-3}, SweepOptions{},
                                      SolverConfig{}, m);
    ASSERT_TRUE(res.sup_fit.has_value());
    EXPECT_NEAR(res.sup_fit->rate, 1.0, 0.2);
    for (std::size_t q = 1; q < res.taus.size(); ++q) EXPECT_GT(res.sup_diffs[q], res.sup_diffs[q - 1]);
    EXPECT_LT(res.max_contraction, 1.0);
    EXPECT_GT(res.floor, 0.0);
}

TEST(Sweep, RejectsNonpositiveTau) {
    const Mesh m = small_mesh();
    EXPECT_EQ(code_of([&] { run_sweep(SvirParams::reference(1.0), {1e-3, 0.0}, {}, {}, m); }),
              ErrorCode::InvalidParam);
}

TEST(GridFloor, SmallAndPositive) {
    const Mesh m = build_mesh(0.5, 1.0, 10, 11);
    const double g = grid_floor(SvirParams::reference(1.0), SolverConfig{}, m);
    EXPECT_GT(g, 0.0);
    EXPECT_TRUE(std::isfinite(g));
}

TEST(WorkerCount, ExplicitRequestWins) {
    EXPECT_EQ(worker_count(3), 3u);
    EXPECT_GE(worker_count(0), 1u);
}
