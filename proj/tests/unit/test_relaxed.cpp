#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "epiwave/char_solver.hpp"
#include "epiwave/error.hpp"
#include "epiwave/io/config.hpp"
#include "epiwave/io/oracles.hpp"
#include "epiwave/relaxed_model.hpp"
#include "epiwave/svir.hpp"
#include "oracles.hpp"

using namespace epiwave;

namespace {

// One compartment with age-dependent reaction, random data, no births.
ModelSpec linear_spec(const Mesh& m, double tau, std::mt19937& rng) {
    ModelSpec spec;
    spec.n = 1;
    spec.tau = tau;
    spec.linear = LinearPart::zeros(1, m);
    for (std::size_t j = 0; j < m.age_nodes(); ++j) {
        for (std::size_t i = 0; i < m.nx; ++i) {
            spec.linear.L(j, i, 0, 0) = 0.5 + m.age(j);
            spec.linear.L_a(j, i, 0, 0) = 1.0;
        }
        spec.linear.sigma_at(j, 0) = 0.2;
    }
    spec.births = BirthLaws::zeros(1, m);
    spec.y0 = oracle::random_field(1, m, rng, -1.0, 1.0, false);
    spec.y1 = oracle::random_field(1, m, rng, -1.0, 1.0, false);
    return spec;
}

// Scalar model with a self-coupling kernel.
ModelSpec coupled_spec(const Mesh& m, double tau, double kernel, double amplitude = 1.0) {
    io::RunConfig cfg;
    cfg.model.kind = io::ModelKind::Scalar;
    cfg.model.scalar.sigma = 0.1;
    cfg.model.scalar.mu = 0.3;
    cfg.model.scalar.birth_rate = 0.5;
    cfg.model.scalar.kernel = kernel;
    cfg.model.scalar.amplitude = amplitude;
    cfg.solver.tau = tau;
    return io::scalar_spec(cfg, m);
}

double energy(const StateField& y, double tau, const Mesh& m) {
    const double s = norm_H_slope(y, m), v = norm_V(y, m);
    return tau * s * s + v * v;
}

StateField difference(const StateField& a, const StateField& b) {
    StateField d = a;
    for (std::size_t q = 0; q < d.size(); ++q) {
        d.values()[q] -= b.values()[q];
        d.slopes()[q] -= b.slopes()[q];
    }
    return d;
}

}  // namespace

TEST(Relaxed, ZeroDataGivesZeroRun) {
    const Mesh m = build_mesh(0.6, 1.0, 5, 7);
    ModelSpec spec = coupled_spec(m, 0.01, 2.0, 0.0);
    const epiwave::Run run = run_relaxed(spec, SolverConfig{}, m);
    ASSERT_EQ(run.slices.size(), m.nt + 1);
    for (const auto& s : run.slices) {
        for (double v : s.values()) EXPECT_EQ(v, 0.0);
        for (double v : s.slopes()) EXPECT_EQ(v, 0.0);
    }
    EXPECT_EQ(run.unconverged_steps(), 0u);
}

TEST(Relaxed, LinearRunFollowsCharacteristics) {
    const Mesh m = build_mesh(0.5, 1.0, 10, 9);
    std::mt19937 rng(21);
    const ModelSpec spec = linear_spec(m, 0.05, rng);
    const epiwave::Run run = run_relaxed(spec, SolverConfig{}, m);
    for (const auto& p : run.picard) {
        EXPECT_EQ(p.sweeps, 1u);
        EXPECT_TRUE(p.converged);
    }
    for (std::size_t j0 : {0u, 2u, 5u}) {
        std::vector<StepContext> ctxs;
        for (std::size_t h = 0; h < m.nt; ++h) ctxs.push_back(context_at(spec.linear, j0 + h + 1, spec.tau));
        const auto traj = propagate_characteristic(spec.y0.value_slice(j0), spec.y1.value_slice(j0), {}, ctxs, m);
        for (std::size_t h = 0; h <= m.nt; ++h) {
            const Slice v = run.slices[h].value_slice(j0 + h), w = run.slices[h].slope_slice(j0 + h);
            for (std::size_t i = 0; i < m.nx; ++i) {
                EXPECT_NEAR(v(0, i), traj[h].v(0, i), 1e-14);
                EXPECT_NEAR(w(0, i), traj[h].w(0, i), 1e-12);
            }
        }
    }
}

TEST(Relaxed, StoresEveryNthStepAndFinal) {
    const Mesh m = build_mesh(0.7, 1.0, 10, 5);
    std::mt19937 rng(1);
    SolverConfig cfg;
    cfg.store_every = 3;
    const epiwave::Run run = run_relaxed(linear_spec(m, 0.1, rng), cfg, m);
    EXPECT_EQ(run.time_index, (std::vector<std::size_t>{0, 3, 6, 7}));
    EXPECT_EQ(run.picard.size(), m.nt);
    EXPECT_EQ(run.birth_values.size(), m.nt + 1);
    EXPECT_EQ(run.x0_totals.size(), m.nt + 1);
}

TEST(Relaxed, ResidualVanishesOnZeroRun) {
    const Mesh m = build_mesh(0.6, 1.0, 5, 7);
    const ModelSpec spec = coupled_spec(m, 0.01, 2.0, 0.0);
    EXPECT_EQ(residual_check(run_relaxed(spec, SolverConfig{}, m), spec, m), 0.0);
}

TEST(Relaxed, ResidualShrinksUnderRefinement) {
    double prev = 0.0;
    for (std::size_t na : {10u, 20u, 40u}) {
        const Mesh m = build_mesh(0.5, 1.0, na, 2 * na + 1);
        const ModelSpec spec = io::manufactured_spec(0.05, 0.5, 0.1, m);
        const double r = residual_check(run_relaxed(spec, SolverConfig{}, m), spec, m);
        if (prev > 0.0) EXPECT_GT(prev / r, 1.5);
        prev = r;
    }
}

TEST(Relaxed, PicardContracts) {
    const Mesh m = build_mesh(0.5, 1.0, 20, 21);
    SvirParams p = SvirParams::reference(1.0);
    p.tau = 1e-3;
    const epiwave::Run run = run_relaxed(build_svir(p, m), SolverConfig{}, m);
    EXPECT_EQ(run.unconverged_steps(), 0u);
    EXPECT_LT(run.max_contraction_ratio(2), 0.9);
}

// sup_t E(t) / E(0) with E = tau ||dy||^2 + ||y||_V^2 stays bounded as tau -> 0.
TEST(Relaxed, EnergyBoundUniformInTau) {
    const Mesh m = build_mesh(0.5, 1.0, 10, 11);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double tau : {1e-6, 1e-4, 1e-2, 1.0}) {
        std::mt19937 rng(5);
        ModelSpec spec = linear_spec(m, tau, rng);
        const double e0 = energy(run_relaxed(spec, SolverConfig{}, m).slices.front(), tau, m);
        double worst = 0.0;
        const epiwave::Run run = run_relaxed(spec, SolverConfig{}, m);
        for (const auto& s : run.slices) worst = std::max(worst, energy(s, tau, m) / e0);
        lo = std::min(lo, worst);
        hi = std::max(hi, worst);
    }
    EXPECT_LT(hi, 4.5);
    EXPECT_LE(hi / lo, 4.5);
}

// Lipschitz dependence on the initial data: ||y_eps - y|| / eps settles to a constant.
TEST(Relaxed, LipschitzInInitialData) {
    const Mesh m = build_mesh(0.5, 1.0, 10, 11);
    const ModelSpec base = coupled_spec(m, 0.01, 1.0);
    const epiwave::Run ref = run_relaxed(base, SolverConfig{}, m);
    std::mt19937 rng(9);
    const StateField dir = oracle::random_field(1, m, rng, -1.0, 1.0, false);
    std::vector<double> gains;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        ModelSpec pert = base;
        for (std::size_t q = 0; q < pert.y0.size(); ++q) pert.y0.values()[q] += eps * dir.values()[q];
        const epiwave::Run run = run_relaxed(pert, SolverConfig{}, m);
        double worst = 0.0;
        for (std::size_t s = 0; s < run.slices.size(); ++s)
            worst = std::max(worst, std::sqrt(energy(difference(run.slices[s], ref.slices[s]), 0.01, m)));
        gains.push_back(worst / eps);
    }
    EXPECT_LT(gains.back(), 10.0);
    EXPECT_NEAR(gains[1] / gains[2], 1.0, 0.05);
}

TEST(Relaxed, Errors) {
    const Mesh m = build_mesh(0.6, 1.0, 5, 7);
    std::mt19937 rng(2);
    ModelSpec spec = linear_spec(m, 0.1, rng);
    ModelSpec neg = spec;
    neg.tau = -1.0;
    EXPECT_THROW(run_relaxed(neg, SolverConfig{}, m), Error);
    ModelSpec shape = spec;
    shape.y1 = StateField(1, m.age_nodes(), m.nx + 1, false);
    try {
        run_relaxed(shape, SolverConfig{}, m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
    }
    SolverConfig bad;
    bad.picard_max = 0;
    EXPECT_THROW(run_relaxed(spec, bad, m), Error);
    ModelSpec nan = spec;
    nan.y0.values()[3] = std::nan("");
    try {
        run_relaxed(nan, SolverConfig{}, m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFinite);
    }
}
