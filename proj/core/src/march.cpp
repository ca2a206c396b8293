#include "march.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <deque>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "epiwave/char_solver.hpp"
#include "epiwave/error.hpp"

namespace epiwave {

void ModelSpec::validate(const Mesh& m) const {
    auto grid_ok = [&](const StateField& f) { return f.n() == n && f.ages() == m.age_nodes() && f.nx() == m.nx; };
    auto table_ok = [&](const MatrixTable& t) { return t.n() == n && t.ages() == m.age_nodes() && t.nx() == m.nx; };
    if (n == 0) throw Error(ErrorCode::InvalidParam, "model has no compartments");
    if (!grid_ok(y0)) throw Error(ErrorCode::ShapeMismatch, "y0 does not match (n, na+1, nx)");
    if (!grid_ok(y1)) throw Error(ErrorCode::ShapeMismatch, "y1 does not match (n, na+1, nx)");
    if (!table_ok(linear.L) || !table_ok(linear.L_a) || linear.sigma.size() != n * m.age_nodes()) {
        throw Error(ErrorCode::ShapeMismatch, "linear part does not match the mesh");
    }
    if (!table_ok(births.beta0) || !table_ok(births.beta1) || !table_ok(births.betaL) || !table_ok(births.beta_grad)) {
        throw Error(ErrorCode::ShapeMismatch, "birth tables do not match the mesh");
    }
    for (const auto* g : {&births.g0, &births.g1})
        if (!g->empty() && g->size() != m.time_nodes()) {
            throw Error(ErrorCode::LengthMismatch, "birth source series must have one slice per time node");
        }
    for (const auto& ker : kernels.kernels)
        if (ker.ages() != m.age_nodes() || ker.nx() != m.nx) throw Error(ErrorCode::ShapeMismatch, "kernel grid mismatch");
    for (const auto& t : kernels.terms)
        if (t.h >= n || t.i >= n || t.j >= n || t.kernel >= kernels.kernels.size()) {
            throw Error(ErrorCode::ShapeMismatch, "coupling term out of range");
        }
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::InvalidParam, "tau must be finite and >= 0");
    for (double s : linear.sigma)
        if (!(s > 0.0)) throw Error(ErrorCode::InvalidParam, "sigma must be strictly positive");
}

void SolverConfig::validate() const {
    if (!(picard_tol > 0.0)) throw Error(ErrorCode::InvalidParam, "picard_tol must be > 0");
    if (picard_max < 1) throw Error(ErrorCode::InvalidParam, "picard_max must be >= 1");
    if (store_every < 1) throw Error(ErrorCode::InvalidParam, "store_every must be >= 1");
}

double Run::max_contraction_ratio(std::size_t from_sweep) const {
    double worst = 0.0;
    for (const auto& p : picard)
        for (std::size_t s = std::max<std::size_t>(from_sweep, 1); s < p.updates.size(); ++s)
            if (p.updates[s - 1] > 0.0) worst = std::max(worst, p.updates[s] / p.updates[s - 1]);
    return worst;
}

std::size_t Run::unconverged_steps() const {
    std::size_t count = 0;
    for (const auto& p : picard)
        if (!p.converged) ++count;
    return count;
}

namespace detail {

namespace {

constexpr int kDivergeStreak = 3;

std::vector<double> x0_totals(const StateField& y, const Mesh& m) {
    const auto wa = age_weights(m);
    std::vector<double> out(y.n(), 0.0);
    for (std::size_t c = 0; c < y.n(); ++c)
        for (std::size_t j = 0; j < y.ages(); ++j) out[c] += wa[j] * y.value(c, j, 0);
    return out;
}

// ||y||_V + sqrt(tau) ||dy||_H
double x_norm(const StateField& y, double tau, const Mesh& m) {
    return norm_V(y, m) + std::sqrt(tau) * norm_H_slope(y, m);
}

void sample_forcing(const Forcing& f, std::size_t k, const Mesh& m, StateField& out) {
    const double t = m.time(k);
    for (std::size_t c = 0; c < out.n(); ++c)
        for (std::size_t j = 0; j < out.ages(); ++j)
            for (std::size_t i = 0; i < out.nx(); ++i) out.value(c, j, i) = f(c, t, m.age(j), m.x(i));
}

// Packs values and da-scaled slopes into one vector for the mixing step.
Eigen::VectorXd pack(const StateField& y, double da) {
    Eigen::VectorXd v(2 * y.size());
    for (std::size_t q = 0; q < y.size(); ++q) {
        v(static_cast<Eigen::Index>(q)) = y.values()[q];
        v(static_cast<Eigen::Index>(y.size() + q)) = da * y.slopes()[q];
    }
    return v;
}

void unpack(const Eigen::VectorXd& v, double da, StateField& y) {
    for (std::size_t q = 0; q < y.size(); ++q) {
        y.values()[q] = v(static_cast<Eigen::Index>(q));
        y.slopes()[q] = v(static_cast<Eigen::Index>(y.size() + q)) / da;
    }
}

// Fixed-point iteration w <- phi(w) from guess. With depth > 0 the next
// iterate mixes the last depth + 1 map evaluations (Anderson mixing); with
// depth 0 it is the plain Picard iteration and a growing update raises
// PicardDiverged.
template <class Map>
StateField iterate(Map& phi, StateField w, double tau, const SolverConfig& cfg, const Mesh& m, std::size_t depth,
                   bool nonlinear, std::size_t knew, PicardTrace& trace) {
    int growth = 0;
    double last_update = std::numeric_limits<double>::infinity();
    std::deque<Eigen::VectorXd> fs, gs;
    for (std::size_t sweep = 0; sweep < cfg.picard_max; ++sweep) {
        StateField next = phi(w);
        StateField diff = next;
        for (std::size_t q = 0; q < diff.size(); ++q) {
            diff.values()[q] -= w.values()[q];
            diff.slopes()[q] -= w.slopes()[q];
        }
        const double scale = x_norm(next, tau, m);
        const double update = x_norm(diff, tau, m) / (scale > 0.0 ? scale : 1.0);
        trace.updates.push_back(update);
        trace.sweeps = sweep + 1;

        if (!nonlinear || update <= cfg.picard_tol) {
            trace.converged = true;
            return next;
        }
        if (depth == 0) {
            growth = (update > last_update) ? growth + 1 : 0;
            if (growth >= kDivergeStreak) {
                throw Error(ErrorCode::PicardDiverged, "Picard update grew for " + std::to_string(kDivergeStreak) +
                                                           " consecutive sweeps at time index " + std::to_string(knew));
            }
            last_update = update;
            w = std::move(next);
            continue;
        }

        const Eigen::VectorXd g = pack(next, m.da);
        const Eigen::VectorXd f = g - pack(w, m.da);
        fs.push_back(f);
        gs.push_back(g);
        if (fs.size() > depth + 1) {
            fs.pop_front();
            gs.pop_front();
        }
        Eigen::VectorXd x = g;
        if (fs.size() >= 2) {
            const auto cols = static_cast<Eigen::Index>(fs.size() - 1);
            Eigen::MatrixXd dF(f.size(), cols), dG(f.size(), cols);
            for (Eigen::Index c = 0; c < cols; ++c) {
                dF.col(c) = fs[static_cast<std::size_t>(c) + 1] - fs[static_cast<std::size_t>(c)];
                dG.col(c) = gs[static_cast<std::size_t>(c) + 1] - gs[static_cast<std::size_t>(c)];
            }
            const Eigen::VectorXd gamma = dF.colPivHouseholderQr().solve(f);
            x = g - dG * gamma;
        }
        unpack(x, m.da, w);
    }
    return w;
}

}  // namespace

Run march(const ModelSpec& spec, const StateField& initial, double tau, const SolverConfig& cfg, const Mesh& m) {
    cfg.validate();
    spec.validate(m);
    if (!initial.has_slope() || !initial.same_shape(spec.y0)) {
        throw Error(ErrorCode::MissingSlope, "initial slice must carry values and slopes");
    }
    if (!initial.all_finite()) throw Error(ErrorCode::NonFinite, "initial data contain non-finite entries");

    const std::size_t n = spec.n;
    const std::size_t nx = m.nx;
    const std::size_t ages = m.age_nodes();
    const bool nonlinear = !spec.kernels.empty();

    LinearPart eff = spec.linear;

    Run run;
    run.mesh = m;
    run.tau = tau;
    run.time_index.push_back(0);
    run.slices.push_back(initial);
    run.birth_values.push_back(initial.value_slice(0));
    run.birth_slopes.push_back(initial.slope_slice(0));
    run.x0_totals.push_back(x0_totals(initial, m));

    StateField prev = initial;
    StateField cur = initial;
    StateField forcing(n, ages, nx, false);

    for (std::size_t k = 0; k < m.nt; ++k) {
        const std::size_t knew = k + 1;
        const Slice g0 = spec.births.g0_at(knew, n, nx);
        const Slice g1 = spec.births.g1_at(knew, n, nx);
        if (spec.f) sample_forcing(spec.f, knew, m, forcing);

        // One application of the fixed-point map: freeze the nonlocal terms at
        // w, step every characteristic, then solve the births.
        auto phi = [&](const StateField& w) {
            // Lambda(w) and the tau-weighted parts of its transport derivative
            // act as frozen coefficients next to L and L_a, so the step stays
            // implicit in y and only the dependence of Lambda on w is lagged.
            std::optional<LambdaField> lam;
            if (nonlinear) {
                lam = lambda_op(spec.kernels, w, m);
                eff.L = spec.linear.L;
                lam->add_to(eff.L, 1.0);
                if (tau > 0.0) {
                    eff.L_a = spec.linear.L_a;
                    lambda_of_slope(spec.kernels, w, m).add_to(eff.L_a, 1.0);
                    lambda1_op(spec.kernels, spec.births.beta0, w, m).add_to(eff.L_a, 1.0);
                    lambda2_op(spec.kernels, g0, m).add_to(eff.L_a, 1.0);
                }
            }
            StateField next(n, ages, nx, true);
            Slice rhs(n, nx);
            for (std::size_t j = 0; j + 1 < ages; ++j) {
                const std::size_t jn = j + 1;
                const StepContext sc = context_at(eff, jn, tau, spec.f ? &rhs : nullptr);
                if (spec.f) {
                    for (std::size_t c = 0; c < n; ++c)
                        for (std::size_t i = 0; i < nx; ++i) rhs(c, i) = forcing.value(c, jn, i);
                }
                const CharState out = step({cur.value_slice(j), cur.slope_slice(j)}, sc, m);
                next.set_value_slice(jn, out.v);
                next.set_slope_slice(jn, out.w);
            }
            std::optional<Slice> G;
            if (nonlinear) G = g_op(*lam, spec.births.beta0, spec.births.beta1, w, g0, m);
            const BirthValues b = solve_birth_step(spec.births, next, g0, g1, G, m);
            next.set_value_slice(0, b.B0);
            next.set_slope_slice(0, b.B1);
            if (!next.all_finite()) {
                throw Error(ErrorCode::NonFinite, "non-finite state at time index " + std::to_string(knew));
            }
            return next;
        };

        // Predictor: linear extrapolation of the last two levels.
        StateField guess = cur;
        if (k > 0) {
            for (std::size_t q = 0; q < guess.size(); ++q) {
                guess.values()[q] = 2.0 * cur.values()[q] - prev.values()[q];
                guess.slopes()[q] = 2.0 * cur.slopes()[q] - prev.slopes()[q];
            }
        }

        PicardTrace trace;
        StateField level;
        try {
            level = iterate(phi, guess, tau, cfg, m, 0, nonlinear, knew, trace);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::PicardDiverged || cfg.anderson_depth == 0) throw;
            trace = PicardTrace{};
            trace.accelerated = true;
            level = iterate(phi, guess, tau, cfg, m, cfg.anderson_depth, nonlinear, knew, trace);
        }

        prev = std::move(cur);
        cur = std::move(level);
        run.picard.push_back(std::move(trace));
        run.birth_values.push_back(cur.value_slice(0));
        run.birth_slopes.push_back(cur.slope_slice(0));
        run.x0_totals.push_back(x0_totals(cur, m));
        if (knew % cfg.store_every == 0 || knew == m.nt) {
            run.time_index.push_back(knew);
            run.slices.push_back(cur);
        }
    }
    return run;
}

}  // namespace detail
}  // namespace epiwave
