#include "epiwave/io/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "epiwave/birth.hpp"
#include "epiwave/parabolic_model.hpp"
#include "epiwave/relaxed_model.hpp"

namespace epiwave::io {

namespace {

constexpr double kPi = std::numbers::pi;

LinearPart constant_linear(double mu, double sigma, const Mesh& m) {
    LinearPart lin = LinearPart::zeros(1, m);
    for (std::size_t j = 0; j < m.age_nodes(); ++j) {
        for (std::size_t i = 0; i < m.nx; ++i) lin.L(j, i, 0, 0) = mu;
        lin.sigma_at(j, 0) = sigma;
    }
    return lin;
}

Run solve(const ModelSpec& spec, const Mesh& m) {
    SolverConfig cfg;
    return spec.tau > 0.0 ? run_relaxed(spec, cfg, m) : run_parabolic(spec, cfg, m);
}

}  // namespace

ModelSpec eigenmode_spec(double sigma, double tau, const Mesh& m) {
    ModelSpec spec;
    spec.n = 1;
    spec.tau = tau;
    spec.linear = constant_linear(0.0, sigma, m);
    spec.births = BirthLaws::zeros(1, m);
    spec.y0 = StateField(1, m.age_nodes(), m.nx, false);
    spec.y1 = StateField(1, m.age_nodes(), m.nx, false);
    for (std::size_t j = 0; j < m.age_nodes(); ++j)
        for (std::size_t i = 0; i < m.nx; ++i) spec.y0.value(0, j, i) = std::cos(kPi * m.x(i));
    return spec;
}

double mode_amplitude(double tau, double lambda, double t) {
    if (tau == 0.0) return std::exp(-lambda * t);
    const double disc = 1.0 - 4.0 * tau * lambda;
    if (disc > 0.0) {
        const double r1 = (-1.0 + std::sqrt(disc)) / (2.0 * tau);
        const double r2 = (-1.0 - std::sqrt(disc)) / (2.0 * tau);
        return (r2 * std::exp(r1 * t) - r1 * std::exp(r2 * t)) / (r2 - r1);
    }
    const double alpha = -1.0 / (2.0 * tau);
    if (disc == 0.0) return std::exp(alpha * t) * (1.0 - alpha * t);
    const double omega = std::sqrt(-disc) / (2.0 * tau);
    return std::exp(alpha * t) * (std::cos(omega * t) - alpha / omega * std::sin(omega * t));
}

double eigenmode_error(const Run& run, const Mesh& m, double q) {
    const StateField& y = run.final_slice();
    const std::size_t first = run.time_index.back();
    double err = 0.0;
    for (std::size_t j = first; j < y.ages(); ++j)
        for (std::size_t i = 0; i < m.nx; ++i)
            err = std::max(err, std::abs(y.value(0, j, i) - q * std::cos(kPi * m.x(i))));
    return err / std::abs(q);
}

ModelSpec renewal_spec(double b, double mu, const Mesh& m) {
    ModelSpec spec;
    spec.n = 1;
    spec.linear = constant_linear(mu, 0.1, m);
    MatrixTable beta = MatrixTable::zeros(1, m);
    for (double& v : beta.data()) v = b;
    spec.births = make_compatible(beta, spec.linear, 1.0, 1.0, m);
    spec.y0 = StateField(1, m.age_nodes(), m.nx, false);
    for (double& v : spec.y0.values()) v = 1.0;
    spec.y1 = StateField(1, m.age_nodes(), m.nx, false);
    return spec;
}

double total_births(const Run& run, const Mesh& m) {
    double s = 0.0;
    const std::size_t last = run.birth_values.size() - 1;
    for (std::size_t k = 0; k <= last; ++k) {
        const double w = (k == 0 || k == last) ? 0.5 : 1.0;
        s += w * run.birth_values[k](0, 0);
    }
    return s * m.dt;
}

double renewal_total_births_exact(double b, double mu, double a_max, double t_max) {
    const double decay = mu > 0.0 ? (1.0 - std::exp(-mu * t_max)) / mu : t_max;
    const double r = b - mu;
    const double growth = r != 0.0 ? (std::exp(r * t_max) - 1.0) / r : t_max;
    return decay + (b * a_max - 1.0) * growth;
}

double manufactured_exact(double t, double a, double x) { return (1.0 + a) * std::exp(-t) * std::cos(kPi * x); }

ModelSpec manufactured_spec(double tau, double mu, double sigma, const Mesh& m) {
    ModelSpec spec;
    spec.n = 1;
    spec.tau = tau;
    spec.linear = constant_linear(mu, sigma, m);
    spec.births = BirthLaws::zeros(1, m);
    for (std::size_t k = 0; k < m.time_nodes(); ++k) {
        Slice g(1, m.nx);
        for (std::size_t i = 0; i < m.nx; ++i) g(0, i) = manufactured_exact(m.time(k), 0.0, m.x(i));
        spec.births.g0.push_back(std::move(g));
    }
    spec.y0 = StateField(1, m.age_nodes(), m.nx, false);
    spec.y1 = StateField(1, m.age_nodes(), m.nx, false);
    for (std::size_t j = 0; j < m.age_nodes(); ++j)
        for (std::size_t i = 0; i < m.nx; ++i) {
            spec.y0.value(0, j, i) = manufactured_exact(0.0, m.age(j), m.x(i));
            spec.y1.value(0, j, i) = -m.age(j) * std::cos(kPi * m.x(i));
        }
    const double lam = sigma * kPi * kPi;
    spec.f = [=](std::size_t, double t, double a, double x) {
        return (tau * (a - 1.0) - (1.0 + tau * mu) * a + (mu + lam) * (1.0 + a)) * std::exp(-t) * std::cos(kPi * x);
    };
    return spec;
}

double manufactured_error(const Run& run, const Mesh& m) {
    const StateField& y = run.final_slice();
    const double t = m.time(run.time_index.back());
    double err = 0.0, ref = 0.0;
    for (std::size_t j = 0; j < y.ages(); ++j)
        for (std::size_t i = 0; i < m.nx; ++i) {
            const double e = manufactured_exact(t, m.age(j), m.x(i));
            err = std::max(err, std::abs(y.value(0, j, i) - e));
            ref = std::max(ref, std::abs(e));
        }
    return err / ref;
}

std::vector<OracleResult> run_oracle_suite() {
    std::vector<OracleResult> out;
    auto below = [&](std::string name, double v, double lim) { out.push_back({std::move(name), v, lim, false, v < lim}); };
    auto above = [&](std::string name, double v, double lim) { out.push_back({std::move(name), v, lim, true, v >= lim}); };

    const double sigma = 0.1;
    const double lambda = sigma * kPi * kPi;
    auto mode_error = [&](double tau, std::size_t na, std::size_t nx) {
        const Mesh m = build_mesh(0.5, 1.0, na, nx);
        return eigenmode_error(solve(eigenmode_spec(sigma, tau, m), m), m, mode_amplitude(tau, lambda, 0.5));
    };
    const double heat_c = mode_error(0.0, 40, 41);
    const double heat_f = mode_error(0.0, 80, 81);
    below("heat eigenmode relative error", heat_c, 0.05);
    above("heat eigenmode refinement ratio", heat_c / heat_f, 1.8);
    below("telegrapher eigenmode relative error", mode_error(0.1, 40, 41), 0.05);

    auto renewal_error = [&](std::size_t na) {
        const Mesh m = build_mesh(1.0, 1.0, na, 3);
        const double exact = renewal_total_births_exact(2.0, 1.0, 1.0, 1.0);
        return std::abs(total_births(solve(renewal_spec(2.0, 1.0, m), m), m) - exact) / exact;
    };
    const double ren_c = renewal_error(20);
    const double ren_f = renewal_error(40);
    below("renewal total births relative error", ren_f, 0.05);
    above("renewal refinement ratio", ren_c / ren_f, 1.8);

    auto mms_error = [&](std::size_t na, std::size_t nx) {
        const Mesh m = build_mesh(1.0, 1.0, na, nx);
        return manufactured_error(solve(manufactured_spec(0.1, 0.5, 0.1, m), m), m);
    };
    const double mms_c = mms_error(20, 21);
    const double mms_f = mms_error(40, 41);
    below("manufactured solution relative error", mms_f, 0.05);
    above("manufactured solution refinement ratio", mms_c / mms_f, 1.5);
    return out;
}

}  // namespace epiwave::io
