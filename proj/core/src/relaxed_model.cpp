#include "epiwave/relaxed_model.hpp"

#include <algorithm>
#include <cmath>

#include "epiwave/error.hpp"
#include "march.hpp"

namespace epiwave {

Run run_relaxed(const ModelSpec& spec, const SolverConfig& cfg, const Mesh& m) {
    spec.validate(m);
    StateField initial(spec.n, m.age_nodes(), m.nx, true);
    initial.values() = spec.y0.values();
    initial.slopes() = spec.y1.values();
    return detail::march(spec, initial, spec.tau, cfg, m);
}

double residual_check(const Run& run, const ModelSpec& spec, const Mesh& m) {
    spec.validate(m);
    const double tau = run.tau;
    const std::size_t n = spec.n;
    const std::size_t nx = m.nx;
    const std::size_t ages = m.age_nodes();
    const double da = m.da;
    double worst = 0.0;
    std::vector<double> lap(nx);

    for (std::size_t s = 1; s + 1 < run.slices.size(); ++s) {
        if (run.time_index[s] != run.time_index[s - 1] + 1 || run.time_index[s + 1] != run.time_index[s] + 1) continue;
        const StateField& ym = run.slices[s - 1];
        const StateField& y = run.slices[s];
        const StateField& yp = run.slices[s + 1];
        const std::size_t k = run.time_index[s];
        if (!y.same_shape(spec.y0)) throw Error(ErrorCode::ShapeMismatch, "run slice does not match the model");

        // Centred transport derivatives on interior ages.
        StateField c(n, ages, nx, true);
        c.values() = y.values();
        c.slopes() = y.slopes();
        StateField d2(n, ages, nx, false);
        for (std::size_t h = 0; h < n; ++h)
            for (std::size_t j = 1; j + 1 < ages; ++j)
                for (std::size_t i = 0; i < nx; ++i) {
                    const double up = yp.value(h, j + 1, i);
                    const double mid = y.value(h, j, i);
                    const double dn = ym.value(h, j - 1, i);
                    c.slope(h, j, i) = (up - dn) / (2.0 * da);
                    d2.value(h, j, i) = (up - 2.0 * mid + dn) / (da * da);
                }

        StateField nl(n, ages, nx, false);
        if (!spec.kernels.empty()) {
            lambda_op(spec.kernels, c, m).apply_add(c.values(), 1.0, nl.values());
            if (tau > 0.0) {
                const Slice g0 = spec.births.g0_at(k, n, nx);
                const StateField dl = delta_lambda_apply(spec.kernels, spec.births.beta0, c, g0, c, m);
                for (std::size_t q = 0; q < nl.size(); ++q) nl.values()[q] += tau * dl.values()[q];
            }
        }

        for (std::size_t j = 1; j + 1 < ages; ++j) {
            const double t = m.time(k);
            const double a = m.age(j);
            for (std::size_t h = 0; h < n; ++h) {
                laplacian_neumann_line(c.value_line(h, j), m.dx, lap);
                for (std::size_t i = 0; i < nx; ++i) {
                    const auto L = spec.linear.L.block(j, i);
                    const auto La = spec.linear.L_a.block(j, i);
                    double r = tau * d2.value(h, j, i) + c.slope(h, j, i);
                    for (std::size_t q = 0; q < n; ++q) {
                        r += tau * L[h * n + q] * c.slope(q, j, i);
                        r += (L[h * n + q] + tau * La[h * n + q]) * c.value(q, j, i);
                    }
                    r -= spec.linear.sigma_at(j, h) * lap[i];
                    if (spec.f) r -= spec.f(h, t, a, m.x(i));
                    r += nl.value(h, j, i);
                    worst = std::max(worst, std::abs(r));
                }
            }
        }
    }
    return worst;
}

}  // namespace epiwave
