#include "epiwave/parabolic_model.hpp"

#include "march.hpp"

namespace epiwave {

StateField derived_initial_slope(const ModelSpec& spec, const Mesh& m) {
    spec.validate(m);
    const std::size_t n = spec.n;
    const std::size_t nx = m.nx;
    StateField out(n, m.age_nodes(), nx, false);
    std::vector<double> lap(nx);
    for (std::size_t j = 0; j < m.age_nodes(); ++j)
        for (std::size_t h = 0; h < n; ++h) {
            laplacian_neumann_line(spec.y0.value_line(h, j), m.dx, lap);
            for (std::size_t i = 0; i < nx; ++i) {
                const auto L = spec.linear.L.block(j, i);
                double acc = spec.linear.sigma_at(j, h) * lap[i];
                for (std::size_t q = 0; q < n; ++q) acc -= L[h * n + q] * spec.y0.value(q, j, i);
                if (spec.f) acc += spec.f(h, 0.0, m.age(j), m.x(i));
                out.value(h, j, i) = acc;
            }
        }
    if (!spec.kernels.empty()) lambda_op(spec.kernels, spec.y0, m).apply_add(spec.y0.values(), -1.0, out.values());
    return out;
}

Run run_parabolic(const ModelSpec& spec, const SolverConfig& cfg, const Mesh& m) {
    const StateField slope = derived_initial_slope(spec, m);
    StateField initial(spec.n, m.age_nodes(), m.nx, true);
    initial.values() = spec.y0.values();
    initial.slopes() = slope.values();
    return detail::march(spec, initial, 0.0, cfg, m);
}

}  // namespace epiwave
