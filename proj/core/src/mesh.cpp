#include "epiwave/mesh.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "epiwave/error.hpp"

namespace epiwave {

Mesh build_mesh(double t_max, double a_max, std::size_t na, std::size_t nx) {
    if (!(t_max > 0.0) || !(a_max > 0.0) || !std::isfinite(t_max) || !std::isfinite(a_max)) {
        throw Error(ErrorCode::InvalidSize, "t_max and a_max must be positive and finite");
    }
    if (na < 2) throw Error(ErrorCode::InvalidSize, "na must be at least 2, got " + std::to_string(na));
    if (nx < 3) throw Error(ErrorCode::InvalidSize, "nx must be at least 3, got " + std::to_string(nx));

    // t_max / da evaluated as t_max * na / a_max keeps the rounding to two operations.
    const double steps = t_max * static_cast<double>(na) / a_max;
    const double rounded = std::round(steps);
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, steps);
    if (rounded < 1.0 || std::abs(steps - rounded) > tol) {
        throw Error(ErrorCode::NonCommensurate,
                    "t_max = " + std::to_string(t_max) + " is not an integer multiple of da = " +
                        std::to_string(a_max / static_cast<double>(na)));
    }

    Mesh m;
    m.t_max = t_max;
    m.a_max = a_max;
    m.na = na;
    m.nx = nx;
    m.nt = static_cast<std::size_t>(rounded);
    m.da = a_max / static_cast<double>(na);
    m.dt = m.da;
    m.dx = 1.0 / static_cast<double>(nx - 1);
    return m;
}

std::vector<GridCell> characteristic_cells(const Mesh& m, CharacteristicId c) {
    const long nt = static_cast<long>(m.nt);
    const long na = static_cast<long>(m.na);
    if (c.t0_index < -na || c.t0_index > nt) {
        throw Error(ErrorCode::OutOfRange, "characteristic t0 index " + std::to_string(c.t0_index) +
                                               " outside [" + std::to_string(-na) + ", " +
                                               std::to_string(nt) + "]");
    }
    const long h_begin = std::max(-c.t0_index, 0L);
    const long h_end = std::min(nt - c.t0_index, na);
    std::vector<GridCell> cells;
    cells.reserve(static_cast<std::size_t>(h_end - h_begin + 1));
    for (long h = h_begin; h <= h_end; ++h) {
        cells.emplace_back(static_cast<std::size_t>(c.t0_index + h), static_cast<std::size_t>(h));
    }
    return cells;
}

namespace {
std::vector<double> trapezoid(std::size_t nodes, double step) {
    std::vector<double> w(nodes, step);
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}
}  // namespace

std::vector<double> age_weights(const Mesh& m) { return trapezoid(m.age_nodes(), m.da); }

std::vector<double> space_weights(const Mesh& m) { return trapezoid(m.nx, m.dx); }

}  // namespace epiwave
