#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace epiwave {

// Coupled (t, a, x) grid on [0, T] x [0, a_max] x [0, 1]. Time and age share
// one step so that every characteristic t - a = const runs along a grid
// diagonal.
struct Mesh {
    double t_max = 0.0;
    double a_max = 0.0;
    std::size_t nt = 0;  // time steps; time nodes are 0..nt
    std::size_t na = 0;  // age steps; age nodes are 0..na
    std::size_t nx = 0;  // space nodes on [0, 1]
    double dt = 0.0;
    double da = 0.0;
    double dx = 0.0;

    double time(std::size_t k) const { return static_cast<double>(k) * dt; }
    double age(std::size_t j) const { return static_cast<double>(j) * da; }
    double x(std::size_t i) const { return static_cast<double>(i) * dx; }

    std::size_t age_nodes() const { return na + 1; }
    std::size_t time_nodes() const { return nt + 1; }
};

Mesh build_mesh(double t_max, double a_max, std::size_t na, std::size_t nx);

// Characteristic chi(t0) labelled by t0 / dt. Negative ids start at
// (t, a) = (0, -t0) and are fed by initial data; non-negative ids start at
// (t0, 0) and are fed by births.
struct CharacteristicId {
    long t0_index = 0;

    bool birth_fed() const { return t0_index >= 0; }
};

using GridCell = std::pair<std::size_t, std::size_t>;  // (t_index, a_index)

std::vector<GridCell> characteristic_cells(const Mesh& m, CharacteristicId c);

// Characteristic passing through grid cell (k, j).
inline CharacteristicId characteristic_through(std::size_t k, std::size_t j) {
    return CharacteristicId{static_cast<long>(k) - static_cast<long>(j)};
}

// Trapezoidal quadrature weights on the age and space nodes.
std::vector<double> age_weights(const Mesh& m);
std::vector<double> space_weights(const Mesh& m);

}  // namespace epiwave
