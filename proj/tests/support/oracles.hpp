#pragma once

// Reference computations written independently of the library: plain loops,
// own quadrature weights, textbook integrators.

#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "epiwave/fields.hpp"
#include "epiwave/mesh.hpp"

namespace oracle {

// Trapezoid weights for n + 1 nodes with step h.
std::vector<double> trapezoid(std::size_t n, double h);

// Classical RK4 for tau q'' + q' + lambda q = 0, q(0) = q0, q'(0) = p0.
double rk4_mode(double tau, double lambda, double q0, double p0, double t, std::size_t steps);

// Total births over [0, t_max] for the renewal problem
//   B(t) = b int_0^a_max y(t, a) da,  y_t + y_a = -mu y,  y(0, a) = 1,
// by direct trapezoid discretization of the Volterra equation on a grid of
// step h (t_max <= a_max).
double renewal_total_births(double b, double mu, double a_max, double t_max, double h);

// int_0^1 (w - |x - xi|)^+ dxi.
double tent_integral(double x, double w);

// Brute-force int int k(a, x, alpha, xi) u(alpha, xi) on the mesh nodes.
double kernel_quadrature(const std::function<double(double, double, double, double)>& k,
                         const std::function<double(std::size_t, std::size_t)>& u, const epiwave::Mesh& m, double a,
                         double x);

// Uniform random field in [lo, hi) with slopes.
epiwave::StateField random_field(std::size_t n, const epiwave::Mesh& m, std::mt19937& rng, double lo = -1.0,
                                 double hi = 1.0, bool with_slope = true);

// Three-point second difference with mirrored ghost nodes.
std::vector<double> neumann_second_difference(const std::vector<double>& u, double dx);

}  // namespace oracle
