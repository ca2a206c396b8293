#pragma once

#include <functional>
#include <string>
#include <vector>

#include "epiwave/mesh.hpp"
#include "epiwave/model.hpp"

namespace epiwave::io {

// One compartment, L = 0, no births, y0 = cos(pi x), y1 = 0. Along the
// initial-data characteristics the mode amplitude q(t) solves
// tau q'' + q' + sigma pi^2 q = 0 with q(0) = 1, q'(0) = 0.
ModelSpec eigenmode_spec(double sigma, double tau, const Mesh& m);

// Closed-form q(t) for the mode equation above (tau = 0 gives exp(-lambda t)).
double mode_amplitude(double tau, double lambda, double t);

// Sup over ages a >= t_final and x of |y - q cos(pi x)|, divided by |q|.
double eigenmode_error(const Run& run, const Mesh& m, double q);

// Age-only renewal: L = mu, beta0 = b, y0 = 1, spatially constant.
ModelSpec renewal_spec(double b, double mu, const Mesh& m);

// Trapezoid in time of the x = 0 births.
double total_births(const Run& run, const Mesh& m);

// int_0^T B for the renewal problem with T <= a_max:
//   B(t) = exp(-mu t) (1 + (b a_max - 1) exp(b t)).
double renewal_total_births_exact(double b, double mu, double a_max, double t_max);

// y = (1 + a) exp(-t) cos(pi x) driven by forcing, with births given by g0.
ModelSpec manufactured_spec(double tau, double mu, double sigma, const Mesh& m);
double manufactured_exact(double t, double a, double x);
// Sup over the final slice of |y - exact| relative to the sup of exact.
double manufactured_error(const Run& run, const Mesh& m);

struct OracleResult {
    std::string name;
    double measured = 0.0;
    double limit = 0.0;
    bool at_least = false;  // pass when measured >= limit, else measured < limit
    bool pass = false;
};

// Eigenmode (heat and telegrapher), renewal and manufactured-solution checks.
std::vector<OracleResult> run_oracle_suite();

}  // namespace epiwave::io
