#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "epiwave/model.hpp"

namespace epiwave {

// Compartment order used throughout.
enum SvirCompartment : std::size_t { kS = 0, kV = 1, kI = 2, kR = 3 };

enum class NewbornRouting {
    Susceptible,  // births from every compartment enter S
    Identity,     // each compartment births into itself
    None,
};

using AgeFunction = std::function<double(double)>;

struct SvirParams {
    double c = 0.18564;
    double phi1 = 0.0052;
    double phi2 = 0.00062;
    double delta_d = 0.0018;
    double gamma = 0.278574;
    double alpha = 500.0;  // listed with the parameter set; no term uses it
    double kernel_width = 0.1;
    double total_S0 = 1000.0;
    double I0 = 10.0;
    double tau = 0.0;
    NewbornRouting routing = NewbornRouting::Susceptible;

    AgeFunction mu;       // natural mortality
    AgeFunction mu_da;    // its age derivative
    AgeFunction beta;     // fertility
    AgeFunction sigma_S;
    AgeFunction sigma_V;
    AgeFunction sigma_I;
    AgeFunction sigma_R;

    // The reference parameter set for a_max (mu, beta and sigma in closed form).
    static SvirParams reference(double a_max = 1.0);

    // Throws InvalidParam naming the offending field.
    void validate() const;
};

// Tent kernel (w - |x - xi|)^+.
double tent_kernel(double x, double xi, double width);

// n x n birth table for a scalar fertility beta(a) under the given routing.
MatrixTable newborn_routing(const AgeFunction& beta, NewbornRouting routing, std::size_t n, const Mesh& m);

// Four-compartment model S, V, I, R with Lambda(I) acting through the
// infection couplings. Births use beta0 = beta1 = routed beta, y1 = 0.
ModelSpec build_svir(const SvirParams& p, const Mesh& m);

}  // namespace epiwave
