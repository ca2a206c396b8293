#include "epiwave/svir.hpp"

#include <cmath>
#include <numbers>

#include "epiwave/error.hpp"

namespace epiwave {

SvirParams SvirParams::reference(double a_max) {
    SvirParams p;
    p.mu = [](double a) { return std::exp(-a) * std::pow(a, 5); };
    p.mu_da = [](double a) { return std::exp(-a) * (5.0 * std::pow(a, 4) - std::pow(a, 5)); };
    p.beta = [a_max](double a) {
        return 6.78 / a_max * a * a * (a_max - a) * (1.0 + std::sin(std::numbers::pi * a / a_max));
    };
    auto sig = [](double s0) { return [s0](double a) { return s0 * std::exp(-0.1 * a); }; };
    p.sigma_S = sig(0.1);
    p.sigma_V = sig(0.1);
    p.sigma_I = sig(0.05);
    p.sigma_R = sig(0.1);
    return p;
}

void SvirParams::validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
        throw Error(ErrorCode::InvalidParam, "SVIR parameter '" + field + "' " + why);
    };
    auto nonneg = [&](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) bad(name, "must be finite and nonnegative");
    };
    nonneg(c, "c");
    nonneg(delta_d, "delta");
    nonneg(gamma, "gamma");
    nonneg(total_S0, "total_S0");
    nonneg(I0, "I0");
    nonneg(tau, "tau");
    if (!(phi1 >= 0.0 && phi1 <= 1.0)) bad("phi1", "must lie in [0, 1]");
    if (!(phi2 >= 0.0 && phi2 <= 1.0)) bad("phi2", "must lie in [0, 1]");
    if (!(kernel_width > 0.0)) bad("kernel_width", "must be positive");
    if (!mu) bad("mu", "is not set");
    if (!beta) bad("beta", "is not set");
    if (!sigma_S || !sigma_V || !sigma_I || !sigma_R) bad("sigma", "is not set for every compartment");
}

double tent_kernel(double x, double xi, double width) {
    const double v = width - std::abs(x - xi);
    return v > 0.0 ? v : 0.0;
}

MatrixTable newborn_routing(const AgeFunction& beta, NewbornRouting routing, std::size_t n, const Mesh& m) {
    MatrixTable t = MatrixTable::zeros(n, m);
    if (routing == NewbornRouting::None) return t;
    for (std::size_t j = 0; j < m.age_nodes(); ++j) {
        const double b = beta(m.age(j));
        for (std::size_t i = 0; i < m.nx; ++i)
            for (std::size_t c = 0; c < n; ++c) {
                if (routing == NewbornRouting::Susceptible) {
                    t(j, i, kS, c) = b;
                } else {
                    t(j, i, c, c) = b;
                }
            }
    }
    return t;
}

ModelSpec build_svir(const SvirParams& p, const Mesh& m) {
    p.validate();
    constexpr std::size_t n = 4;
    const std::size_t ages = m.age_nodes();
    const std::size_t nx = m.nx;

    ModelSpec spec;
    spec.n = n;
    spec.tau = p.tau;
    spec.linear = LinearPart::zeros(n, m);
    for (std::size_t j = 0; j < ages; ++j) {
        const double a = m.age(j);
        const double mu = p.mu(a);
        const double mu_a = p.mu_da ? p.mu_da(a) : 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            auto& L = spec.linear.L;
            L(j, i, kS, kS) = mu;
            L(j, i, kS, kV) = -p.c;
            L(j, i, kV, kV) = mu + p.c;
            L(j, i, kI, kI) = mu + p.delta_d + p.gamma;
            L(j, i, kR, kI) = -p.gamma;
            L(j, i, kR, kR) = mu;
            for (std::size_t c = 0; c < n; ++c) spec.linear.L_a(j, i, c, c) = mu_a;
        }
        spec.linear.sigma_at(j, kS) = p.sigma_S(a);
        spec.linear.sigma_at(j, kV) = p.sigma_V(a);
        spec.linear.sigma_at(j, kI) = p.sigma_I(a);
        spec.linear.sigma_at(j, kR) = p.sigma_R(a);
    }

    std::vector<double> space(nx * nx);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t b = 0; b < nx; ++b) space[i * nx + b] = tent_kernel(m.x(i), m.x(b), p.kernel_width);
    spec.kernels.kernels.push_back(ScalarKernel::separable(std::vector<double>(ages, 1.0), {},
                                                           std::vector<double>(ages, 1.0), {}, nx, std::move(space)));
    spec.kernels.terms = {
        {kS, kS, kI, 1.0, 0},     {kV, kV, kI, p.phi1, 0},  {kI, kS, kI, -1.0, 0},
        {kI, kV, kI, -p.phi1, 0}, {kI, kR, kI, -p.phi2, 0}, {kR, kR, kI, p.phi2, 0},
    };

    spec.births = BirthLaws::zeros(n, m);
    spec.births.beta0 = newborn_routing(p.beta, p.routing, n, m);
    spec.births.beta1 = spec.births.beta0;

    // S uniform over age and space; I uniform in age on a linear ramp over
    // the last two cells at x = 1 with unit space integral.
    spec.y0 = StateField(n, ages, nx, false);
    spec.y1 = StateField(n, ages, nx, false);
    const double s_density = p.total_S0 / m.a_max;
    const double i_density = p.I0 / m.a_max;
    const double peak = 1.0 / m.dx;
    for (std::size_t j = 0; j < ages; ++j) {
        for (std::size_t i = 0; i < nx; ++i) spec.y0.value(kS, j, i) = s_density;
        spec.y0.value(kI, j, nx - 2) = i_density * 0.5 * peak;
        spec.y0.value(kI, j, nx - 1) = i_density * peak;
    }
    return spec;
}

}  // namespace epiwave
