#include "epiwave/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "epiwave/error.hpp"

namespace epiwave {

StateField::StateField(std::size_t n, std::size_t ages, std::size_t nx, bool with_slope)
    : n_(n), ages_(ages), nx_(nx), values_(n * ages * nx, 0.0) {
    if (with_slope) slope_.assign(values_.size(), 0.0);
}

Slice StateField::value_slice(std::size_t j) const {
    Slice s(n_, nx_);
    for (std::size_t c = 0; c < n_; ++c) std::ranges::copy(value_line(c, j), s.row(c).begin());
    return s;
}

Slice StateField::slope_slice(std::size_t j) const {
    if (!has_slope()) throw Error(ErrorCode::MissingSlope, "state field carries no slope array");
    Slice s(n_, nx_);
    for (std::size_t c = 0; c < n_; ++c) std::ranges::copy(slope_line(c, j), s.row(c).begin());
    return s;
}

void StateField::set_value_slice(std::size_t j, const Slice& s) {
    if (s.n() != n_ || s.nx() != nx_) throw Error(ErrorCode::ShapeMismatch, "slice shape does not match field");
    for (std::size_t c = 0; c < n_; ++c) std::ranges::copy(s.row(c), value_line(c, j).begin());
}

void StateField::set_slope_slice(std::size_t j, const Slice& s) {
    if (s.n() != n_ || s.nx() != nx_) throw Error(ErrorCode::ShapeMismatch, "slice shape does not match field");
    if (!has_slope()) throw Error(ErrorCode::MissingSlope, "state field carries no slope array");
    for (std::size_t c = 0; c < n_; ++c) std::ranges::copy(s.row(c), slope_line(c, j).begin());
}

bool StateField::all_finite() const {
    auto finite = [](double v) { return std::isfinite(v); };
    return std::ranges::all_of(values_, finite) && std::ranges::all_of(slope_, finite);
}

void gradient_x(std::span<const double> u, double dx, std::span<double> out) {
    const std::size_t nx = u.size();
    if (nx < 3 || out.size() != nx) throw Error(ErrorCode::ShapeMismatch, "gradient_x needs >= 3 nodes");
    const double inv2 = 1.0 / (2.0 * dx);
    out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2;
    for (std::size_t i = 1; i + 1 < nx; ++i) out[i] = (u[i + 1] - u[i - 1]) * inv2;
    out[nx - 1] = (3.0 * u[nx - 1] - 4.0 * u[nx - 2] + u[nx - 3]) * inv2;
}

namespace {

void check_shape(const StateField& f, const Mesh& m) {
    if (f.ages() != m.age_nodes() || f.nx() != m.nx) {
        throw Error(ErrorCode::ShapeMismatch, "field shape (" + std::to_string(f.ages()) + ", " +
                                                  std::to_string(f.nx()) + ") does not match mesh (" +
                                                  std::to_string(m.age_nodes()) + ", " + std::to_string(m.nx) + ")");
    }
}

double weighted_square_sum(const std::vector<double>& data, const StateField& f, const Mesh& m) {
    const auto wa = age_weights(m);
    const auto wx = space_weights(m);
    double sum = 0.0;
    for (std::size_t c = 0; c < f.n(); ++c)
        for (std::size_t j = 0; j < f.ages(); ++j)
            for (std::size_t i = 0; i < f.nx(); ++i) {
                const double v = data[f.index(c, j, i)];
                sum += wa[j] * wx[i] * v * v;
            }
    return sum;
}

double gradient_square_sum(const StateField& f, const Mesh& m) {
    const auto wa = age_weights(m);
    const auto wx = space_weights(m);
    std::vector<double> g(f.nx());
    double sum = 0.0;
    for (std::size_t c = 0; c < f.n(); ++c)
        for (std::size_t j = 0; j < f.ages(); ++j) {
            gradient_x(f.value_line(c, j), m.dx, g);
            for (std::size_t i = 0; i < f.nx(); ++i) sum += wa[j] * wx[i] * g[i] * g[i];
        }
    return sum;
}

}  // namespace

double norm_H(const StateField& f, const Mesh& m) {
    check_shape(f, m);
    return std::sqrt(weighted_square_sum(f.values(), f, m));
}

double norm_H_slope(const StateField& f, const Mesh& m) {
    check_shape(f, m);
    if (!f.has_slope()) throw Error(ErrorCode::MissingSlope, "norm of slope requested on field without slope");
    return std::sqrt(weighted_square_sum(f.slopes(), f, m));
}

double norm_V(const StateField& f, const Mesh& m) {
    check_shape(f, m);
    if (m.nx < 3) throw Error(ErrorCode::ShapeMismatch, "norm_V needs nx >= 3");
    return std::sqrt(weighted_square_sum(f.values(), f, m) + gradient_square_sum(f, m));
}

double slice_norm_H(const Slice& s, const Mesh& m) {
    if (s.nx() != m.nx) throw Error(ErrorCode::ShapeMismatch, "slice nx does not match mesh");
    const auto wx = space_weights(m);
    double sum = 0.0;
    for (std::size_t c = 0; c < s.n(); ++c)
        for (std::size_t i = 0; i < s.nx(); ++i) sum += wx[i] * s(c, i) * s(c, i);
    return std::sqrt(sum);
}

double slice_norm_V(const Slice& s, const Mesh& m) {
    if (s.nx() != m.nx) throw Error(ErrorCode::ShapeMismatch, "slice nx does not match mesh");
    const auto wx = space_weights(m);
    std::vector<double> g(s.nx());
    double sum = 0.0;
    for (std::size_t c = 0; c < s.n(); ++c) {
        gradient_x(s.row(c), m.dx, g);
        for (std::size_t i = 0; i < s.nx(); ++i) sum += wx[i] * (s(c, i) * s(c, i) + g[i] * g[i]);
    }
    return std::sqrt(sum);
}

double NormReport::energy(double tau) const {
    return std::sqrt(sup_t_V * sup_t_V + tau * sup_t_H_slope * sup_t_H_slope);
}

NormReport diff_norms(std::span<const StateField> run_a, std::span<const StateField> run_b, const Mesh& m) {
    if (run_a.size() != run_b.size()) {
        throw Error(ErrorCode::LengthMismatch, "runs have " + std::to_string(run_a.size()) + " and " +
                                                   std::to_string(run_b.size()) + " stored slices");
    }
    NormReport r;
    for (std::size_t s = 0; s < run_a.size(); ++s) {
        const StateField& a = run_a[s];
        const StateField& b = run_b[s];
        if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, "slice shapes differ at index " + std::to_string(s));
        const bool slopes = a.has_slope() && b.has_slope();
        StateField d(a.n(), a.ages(), a.nx(), slopes);
        for (std::size_t k = 0; k < a.size(); ++k) {
            d.values()[k] = a.values()[k] - b.values()[k];
            r.sup_abs = std::max(r.sup_abs, std::abs(d.values()[k]));
            if (slopes) d.slopes()[k] = a.slopes()[k] - b.slopes()[k];
        }
        const double v = norm_V(d, m);
        r.sup_t_V = std::max(r.sup_t_V, v);
        if (slopes) r.sup_t_H_slope = std::max(r.sup_t_H_slope, norm_H_slope(d, m));
        if (s + 1 == run_a.size()) {
            r.l2_H = norm_H(d, m);
            r.h1_V = v;
        }
    }
    return r;
}

}  // namespace epiwave
