#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "epiwave/mesh.hpp"

namespace epiwave {

// Values over (compartment, x) on one age/time node, e.g. the birth values or a
// single characteristic state.
class Slice {
public:
    Slice() = default;
    Slice(std::size_t n, std::size_t nx, double fill = 0.0) : n_(n), nx_(nx), data_(n * nx, fill) {}

    std::size_t n() const { return n_; }
    std::size_t nx() const { return nx_; }

    double& operator()(std::size_t c, std::size_t i) { return data_[c * nx_ + i]; }
    double operator()(std::size_t c, std::size_t i) const { return data_[c * nx_ + i]; }

    std::span<double> row(std::size_t c) { return {data_.data() + c * nx_, nx_}; }
    std::span<const double> row(std::size_t c) const { return {data_.data() + c * nx_, nx_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Slice&) const = default;

private:
    std::size_t n_ = 0;
    std::size_t nx_ = 0;
    std::vector<double> data_;
};

// State y(t_k, ., .) and its transport derivative dy = (d/dt + d/da) y on one
// time level. Layout is (compartment, age node, space node), row-major.
class StateField {
public:
    StateField() = default;
    StateField(std::size_t n, std::size_t ages, std::size_t nx, bool with_slope = true);

    static StateField zeros(std::size_t n, const Mesh& m, bool with_slope = true) {
        return StateField(n, m.age_nodes(), m.nx, with_slope);
    }

    std::size_t n() const { return n_; }
    std::size_t ages() const { return ages_; }
    std::size_t nx() const { return nx_; }
    std::size_t size() const { return values_.size(); }
    bool has_slope() const { return !slope_.empty(); }

    std::size_t index(std::size_t c, std::size_t j, std::size_t i) const { return (c * ages_ + j) * nx_ + i; }

    double& value(std::size_t c, std::size_t j, std::size_t i) { return values_[index(c, j, i)]; }
    double value(std::size_t c, std::size_t j, std::size_t i) const { return values_[index(c, j, i)]; }
    double& slope(std::size_t c, std::size_t j, std::size_t i) { return slope_[index(c, j, i)]; }
    double slope(std::size_t c, std::size_t j, std::size_t i) const { return slope_[index(c, j, i)]; }

    std::span<double> value_line(std::size_t c, std::size_t j) { return {values_.data() + index(c, j, 0), nx_}; }
    std::span<const double> value_line(std::size_t c, std::size_t j) const {
        return {values_.data() + index(c, j, 0), nx_};
    }
    std::span<double> slope_line(std::size_t c, std::size_t j) { return {slope_.data() + index(c, j, 0), nx_}; }
    std::span<const double> slope_line(std::size_t c, std::size_t j) const {
        return {slope_.data() + index(c, j, 0), nx_};
    }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& slopes() { return slope_; }
    const std::vector<double>& slopes() const { return slope_; }

    Slice value_slice(std::size_t j) const;
    Slice slope_slice(std::size_t j) const;
    void set_value_slice(std::size_t j, const Slice& s);
    void set_slope_slice(std::size_t j, const Slice& s);

    bool same_shape(const StateField& o) const { return n_ == o.n_ && ages_ == o.ages_ && nx_ == o.nx_; }
    bool all_finite() const;

    bool operator==(const StateField&) const = default;

private:
    std::size_t n_ = 0;
    std::size_t ages_ = 0;
    std::size_t nx_ = 0;
    std::vector<double> values_;
    std::vector<double> slope_;
};

// d/dx on a uniform line: central differences inside, second-order one-sided
// differences at both ends.
void gradient_x(std::span<const double> u, double dx, std::span<double> out);

// Discrete H = L2(I x Omega)^n norm (trapezoid in a and x).
double norm_H(const StateField& f, const Mesh& m);
// Same quadrature applied to the slope array (norm of dy in H).
double norm_H_slope(const StateField& f, const Mesh& m);
// Discrete V = L2(I, H1(Omega))^n norm.
double norm_V(const StateField& f, const Mesh& m);

// Norms of a single (compartment, x) slice over Omega.
double slice_norm_H(const Slice& s, const Mesh& m);
double slice_norm_V(const Slice& s, const Mesh& m);

struct NormReport {
    double l2_H = 0.0;           // ||y_a - y_b||_H at the final stored time
    double h1_V = 0.0;           // ||y_a - y_b||_V at the final stored time
    double sup_t_V = 0.0;        // max over stored times of ||y_a - y_b||_V
    double sup_t_H_slope = 0.0;  // max over stored times of ||dy_a - dy_b||_H
    double sup_abs = 0.0;        // max over (t, compartment, a, x) of |y_a - y_b|

    // (sup_t ||.||_V^2 + tau sup_t ||d.||_H^2)^(1/2)
    double energy(double tau) const;
};

NormReport diff_norms(std::span<const StateField> run_a, std::span<const StateField> run_b, const Mesh& m);

}  // namespace epiwave
