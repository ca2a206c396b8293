#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "epiwave/fields.hpp"
#include "epiwave/mesh.hpp"

namespace epiwave {

// n x n matrices sampled on every (age, space) node. Layout (a, x, row, col).
class MatrixTable {
public:
    MatrixTable() = default;
    MatrixTable(std::size_t n, std::size_t ages, std::size_t nx) : n_(n), ages_(ages), nx_(nx), data_(n * n * ages * nx) {}

    static MatrixTable zeros(std::size_t n, const Mesh& m) { return MatrixTable(n, m.age_nodes(), m.nx); }

    std::size_t n() const { return n_; }
    std::size_t ages() const { return ages_; }
    std::size_t nx() const { return nx_; }

    double& operator()(std::size_t j, std::size_t i, std::size_t r, std::size_t c) {
        return data_[((j * nx_ + i) * n_ + r) * n_ + c];
    }
    double operator()(std::size_t j, std::size_t i, std::size_t r, std::size_t c) const {
        return data_[((j * nx_ + i) * n_ + r) * n_ + c];
    }

    // The n x n block at (a_j, x_i), row-major.
    std::span<const double> block(std::size_t j, std::size_t i) const {
        return {data_.data() + (j * nx_ + i) * n_ * n_, n_ * n_};
    }
    // All blocks on age row j, ordered by x.
    std::span<const double> age_row(std::size_t j) const { return {data_.data() + j * nx_ * n_ * n_, nx_ * n_ * n_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }
    bool is_zero() const;

    bool operator==(const MatrixTable&) const = default;

private:
    std::size_t n_ = 0;
    std::size_t ages_ = 0;
    std::size_t nx_ = 0;
    std::vector<double> data_;
};

// Local linear terms: L(a, x), its age derivative, and the diagonal
// diffusivities sigma(a) in length^2 / time.
struct LinearPart {
    MatrixTable L;
    MatrixTable L_a;
    std::vector<double> sigma;  // (age, compartment)

    static LinearPart zeros(std::size_t n, const Mesh& m);

    std::size_t n() const { return L.n(); }
    double sigma_at(std::size_t j, std::size_t c) const { return sigma[j * L.n() + c]; }
    double& sigma_at(std::size_t j, std::size_t c) { return sigma[j * L.n() + c]; }
};

// Second difference with mirror ghost points (zero normal derivative).
void laplacian_neumann_line(std::span<const double> u, double dx, std::span<double> out);
Slice laplacian_neumann(const Slice& s, const Mesh& m);

// One scalar kernel k(a, x, alpha, xi) on the product grid. Either a dense
// table or a product age_out(a) * age_in(alpha) * space(x, xi).
class ScalarKernel {
public:
    // k and dk (= k_a + k_alpha) have layout (a, x, alpha, xi).
    static ScalarKernel dense(std::size_t ages, std::size_t nx, std::vector<double> k, std::vector<double> dk);
    // space has layout (x, xi).
    static ScalarKernel separable(std::vector<double> age_out, std::vector<double> age_out_da, std::vector<double> age_in,
                                  std::vector<double> age_in_da, std::size_t nx, std::vector<double> space);

    bool separable() const { return separable_; }
    std::size_t ages() const { return ages_; }
    std::size_t nx() const { return nx_; }

    double value(std::size_t ja, std::size_t ix, std::size_t jb, std::size_t ib) const;
    double derivative_sum(std::size_t ja, std::size_t ix, std::size_t jb, std::size_t ib) const;

    // out(a, x) = int int k(a, x, alpha, xi) u(alpha, xi), for a in [a_first, a_first + out.size()/nx).
    void integrate(std::span<const double> u, const Mesh& m, std::span<double> out, std::size_t a_first = 0) const;
    // Same with k replaced by k_a + k_alpha.
    void integrate_derivative(std::span<const double> u, const Mesh& m, std::span<double> out) const;
    // out(a, x) = int k(a, x, alpha_r, xi) u(xi) dxi at the fixed age node r.
    void integrate_row(std::size_t r, std::span<const double> u, const Mesh& m, std::span<double> out) const;

private:
    bool separable_ = false;
    std::size_t ages_ = 0;
    std::size_t nx_ = 0;
    std::vector<double> k_, dk_;
    std::vector<double> out_, out_da_, in_, in_da_, space_;
};

// Lambda^{hi} picks up coeff * int int kernel * w_j for every term (h, i, j).
struct CouplingTerm {
    std::size_t h = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    double coeff = 1.0;
    std::size_t kernel = 0;
};

struct KernelSet {
    std::vector<ScalarKernel> kernels;
    std::vector<CouplingTerm> terms;

    bool empty() const { return terms.empty(); }
};

// Matrix field (a, x) -> Lambda(a, x) stored term by term; each distinct
// (kernel, source compartment) pair is integrated once.
class LambdaField {
public:
    LambdaField() = default;
    LambdaField(std::size_t n, std::size_t ages, std::size_t nx, const std::vector<CouplingTerm>& terms);

    std::size_t n() const { return n_; }
    std::size_t ages() const { return ages_; }
    std::size_t nx() const { return nx_; }
    std::size_t slot_count() const { return slots_.size(); }
    const std::vector<CouplingTerm>& terms() const { return terms_; }
    std::size_t slot_of(std::size_t term) const { return slot_of_term_[term]; }
    std::span<double> slot(std::size_t s) { return slots_[s]; }
    std::span<const double> slot(std::size_t s) const { return slots_[s]; }

    double entry(std::size_t h, std::size_t i, std::size_t ja, std::size_t ix) const;

    // out_h += scale * Lambda^{hi} u_i over every (a, x); u and out use the
    // StateField layout.
    void apply_add(std::span<const double> u, double scale, std::span<double> out) const;
    // Same on one age row, with u and out given as (compartment, x) slices.
    void apply_row_add(std::size_t ja, const Slice& u, double scale, Slice& out) const;
    // table(a, x, h, i) += scale * Lambda^{hi}(a, x).
    void add_to(MatrixTable& table, double scale) const;

private:
    std::size_t n_ = 0;
    std::size_t ages_ = 0;
    std::size_t nx_ = 0;
    std::vector<CouplingTerm> terms_;
    std::vector<std::size_t> slot_of_term_;
    std::vector<std::vector<double>> slots_;
};

// Lambda(w) from the values of w.
LambdaField lambda_op(const KernelSet& k, const StateField& w, const Mesh& m);
// Lambda(dw) from the slopes of w.
LambdaField lambda_of_slope(const KernelSet& k, const StateField& w, const Mesh& m);
// Lambda(a = 0, x, w); the result has a single age row.
LambdaField lambda_at_zero(const KernelSet& k, const StateField& w, const Mesh& m);
// Kernel-derivative part of dLambda: (k_a + k_alpha) integrated against v,
// the alpha = 0 trace of k against the zeroth-order births int beta0 v, and
// the alpha = a_max trace of k against v(a_max).
LambdaField lambda1_op(const KernelSet& k, const MatrixTable& beta0, const StateField& v, const Mesh& m);
// int k(a, x, 0, xi) g0(xi) dxi.
LambdaField lambda2_op(const KernelSet& k, const Slice& g0, const Mesh& m);

// Lambda(v) dw + Lambda(dv) w + Lambda1(v) w + Lambda2(g0) w, values only.
StateField delta_lambda_apply(const KernelSet& k, const MatrixTable& beta0, const StateField& v, const Slice& g0,
                              const StateField& w, const Mesh& m);

// int (beta1(alpha) Lambda(alpha, v) - Lambda(0, v) beta0(alpha)) w(alpha) dalpha - Lambda(0, v) g0.
Slice g_op(const KernelSet& k, const MatrixTable& beta0, const MatrixTable& beta1, const StateField& v,
           const StateField& w, const Slice& g0, const Mesh& m);
Slice g_op(const LambdaField& lambda_v, const MatrixTable& beta0, const MatrixTable& beta1, const StateField& w,
           const Slice& g0, const Mesh& m);

// out(x) += scale * sum_alpha weight(alpha) * table(alpha, x) u(alpha, x),
// with u read from the values (or slopes) of the field.
void integrate_table_add(const MatrixTable& table, std::span<const double> u, const Mesh& m, double scale, Slice& out,
                         std::size_t first_age = 0);

}  // namespace epiwave
