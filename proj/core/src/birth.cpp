#include "epiwave/birth.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "epiwave/error.hpp"

namespace epiwave {

namespace {

constexpr double kSigmaFloor = 1e-14;
constexpr double kRcondFloor = 1e-14;

void check_table(const MatrixTable& t, std::size_t n, const Mesh& m, const char* name) {
    if (t.n() != n || t.ages() != m.age_nodes() || t.nx() != m.nx) {
        throw Error(ErrorCode::ShapeMismatch, std::string(name) + " table does not match the state");
    }
}

// d^2/dx^2 of a table column; one-sided second order at the ends since beta
// need not satisfy the Neumann condition.
void second_derivative(const std::vector<double>& u, double dx, std::vector<double>& out) {
    const std::size_t nx = u.size();
    const double inv = 1.0 / (dx * dx);
    if (nx == 3) {
        laplacian_neumann_line(u, dx, out);
        return;
    }
    out[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) * inv;
    for (std::size_t i = 1; i + 1 < nx; ++i) out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv;
    out[nx - 1] = (2.0 * u[nx - 1] - 5.0 * u[nx - 2] + 4.0 * u[nx - 3] - u[nx - 4]) * inv;
}

// Solves (I - w0 A(x)) B(x) = rhs(x) node by node.
Slice solve_self_coupling(const MatrixTable& A, double w0, const Slice& rhs, const char* which) {
    const std::size_t n = rhs.n();
    Slice out(n, rhs.nx());
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < rhs.nx(); ++i) {
        const auto blk = A.block(0, i);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) M(r, c) = (r == c ? 1.0 : 0.0) - w0 * blk[r * n + c];
            b(r) = rhs(r, i);
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
        const double rc = lu.rcond();
        if (!(rc >= kRcondFloor)) {
            throw Error(ErrorCode::SingularBirthSystem,
                        std::string(which) + " birth system singular at x node " + std::to_string(i));
        }
        const Eigen::VectorXd x = lu.solve(b);
        for (std::size_t r = 0; r < n; ++r) out(r, i) = x(r);
    }
    return out;
}

// out(x) += w * T(j, x) u(x) on one age row.
void table_row_add(const MatrixTable& t, std::size_t j, const Slice& u, double w, Slice& out) {
    const std::size_t n = t.n();
    for (std::size_t i = 0; i < u.nx(); ++i) {
        const auto blk = t.block(j, i);
        for (std::size_t r = 0; r < n; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < n; ++c) acc += blk[r * n + c] * u(c, i);
            out(r, i) += w * acc;
        }
    }
}

Slice gradient_slice(const Slice& s, double dx) {
    Slice g(s.n(), s.nx());
    for (std::size_t c = 0; c < s.n(); ++c) gradient_x(s.row(c), dx, g.row(c));
    return g;
}

}  // namespace

BirthLaws BirthLaws::zeros(std::size_t n, const Mesh& m) {
    BirthLaws b;
    b.beta0 = MatrixTable::zeros(n, m);
    b.beta1 = MatrixTable::zeros(n, m);
    b.betaL = MatrixTable::zeros(n, m);
    b.beta_grad = MatrixTable::zeros(n, m);
    return b;
}

Slice BirthLaws::g0_at(std::size_t k, std::size_t n, std::size_t nx) const {
    if (g0.empty()) return Slice(n, nx);
    if (k >= g0.size()) throw Error(ErrorCode::OutOfRange, "g0 series has no entry for time index " + std::to_string(k));
    return g0[k];
}

Slice BirthLaws::g1_at(std::size_t k, std::size_t n, std::size_t nx) const {
    if (g1.empty()) return Slice(n, nx);
    if (k >= g1.size()) throw Error(ErrorCode::OutOfRange, "g1 series has no entry for time index " + std::to_string(k));
    return g1[k];
}

BirthLaws make_compatible(const MatrixTable& beta, const LinearPart& lin, double q1, double q2, const Mesh& m) {
    const std::size_t n = beta.n();
    check_table(beta, n, m, "beta");
    check_table(lin.L, n, m, "L");
    for (std::size_t j = 0; j < m.age_nodes(); ++j)
        for (std::size_t c = 0; c < n; ++c)
            if (!(std::abs(lin.sigma_at(j, c)) >= kSigmaFloor)) {
                throw Error(ErrorCode::SingularSigma, "sigma of compartment " + std::to_string(c) + " vanishes at age node " +
                                                          std::to_string(j));
            }

    BirthLaws out = BirthLaws::zeros(n, m);
    const std::size_t nx = m.nx;
    std::vector<double> col(nx), d1(nx), d2(nx);
    for (std::size_t j = 0; j < m.age_nodes(); ++j) {
        // Unscaled beta1 = sigma(0) beta sigma(alpha)^-1.
        MatrixTable b1_row(n, 1, nx);
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) {
                    b1_row(0, i, r, c) = lin.sigma_at(0, r) * beta(j, i, r, c) / lin.sigma_at(j, c);
                    out.beta0(j, i, r, c) = q1 * beta(j, i, r, c);
                    out.beta1(j, i, r, c) = q2 * b1_row(0, i, r, c);
                }
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) {
                for (std::size_t i = 0; i < nx; ++i) col[i] = beta(j, i, r, c);
                gradient_x(col, m.dx, d1);
                second_derivative(col, m.dx, d2);
                for (std::size_t i = 0; i < nx; ++i) {
                    double bl = lin.sigma_at(0, r) * d2[i];
                    for (std::size_t l = 0; l < n; ++l) {
                        bl += b1_row(0, i, r, l) * lin.L(j, i, l, c);
                        bl -= lin.L(0, i, r, l) * beta(j, i, l, c);
                    }
                    out.betaL(j, i, r, c) = q2 * bl;
                    out.beta_grad(j, i, r, c) = 2.0 * q2 * lin.sigma_at(0, r) * d1[i];
                }
            }
    }
    return out;
}

BirthValues solve_birth_step(const BirthLaws& laws, const StateField& y_slice, const Slice& g0_now, const Slice& g1_now,
                             const std::optional<Slice>& nonlinear_G, const Mesh& m) {
    const std::size_t n = y_slice.n();
    const std::size_t nx = m.nx;
    if (y_slice.ages() != m.age_nodes() || y_slice.nx() != nx) {
        throw Error(ErrorCode::ShapeMismatch, "birth slice does not match mesh");
    }
    check_table(laws.beta0, n, m, "beta0");
    check_table(laws.beta1, n, m, "beta1");
    check_table(laws.betaL, n, m, "betaL");
    check_table(laws.beta_grad, n, m, "beta_grad");
    if (g0_now.n() != n || g0_now.nx() != nx || g1_now.n() != n || g1_now.nx() != nx) {
        throw Error(ErrorCode::ShapeMismatch, "birth source slices have wrong shape");
    }
    if (nonlinear_G && (nonlinear_G->n() != n || nonlinear_G->nx() != nx)) {
        throw Error(ErrorCode::ShapeMismatch, "nonlinear birth term has wrong shape");
    }
    const auto wa = age_weights(m);
    const double w0 = wa[0];

    Slice rhs0 = g0_now;
    integrate_table_add(laws.beta0, y_slice.values(), m, 1.0, rhs0, 1);
    BirthValues out;
    out.B0 = solve_self_coupling(laws.beta0, w0, rhs0, "zeroth-order");

    Slice rhs1 = g1_now;
    if (nonlinear_G) {
        for (std::size_t q = 0; q < rhs1.data().size(); ++q) rhs1.data()[q] += nonlinear_G->data()[q];
    }
    const bool has_slope = y_slice.has_slope();
    for (std::size_t j = 1; j < m.age_nodes(); ++j) {
        const Slice y = y_slice.value_slice(j);
        if (has_slope) table_row_add(laws.beta1, j, y_slice.slope_slice(j), wa[j], rhs1);
        table_row_add(laws.betaL, j, y, wa[j], rhs1);
        table_row_add(laws.beta_grad, j, gradient_slice(y, m.dx), wa[j], rhs1);
    }
    table_row_add(laws.betaL, 0, out.B0, w0, rhs1);
    table_row_add(laws.beta_grad, 0, gradient_slice(out.B0, m.dx), w0, rhs1);
    out.B1 = solve_self_coupling(laws.beta1, w0, rhs1, "first-order");
    return out;
}

Slice nonlinear_birth_term(const KernelSet& k, const BirthLaws& laws, const StateField& y_slice, const Slice& g0_now,
                           const Mesh& m) {
    if (k.empty()) return Slice(y_slice.n(), m.nx);
    return g_op(k, laws.beta0, laws.beta1, y_slice, y_slice, g0_now, m);
}

}  // namespace epiwave
