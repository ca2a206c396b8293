#include "epiwave/operators.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <utility>

#include "epiwave/error.hpp"

namespace epiwave {

bool MatrixTable::is_zero() const {
    return std::ranges::all_of(data_, [](double v) { return v == 0.0; });
}

LinearPart LinearPart::zeros(std::size_t n, const Mesh& m) {
    LinearPart p;
    p.L = MatrixTable::zeros(n, m);
    p.L_a = MatrixTable::zeros(n, m);
    p.sigma.assign(m.age_nodes() * n, 0.0);
    return p;
}

void laplacian_neumann_line(std::span<const double> u, double dx, std::span<double> out) {
    const std::size_t nx = u.size();
    if (nx < 3 || out.size() != nx) throw Error(ErrorCode::ShapeMismatch, "Neumann Laplacian needs >= 3 nodes");
    const double inv = 1.0 / (dx * dx);
    out[0] = 2.0 * (u[1] - u[0]) * inv;
    for (std::size_t i = 1; i + 1 < nx; ++i) out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv;
    out[nx - 1] = 2.0 * (u[nx - 2] - u[nx - 1]) * inv;
}

Slice laplacian_neumann(const Slice& s, const Mesh& m) {
    if (s.nx() != m.nx) throw Error(ErrorCode::ShapeMismatch, "slice nx does not match mesh");
    Slice out(s.n(), s.nx());
    for (std::size_t c = 0; c < s.n(); ++c) laplacian_neumann_line(s.row(c), m.dx, out.row(c));
    return out;
}

// ---------------------------------------------------------------- kernels

ScalarKernel ScalarKernel::dense(std::size_t ages, std::size_t nx, std::vector<double> k, std::vector<double> dk) {
    const std::size_t cells = ages * nx;
    if (k.size() != cells * cells) throw Error(ErrorCode::ShapeMismatch, "dense kernel table has wrong size");
    if (dk.empty()) dk.assign(k.size(), 0.0);
    if (dk.size() != k.size()) throw Error(ErrorCode::ShapeMismatch, "dense kernel derivative table has wrong size");
    ScalarKernel out;
    out.ages_ = ages;
    out.nx_ = nx;
    out.k_ = std::move(k);
    out.dk_ = std::move(dk);
    return out;
}

ScalarKernel ScalarKernel::separable(std::vector<double> age_out, std::vector<double> age_out_da,
                                     std::vector<double> age_in, std::vector<double> age_in_da, std::size_t nx,
                                     std::vector<double> space) {
    const std::size_t ages = age_out.size();
    if (age_out_da.empty()) age_out_da.assign(ages, 0.0);
    if (age_in_da.empty()) age_in_da.assign(ages, 0.0);
    if (age_in.size() != ages || age_out_da.size() != ages || age_in_da.size() != ages || space.size() != nx * nx) {
        throw Error(ErrorCode::ShapeMismatch, "separable kernel factors have inconsistent sizes");
    }
    ScalarKernel out;
    out.separable_ = true;
    out.ages_ = ages;
    out.nx_ = nx;
    out.out_ = std::move(age_out);
    out.out_da_ = std::move(age_out_da);
    out.in_ = std::move(age_in);
    out.in_da_ = std::move(age_in_da);
    out.space_ = std::move(space);
    return out;
}

double ScalarKernel::value(std::size_t ja, std::size_t ix, std::size_t jb, std::size_t ib) const {
    if (separable_) return out_[ja] * in_[jb] * space_[ix * nx_ + ib];
    return k_[(ja * nx_ + ix) * ages_ * nx_ + jb * nx_ + ib];
}

double ScalarKernel::derivative_sum(std::size_t ja, std::size_t ix, std::size_t jb, std::size_t ib) const {
    if (separable_) return (out_da_[ja] * in_[jb] + out_[ja] * in_da_[jb]) * space_[ix * nx_ + ib];
    return dk_[(ja * nx_ + ix) * ages_ * nx_ + jb * nx_ + ib];
}

namespace {

void check_kernel_grid(const ScalarKernel& k, const Mesh& m) {
    if (k.ages() != m.age_nodes() || k.nx() != m.nx) throw Error(ErrorCode::ShapeMismatch, "kernel grid does not match mesh");
}

// Space convolution s(x) = sum_xi space(x, xi) wx(xi) u(xi).
void space_apply(const std::vector<double>& space, const std::vector<double>& wx, std::span<const double> u,
                 std::span<double> s) {
    const std::size_t nx = wx.size();
    for (std::size_t i = 0; i < nx; ++i) {
        double acc = 0.0;
        const double* row = space.data() + i * nx;
        for (std::size_t b = 0; b < nx; ++b) acc += row[b] * wx[b] * u[b];
        s[i] = acc;
    }
}

// Integrates u against a dense table; rows of the table are output nodes.
void dense_apply(const std::vector<double>& table, std::span<const double> u, const Mesh& m, std::span<double> out,
                 std::size_t a_first) {
    const auto wa = age_weights(m);
    const auto wx = space_weights(m);
    const std::size_t nx = m.nx;
    const std::size_t cells = m.age_nodes() * nx;
    std::vector<double> wu(cells);
    for (std::size_t jb = 0; jb < m.age_nodes(); ++jb)
        for (std::size_t ib = 0; ib < nx; ++ib) wu[jb * nx + ib] = wa[jb] * wx[ib] * u[jb * nx + ib];
    for (std::size_t o = 0; o < out.size(); ++o) {
        const double* row = table.data() + (a_first * nx + o) * cells;
        double acc = 0.0;
        for (std::size_t q = 0; q < cells; ++q) acc += row[q] * wu[q];
        out[o] = acc;
    }
}

}  // namespace

void ScalarKernel::integrate(std::span<const double> u, const Mesh& m, std::span<double> out, std::size_t a_first) const {
    check_kernel_grid(*this, m);
    if (u.size() != ages_ * nx_ || out.size() % nx_ != 0 || a_first * nx_ + out.size() > ages_ * nx_) {
        throw Error(ErrorCode::ShapeMismatch, "kernel integration buffers have wrong size");
    }
    if (!separable_) {
        dense_apply(k_, u, m, out, a_first);
        return;
    }
    const auto wa = age_weights(m);
    const auto wx = space_weights(m);
    std::vector<double> inner(nx_, 0.0), s(nx_);
    for (std::size_t jb = 0; jb < ages_; ++jb)
        for (std::size_t ib = 0; ib < nx_; ++ib) inner[ib] += wa[jb] * in_[jb] * u[jb * nx_ + ib];
    space_apply(space_, wx, inner, s);
    const std::size_t rows = out.size() / nx_;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < nx_; ++i) out[r * nx_ + i] = out_[a_first + r] * s[i];
}

void ScalarKernel::integrate_derivative(std::span<const double> u, const Mesh& m, std::span<double> out) const {
    check_kernel_grid(*this, m);
    if (u.size() != ages_ * nx_ || out.size() != ages_ * nx_) {
        throw Error(ErrorCode::ShapeMismatch, "kernel integration buffers have wrong size");
    }
    if (!separable_) {
        dense_apply(dk_, u, m, out, 0);
        return;
    }
    const auto wa = age_weights(m);
    const auto wx = space_weights(m);
    std::vector<double> inner(nx_, 0.0), inner_da(nx_, 0.0), s(nx_), s_da(nx_);
    for (std::size_t jb = 0; jb < ages_; ++jb)
        for (std::size_t ib = 0; ib < nx_; ++ib) {
            inner[ib] += wa[jb] * in_[jb] * u[jb * nx_ + ib];
            inner_da[ib] += wa[jb] * in_da_[jb] * u[jb * nx_ + ib];
        }
    space_apply(space_, wx, inner, s);
    space_apply(space_, wx, inner_da, s_da);
    for (std::size_t ja = 0; ja < ages_; ++ja)
        for (std::size_t i = 0; i < nx_; ++i) out[ja * nx_ + i] = out_da_[ja] * s[i] + out_[ja] * s_da[i];
}

void ScalarKernel::integrate_row(std::size_t r, std::span<const double> u, const Mesh& m, std::span<double> out) const {
    check_kernel_grid(*this, m);
    if (r >= ages_ || u.size() != nx_ || out.size() != ages_ * nx_) {
        throw Error(ErrorCode::ShapeMismatch, "kernel row integration buffers have wrong size");
    }
    const auto wx = space_weights(m);
    if (separable_) {
        std::vector<double> s(nx_);
        space_apply(space_, wx, u, s);
        for (std::size_t ja = 0; ja < ages_; ++ja)
            for (std::size_t i = 0; i < nx_; ++i) out[ja * nx_ + i] = out_[ja] * in_[r] * s[i];
        return;
    }
    const std::size_t cells = ages_ * nx_;
    for (std::size_t o = 0; o < cells; ++o) {
        const double* row = k_.data() + o * cells + r * nx_;
        double acc = 0.0;
        for (std::size_t b = 0; b < nx_; ++b) acc += row[b] * wx[b] * u[b];
        out[o] = acc;
    }
}

// ---------------------------------------------------------------- Lambda

LambdaField::LambdaField(std::size_t n, std::size_t ages, std::size_t nx, const std::vector<CouplingTerm>& terms)
    : n_(n), ages_(ages), nx_(nx), terms_(terms) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
    for (const auto& t : terms_) {
        if (t.h >= n || t.i >= n || t.j >= n) throw Error(ErrorCode::ShapeMismatch, "coupling term compartment out of range");
        auto [it, fresh] = seen.try_emplace({t.kernel, t.j}, slots_.size());
        if (fresh) slots_.emplace_back(ages * nx, 0.0);
        slot_of_term_.push_back(it->second);
    }
}

double LambdaField::entry(std::size_t h, std::size_t i, std::size_t ja, std::size_t ix) const {
    double acc = 0.0;
    for (std::size_t t = 0; t < terms_.size(); ++t)
        if (terms_[t].h == h && terms_[t].i == i) acc += terms_[t].coeff * slots_[slot_of_term_[t]][ja * nx_ + ix];
    return acc;
}

void LambdaField::apply_add(std::span<const double> u, double scale, std::span<double> out) const {
    const std::size_t plane = ages_ * nx_;
    if (u.size() != n_ * plane || out.size() != n_ * plane) {
        throw Error(ErrorCode::ShapeMismatch, "Lambda application buffers have wrong size");
    }
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        const auto& term = terms_[t];
        const double c = scale * term.coeff;
        const double* lam = slots_[slot_of_term_[t]].data();
        const double* src = u.data() + term.i * plane;
        double* dst = out.data() + term.h * plane;
        for (std::size_t q = 0; q < plane; ++q) dst[q] += c * lam[q] * src[q];
    }
}

void LambdaField::apply_row_add(std::size_t ja, const Slice& u, double scale, Slice& out) const {
    if (ja >= ages_ || u.n() != n_ || u.nx() != nx_ || out.n() != n_ || out.nx() != nx_) {
        throw Error(ErrorCode::ShapeMismatch, "Lambda row application has wrong shape");
    }
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        const auto& term = terms_[t];
        const double c = scale * term.coeff;
        const double* lam = slots_[slot_of_term_[t]].data() + ja * nx_;
        for (std::size_t i = 0; i < nx_; ++i) out(term.h, i) += c * lam[i] * u(term.i, i);
    }
}

void LambdaField::add_to(MatrixTable& table, double scale) const {
    if (table.n() != n_ || table.ages() != ages_ || table.nx() != nx_) {
        throw Error(ErrorCode::ShapeMismatch, "Lambda field and table differ in shape");
    }
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        const auto& term = terms_[t];
        const double c = scale * term.coeff;
        const double* lam = slots_[slot_of_term_[t]].data();
        for (std::size_t j = 0; j < ages_; ++j)
            for (std::size_t i = 0; i < nx_; ++i) table(j, i, term.h, term.i) += c * lam[j * nx_ + i];
    }
}

namespace {

void check_field(const StateField& w, const Mesh& m) {
    if (w.ages() != m.age_nodes() || w.nx() != m.nx) throw Error(ErrorCode::ShapeMismatch, "field grid does not match mesh");
}

std::span<const double> compartment_plane(const std::vector<double>& data, std::size_t c, const Mesh& m) {
    const std::size_t plane = m.age_nodes() * m.nx;
    return {data.data() + c * plane, plane};
}

template <class Fill>
LambdaField build_field(const KernelSet& k, std::size_t n, std::size_t ages, const Mesh& m, Fill fill) {
    LambdaField out(n, ages, m.nx, k.terms);
    std::vector<bool> done(out.slot_count(), false);
    for (std::size_t t = 0; t < k.terms.size(); ++t) {
        const std::size_t s = out.slot_of(t);
        if (done[s]) continue;
        const auto& term = k.terms[t];
        if (term.kernel >= k.kernels.size()) throw Error(ErrorCode::ShapeMismatch, "coupling term names a missing kernel");
        fill(k.kernels[term.kernel], term.j, out.slot(s));
        done[s] = true;
    }
    return out;
}

}  // namespace

LambdaField lambda_op(const KernelSet& k, const StateField& w, const Mesh& m) {
    check_field(w, m);
    return build_field(k, w.n(), m.age_nodes(), m, [&](const ScalarKernel& ker, std::size_t j, std::span<double> out) {
        ker.integrate(compartment_plane(w.values(), j, m), m, out);
    });
}

LambdaField lambda_of_slope(const KernelSet& k, const StateField& w, const Mesh& m) {
    check_field(w, m);
    if (!w.has_slope()) throw Error(ErrorCode::MissingSlope, "Lambda of the slope needs a slope array");
    return build_field(k, w.n(), m.age_nodes(), m, [&](const ScalarKernel& ker, std::size_t j, std::span<double> out) {
        ker.integrate(compartment_plane(w.slopes(), j, m), m, out);
    });
}

LambdaField lambda_at_zero(const KernelSet& k, const StateField& w, const Mesh& m) {
    check_field(w, m);
    return build_field(k, w.n(), 1, m, [&](const ScalarKernel& ker, std::size_t j, std::span<double> out) {
        ker.integrate(compartment_plane(w.values(), j, m), m, out, 0);
    });
}

LambdaField lambda1_op(const KernelSet& k, const MatrixTable& beta0, const StateField& v, const Mesh& m) {
    check_field(v, m);
    const std::size_t n = v.n();
    if (beta0.n() != n || beta0.ages() != m.age_nodes() || beta0.nx() != m.nx) {
        throw Error(ErrorCode::ShapeMismatch, "beta0 table does not match the field");
    }
    // b = int beta0 v dalpha, the births the current state would produce.
    Slice b(n, m.nx);
    integrate_table_add(beta0, v.values(), m, 1.0, b);
    const std::size_t top = m.na;
    const std::size_t cells = m.age_nodes() * m.nx;
    return build_field(k, n, m.age_nodes(), m, [&](const ScalarKernel& ker, std::size_t j, std::span<double> out) {
        ker.integrate_derivative(compartment_plane(v.values(), j, m), m, out);
        std::vector<double> tmp(cells);
        ker.integrate_row(0, b.row(j), m, tmp);
        for (std::size_t q = 0; q < cells; ++q) out[q] += tmp[q];
        ker.integrate_row(top, v.value_line(j, top), m, tmp);
        for (std::size_t q = 0; q < cells; ++q) out[q] -= tmp[q];
    });
}

LambdaField lambda2_op(const KernelSet& k, const Slice& g0, const Mesh& m) {
    if (g0.nx() != m.nx) throw Error(ErrorCode::ShapeMismatch, "g0 slice does not match mesh");
    return build_field(k, g0.n(), m.age_nodes(), m, [&](const ScalarKernel& ker, std::size_t j, std::span<double> out) {
        ker.integrate_row(0, g0.row(j), m, out);
    });
}

StateField delta_lambda_apply(const KernelSet& k, const MatrixTable& beta0, const StateField& v, const Slice& g0,
                              const StateField& w, const Mesh& m) {
    check_field(v, m);
    check_field(w, m);
    if (!v.same_shape(w)) throw Error(ErrorCode::ShapeMismatch, "v and w shapes differ");
    if (!v.has_slope() || !w.has_slope()) throw Error(ErrorCode::MissingSlope, "dLambda needs slopes of v and w");
    if (g0.n() != v.n()) throw Error(ErrorCode::ShapeMismatch, "g0 compartments differ from the field");
    StateField out(v.n(), v.ages(), v.nx(), false);
    if (k.empty()) return out;
    lambda_op(k, v, m).apply_add(w.slopes(), 1.0, out.values());
    lambda_of_slope(k, v, m).apply_add(w.values(), 1.0, out.values());
    lambda1_op(k, beta0, v, m).apply_add(w.values(), 1.0, out.values());
    lambda2_op(k, g0, m).apply_add(w.values(), 1.0, out.values());
    return out;
}

void integrate_table_add(const MatrixTable& table, std::span<const double> u, const Mesh& m, double scale, Slice& out,
                         std::size_t first_age) {
    const std::size_t n = table.n();
    const std::size_t ages = m.age_nodes();
    const std::size_t nx = m.nx;
    if (table.ages() != ages || table.nx() != nx || u.size() != n * ages * nx || out.n() != n || out.nx() != nx) {
        throw Error(ErrorCode::ShapeMismatch, "table integration shapes differ");
    }
    const auto wa = age_weights(m);
    for (std::size_t j = first_age; j < ages; ++j) {
        const double wj = scale * wa[j];
        for (std::size_t i = 0; i < nx; ++i) {
            const auto blk = table.block(j, i);
            for (std::size_t r = 0; r < n; ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < n; ++c) acc += blk[r * n + c] * u[(c * ages + j) * nx + i];
                out(r, i) += wj * acc;
            }
        }
    }
}

Slice g_op(const LambdaField& lambda_v, const MatrixTable& beta0, const MatrixTable& beta1, const StateField& w,
           const Slice& g0, const Mesh& m) {
    check_field(w, m);
    const std::size_t n = w.n();
    const std::size_t nx = m.nx;
    if (lambda_v.ages() != m.age_nodes() || lambda_v.n() != n || g0.n() != n || g0.nx() != nx) {
        throw Error(ErrorCode::ShapeMismatch, "G operator arguments differ in shape");
    }
    if (beta1.n() != n || beta1.ages() != m.age_nodes() || beta1.nx() != nx) {
        throw Error(ErrorCode::ShapeMismatch, "beta1 table does not match the field");
    }
    const auto wa = age_weights(m);
    Slice out(n, nx);
    for (std::size_t j = 0; j < m.age_nodes(); ++j) {
        Slice lw(n, nx);
        lambda_v.apply_row_add(j, w.value_slice(j), 1.0, lw);
        for (std::size_t i = 0; i < nx; ++i) {
            const auto blk = beta1.block(j, i);
            for (std::size_t r = 0; r < n; ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < n; ++c) acc += blk[r * n + c] * lw(c, i);
                out(r, i) += wa[j] * acc;
            }
        }
    }
    Slice s = g0;
    integrate_table_add(beta0, w.values(), m, 1.0, s);
    lambda_v.apply_row_add(0, s, -1.0, out);
    return out;
}

Slice g_op(const KernelSet& k, const MatrixTable& beta0, const MatrixTable& beta1, const StateField& v,
           const StateField& w, const Slice& g0, const Mesh& m) {
    check_field(v, m);
    if (!v.same_shape(w)) throw Error(ErrorCode::ShapeMismatch, "v and w shapes differ");
    return g_op(lambda_op(k, v, m), beta0, beta1, w, g0, m);
}

}  // namespace epiwave
