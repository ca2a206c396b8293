#include "epiwave/char_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "epiwave/error.hpp"

namespace epiwave {

namespace {

constexpr std::size_t kMaxBlock = 8;
constexpr double kRcondFloor = 1e-14;
constexpr double kInnerTol = 1e-12;
constexpr int kInnerMaxIter = 50;

using Block = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxBlock, kMaxBlock>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxBlock, 1>;

// Block tridiagonal system: diag[i] is n x n, the couplings to x_{i-1} and
// x_{i+1} are diagonal with entries lower[i], upper[i] (length n each).
struct System {
    std::size_t n = 0;
    std::size_t nx = 0;
    std::vector<double> diag;   // nx * n * n
    std::vector<double> lower;  // nx * n
    std::vector<double> upper;  // nx * n
    std::vector<double> rhs;    // nx * n, node-major
};

System assemble(const CharState& s, const StepContext& ctx, const Mesh& m) {
    const std::size_t n = s.v.n();
    const std::size_t nx = m.nx;
    const double tau = ctx.tau;
    const double da = m.da;
    System sys;
    sys.n = n;
    sys.nx = nx;
    sys.diag.assign(nx * n * n, 0.0);
    sys.lower.assign(nx * n, 0.0);
    sys.upper.assign(nx * n, 0.0);
    sys.rhs.assign(nx * n, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
        const double* L = ctx.L_here.data() + i * n * n;
        const double* La = ctx.L_a_here.data() + i * n * n;
        double* D = sys.diag.data() + i * n * n;
        for (std::size_t r = 0; r < n; ++r) {
            const double sc = da * da * ctx.sigma_here[r] / (m.dx * m.dx);
            double acc = tau * s.v(r, i) + tau * da * s.w(r, i) + da * s.v(r, i);
            for (std::size_t c = 0; c < n; ++c) {
                D[r * n + c] = da * tau * L[r * n + c] + da * da * (L[r * n + c] + tau * La[r * n + c]);
                acc += da * tau * L[r * n + c] * s.v(c, i);
            }
            D[r * n + r] += tau + da + 2.0 * sc;
            if (ctx.f_here) acc += da * da * (*ctx.f_here)(r, i);
            sys.rhs[i * n + r] = acc;
            if (i > 0) sys.lower[i * n + r] = (i == nx - 1) ? -2.0 * sc : -sc;
            if (i + 1 < nx) sys.upper[i * n + r] = (i == 0) ? -2.0 * sc : -sc;
        }
    }
    return sys;
}

void singular(std::size_t node, double rcond) {
    throw Error(ErrorCode::SingularSystem,
                "characteristic step matrix is singular at x node " + std::to_string(node) + " (rcond " + std::to_string(rcond) + ")");
}

std::vector<double> solve_block_thomas(const System& sys) {
    const std::size_t n = sys.n;
    const std::size_t nx = sys.nx;
    std::vector<Block> cprime(nx);
    std::vector<Vec> dprime(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        Block M = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            sys.diag.data() + i * n * n, n, n);
        Vec d = Eigen::Map<const Eigen::VectorXd>(sys.rhs.data() + i * n, n);
        if (i > 0) {
            for (std::size_t r = 0; r < n; ++r) {
                const double l = sys.lower[i * n + r];
                M.row(r) -= l * cprime[i - 1].row(r);
                d(r) -= l * dprime[i - 1](r);
            }
        }
        Eigen::PartialPivLU<Block> lu(M);
        const double rc = lu.rcond();
        if (!(rc >= kRcondFloor)) singular(i, rc);
        dprime[i] = lu.solve(d);
        if (i + 1 < nx) {
            Block U = Block::Zero(n, n);
            for (std::size_t r = 0; r < n; ++r) U(r, r) = sys.upper[i * n + r];
            cprime[i] = lu.solve(U);
        }
    }
    std::vector<double> x(nx * n);
    Vec next = dprime[nx - 1];
    for (std::size_t r = 0; r < n; ++r) x[(nx - 1) * n + r] = next(r);
    for (std::size_t i = nx - 1; i-- > 0;) {
        Vec cur = dprime[i] - cprime[i] * next;
        for (std::size_t r = 0; r < n; ++r) x[i * n + r] = cur(r);
        next = cur;
    }
    return x;
}

// Scalar tridiagonal solve; sub[0] and sup[nx-1] are ignored.
void thomas(std::vector<double> sub, std::vector<double> dia, std::vector<double> sup, std::vector<double>& d,
            std::size_t node_hint) {
    const std::size_t nx = dia.size();
    for (std::size_t i = 0; i < nx; ++i) {
        if (i > 0) {
            const double f = sub[i] / dia[i - 1];
            dia[i] -= f * sup[i - 1];
            d[i] -= f * d[i - 1];
        }
        if (!(std::abs(dia[i]) > kRcondFloor * (std::abs(sub[i]) + std::abs(sup[i]) + std::abs(dia[i])))) {
            singular(node_hint + i, 0.0);
        }
    }
    d[nx - 1] /= dia[nx - 1];
    for (std::size_t i = nx - 1; i-- > 0;) d[i] = (d[i] - sup[i] * d[i + 1]) / dia[i];
}

// Compartments coupled through the off-diagonal part of each block, iterated
// Gauss-Seidel style around scalar tridiagonal solves.
std::vector<double> solve_inner_picard(const System& sys) {
    const std::size_t n = sys.n;
    const std::size_t nx = sys.nx;
    std::vector<double> x(nx * n, 0.0);
    std::vector<double> sub(nx), dia(nx), sup(nx), d(nx);
    for (int it = 0; it < kInnerMaxIter; ++it) {
        double change = 0.0;
        double scale = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t i = 0; i < nx; ++i) {
                const double* D = sys.diag.data() + i * n * n;
                sub[i] = sys.lower[i * n + r];
                sup[i] = sys.upper[i * n + r];
                dia[i] = D[r * n + r];
                double acc = sys.rhs[i * n + r];
                for (std::size_t c = 0; c < n; ++c)
                    if (c != r) acc -= D[r * n + c] * x[i * n + c];
                d[i] = acc;
            }
            thomas(sub, dia, sup, d, 0);
            for (std::size_t i = 0; i < nx; ++i) {
                change = std::max(change, std::abs(d[i] - x[i * n + r]));
                scale = std::max(scale, std::abs(d[i]));
                x[i * n + r] = d[i];
            }
        }
        if (change <= kInnerTol * std::max(1.0, scale)) return x;
    }
    throw Error(ErrorCode::SingularSystem, "compartment coupling iteration did not converge in " +
                                               std::to_string(kInnerMaxIter) + " sweeps");
}

}  // namespace

StepContext context_at(const LinearPart& lin, std::size_t a_index, double tau, const Slice* f) {
    const std::size_t n = lin.n();
    StepContext ctx;
    ctx.tau = tau;
    ctx.a_index = a_index;
    ctx.L_here = lin.L.age_row(a_index);
    ctx.L_a_here = lin.L_a.age_row(a_index);
    ctx.sigma_here = std::span<const double>(lin.sigma.data() + a_index * n, n);
    ctx.f_here = f;
    return ctx;
}

CharState step(const CharState& state, const StepContext& ctx, const Mesh& m) {
    const std::size_t n = state.v.n();
    const std::size_t nx = m.nx;
    if (state.v.nx() != nx || state.w.nx() != nx || state.w.n() != n) {
        throw Error(ErrorCode::ShapeMismatch, "characteristic state does not match mesh");
    }
    if (ctx.L_here.size() != nx * n * n || ctx.L_a_here.size() != nx * n * n || ctx.sigma_here.size() != n) {
        throw Error(ErrorCode::ShapeMismatch, "step context samples have wrong size");
    }
    if (ctx.f_here && (ctx.f_here->n() != n || ctx.f_here->nx() != nx)) {
        throw Error(ErrorCode::ShapeMismatch, "forcing slice has wrong shape");
    }
    if (ctx.tau < 0.0) throw Error(ErrorCode::InvalidParam, "tau must be nonnegative");

    const System sys = assemble(state, ctx, m);
    const std::vector<double> x = (n <= kMaxBlock) ? solve_block_thomas(sys) : solve_inner_picard(sys);

    CharState out{Slice(n, nx), Slice(n, nx)};
    const double inv = 1.0 / m.da;
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t r = 0; r < n; ++r) {
            const double vn = x[i * n + r];
            const double wn = (vn - state.v(r, i)) * inv;
            if (!std::isfinite(vn) || !std::isfinite(wn)) {
                throw Error(ErrorCode::NonFinite, "non-finite value after characteristic step at age node " +
                                                      std::to_string(ctx.a_index));
            }
            out.v(r, i) = vn;
            out.w(r, i) = wn;
        }
    return out;
}

std::vector<CharState> propagate_characteristic(const Slice& init_v, const Slice& init_w, std::span<const Slice> forcing,
                                                std::span<const StepContext> ctxs, const Mesh& m) {
    if (!forcing.empty() && forcing.size() != ctxs.size()) {
        throw Error(ErrorCode::LengthMismatch, "forcing series and context series differ in length");
    }
    std::vector<CharState> traj;
    traj.reserve(ctxs.size() + 1);
    traj.push_back({init_v, init_w});
    for (std::size_t h = 0; h < ctxs.size(); ++h) {
        StepContext ctx = ctxs[h];
        if (!forcing.empty()) ctx.f_here = &forcing[h];
        traj.push_back(step(traj.back(), ctx, m));
    }
    return traj;
}

}  // namespace epiwave
