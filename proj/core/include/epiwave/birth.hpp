#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "epiwave/fields.hpp"
#include "epiwave/mesh.hpp"
#include "epiwave/operators.hpp"

namespace epiwave {

// Birth laws at a = 0:
//   y(a=0)  = int beta0 y dalpha + g0
//   dy(a=0) = int beta1 dy + betaL y + beta_grad d_x y dalpha + G + g1
struct BirthLaws {
    MatrixTable beta0;
    MatrixTable beta1;
    MatrixTable betaL;
    MatrixTable beta_grad;
    std::vector<Slice> g0;  // per time index; empty means zero
    std::vector<Slice> g1;

    static BirthLaws zeros(std::size_t n, const Mesh& m);

    Slice g0_at(std::size_t k, std::size_t n, std::size_t nx) const;
    Slice g1_at(std::size_t k, std::size_t n, std::size_t nx) const;
};

struct BirthValues {
    Slice B0;
    Slice B1;
};

// Coefficients that make the first-order law the transport derivative of the
// zeroth-order law beta0 = q1 * beta. beta is an n x n table on the (a, x) grid.
BirthLaws make_compatible(const MatrixTable& beta, const LinearPart& lin, double q1, double q2, const Mesh& m);

// Solves both laws at one time level. Ages >= 1 of y_slice must hold the new
// values and slopes; the a = 0 row is ignored. The alpha = 0 quadrature weight
// multiplies the unknowns, so each x node solves a small linear system.
BirthValues solve_birth_step(const BirthLaws& laws, const StateField& y_slice, const Slice& g0_now, const Slice& g1_now,
                             const std::optional<Slice>& nonlinear_G, const Mesh& m);

// G(y)(y, g0) for the first-order law.
Slice nonlinear_birth_term(const KernelSet& k, const BirthLaws& laws, const StateField& y_slice, const Slice& g0_now,
                           const Mesh& m);

}  // namespace epiwave
