#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "epiwave/birth.hpp"
#include "epiwave/fields.hpp"
#include "epiwave/mesh.hpp"
#include "epiwave/operators.hpp"

namespace epiwave {

// f(compartment, t, a, x); an empty function means no forcing.
using Forcing = std::function<double(std::size_t, double, double, double)>;

struct ModelSpec {
    std::size_t n = 0;
    LinearPart linear;
    KernelSet kernels;
    BirthLaws births;
    StateField y0;  // initial values (slope array unused)
    StateField y1;  // initial transport derivative, held in the values array
    Forcing f;
    double tau = 0.0;

    // Throws ShapeMismatch / InvalidParam when the pieces do not fit the mesh.
    void validate(const Mesh& m) const;
};

struct SolverConfig {
    double picard_tol = 1e-10;
    std::size_t picard_max = 100;
    std::size_t store_every = 1;
    // A time step whose Picard update grows is redone with Anderson mixing of
    // this depth; 0 turns the retry off and PicardDiverged propagates.
    std::size_t anderson_depth = 5;

    void validate() const;
};

struct PicardTrace {
    std::size_t sweeps = 0;
    bool converged = false;
    bool accelerated = false;     // redone with Anderson mixing
    std::vector<double> updates;  // relative X-norm update per sweep
};

// Output of a time-marching run. Slices are kept every store_every steps and
// at the final time; boundary traces and Picard traces for every step.
struct Run {
    Mesh mesh;
    double tau = 0.0;
    std::vector<std::size_t> time_index;
    std::vector<StateField> slices;
    std::vector<Slice> birth_values;              // y(t_k, a = 0), k = 0..nt
    std::vector<Slice> birth_slopes;              // dy(t_k, a = 0)
    std::vector<std::vector<double>> x0_totals;   // int y_c(t_k, a, x = 0) da
    std::vector<PicardTrace> picard;              // steps 1..nt

    const StateField& final_slice() const { return slices.back(); }
    // Largest ratio update[s] / update[s-1] over all steps with s >= from_sweep.
    double max_contraction_ratio(std::size_t from_sweep = 2) const;
    // Steps that hit picard_max without reaching picard_tol.
    std::size_t unconverged_steps() const;
};

}  // namespace epiwave
