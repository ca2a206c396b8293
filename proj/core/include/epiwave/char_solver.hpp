#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "epiwave/fields.hpp"
#include "epiwave/mesh.hpp"
#include "epiwave/operators.hpp"

namespace epiwave {

// State along one characteristic: v and its derivative w = v_h.
struct CharState {
    Slice v;
    Slice w;
};

// Operator samples at the age node the step lands on.
struct StepContext {
    double tau = 0.0;
    std::size_t a_index = 0;
    std::span<const double> L_here;      // nx blocks of n x n, row-major
    std::span<const double> L_a_here;    // same layout
    std::span<const double> sigma_here;  // n diffusivities
    const Slice* f_here = nullptr;       // forcing; null means zero
};

StepContext context_at(const LinearPart& lin, std::size_t a_index, double tau, const Slice* f = nullptr);

// One backward Euler step of v_h = w,
//   tau w_h = sigma Lap v + f - (1 + tau L) w - (L + tau L_a) v,
// with everything on the right taken at the new level.
CharState step(const CharState& state, const StepContext& ctx, const Mesh& m);

// Trajectory of step() from (init_v, init_w); ctxs[h] and forcing[h] drive the
// step from level h to h + 1. forcing may be empty (zero forcing).
std::vector<CharState> propagate_characteristic(const Slice& init_v, const Slice& init_w, std::span<const Slice> forcing,
                                                std::span<const StepContext> ctxs, const Mesh& m);

}  // namespace epiwave
