#pragma once

#include "epiwave/model.hpp"

namespace epiwave {

// Unrelaxed baseline: the relaxed scheme with tau = 0. spec.tau and spec.y1
// are ignored; the stored slope starts from derived_initial_slope.
Run run_parabolic(const ModelSpec& spec, const SolverConfig& cfg, const Mesh& m);

// sigma Lap y0 - (L + Lambda(y0)) y0 (+ f at t = 0 when present), in the
// values of the returned field.
StateField derived_initial_slope(const ModelSpec& spec, const Mesh& m);

}  // namespace epiwave
