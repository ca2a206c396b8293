#pragma once

#include "epiwave/model.hpp"

namespace epiwave {

// Marches the relaxed system from (y0, y1) with the spec's tau.
Run run_relaxed(const ModelSpec& spec, const SolverConfig& cfg, const Mesh& m);

// Sup over interior nodes of the strong-form residual
//   tau d^2y + (1 + tau L) dy + (L + tau L_a) y - sigma Lap y - f + (1 + tau d) Lambda(y, g0) y,
// with d and d^2 taken as centred differences along characteristics. Needs
// three consecutive stored time levels; returns 0 when none exist.
double residual_check(const Run& run, const ModelSpec& spec, const Mesh& m);

}  // namespace epiwave
