#pragma once

#include "epiwave/model.hpp"

namespace epiwave::detail {

// Shared time-marching engine. initial carries y0 in its values and the
// initial slope in its slopes; tau = 0 gives the parabolic scheme.
Run march(const ModelSpec& spec, const StateField& initial, double tau, const SolverConfig& cfg, const Mesh& m);

}  // namespace epiwave::detail
