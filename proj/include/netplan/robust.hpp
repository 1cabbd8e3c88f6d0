#pragma once

#include "netplan/formulations.hpp"

namespace netplan {

/// Solves the discrete-uncertainty robust model in one monolithic LP and
/// returns the plan: expansions, per-scenario flows, capacity cost, the
/// worst-case outsourcing bill omega and their sum. LP failures surface as
/// SolveError.
///
/// basis_io, when given, seeds the solve with a starting basis (ignored if
/// inconsistent) and receives the optimal basis back; useful across repeated
/// solves of structurally identical models.
PlanSolution solve_robust(const Instance& inst, const UncertaintySet& uset,
                          CapacityMode mode = CapacityMode::Shared,
                          std::vector<unsigned char>* basis_io = nullptr);

}  // namespace netplan
