#include "netplan/robust.hpp"

namespace netplan {

PlanSolution solve_robust(const Instance& inst, const UncertaintySet& uset, CapacityMode mode,
                          std::vector<unsigned char>* basis_io) {
  const auto lp = build_robust(inst, uset, mode);
  SimplexOptions opts;
  if (basis_io) opts.warm_basis = *basis_io;
  const auto sol = solve_lp(lp, opts);
  if (sol.status != LpStatus::Optimal)
    throw SolveError(std::string("robust model came back ") + to_string(sol.status));
  if (basis_io) *basis_io = sol.basis;
  return extract_plan(inst, lp, sol, ModelKind::Robust);
}

}  // namespace netplan
