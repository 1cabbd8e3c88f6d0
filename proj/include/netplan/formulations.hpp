#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netplan/lp.hpp"
#include "netplan/network.hpp"

namespace netplan {

/// A solver step that should have produced a usable result but did not.
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::vector<double> demands;  // one entry per commodity
};

/// Discrete uncertainty set: the scenarios the robust model protects against.
struct UncertaintySet {
  std::vector<Scenario> scenarios;
};

/// Capacity rows come in two readings: the standard shared multi-commodity
/// constraint sum_k f_a^k <= u_a + x_a, or one row per commodity. Shared is
/// the default everywhere.
enum class CapacityMode { Shared, PerCommodity };

enum class ModelKind { Nominal, Robust, Subproblem, Evaluation };

struct PlanSolution {
  ModelKind model = ModelKind::Nominal;
  std::vector<double> expansions;                               // x_a, arc order
  std::vector<std::vector<double>> flows;                       // [k][arc]
  std::vector<std::vector<std::vector<double>>> scenario_flows;  // [scenario][k][arc]
  std::vector<double> satisfied;                                // d~ per commodity
  std::vector<double> shortfalls;                               // tau per commodity
  std::vector<double> scenario_shortfalls;                      // robust: sum_k tau per scenario
  double capacity_cost = 0.0;      // sum c_a x_a
  double outsourcing_value = 0.0;  // model-specific second-stage term
  double total_objective = 0.0;
};

/// Nominal expansion model for one known demand vector: minimize expansion
/// cost plus phi times the linearized positive-part shortfalls.
LinearProgram build_nominal(const Instance& inst, const Scenario& demand,
                            CapacityMode mode = CapacityMode::Shared);

/// Robust model over a discrete uncertainty set: per-scenario flow and
/// shortfall copies, a single epigraph variable bounding every scenario's
/// outsourcing bill.
LinearProgram build_robust(const Instance& inst, const UncertaintySet& uset,
                           CapacityMode mode = CapacityMode::Shared);

/// G(d~): cheapest expansion that routes exactly d~^k from s^k to t^k for
/// every commodity, in equality flow-balance form.
LinearProgram build_capacity_subproblem(const Instance& inst, std::span<const double> d_tilde,
                                        CapacityMode mode = CapacityMode::Shared);

/// G'(d~): the soft variant charging psi per unit of absolute deviation
/// between d~^k and the flow arriving at t^k. Agrees with G for
/// psi >= sum_a c_a; kept as the independent second route onto G.
LinearProgram build_penalty_subproblem(const Instance& inst, std::span<const double> d_tilde,
                                       double psi,
                                       CapacityMode mode = CapacityMode::Shared);
double default_penalty_psi(const Instance& inst);  // 2 * sum_a c_a

/// Out-of-sample evaluation model: capacity u + x is fixed, route what fits,
/// outsource the rest; minimizes total outsourced demand.
LinearProgram build_evaluation(const Instance& inst, std::span<const double> expansions,
                               const Scenario& demand,
                               CapacityMode mode = CapacityMode::Shared);

/// Decodes an optimal solution back into domain terms using the fixed
/// variable-naming convention of the builders above. Throws SolveError when
/// sol is not optimal.
PlanSolution extract_plan(const Instance& inst, const LinearProgram& lp, const LpSolution& sol,
                          ModelKind kind);

}  // namespace netplan
