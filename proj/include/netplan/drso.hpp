#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "netplan/ambiguity.hpp"
#include "netplan/formulations.hpp"

namespace netplan {

/// Nelder-Mead settings for the convex outer search over d~. Zeros pick the
/// documented defaults (max_iterations 5000*K, spread tolerance
/// 1e-4*(1+|best|), initial point mu).
struct DrsoConfig {
  std::int64_t max_iterations = 0;
  double simplex_tolerance = 0.0;
  std::vector<double> initial_point;
  int restarts = 2;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  CapacityMode capacity_mode = CapacityMode::Shared;
};

struct DrsoSolution {
  PlanSolution plan;            // x and flows from G(d~*), satisfied = d~*
  std::vector<double> d_tilde;  // d~* per commodity
  double nature_value = 0.0;    // sum_k N(d~*_k)
  double objective = 0.0;       // capacity cost + phi * nature_value
  std::int64_t iterations = 0;
  std::int64_t f_evaluations = 0;
  bool converged = false;
};

/// G(d~): optimal value of the capacity subproblem.
double capacity_cost(const Instance& inst, std::span<const double> d_tilde,
                     CapacityMode mode = CapacityMode::Shared);

/// F(d~) = G(d~) + phi * sum_k N(d~_k). Convex in d~.
double objective_f(const Instance& inst, std::span<const MomentInfo> moments,
                   std::span<const double> d_tilde,
                   CapacityMode mode = CapacityMode::Shared);

/// Minimizes F by Nelder-Mead with candidate points projected onto d~ >= 0,
/// then re-extracts the plan from G at the best point found. Non-convergence
/// within the iteration budget is reported through `converged`, never
/// silently.
DrsoSolution solve_drso(const Instance& inst, std::span<const MomentInfo> moments,
                        const DrsoConfig& cfg = {});

}  // namespace netplan
