#include "netplan/drso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace netplan {

double capacity_cost(const Instance& inst, std::span<const double> d_tilde, CapacityMode mode) {
  const auto lp = build_capacity_subproblem(inst, d_tilde, mode);
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal)
    throw SolveError(std::string("capacity subproblem came back ") + to_string(sol.status));
  return sol.objective_value;
}

double objective_f(const Instance& inst, std::span<const MomentInfo> moments,
                   std::span<const double> d_tilde, CapacityMode mode) {
  if (moments.size() != static_cast<std::size_t>(inst.num_commodities()))
    throw std::invalid_argument("moments length does not match commodity count");
  return capacity_cost(inst, d_tilde, mode) +
         inst.penalty * multi_commodity_shortfall(d_tilde, moments);
}

namespace {

struct Vertex {
  std::vector<double> point;
  double value = 0.0;
};

void clamp_nonnegative(std::vector<double>& p) {
  for (double& v : p) v = std::max(v, 0.0);
}

}  // namespace

DrsoSolution solve_drso(const Instance& inst, std::span<const MomentInfo> moments,
                        const DrsoConfig& cfg) {
  const int K = inst.num_commodities();
  if (moments.size() != static_cast<std::size_t>(K))
    throw std::invalid_argument("moments length does not match commodity count");
  if (!cfg.initial_point.empty() && static_cast<int>(cfg.initial_point.size()) != K)
    throw std::invalid_argument("initial point length does not match commodity count");
  if (cfg.restarts < 0) throw std::invalid_argument("restarts must be nonnegative");

  const std::int64_t max_iters =
      cfg.max_iterations > 0 ? cfg.max_iterations : static_cast<std::int64_t>(5000) * K;

  DrsoSolution out;
  // consecutive G solves differ only in their right-hand sides, so each one
  // warm-starts from the previous basis
  SimplexOptions lp_opts;
  auto evaluate = [&](std::vector<double>& p) {
    clamp_nonnegative(p);
    ++out.f_evaluations;
    const auto lp = build_capacity_subproblem(inst, p, cfg.capacity_mode);
    const auto sol = solve_lp(lp, lp_opts);
    if (sol.status != LpStatus::Optimal)
      throw SolveError(std::string("capacity subproblem came back ") + to_string(sol.status));
    lp_opts.warm_basis = sol.basis;
    return sol.objective_value + inst.penalty * multi_commodity_shortfall(p, moments);
  };

  std::vector<double> base =
      cfg.initial_point.empty()
          ? [&] {
              std::vector<double> mu(K);
              for (int k = 0; k < K; ++k) mu[k] = moments[k].mean;
              return mu;
            }()
          : cfg.initial_point;
  clamp_nonnegative(base);

  std::vector<double> best_point = base;
  double best_value = 0.0;
  bool have_best = false;

  for (int round = 0; round <= cfg.restarts; ++round) {
    // fresh simplex around the incumbent: base plus one bump per coordinate
    std::vector<Vertex> simplex(K + 1);
    simplex[0].point = best_point;
    simplex[0].value = evaluate(simplex[0].point);
    for (int k = 0; k < K; ++k) {
      simplex[k + 1].point = best_point;
      simplex[k + 1].point[k] += 0.25 * std::max(moments[k].mean, 1e-3);
      simplex[k + 1].value = evaluate(simplex[k + 1].point);
    }
    if (!have_best || simplex[0].value < best_value) {
      best_value = simplex[0].value;
      best_point = simplex[0].point;
      have_best = true;
    }

    bool round_converged = false;
    while (out.iterations < max_iters) {
      std::sort(simplex.begin(), simplex.end(),
                [](const Vertex& a, const Vertex& b) { return a.value < b.value; });
      if (simplex.front().value < best_value) {
        best_value = simplex.front().value;
        best_point = simplex.front().point;
      }
      const double spread = simplex.back().value - simplex.front().value;
      const double tol = cfg.simplex_tolerance > 0.0
                             ? cfg.simplex_tolerance
                             : 1e-4 * (1.0 + std::abs(best_value));
      if (spread < tol) {
        round_converged = true;
        break;
      }
      ++out.iterations;

      std::vector<double> centroid(K, 0.0);
      for (int i = 0; i < K; ++i)
        for (int k = 0; k < K; ++k) centroid[k] += simplex[i].point[k] / K;
      Vertex& worst = simplex.back();
      const double f_best = simplex.front().value;
      const double f_second = simplex[K - 1].value;  // worst of the kept vertices

      auto combine = [&](double coeff) {
        std::vector<double> p(K);
        for (int k = 0; k < K; ++k) p[k] = centroid[k] + coeff * (centroid[k] - worst.point[k]);
        return p;
      };

      std::vector<double> reflected = combine(cfg.reflection);
      const double f_reflected = evaluate(reflected);
      if (f_reflected < f_best) {
        std::vector<double> expanded = combine(cfg.expansion);
        const double f_expanded = evaluate(expanded);
        if (f_expanded < f_reflected)
          worst = {std::move(expanded), f_expanded};
        else
          worst = {std::move(reflected), f_reflected};
        continue;
      }
      if (f_reflected < f_second) {
        worst = {std::move(reflected), f_reflected};
        continue;
      }
      if (f_reflected < worst.value) {
        // outside contraction
        std::vector<double> p(K);
        for (int k = 0; k < K; ++k)
          p[k] = centroid[k] + cfg.contraction * (reflected[k] - centroid[k]);
        const double fp = evaluate(p);
        if (fp <= f_reflected) {
          worst = {std::move(p), fp};
          continue;
        }
      } else {
        // inside contraction
        std::vector<double> p = combine(-cfg.contraction);
        const double fp = evaluate(p);
        if (fp < worst.value) {
          worst = {std::move(p), fp};
          continue;
        }
      }
      // shrink towards the best vertex
      for (int i = 1; i <= K; ++i) {
        for (int k = 0; k < K; ++k)
          simplex[i].point[k] =
              simplex[0].point[k] + cfg.shrink * (simplex[i].point[k] - simplex[0].point[k]);
        simplex[i].value = evaluate(simplex[i].point);
      }
    }
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.value < b.value; });
    if (simplex.front().value < best_value) {
      best_value = simplex.front().value;
      best_point = simplex.front().point;
    }
    out.converged = round_converged;
  }

  out.d_tilde = best_point;
  const auto lp = build_capacity_subproblem(inst, best_point, cfg.capacity_mode);
  const auto sol = solve_lp(lp, lp_opts);
  if (sol.status != LpStatus::Optimal)
    throw SolveError(std::string("capacity subproblem at d~* came back ") +
                     to_string(sol.status));
  out.plan = extract_plan(inst, lp, sol, ModelKind::Subproblem);
  out.plan.satisfied = best_point;
  out.nature_value = multi_commodity_shortfall(best_point, moments);
  out.objective = out.plan.capacity_cost + inst.penalty * out.nature_value;
  out.plan.outsourcing_value = inst.penalty * out.nature_value;
  out.plan.total_objective = out.objective;
  return out;
}

}  // namespace netplan
