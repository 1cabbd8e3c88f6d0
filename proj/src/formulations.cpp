#include "netplan/formulations.hpp"

#include <cmath>

namespace netplan {

namespace {

std::string xname(const std::string& arc) { return "x[" + arc + "]"; }
std::string fname(int k, const std::string& arc) {
  return "f[" + std::to_string(k) + "][" + arc + "]";
}
std::string fname(int k, int s, const std::string& arc) {
  return "f[" + std::to_string(k) + "][" + std::to_string(s) + "][" + arc + "]";
}
std::string tauname(int k) { return "tau[" + std::to_string(k) + "]"; }
std::string tauname(int k, int s) {
  return "tau[" + std::to_string(k) + "][" + std::to_string(s) + "]";
}
std::string dtilname(int k) { return "dtil[" + std::to_string(k) + "]"; }
std::string devname(int k) { return "dev[" + std::to_string(k) + "]"; }

void check_dimension(const Instance& inst, std::size_t got, const char* what) {
  if (got != static_cast<std::size_t>(inst.num_commodities()))
    throw std::invalid_argument(std::string(what) + ": expected " +
                                std::to_string(inst.num_commodities()) + " entries, got " +
                                std::to_string(got));
}

void check_nonnegative(std::span<const double> v, const char* what) {
  for (double d : v)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw std::invalid_argument(std::string(what) + " must be nonnegative");
}

// x variables in arc order; returns their indices
std::vector<int> add_expansion_vars(LinearProgram& lp, const Instance& inst) {
  std::vector<int> x;
  x.reserve(inst.network.num_arcs());
  for (const Arc& a : inst.network.arcs())
    x.push_back(lp.add_variable(xname(a.id), 0.0, kInfinity, a.expansion_cost));
  return x;
}

// capacity rows for one flow copy: sum_k f_a^k <= u_a + x_a. When x is part
// of the model, pass its indices; otherwise pass expansions as data.
void add_capacity_rows(LinearProgram& lp, const Instance& inst, CapacityMode mode,
                       const std::vector<std::vector<int>>& f,  // [k][arc] variable ids
                       const std::vector<int>* x_vars, std::span<const double> x_data) {
  const int n_arcs = inst.network.num_arcs();
  const int K = inst.num_commodities();
  for (int a = 0; a < n_arcs; ++a) {
    const double cap = inst.network.arcs()[a].base_capacity +
                       (x_vars ? 0.0 : (x_data.empty() ? 0.0 : x_data[a]));
    if (mode == CapacityMode::Shared) {
      const int row = lp.add_constraint(Relation::LessEqual, cap);
      for (int k = 0; k < K; ++k) lp.add_term(row, f[k][a], 1.0);
      if (x_vars) lp.add_term(row, (*x_vars)[a], -1.0);
    } else {
      for (int k = 0; k < K; ++k) {
        const int row = lp.add_constraint(Relation::LessEqual, cap);
        lp.add_term(row, f[k][a], 1.0);
        if (x_vars) lp.add_term(row, (*x_vars)[a], -1.0);
      }
    }
  }
}

// flow conservation at intermediate nodes for one commodity's flow copy;
// equality when strict, else >= 0 (flow may appear only at the source)
void add_intermediate_rows(LinearProgram& lp, const Instance& inst, int k,
                           const std::vector<int>& f, bool strict) {
  const Network& net = inst.network;
  const Commodity& c = inst.commodities[k];
  for (int v = 0; v < net.num_nodes(); ++v) {
    if (v == c.source || v == c.sink) continue;
    if (net.incoming(v).empty() && net.outgoing(v).empty()) continue;
    const int row =
        lp.add_constraint(strict ? Relation::Equal : Relation::GreaterEqual, 0.0);
    for (int a : net.incoming(v)) lp.add_term(row, f[a], 1.0);
    for (int a : net.outgoing(v)) lp.add_term(row, f[a], -1.0);
  }
}

// net inflow at node v: sum of incoming minus outgoing flow variables
void add_net_inflow(LinearProgram& lp, int row, const Network& net, int v,
                    const std::vector<int>& f, double sign = 1.0) {
  for (int a : net.incoming(v)) lp.add_term(row, f[a], sign);
  for (int a : net.outgoing(v)) lp.add_term(row, f[a], -sign);
}

}  // namespace

LinearProgram build_nominal(const Instance& inst, const Scenario& demand, CapacityMode mode) {
  check_dimension(inst, demand.demands.size(), "demand vector");
  check_nonnegative(demand.demands, "demands");
  const Network& net = inst.network;
  const int K = inst.num_commodities();

  LinearProgram lp;
  const std::vector<int> x = add_expansion_vars(lp, inst);
  std::vector<std::vector<int>> f(K);
  for (int k = 0; k < K; ++k) {
    f[k].reserve(net.num_arcs());
    for (const Arc& a : net.arcs()) f[k].push_back(lp.add_variable(fname(k, a.id)));
  }
  for (int k = 0; k < K; ++k) {
    const int tau = lp.add_variable(tauname(k), 0.0, kInfinity, inst.penalty);
    add_intermediate_rows(lp, inst, k, f[k], /*strict=*/false);
    // tau_k >= d_k - (inflow - outflow at the sink)
    const int row = lp.add_constraint(Relation::GreaterEqual, demand.demands[k]);
    lp.add_term(row, tau, 1.0);
    add_net_inflow(lp, row, net, inst.commodities[k].sink, f[k]);
  }
  add_capacity_rows(lp, inst, mode, f, &x, {});
  return lp;
}

LinearProgram build_robust(const Instance& inst, const UncertaintySet& uset, CapacityMode mode) {
  if (uset.scenarios.empty()) throw std::invalid_argument("uncertainty set is empty");
  for (const Scenario& s : uset.scenarios) {
    check_dimension(inst, s.demands.size(), "scenario");
    check_nonnegative(s.demands, "scenario demands");
  }
  const Network& net = inst.network;
  const int K = inst.num_commodities();
  const int N = static_cast<int>(uset.scenarios.size());

  LinearProgram lp;
  const std::vector<int> x = add_expansion_vars(lp, inst);
  // f[k][s][a], tau[k][s], one epigraph variable omega
  std::vector<std::vector<std::vector<int>>> f(K);
  std::vector<std::vector<int>> tau(K);
  for (int k = 0; k < K; ++k) {
    f[k].resize(N);
    tau[k].resize(N);
    for (int s = 0; s < N; ++s) {
      f[k][s].reserve(net.num_arcs());
      for (const Arc& a : net.arcs()) f[k][s].push_back(lp.add_variable(fname(k, s, a.id)));
      tau[k][s] = lp.add_variable(tauname(k, s));
    }
  }
  const int omega = lp.add_variable("omega", 0.0, kInfinity, 1.0);

  for (int s = 0; s < N; ++s) {
    std::vector<std::vector<int>> fs(K);
    for (int k = 0; k < K; ++k) fs[k] = f[k][s];
    for (int k = 0; k < K; ++k) {
      add_intermediate_rows(lp, inst, k, fs[k], /*strict=*/false);
      const int row = lp.add_constraint(Relation::GreaterEqual, uset.scenarios[s].demands[k]);
      lp.add_term(row, tau[k][s], 1.0);
      add_net_inflow(lp, row, net, inst.commodities[k].sink, fs[k]);
    }
    add_capacity_rows(lp, inst, mode, fs, &x, {});
    // omega >= phi * sum_k tau[k][s]
    const int epi = lp.add_constraint(Relation::GreaterEqual, 0.0);
    lp.add_term(epi, omega, 1.0);
    for (int k = 0; k < K; ++k) lp.add_term(epi, tau[k][s], -inst.penalty);
  }
  return lp;
}

LinearProgram build_capacity_subproblem(const Instance& inst, std::span<const double> d_tilde,
                                        CapacityMode mode) {
  check_dimension(inst, d_tilde.size(), "d_tilde");
  check_nonnegative(d_tilde, "d_tilde");
  const Network& net = inst.network;
  const int K = inst.num_commodities();

  LinearProgram lp;
  const std::vector<int> x = add_expansion_vars(lp, inst);
  std::vector<std::vector<int>> f(K);
  for (int k = 0; k < K; ++k) {
    f[k].reserve(net.num_arcs());
    for (const Arc& a : net.arcs()) f[k].push_back(lp.add_variable(fname(k, a.id)));
  }
  for (int k = 0; k < K; ++k) {
    const Commodity& c = inst.commodities[k];
    add_intermediate_rows(lp, inst, k, f[k], /*strict=*/true);
    int row = lp.add_constraint(Relation::Equal, d_tilde[k]);
    add_net_inflow(lp, row, net, c.sink, f[k]);
    row = lp.add_constraint(Relation::Equal, -d_tilde[k]);
    add_net_inflow(lp, row, net, c.source, f[k]);
  }
  add_capacity_rows(lp, inst, mode, f, &x, {});
  return lp;
}

LinearProgram build_penalty_subproblem(const Instance& inst, std::span<const double> d_tilde,
                                       double psi, CapacityMode mode) {
  check_dimension(inst, d_tilde.size(), "d_tilde");
  check_nonnegative(d_tilde, "d_tilde");
  if (!(psi > 0)) throw std::invalid_argument("psi must be positive");
  const Network& net = inst.network;
  const int K = inst.num_commodities();

  LinearProgram lp;
  const std::vector<int> x = add_expansion_vars(lp, inst);
  std::vector<std::vector<int>> f(K);
  for (int k = 0; k < K; ++k) {
    f[k].reserve(net.num_arcs());
    for (const Arc& a : net.arcs()) f[k].push_back(lp.add_variable(fname(k, a.id)));
  }
  for (int k = 0; k < K; ++k) {
    const Commodity& c = inst.commodities[k];
    add_intermediate_rows(lp, inst, k, f[k], /*strict=*/true);
    const int dev = lp.add_variable(devname(k), 0.0, kInfinity, psi);
    // dev_k >= |d~_k - arrival_k|, linearized from both sides
    int row = lp.add_constraint(Relation::GreaterEqual, d_tilde[k]);
    lp.add_term(row, dev, 1.0);
    add_net_inflow(lp, row, net, c.sink, f[k]);
    row = lp.add_constraint(Relation::GreaterEqual, -d_tilde[k]);
    lp.add_term(row, dev, 1.0);
    add_net_inflow(lp, row, net, c.sink, f[k], -1.0);
  }
  add_capacity_rows(lp, inst, mode, f, &x, {});
  return lp;
}

double default_penalty_psi(const Instance& inst) {
  double total = 0.0;
  for (const Arc& a : inst.network.arcs()) total += a.expansion_cost;
  return 2.0 * total;
}

LinearProgram build_evaluation(const Instance& inst, std::span<const double> expansions,
                               const Scenario& demand, CapacityMode mode) {
  check_dimension(inst, demand.demands.size(), "demand vector");
  check_nonnegative(demand.demands, "demands");
  if (expansions.size() != static_cast<std::size_t>(inst.network.num_arcs()))
    throw std::invalid_argument("expansion vector length does not match arc count");
  check_nonnegative(expansions, "expansions");
  const Network& net = inst.network;
  const int K = inst.num_commodities();

  LinearProgram lp;
  std::vector<std::vector<int>> f(K);
  for (int k = 0; k < K; ++k) {
    f[k].reserve(net.num_arcs());
    for (const Arc& a : net.arcs()) f[k].push_back(lp.add_variable(fname(k, a.id)));
  }
  for (int k = 0; k < K; ++k) {
    const Commodity& c = inst.commodities[k];
    // capping satisfied demand at the scenario demand pins sum_k dtil at the
    // optimum (= total demand - total shortfall), so reported satisfied
    // demand never depends on which alternate optimum the solver lands on
    const int dtil = lp.add_variable(dtilname(k), 0.0, demand.demands[k]);
    const int tau = lp.add_variable(tauname(k), 0.0, kInfinity, 1.0);
    add_intermediate_rows(lp, inst, k, f[k], /*strict=*/true);
    int row = lp.add_constraint(Relation::Equal, 0.0);
    add_net_inflow(lp, row, net, c.sink, f[k]);
    lp.add_term(row, dtil, -1.0);
    row = lp.add_constraint(Relation::Equal, 0.0);
    add_net_inflow(lp, row, net, c.source, f[k]);
    lp.add_term(row, dtil, 1.0);
    row = lp.add_constraint(Relation::GreaterEqual, demand.demands[k]);
    lp.add_term(row, tau, 1.0);
    lp.add_term(row, dtil, 1.0);
  }
  add_capacity_rows(lp, inst, mode, f, nullptr, expansions);
  return lp;
}

PlanSolution extract_plan(const Instance& inst, const LinearProgram& lp, const LpSolution& sol,
                          ModelKind kind) {
  if (sol.status != LpStatus::Optimal)
    throw SolveError(std::string("cannot extract a plan from a ") + to_string(sol.status) +
                     " solution");
  const Network& net = inst.network;
  const int K = inst.num_commodities();
  const int A = net.num_arcs();

  PlanSolution plan;
  plan.model = kind;
  int mapped = 0;
  auto value_of = [&](const std::string& name) {
    const int j = lp.find_variable(name);
    if (j < 0) throw SolveError("missing variable '" + name + "' in solved model");
    ++mapped;
    return sol.primal[j];
  };

  if (kind != ModelKind::Evaluation) {
    plan.expansions.reserve(A);
    for (const Arc& a : net.arcs()) plan.expansions.push_back(value_of(xname(a.id)));
    for (int a = 0; a < A; ++a)
      plan.capacity_cost += net.arcs()[a].expansion_cost * plan.expansions[a];
  }

  switch (kind) {
    case ModelKind::Nominal: {
      plan.flows.assign(K, std::vector<double>(A, 0.0));
      plan.shortfalls.assign(K, 0.0);
      plan.satisfied.assign(K, 0.0);
      double total_tau = 0.0;
      for (int k = 0; k < K; ++k) {
        for (int a = 0; a < A; ++a) plan.flows[k][a] = value_of(fname(k, net.arcs()[a].id));
        plan.shortfalls[k] = value_of(tauname(k));
        total_tau += plan.shortfalls[k];
      }
      plan.outsourcing_value = inst.penalty * total_tau;
      break;
    }
    case ModelKind::Robust: {
      // scenario count from the variable layout: x + N*(K*A + K) + 1
      const int N =
          static_cast<int>((lp.num_variables() - A - 1) / (static_cast<long long>(K) * (A + 1)));
      plan.scenario_flows.assign(N, std::vector<std::vector<double>>(K, std::vector<double>(A)));
      plan.scenario_shortfalls.assign(N, 0.0);
      for (int k = 0; k < K; ++k) {
        for (int s = 0; s < N; ++s) {
          for (int a = 0; a < A; ++a)
            plan.scenario_flows[s][k][a] = value_of(fname(k, s, net.arcs()[a].id));
          plan.scenario_shortfalls[s] += value_of(tauname(k, s));
        }
      }
      plan.outsourcing_value = value_of("omega");
      break;
    }
    case ModelKind::Subproblem: {
      plan.flows.assign(K, std::vector<double>(A, 0.0));
      for (int k = 0; k < K; ++k)
        for (int a = 0; a < A; ++a) plan.flows[k][a] = value_of(fname(k, net.arcs()[a].id));
      plan.outsourcing_value = 0.0;
      break;
    }
    case ModelKind::Evaluation: {
      plan.flows.assign(K, std::vector<double>(A, 0.0));
      plan.satisfied.assign(K, 0.0);
      plan.shortfalls.assign(K, 0.0);
      double total_tau = 0.0;
      for (int k = 0; k < K; ++k) {
        for (int a = 0; a < A; ++a) plan.flows[k][a] = value_of(fname(k, net.arcs()[a].id));
        plan.satisfied[k] = value_of(dtilname(k));
        plan.shortfalls[k] = value_of(tauname(k));
        total_tau += plan.shortfalls[k];
      }
      plan.outsourcing_value = inst.penalty * total_tau;
      break;
    }
  }
  if (mapped != lp.num_variables())
    throw SolveError("plan extraction left variables unmapped");
  plan.total_objective = plan.capacity_cost + plan.outsourcing_value;
  return plan;
}

}  // namespace netplan
