#include <doctest.h>

#include <cmath>
#include <random>

#include "netplan/formulations.hpp"
#include "netplan/lp.hpp"
#include "netplan/network.hpp"

using namespace netplan;

namespace {

// single arc s -> t
Instance one_arc(double u, double c, double phi) {
  Instance inst;
  inst.network.add_node("s");
  inst.network.add_node("t");
  inst.network.add_arc("a1", 0, 1, u, c);
  inst.commodities.push_back({"k1", 0, 1});
  inst.penalty = phi;
  return inst;
}

Instance two_parallel_arcs(double c1, double c2, double phi) {
  Instance inst;
  inst.network.add_node("s");
  inst.network.add_node("t");
  inst.network.add_arc("cheap", 0, 1, 0.0, c1);
  inst.network.add_arc("dear", 0, 1, 0.0, c2);
  inst.commodities.push_back({"k1", 0, 1});
  inst.penalty = phi;
  return inst;
}

Instance random_instance(std::mt19937_64& rng, int nodes, int chords, int k) {
  Network topo = make_ring_topology(nodes, chords, rng());
  return generate_random_instance(topo, k, rng());
}

double solve_value(const LinearProgram& lp) {
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  return sol.objective_value;
}

double g_of(const Instance& inst, const std::vector<double>& d) {
  return solve_value(build_capacity_subproblem(inst, d));
}

Scenario random_demands(std::mt19937_64& rng, int k, double hi = 30.0) {
  std::uniform_real_distribution<double> d(0.0, hi);
  Scenario s;
  for (int i = 0; i < k; ++i) s.demands.push_back(d(rng));
  return s;
}

void check_plan_invariants(const Instance& inst, const PlanSolution& plan,
                           const std::vector<std::vector<double>>& flows,
                           const std::vector<double>& expansions) {
  const Network& net = inst.network;
  // conservation at intermediate nodes
  for (int k = 0; k < inst.num_commodities(); ++k) {
    const Commodity& c = inst.commodities[k];
    for (int v = 0; v < net.num_nodes(); ++v) {
      if (v == c.source || v == c.sink) continue;
      double net_in = 0.0;
      for (int a : net.incoming(v)) net_in += flows[k][a];
      for (int a : net.outgoing(v)) net_in -= flows[k][a];
      CHECK(net_in >= -1e-6);
    }
  }
  // shared capacity
  for (int a = 0; a < net.num_arcs(); ++a) {
    double used = 0.0;
    for (int k = 0; k < inst.num_commodities(); ++k) used += flows[k][a];
    const double cap = net.arcs()[a].base_capacity + (expansions.empty() ? 0.0 : expansions[a]);
    CHECK(used <= cap + 1e-6 * (1.0 + cap));
  }
  CHECK(plan.total_objective ==
        doctest::Approx(plan.capacity_cost + plan.outsourcing_value).epsilon(1e-9));
}

}  // namespace

TEST_SUITE("formulations") {

TEST_CASE("nominal: expand when cheaper than outsourcing") {
  Instance inst = one_arc(0.0, 1.0, 10.0);
  auto lp = build_nominal(inst, Scenario{{5.0}});
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(5.0));
  auto plan = extract_plan(inst, lp, sol, ModelKind::Nominal);
  CHECK(plan.expansions[0] == doctest::Approx(5.0));
  CHECK(plan.outsourcing_value == doctest::Approx(0.0));
  check_plan_invariants(inst, plan, plan.flows, plan.expansions);
}

TEST_CASE("nominal: outsource when expansion is dearer than the penalty") {
  Instance inst = one_arc(0.0, 20.0, 10.0);
  auto lp = build_nominal(inst, Scenario{{5.0}});
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(50.0));
  auto plan = extract_plan(inst, lp, sol, ModelKind::Nominal);
  CHECK(plan.expansions[0] == doctest::Approx(0.0));
  CHECK(plan.outsourcing_value == doctest::Approx(50.0));
  CHECK(plan.capacity_cost + plan.outsourcing_value ==
        doctest::Approx(sol.objective_value));  // accounting identity
}

TEST_CASE("nominal: zero demand costs nothing") {
  Instance inst = one_arc(0.0, 1.0, 10.0);
  auto lp = build_nominal(inst, Scenario{{0.0}});
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(0.0));
  CHECK(extract_plan(inst, lp, sol, ModelKind::Nominal).expansions[0] ==
        doctest::Approx(0.0));
}

TEST_CASE("nominal rejects dimension mismatch") {
  Instance inst = one_arc(0.0, 1.0, 10.0);
  CHECK_THROWS_AS(build_nominal(inst, Scenario{{1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(build_nominal(inst, Scenario{{-1.0}}), std::invalid_argument);
}

TEST_CASE("robust: one-scenario set collapses to nominal") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    Instance inst = random_instance(rng, 6, 2, 3);
    Scenario d = random_demands(rng, 3);
    const double nominal = solve_value(build_nominal(inst, d));
    const double robust = solve_value(build_robust(inst, UncertaintySet{{d}}));
    CHECK(robust == doctest::Approx(nominal).epsilon(1e-6));
  }
}

TEST_CASE("robust: plans for the worst scenario") {
  Instance inst = one_arc(0.0, 1.0, 10.0);
  UncertaintySet u{{Scenario{{3.0}}, Scenario{{7.0}}}};
  auto lp = build_robust(inst, u);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(7.0));
  auto plan = extract_plan(inst, lp, sol, ModelKind::Robust);
  CHECK(plan.expansions[0] == doctest::Approx(7.0));
  CHECK(plan.outsourcing_value == doctest::Approx(0.0));
  CHECK(plan.scenario_shortfalls.size() == 2);
}

TEST_CASE("robust: dominated and duplicate scenarios change nothing") {
  std::mt19937_64 rng(5150);
  Instance inst = random_instance(rng, 6, 3, 4);
  UncertaintySet u;
  u.scenarios.push_back(random_demands(rng, 4));
  u.scenarios.push_back(random_demands(rng, 4));
  const double base = solve_value(build_robust(inst, u));

  UncertaintySet dominated = u;
  Scenario smaller = u.scenarios[0];
  for (double& d : smaller.demands) d *= 0.5;
  dominated.scenarios.push_back(smaller);
  CHECK(solve_value(build_robust(inst, dominated)) == doctest::Approx(base).epsilon(1e-6));

  UncertaintySet duplicated = u;
  duplicated.scenarios.push_back(u.scenarios[1]);
  CHECK(solve_value(build_robust(inst, duplicated)) == doctest::Approx(base).epsilon(1e-6));
}

TEST_CASE("robust: adding a scenario never helps") {
  std::mt19937_64 rng(8080);
  Instance inst = random_instance(rng, 7, 3, 3);
  UncertaintySet u{{random_demands(rng, 3)}};
  double prev = solve_value(build_robust(inst, u));
  for (int i = 0; i < 4; ++i) {
    u.scenarios.push_back(random_demands(rng, 3));
    const double now = solve_value(build_robust(inst, u));
    CHECK(now >= prev - 1e-6 * (1.0 + std::abs(prev)));
    prev = now;
  }
}

TEST_CASE("capacity subproblem hand values") {
  Instance inst = one_arc(2.0, 3.0, 130.0);
  CHECK(g_of(inst, {0.0}) == doctest::Approx(0.0));
  CHECK(g_of(inst, {5.0}) == doctest::Approx(9.0));  // expand by 3 at cost 3

  Instance par = two_parallel_arcs(1.0, 4.0, 130.0);
  auto lp = build_capacity_subproblem(par, std::vector<double>{6.0});
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(6.0));
  auto plan = extract_plan(par, lp, sol, ModelKind::Subproblem);
  CHECK(plan.flows[0][0] == doctest::Approx(6.0));  // all on the cheap arc
  CHECK(plan.flows[0][1] == doctest::Approx(0.0));
  CHECK(plan.outsourcing_value == 0.0);
  CHECK(plan.total_objective == doctest::Approx(plan.capacity_cost));
}

TEST_CASE("capacity subproblem routable within base capacity") {
  Instance inst = one_arc(10.0, 3.0, 130.0);
  CHECK(g_of(inst, {7.0}) == doctest::Approx(0.0));
}

TEST_CASE("capacity subproblem is convex along segments") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 3; ++trial) {
    Instance inst = random_instance(rng, 6, 2, 3);
    std::uniform_real_distribution<double> lam(0.0, 1.0);
    for (int pair = 0; pair < 8; ++pair) {
      const auto a = random_demands(rng, 3).demands;
      const auto b = random_demands(rng, 3).demands;
      const double l = lam(rng);
      std::vector<double> mid(3);
      for (int k = 0; k < 3; ++k) mid[k] = l * a[k] + (1.0 - l) * b[k];
      const double lhs = g_of(inst, mid);
      const double rhs = l * g_of(inst, a) + (1.0 - l) * g_of(inst, b);
      CHECK(lhs <= rhs + 1e-6 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("penalty form equals equality form when psi dominates") {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 6; ++trial) {
    Instance inst = random_instance(rng, 6, 2, 3);
    const auto d = random_demands(rng, 3).demands;
    const double g = g_of(inst, d);
    const double gp =
        solve_value(build_penalty_subproblem(inst, d, default_penalty_psi(inst)));
    CHECK_MESSAGE(std::abs(g - gp) <= 1e-6 * (1.0 + std::abs(g)), "trial " << trial);
  }
}

TEST_CASE("evaluation model hand values") {
  Instance inst = one_arc(1.0, 1.0, 10.0);

  auto big = build_evaluation(inst, std::vector<double>{100.0}, Scenario{{7.0}});
  auto sol = solve_lp(big);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(0.0));
  auto plan = extract_plan(inst, big, sol, ModelKind::Evaluation);
  CHECK(plan.satisfied[0] == doctest::Approx(7.0));

  auto none = build_evaluation(one_arc(0.0, 1.0, 10.0), std::vector<double>{0.0}, Scenario{{7.0}});
  sol = solve_lp(none);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(7.0));

  auto partial = build_evaluation(inst, std::vector<double>{3.0}, Scenario{{7.0}});
  sol = solve_lp(partial);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(3.0));  // tau = 3
  plan = extract_plan(inst, partial, sol, ModelKind::Evaluation);
  CHECK(plan.satisfied[0] == doctest::Approx(4.0));
  CHECK(plan.shortfalls[0] == doctest::Approx(3.0));
  check_plan_invariants(inst, plan, plan.flows, {4.0});
}

TEST_CASE("worst-case consistency between robust omega and re-evaluation") {
  std::mt19937_64 rng(11011);
  Instance inst = random_instance(rng, 7, 3, 4);
  UncertaintySet u;
  for (int i = 0; i < 4; ++i) u.scenarios.push_back(random_demands(rng, 4));
  auto lp = build_robust(inst, u);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  auto plan = extract_plan(inst, lp, sol, ModelKind::Robust);

  double worst = 0.0;
  for (const Scenario& s : u.scenarios) {
    auto elp = build_evaluation(inst, plan.expansions, s);
    auto esol = solve_lp(elp);
    REQUIRE(esol.status == LpStatus::Optimal);
    worst = std::max(worst, inst.penalty * esol.objective_value);
  }
  CHECK(worst == doctest::Approx(plan.outsourcing_value).epsilon(1e-6));
}

TEST_CASE("per-commodity capacity mode relaxes congestion") {
  // two commodities over one arc: shared capacity must split it, the
  // per-commodity reading gives each the full width
  Instance inst;
  inst.network.add_node("s");
  inst.network.add_node("t");
  inst.network.add_arc("a1", 0, 1, 4.0, 1.0);
  inst.commodities.push_back({"k1", 0, 1});
  inst.commodities.push_back({"k2", 0, 1});
  inst.penalty = 10.0;
  const std::vector<double> x{0.0};
  const Scenario d{{4.0, 4.0}};

  auto shared = solve_lp(build_evaluation(inst, x, d, CapacityMode::Shared));
  REQUIRE(shared.status == LpStatus::Optimal);
  CHECK(shared.objective_value == doctest::Approx(4.0));

  auto per = solve_lp(build_evaluation(inst, x, d, CapacityMode::PerCommodity));
  REQUIRE(per.status == LpStatus::Optimal);
  CHECK(per.objective_value == doctest::Approx(0.0));
}

TEST_CASE("extract_plan refuses non-optimal input") {
  Instance inst = one_arc(0.0, 1.0, 10.0);
  auto lp = build_nominal(inst, Scenario{{1.0}});
  LpSolution bogus;
  bogus.status = LpStatus::Infeasible;
  CHECK_THROWS_AS(extract_plan(inst, lp, bogus, ModelKind::Nominal), SolveError);
}

}  // TEST_SUITE
