#include <doctest.h>

#include <random>

#include "netplan/robust.hpp"
#include "netplan/network.hpp"

using namespace netplan;

namespace {

Scenario random_demands(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> d(0.0, 30.0);
  Scenario s;
  for (int i = 0; i < k; ++i) s.demands.push_back(d(rng));
  return s;
}

}  // namespace

TEST_SUITE("robust") {

TEST_CASE("single scenario collapses to the nominal solve") {
  std::mt19937_64 rng(91);
  Network topo = make_ring_topology(7, 2, rng());
  Instance inst = generate_random_instance(topo, 4, rng());
  Scenario d = random_demands(rng, 4);
  auto plan = solve_robust(inst, UncertaintySet{{d}});
  auto nominal = solve_lp(build_nominal(inst, d));
  REQUIRE(nominal.status == LpStatus::Optimal);
  CHECK(plan.total_objective == doctest::Approx(nominal.objective_value).epsilon(1e-6));
}

TEST_CASE("two-point set on one arc") {
  Instance inst;
  inst.network.add_node("s");
  inst.network.add_node("t");
  inst.network.add_arc("a1", 0, 1, 0.0, 1.0);
  inst.commodities.push_back({"k1", 0, 1});
  inst.penalty = 10.0;
  auto plan = solve_robust(inst, UncertaintySet{{Scenario{{3.0}}, Scenario{{7.0}}}});
  CHECK(plan.expansions[0] == doctest::Approx(7.0));
  CHECK(plan.total_objective == doctest::Approx(7.0));
  CHECK(plan.capacity_cost == doctest::Approx(7.0));
  CHECK(plan.outsourcing_value == doctest::Approx(0.0));
}

TEST_CASE("omega is reproduced by re-evaluating every scenario") {
  std::mt19937_64 rng(172);
  for (int trial = 0; trial < 3; ++trial) {
    Network topo = make_ring_topology(7, 3, rng());
    Instance inst = generate_random_instance(topo, 5, rng());
    UncertaintySet u;
    const int n = 3 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) u.scenarios.push_back(random_demands(rng, 5));
    auto plan = solve_robust(inst, u);

    double worst = 0.0;
    for (const Scenario& s : u.scenarios) {
      auto esol = solve_lp(build_evaluation(inst, plan.expansions, s));
      REQUIRE(esol.status == LpStatus::Optimal);
      worst = std::max(worst, inst.penalty * esol.objective_value);
    }
    CHECK(worst == doctest::Approx(plan.outsourcing_value).epsilon(1e-6));
  }
}

TEST_CASE("objective grows with the uncertainty set") {
  std::mt19937_64 rng(2029);
  Network topo = make_ring_topology(6, 2, rng());
  Instance inst = generate_random_instance(topo, 3, rng());
  UncertaintySet u{{random_demands(rng, 3)}};
  double prev = solve_robust(inst, u).total_objective;
  for (int i = 0; i < 3; ++i) {
    u.scenarios.push_back(random_demands(rng, 3));
    const double now = solve_robust(inst, u).total_objective;
    CHECK(now >= prev - 1e-6 * (1.0 + prev));
    prev = now;
  }
}

TEST_CASE("generous penalty outsources nothing on a connected toy") {
  // phi far above any path cost: the optimum expands instead of outsourcing
  Instance inst;
  inst.network.add_node("a");
  inst.network.add_node("b");
  inst.network.add_node("c");
  inst.network.add_arc("ab", 0, 1, 0.0, 2.0);
  inst.network.add_arc("bc", 1, 2, 0.0, 3.0);
  inst.commodities.push_back({"k1", 0, 2});
  inst.penalty = 1000.0;
  auto plan = solve_robust(inst, UncertaintySet{{Scenario{{4.0}}, Scenario{{9.0}}}});
  CHECK(plan.outsourcing_value == doctest::Approx(0.0));
  CHECK(plan.capacity_cost == doctest::Approx(45.0));  // 9 units over both arcs
}

}  // TEST_SUITE
