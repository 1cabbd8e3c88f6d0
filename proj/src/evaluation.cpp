#include "netplan/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "netplan/drso.hpp"
#include "netplan/robust.hpp"

namespace netplan {

std::vector<Scenario> sample_scenarios(const SamplerConfig& cfg, int n, int k) {
  if (n < 1 || k < 1) throw std::invalid_argument("need n >= 1 scenarios and k >= 1 commodities");
  if (!(cfg.shape > 0) || !(cfg.scale > 0) || !(cfg.cap > 0))
    throw std::invalid_argument("sampler needs positive shape, scale and cap");
  std::mt19937_64 rng(cfg.seed);
  std::gamma_distribution<double> gamma(cfg.shape, cfg.scale);
  std::vector<Scenario> out(n);
  for (Scenario& s : out) {
    s.demands.resize(k);
    for (double& d : s.demands) {
      do {
        d = gamma(rng);
      } while (d <= 0.0 || d > cfg.cap);
    }
  }
  return out;
}

std::vector<MomentInfo> empirical_moments(std::span<const Scenario> training) {
  const int n = static_cast<int>(training.size());
  if (n < 2) throw std::invalid_argument("need at least 2 training scenarios for a variance");
  const std::size_t k = training[0].demands.size();
  for (const Scenario& s : training)
    if (s.demands.size() != k)
      throw std::invalid_argument("training scenarios differ in commodity count");
  std::vector<MomentInfo> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    double sum = 0.0;
    for (const Scenario& s : training) sum += s.demands[j];
    const double mean = sum / n;
    double ss = 0.0;
    for (const Scenario& s : training) {
      const double d = s.demands[j] - mean;
      ss += d * d;
    }
    out[j] = {mean, ss / (n - 1)};
  }
  return out;
}

double cvar(std::span<const double> values, double level) {
  if (values.empty()) throw std::invalid_argument("cvar of an empty list");
  if (!(level > 0.0) || !(level < 1.0)) throw std::invalid_argument("cvar level must be in (0,1)");
  const int n = static_cast<int>(values.size());
  const int count = static_cast<int>(std::ceil((1.0 - level) * n - 1e-12));
  const int take = std::max(1, std::min(count, n));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double sum = 0.0;
  for (int i = 0; i < take; ++i) sum += sorted[i];
  return sum / take;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NETPLAN_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

EvaluationReport evaluate_plan(const Instance& inst, std::span<const double> expansions,
                               std::span<const Scenario> scenarios, CapacityMode mode,
                               int threads) {
  if (scenarios.empty()) throw std::invalid_argument("no scenarios to evaluate");
  const int n = static_cast<int>(scenarios.size());
  const int K = inst.num_commodities();
  const int workers = std::min(resolve_threads(threads), n);

  // every scenario solve warm-starts from the basis of the mean-demand
  // model; the mean uses sorted summation so results cannot depend on the
  // order of the scenario list
  SimplexOptions warm;
  {
    Scenario mean;
    mean.demands.assign(K, 0.0);
    std::vector<double> column(n);
    for (int k = 0; k < K; ++k) {
      for (int i = 0; i < n; ++i) column[i] = scenarios[i].demands[k];
      std::sort(column.begin(), column.end());
      double sum = 0.0;
      for (double d : column) sum += d;
      mean.demands[k] = sum / n;
    }
    const auto seed_lp = build_evaluation(inst, expansions, mean, mode);
    const auto seed_sol = solve_lp(seed_lp);
    if (seed_sol.status == LpStatus::Optimal) warm.warm_basis = seed_sol.basis;
  }

  std::vector<double> outsourced(n, 0.0), satisfied(n, 0.0);
  std::atomic<int> failed{-1};

  auto run_block = [&](int begin, int end) {
    for (int i = begin; i < end && failed.load(std::memory_order_relaxed) < 0; ++i) {
      const auto lp = build_evaluation(inst, expansions, scenarios[i], mode);
      const auto sol = solve_lp(lp, warm);
      if (sol.status != LpStatus::Optimal) {
        int expected = -1;
        failed.compare_exchange_strong(expected, i);
        return;
      }
      double total_tau = 0.0, total_sat = 0.0;
      for (int k = 0; k < inst.num_commodities(); ++k) {
        total_tau += sol.primal[lp.find_variable("tau[" + std::to_string(k) + "]")];
        total_sat += sol.primal[lp.find_variable("dtil[" + std::to_string(k) + "]")];
      }
      outsourced[i] = total_tau;
      satisfied[i] = total_sat;
    }
  };

  if (workers <= 1) {
    run_block(0, n);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      const int begin = static_cast<int>(static_cast<long long>(n) * w / workers);
      const int end = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
      pool.emplace_back(run_block, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  if (failed.load() >= 0)
    throw SolveError("evaluation LP failed for scenario " + std::to_string(failed.load()));

  EvaluationReport rep;
  rep.n_scenarios = n;
  rep.per_scenario_outsourced = std::move(outsourced);
  rep.per_scenario_satisfied = std::move(satisfied);
  double sum_o = 0.0, sum_s = 0.0, mx = 0.0;
  for (int i = 0; i < n; ++i) {
    sum_o += rep.per_scenario_outsourced[i];
    sum_s += rep.per_scenario_satisfied[i];
    mx = std::max(mx, rep.per_scenario_outsourced[i]);
  }
  rep.expected_outsourced = sum_o / n;
  rep.expected_satisfied = sum_s / n;
  rep.max_outsourced = mx;
  rep.cvar95 = cvar(rep.per_scenario_outsourced, 0.95);
  rep.cvar75 = cvar(rep.per_scenario_outsourced, 0.75);
  return rep;
}

std::vector<SweepRow> scale_sweep(const Instance& inst, std::span<const double> expansions,
                                  std::span<const double> lambdas,
                                  std::span<const Scenario> scenarios, CapacityMode mode,
                                  int threads) {
  const int A = inst.network.num_arcs();
  if (expansions.size() != static_cast<std::size_t>(A))
    throw std::invalid_argument("expansion vector length does not match arc count");
  std::vector<SweepRow> rows;
  rows.reserve(lambdas.size());
  for (double lambda : lambdas) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
    std::vector<double> scaled(A);
    SweepRow row;
    row.lambda = lambda;
    for (int a = 0; a < A; ++a) {
      scaled[a] = lambda * expansions[a];
      row.scaled_capacity_cost += inst.network.arcs()[a].expansion_cost * scaled[a];
    }
    row.report = evaluate_plan(inst, scaled, scenarios, mode, threads);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> drso_lambda_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(1.0 + 0.08 * i);
  return g;
}

std::vector<double> robust_lambda_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(1.0 - 0.05 * i);
  return g;
}

namespace {

// splitmix64 finalizer; repetition substreams stay decoupled from each other
// and from the master stream
std::uint64_t sub_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const Instance& inst, const ExperimentConfig& cfg) {
  if (cfg.repetitions < 1) throw std::invalid_argument("need at least one repetition");
  if (cfg.train_n < 2) throw std::invalid_argument("need at least two training scenarios");
  if (cfg.eval_n < 1) throw std::invalid_argument("need at least one evaluation scenario");
  const int K = inst.num_commodities();

  std::vector<ExperimentRow> rows;
  rows.reserve(cfg.repetitions);
  std::vector<unsigned char> robust_basis;  // carried across repetitions
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    SamplerConfig train_cfg;
    train_cfg.seed = sub_seed(cfg.master_seed, 2 * static_cast<std::uint64_t>(rep));
    const auto training = sample_scenarios(train_cfg, cfg.train_n, K);

    ExperimentRow row;
    row.repetition = rep + 1;
    if (cfg.model == ExperimentModel::Robust) {
      UncertaintySet uset;
      uset.scenarios = training;
      const PlanSolution plan = solve_robust(inst, uset, cfg.capacity_mode, &robust_basis);
      row.expansions = plan.expansions;
      row.cap_inv = plan.capacity_cost;
      row.in_sample_os = plan.outsourcing_value / inst.penalty;
    } else {
      const auto moments = empirical_moments(training);
      DrsoConfig dcfg;
      dcfg.capacity_mode = cfg.capacity_mode;
      const DrsoSolution sol = solve_drso(inst, moments, dcfg);
      row.expansions = sol.plan.expansions;
      row.cap_inv = sol.plan.capacity_cost;
      row.nature = sol.nature_value;
      for (double d : sol.d_tilde) row.d_tilde_total += d;
    }

    SamplerConfig eval_cfg;
    eval_cfg.seed = sub_seed(cfg.master_seed, 2 * static_cast<std::uint64_t>(rep) + 1);
    const auto eval_set = sample_scenarios(eval_cfg, cfg.eval_n, K);
    row.report = evaluate_plan(inst, row.expansions, eval_set, cfg.capacity_mode, cfg.threads);

    for (double x : row.expansions) row.cap_add += x;
    row.unit_cost = row.cap_add > 0.0 ? row.cap_inv / row.cap_add : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_scenarios_csv(std::span<const Scenario> scenarios, std::ostream& out) {
  if (scenarios.empty()) throw std::invalid_argument("no scenarios to write");
  const std::size_t k = scenarios[0].demands.size();
  out << "scenario_id";
  for (std::size_t j = 1; j <= k; ++j) out << ",d_" << j;
  out << "\n";
  char buf[40];
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    out << (i + 1);
    for (double d : scenarios[i].demands) {
      std::snprintf(buf, sizeof buf, ",%.6f", d);
      out << buf;
    }
    out << "\n";
  }
}

std::vector<Scenario> read_scenarios_csv(std::istream& in) {
  std::vector<Scenario> out;
  std::string line;
  bool header_seen = false;
  std::size_t k = 0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // scenario_id,d_1,...
      continue;
    }
    Scenario s;
    std::stringstream ss(line);
    std::string cell;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        first = false;
        continue;
      }
      try {
        s.demands.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("bad demand value '" + cell + "'", lineno);
      }
    }
    if (s.demands.empty()) throw ParseError("scenario row without demands", lineno);
    if (k == 0) k = s.demands.size();
    if (s.demands.size() != k) throw ParseError("ragged scenario row", lineno);
    out.push_back(std::move(s));
  }
  if (out.empty()) throw std::invalid_argument("scenario file holds no scenarios");
  return out;
}

void write_moments_csv(std::span<const MomentInfo> moments, std::ostream& out) {
  out << "k,mean,variance\n";
  char buf[80];
  for (std::size_t j = 0; j < moments.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g\n", j + 1, moments[j].mean,
                  moments[j].variance);
    out << buf;
  }
}

std::vector<MomentInfo> read_moments_csv(std::istream& in) {
  std::vector<MomentInfo> out;
  std::string line;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string idx, mean, var;
    if (!std::getline(ss, idx, ',') || !std::getline(ss, mean, ',') || !std::getline(ss, var))
      throw ParseError("moments row needs k,mean,variance", lineno);
    try {
      out.push_back({std::stod(mean), std::stod(var)});
    } catch (const std::exception&) {
      throw ParseError("bad moments value", lineno);
    }
  }
  if (out.empty()) throw std::invalid_argument("moments file holds no rows");
  return out;
}

}  // namespace netplan
