#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "netplan/ambiguity.hpp"
#include "netplan/formulations.hpp"

namespace netplan {

/// Demand sampler: i.i.d. Gamma(shape, scale) per commodity with draws above
/// `cap` rejected and redrawn (negative draws cannot occur; the guard is kept
/// anyway).
struct SamplerConfig {
  double shape = 4.0;
  double scale = 5.0;
  double cap = 50.0;
  std::uint64_t seed = 0;
};

std::vector<Scenario> sample_scenarios(const SamplerConfig& cfg, int n, int k);

/// Per-commodity sample mean and unbiased sample variance (divisor n-1).
/// Needs at least two scenarios.
std::vector<MomentInfo> empirical_moments(std::span<const Scenario> training);

/// Mean of the ceil((1-level)*n) largest values: the discrete empirical CVaR
/// with no interpolation.
double cvar(std::span<const double> values, double level);

struct EvaluationReport {
  int n_scenarios = 0;
  double expected_outsourced = 0.0;  // E[O/S]
  double max_outsourced = 0.0;       // max over the evaluated scenario set
  double cvar95 = 0.0;
  double cvar75 = 0.0;
  double expected_satisfied = 0.0;  // E[d~]
  std::vector<double> per_scenario_outsourced;
  std::vector<double> per_scenario_satisfied;
};

/// Caps the worker count: explicit argument, else NETPLAN_THREADS, else the
/// hardware concurrency.
int resolve_threads(int requested);

/// Solves the evaluation LP for every scenario (in parallel; metrics do not
/// depend on evaluation order) and aggregates total outsourced and satisfied
/// demand. An LP failure is reported with its scenario index.
EvaluationReport evaluate_plan(const Instance& inst, std::span<const double> expansions,
                               std::span<const Scenario> scenarios,
                               CapacityMode mode = CapacityMode::Shared, int threads = 0);

struct SweepRow {
  double lambda = 1.0;
  double scaled_capacity_cost = 0.0;  // sum_a c_a * lambda * x_a
  EvaluationReport report;
};

/// Re-evaluates lambda * x on the same scenario set for each factor.
std::vector<SweepRow> scale_sweep(const Instance& inst, std::span<const double> expansions,
                                  std::span<const double> lambdas,
                                  std::span<const Scenario> scenarios,
                                  CapacityMode mode = CapacityMode::Shared, int threads = 0);

/// The paper's published grids: 1.0 to 1.8 in steps of 0.08 for scaling a
/// DRSO plan up, 1.0 down to 0.5 in steps of 0.05 for scaling a robust plan
/// down. Both have 11 entries.
std::vector<double> drso_lambda_grid();
std::vector<double> robust_lambda_grid();

enum class ExperimentModel { Drso, Robust };

struct ExperimentConfig {
  ExperimentModel model = ExperimentModel::Drso;
  int repetitions = 1;
  int train_n = 60;
  int eval_n = 500;
  std::uint64_t master_seed = 0;
  CapacityMode capacity_mode = CapacityMode::Shared;
  int threads = 0;
};

struct ExperimentRow {
  int repetition = 0;
  double cap_inv = 0.0;        // sum_a c_a x_a
  double in_sample_os = 0.0;   // robust: worst-case total outsourced demand
  double nature = 0.0;         // drso: sum_k N(d~*_k)
  double d_tilde_total = 0.0;  // drso: sum_k d~*_k
  EvaluationReport report;
  double cap_add = 0.0;   // sum_a x_a
  double unit_cost = 0.0;  // cap_inv / cap_add
  std::vector<double> expansions;
};

/// One row per repetition: fresh training sample, solve the chosen model,
/// evaluate on a fresh evaluation sample. Training and evaluation seeds are
/// derived from the master seed and the repetition index only, so the two
/// models see identical data when run with the same master seed.
std::vector<ExperimentRow> run_experiment(const Instance& inst, const ExperimentConfig& cfg);

/// Scenario CSV: header scenario_id,d_1,...,d_K; '#' comment lines allowed.
void write_scenarios_csv(std::span<const Scenario> scenarios, std::ostream& out);
std::vector<Scenario> read_scenarios_csv(std::istream& in);

/// Moments CSV: header k,mean,variance with 1-based commodity indices.
void write_moments_csv(std::span<const MomentInfo> moments, std::ostream& out);
std::vector<MomentInfo> read_moments_csv(std::istream& in);

}  // namespace netplan
