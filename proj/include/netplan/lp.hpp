#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace netplan {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, GreaterEqual, Equal };

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericFailure };

const char* to_string(LpStatus status);

/// Sparse linear program in minimization sense. Variables carry bounds
/// (possibly infinite) and an objective coefficient; constraints are sparse
/// rows with a relation and a right-hand side.
class LinearProgram {
 public:
  int add_variable(std::string name, double lower = 0.0, double upper = kInfinity,
                   double objective = 0.0);
  void set_objective(int var, double coeff);
  int add_constraint(Relation rel, double rhs);
  /// Appends a coefficient to an existing row. Duplicate (row, var) entries
  /// are accumulated.
  void add_term(int row, int var, double coeff);

  int num_variables() const { return static_cast<int>(names_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }

  const std::string& variable_name(int var) const { return names_[var]; }
  double lower_bound(int var) const { return lower_[var]; }
  double upper_bound(int var) const { return upper_[var]; }
  double objective_coeff(int var) const { return objective_[var]; }
  /// Index of a variable by name, -1 if absent. Linear scan on first use
  /// builds a lookup table.
  int find_variable(std::string_view name) const;

  struct Row {
    std::vector<int> vars;
    std::vector<double> coeffs;
    Relation rel = Relation::LessEqual;
    double rhs = 0.0;
  };
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<double>& objective() const { return objective_; }

  /// Throws std::invalid_argument on NaN/infinite coefficients, crossed
  /// bounds, or out-of-range variable references.
  void validate() const;

 private:
  std::vector<std::string> names_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> objective_;
  std::vector<Row> rows_;
  mutable std::unordered_map<std::string, int> name_index_;
};

/// Basis status codes used by LpSolution::basis and SimplexOptions::warm_basis,
/// one entry per structural variable followed by one per row (its logical).
enum : unsigned char {
  kBasisAtLower = 0,
  kBasisAtUpper = 1,
  kBasisBasic = 2,
  kBasisFree = 3,
};

struct SimplexOptions {
  double feasibility_tol = 1e-7;   // scaled by 1 + |rhs| (resp. 1 + |bound|)
  double optimality_tol = 1e-8;    // reduced-cost threshold, scaled by cost magnitude
  double pivot_tol = 1e-9;         // entries below this never pivot
  std::int64_t max_iterations = 5'000'000;
  int refactor_interval = 100;
  int bland_threshold = 1000;      // consecutive degenerate pivots before Bland's rule
  std::int64_t log_every = 0;      // > 0: progress lines on stderr, for debugging
  /// Optional starting basis (n + m status codes). Ignored when empty,
  /// inconsistent, or singular; purely an accelerator, never changes results
  /// beyond the choice among alternate optima.
  std::vector<unsigned char> warm_basis;
};

struct LpSolution {
  LpStatus status = LpStatus::NumericFailure;
  double objective_value = 0.0;
  std::vector<double> primal;  // by variable index; empty unless Optimal
  std::int64_t iterations = 0;
  std::vector<unsigned char> basis;  // final basis statuses when Optimal
};

/// Two-phase primal simplex (revised, product-form inverse). Deterministic:
/// identical inputs give identical outputs. Optimal solutions are re-verified
/// against the original rows before being reported; a failed check is
/// retried with conservative settings and otherwise reported as
/// NumericFailure, never as a silent wrong answer.
LpSolution solve_lp(const LinearProgram& lp);
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options);

/// Variable-name -> value view of an optimal solution.
std::unordered_map<std::string, double> primal_map(const LinearProgram& lp,
                                                   const LpSolution& sol);

/// Plain-text dump (variables, then constraints, one per line).
void dump_lp(const LinearProgram& lp, std::ostream& out);

}  // namespace netplan
