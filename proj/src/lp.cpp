#include "netplan/lp.hpp"

#include "basis_lu.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace netplan {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::NumericFailure: return "numeric_failure";
  }
  return "unknown";
}

int LinearProgram::add_variable(std::string name, double lower, double upper,
                                double objective) {
  names_.push_back(std::move(name));
  lower_.push_back(lower);
  upper_.push_back(upper);
  objective_.push_back(objective);
  return num_variables() - 1;
}

void LinearProgram::set_objective(int var, double coeff) { objective_.at(var) = coeff; }

int LinearProgram::add_constraint(Relation rel, double rhs) {
  rows_.push_back(Row{{}, {}, rel, rhs});
  return num_constraints() - 1;
}

void LinearProgram::add_term(int row, int var, double coeff) {
  if (var < 0 || var >= num_variables())
    throw std::invalid_argument("add_term: variable index out of range");
  Row& r = rows_.at(row);
  r.vars.push_back(var);
  r.coeffs.push_back(coeff);
}

int LinearProgram::find_variable(std::string_view name) const {
  if (static_cast<int>(name_index_.size()) != num_variables()) {
    name_index_.clear();
    name_index_.reserve(names_.size());
    for (int i = 0; i < num_variables(); ++i) name_index_.emplace(names_[i], i);
  }
  auto it = name_index_.find(std::string(name));
  return it == name_index_.end() ? -1 : it->second;
}

void LinearProgram::validate() const {
  for (int j = 0; j < num_variables(); ++j) {
    if (std::isnan(lower_[j]) || std::isnan(upper_[j]))
      throw std::invalid_argument("variable '" + names_[j] + "' has NaN bound");
    if (lower_[j] > upper_[j])
      throw std::invalid_argument("variable '" + names_[j] + "' has lower > upper");
    if (!std::isfinite(objective_[j]))
      throw std::invalid_argument("variable '" + names_[j] + "' has non-finite objective");
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const Row& r = rows_[i];
    if (!std::isfinite(r.rhs))
      throw std::invalid_argument("constraint " + std::to_string(i) + " has non-finite rhs");
    for (std::size_t t = 0; t < r.vars.size(); ++t) {
      if (r.vars[t] < 0 || r.vars[t] >= num_variables())
        throw std::invalid_argument("constraint " + std::to_string(i) +
                                    " references unknown variable");
      if (!std::isfinite(r.coeffs[t]))
        throw std::invalid_argument("constraint " + std::to_string(i) +
                                    " has non-finite coefficient");
    }
  }
}

namespace {

enum class VStat : unsigned char { AtLower = 0, AtUpper = 1, Basic = 2, FreeZero = 3 };

// Revised bounded-variable primal simplex over A x + s = b with logical
// variables s encoding the row relations. Basis inverse: sparse LU plus a
// product-form eta file for the pivots since the last refactorization.
// Phase 1 minimizes total bound infeasibility of the basic variables
// (composite objective with a long-step ratio test), so any starting basis
// works and warm starts need no artificial machinery.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {}

  // false = numerical breakdown; caller may retry with conservative settings
  bool run(LpSolution& out);

 private:
  static constexpr double kDropTol = 1e-14;

  const LinearProgram& lp_;
  const SimplexOptions opt_;

  int n_ = 0;      // structural columns
  int m_ = 0;      // rows
  int total_ = 0;  // n_ + m_

  std::vector<int> col_ptr_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;
  std::vector<double> rhs_;
  std::vector<double> lb_, ub_;
  std::vector<double> cost_;  // structural objective, zeros for logicals

  std::vector<VStat> vstat_;
  std::vector<double> x_;
  std::vector<int> basic_col_;  // pivot row -> column
  std::int64_t iters_ = 0;
  int degen_streak_ = 0;
  bool bland_ = false;
  bool phase1_ = false;
  double infeas_sum_ = 0.0;
  double dual_tol_ = 1e-8;

  std::vector<double> reduced_;  // phase-2 price cache
  std::vector<double> devex_w_;

  detail::BasisLu factor_;
  std::vector<detail::BasisLu::SparseCol> refactor_cols_;
  std::vector<int> eta_pivot_row_;
  std::vector<double> eta_pivot_val_;
  std::vector<int> eta_start_{0};
  std::vector<int> eta_row_;
  std::vector<double> eta_val_;
  int pivots_since_refactor_ = 0;

  std::vector<double> y_;  // btran scratch

  template <class F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (int e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) f(col_row_[e], col_val_[e]);
    } else {
      f(j - n_, 1.0);
    }
  }

  double feas_tol(double ref) const { return opt_.feasibility_tol * (1.0 + std::abs(ref)); }

  void build_columns();
  void start_cold();
  bool start_warm();
  bool refactor();
  void recompute_basics();
  void ftran(std::vector<double>& w) const;
  void btran(std::vector<double>& w) const;

  // phase bookkeeping
  void classify();  // sets phase1_ and infeas_sum_
  double phase1_cost(int col) const {
    if (x_[col] < lb_[col] - feas_tol(lb_[col])) return -1.0;
    if (x_[col] > ub_[col] + feas_tol(ub_[col])) return 1.0;
    return 0.0;
  }
  void refresh_reduced();  // phase-2 cache from scratch

  struct Pricing {
    int col = -1;
    int dir = 0;
    double reduced = 0.0;
  };
  Pricing price_phase1();
  Pricing price_phase2();

  // shared pivot application; returns false on numerical trouble
  void apply_pivot(int q, int dir, int block_row, double theta,
                   const std::vector<double>& alpha, const std::vector<int>& alpha_rows,
                   VStat leave_stat);
  void update_devex_and_reduced(int q, double d_q, int block_row, double pivot,
                                bool update_reduced);

  bool feasibility_check() const;
  double structural_objective() const;
};

void Simplex::build_columns() {
  n_ = lp_.num_variables();
  m_ = lp_.num_constraints();
  total_ = n_ + m_;

  std::vector<int> count(n_, 0);
  for (const auto& row : lp_.rows())
    for (int v : row.vars) ++count[v];
  col_ptr_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_ptr_[j + 1] = col_ptr_[j] + count[j];
  col_row_.assign(col_ptr_[n_], 0);
  col_val_.assign(col_ptr_[n_], 0.0);
  std::vector<int> next(col_ptr_.begin(), col_ptr_.end() - 1);
  rhs_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    const auto& row = lp_.rows()[i];
    rhs_[i] = row.rhs;
    for (std::size_t t = 0; t < row.vars.size(); ++t) {
      const int j = row.vars[t];
      col_row_[next[j]] = i;
      col_val_[next[j]] = row.coeffs[t];
      ++next[j];
    }
  }
  // merge duplicates, drop exact zeros
  std::vector<std::pair<int, double>> buf;
  int write = 0;
  std::vector<int> new_ptr(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) {
    buf.clear();
    for (int e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) buf.emplace_back(col_row_[e], col_val_[e]);
    std::sort(buf.begin(), buf.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    new_ptr[j] = write;
    for (std::size_t t = 0; t < buf.size();) {
      double v = buf[t].second;
      std::size_t u = t + 1;
      while (u < buf.size() && buf[u].first == buf[t].first) v += buf[u++].second;
      if (v != 0.0) {
        col_row_[write] = buf[t].first;
        col_val_[write] = v;
        ++write;
      }
      t = u;
    }
  }
  new_ptr[n_] = write;
  col_ptr_ = std::move(new_ptr);
  col_row_.resize(write);
  col_val_.resize(write);

  lb_.assign(total_, 0.0);
  ub_.assign(total_, 0.0);
  cost_.assign(total_, 0.0);
  for (int j = 0; j < n_; ++j) {
    lb_[j] = lp_.lower_bound(j);
    ub_[j] = lp_.upper_bound(j);
    cost_[j] = lp_.objective_coeff(j);
  }
  for (int i = 0; i < m_; ++i) {
    switch (lp_.rows()[i].rel) {
      case Relation::LessEqual:
        lb_[n_ + i] = 0.0;
        ub_[n_ + i] = kInfinity;
        break;
      case Relation::GreaterEqual:
        lb_[n_ + i] = -kInfinity;
        ub_[n_ + i] = 0.0;
        break;
      case Relation::Equal:
        lb_[n_ + i] = 0.0;
        ub_[n_ + i] = 0.0;
        break;
    }
  }

  x_.assign(total_, 0.0);
  vstat_.assign(total_, VStat::AtLower);
  y_.assign(m_, 0.0);
  reduced_.assign(total_, 0.0);
  devex_w_.assign(total_, 1.0);
}

void Simplex::start_cold() {
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lb_[j])) {
      vstat_[j] = VStat::AtLower;
      x_[j] = lb_[j];
    } else if (std::isfinite(ub_[j])) {
      vstat_[j] = VStat::AtUpper;
      x_[j] = ub_[j];
    } else {
      vstat_[j] = VStat::FreeZero;
      x_[j] = 0.0;
    }
  }
  basic_col_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    basic_col_[i] = n_ + i;
    vstat_[n_ + i] = VStat::Basic;
  }
}

bool Simplex::start_warm() {
  const auto& ws = opt_.warm_basis;
  if (static_cast<int>(ws.size()) != total_) return false;
  basic_col_.clear();
  for (int j = 0; j < total_; ++j) {
    switch (ws[j]) {
      case kBasisBasic:
        vstat_[j] = VStat::Basic;
        basic_col_.push_back(j);
        break;
      case kBasisAtUpper:
        if (std::isfinite(ub_[j])) {
          vstat_[j] = VStat::AtUpper;
          x_[j] = ub_[j];
        } else if (std::isfinite(lb_[j])) {
          vstat_[j] = VStat::AtLower;
          x_[j] = lb_[j];
        } else {
          vstat_[j] = VStat::FreeZero;
          x_[j] = 0.0;
        }
        break;
      case kBasisFree:
        vstat_[j] = VStat::FreeZero;
        x_[j] = 0.0;
        break;
      default:
        if (std::isfinite(lb_[j])) {
          vstat_[j] = VStat::AtLower;
          x_[j] = lb_[j];
        } else if (std::isfinite(ub_[j])) {
          vstat_[j] = VStat::AtUpper;
          x_[j] = ub_[j];
        } else {
          vstat_[j] = VStat::FreeZero;
          x_[j] = 0.0;
        }
        break;
    }
  }
  return static_cast<int>(basic_col_.size()) == m_;
}

bool Simplex::refactor() {
  eta_pivot_row_.clear();
  eta_pivot_val_.clear();
  eta_start_.assign(1, 0);
  eta_row_.clear();
  eta_val_.clear();
  pivots_since_refactor_ = 0;
  if (m_ == 0) return true;

  if (static_cast<int>(refactor_cols_.size()) < m_) refactor_cols_.resize(m_);
  for (int k = 0; k < m_; ++k) {
    refactor_cols_[k].clear();
    for_column(basic_col_[k], [&](int r, double v) { refactor_cols_[k].emplace_back(r, v); });
  }
  if (!factor_.factorize(m_, refactor_cols_)) return false;

  std::vector<int> new_basic(m_, -1);
  for (int k = 0; k < m_; ++k) new_basic[factor_.pivot_row(k)] = basic_col_[k];
  basic_col_ = std::move(new_basic);
  return true;
}

void Simplex::recompute_basics() {
  std::vector<double> w(rhs_);
  for (int j = 0; j < total_; ++j) {
    if (vstat_[j] == VStat::Basic || x_[j] == 0.0) continue;
    const double v = x_[j];
    for_column(j, [&](int r, double a) { w[r] -= a * v; });
  }
  ftran(w);
  for (int r = 0; r < m_; ++r) x_[basic_col_[r]] = w[r];
}

void Simplex::ftran(std::vector<double>& w) const {
  factor_.ftran(w);
  for (std::size_t k = 0; k < eta_pivot_row_.size(); ++k) {
    const int r = eta_pivot_row_[k];
    double t = w[r];
    if (t == 0.0) continue;
    t /= eta_pivot_val_[k];
    w[r] = t;
    for (int e = eta_start_[k]; e < eta_start_[k + 1]; ++e)
      w[eta_row_[e]] -= eta_val_[e] * t;
  }
}

void Simplex::btran(std::vector<double>& w) const {
  for (std::size_t k = eta_pivot_row_.size(); k-- > 0;) {
    const int r = eta_pivot_row_[k];
    double t = w[r];
    for (int e = eta_start_[k]; e < eta_start_[k + 1]; ++e)
      t -= eta_val_[e] * w[eta_row_[e]];
    w[r] = t / eta_pivot_val_[k];
  }
  factor_.btran(w);
}

void Simplex::classify() {
  infeas_sum_ = 0.0;
  for (int r = 0; r < m_; ++r) {
    const int p = basic_col_[r];
    if (x_[p] < lb_[p] - feas_tol(lb_[p]))
      infeas_sum_ += lb_[p] - x_[p];
    else if (x_[p] > ub_[p] + feas_tol(ub_[p]))
      infeas_sum_ += x_[p] - ub_[p];
  }
  phase1_ = infeas_sum_ > 0.0;
}

void Simplex::refresh_reduced() {
  for (int r = 0; r < m_; ++r) y_[r] = cost_[basic_col_[r]];
  btran(y_);
  for (int j = 0; j < total_; ++j) {
    if (vstat_[j] == VStat::Basic) {
      reduced_[j] = 0.0;
      continue;
    }
    double d = cost_[j];
    if (j < n_) {
      for (int e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) d -= y_[col_row_[e]] * col_val_[e];
    } else {
      d -= y_[j - n_];
    }
    reduced_[j] = d;
  }
}

Simplex::Pricing Simplex::price_phase1() {
  for (int r = 0; r < m_; ++r) y_[r] = phase1_cost(basic_col_[r]);
  btran(y_);
  Pricing res;
  double best = 0.0;
  const double tol = opt_.optimality_tol * 10.0;
  for (int j = 0; j < total_; ++j) {
    const VStat s = vstat_[j];
    if (s == VStat::Basic || lb_[j] == ub_[j]) continue;
    double d = 0.0;
    if (j < n_) {
      for (int e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) d -= y_[col_row_[e]] * col_val_[e];
    } else {
      d -= y_[j - n_];
    }
    int dir = 0;
    if ((s == VStat::AtLower || s == VStat::FreeZero) && d < -tol)
      dir = 1;
    else if ((s == VStat::AtUpper || s == VStat::FreeZero) && d > tol)
      dir = -1;
    if (dir == 0) continue;
    if (bland_) return {j, dir, d};
    if (std::abs(d) > best) {
      best = std::abs(d);
      res = {j, dir, d};
    }
  }
  return res;
}

Simplex::Pricing Simplex::price_phase2() {
  Pricing res;
  double best = 0.0;
  for (int j = 0; j < total_; ++j) {
    const VStat s = vstat_[j];
    if (s == VStat::Basic || lb_[j] == ub_[j]) continue;
    const double d = reduced_[j];
    int dir = 0;
    if ((s == VStat::AtLower || s == VStat::FreeZero) && d < -dual_tol_)
      dir = 1;
    else if ((s == VStat::AtUpper || s == VStat::FreeZero) && d > dual_tol_)
      dir = -1;
    if (dir == 0) continue;
    if (bland_) return {j, dir, d};
    const double score = d * d / devex_w_[j];
    if (score > best) {
      best = score;
      res = {j, dir, d};
    }
  }
  return res;
}

// Devex weight propagation plus (in phase 2) the incremental reduced-cost
// update, both driven by the pivot row of the outgoing basis. Runs before
// the new eta is appended.
void Simplex::update_devex_and_reduced(int q, double d_q, int block_row, double pivot,
                                       bool update_reduced) {
  std::fill(y_.begin(), y_.end(), 0.0);
  y_[block_row] = 1.0;
  btran(y_);

  const double wq = std::max(devex_w_[q], 1.0);
  const double inv2 = 1.0 / (pivot * pivot);
  const double step = d_q / pivot;
  double biggest = 0.0;
  for (int j = 0; j < total_; ++j) {
    if (vstat_[j] == VStat::Basic || j == q) continue;
    double arj;
    if (j < n_) {
      arj = 0.0;
      for (int e = col_ptr_[j]; e < col_ptr_[j + 1]; ++e) arj += y_[col_row_[e]] * col_val_[e];
    } else {
      arj = y_[j - n_];
    }
    if (arj == 0.0) continue;
    if (update_reduced) reduced_[j] -= step * arj;
    const double cand = arj * arj * inv2 * wq;
    if (cand > devex_w_[j]) devex_w_[j] = cand;
    if (devex_w_[j] > biggest) biggest = devex_w_[j];
  }
  devex_w_[basic_col_[block_row]] = std::max(wq * inv2, 1.0);  // leaving variable's weight
  if (biggest > 1e12) std::fill(devex_w_.begin(), devex_w_.end(), 1.0);
}

double Simplex::structural_objective() const {
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  return obj;
}

bool Simplex::feasibility_check() const {
  for (int j = 0; j < n_; ++j) {
    if (std::isfinite(lb_[j]) && x_[j] < lb_[j] - feas_tol(lb_[j])) return false;
    if (std::isfinite(ub_[j]) && x_[j] > ub_[j] + feas_tol(ub_[j])) return false;
  }
  for (int i = 0; i < m_; ++i) {
    const auto& row = lp_.rows()[i];
    double act = 0.0;
    for (std::size_t t = 0; t < row.vars.size(); ++t) act += row.coeffs[t] * x_[row.vars[t]];
    const double tol = feas_tol(row.rhs) + opt_.feasibility_tol * std::abs(act);
    switch (row.rel) {
      case Relation::LessEqual:
        if (act > row.rhs + tol) return false;
        break;
      case Relation::GreaterEqual:
        if (act < row.rhs - tol) return false;
        break;
      case Relation::Equal:
        if (std::abs(act - row.rhs) > tol) return false;
        break;
    }
  }
  return true;
}

bool Simplex::run(LpSolution& out) {
  build_columns();
  if (!start_warm()) start_cold();
  if (!refactor()) {
    // singular warm basis: fall back to the all-logical start
    start_cold();
    if (!refactor()) return false;
  }
  recompute_basics();

  double cost_scale = 1.0;
  for (int j = 0; j < n_; ++j) cost_scale = std::max(cost_scale, std::abs(cost_[j]));
  dual_tol_ = opt_.optimality_tol * cost_scale;

  bool reduced_valid = false;
  bool was_phase1 = true;
  std::vector<double> alpha(m_, 0.0);
  std::vector<int> alpha_rows;
#ifdef NETPLAN_LP_PROFILE
  double tp_price = 0, tp_ftran = 0, tp_devex = 0, tp_refac = 0, tp_classify = 0, tp_refresh = 0;
  long long n_refac = 0;
  auto tic = [] { return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count(); };
#define NPPROF(acc, stmt) do { const double t0__ = tic(); stmt; acc += tic() - t0__; } while (0)
#else
#define NPPROF(acc, stmt) do { stmt; } while (0)
#endif

  struct Breakpoint {
    double t;
    double slope_gain;
    int row;  // -1: entering's own bound
    VStat stat;
  };
  std::vector<Breakpoint> breaks;

  for (;;) {
    if (iters_ >= opt_.max_iterations) {
      out.status = LpStatus::NumericFailure;
      out.iterations = iters_;
      return true;
    }
    const bool eta_heavy =
        eta_row_.size() > std::max<std::size_t>(20000, 4 * factor_.fill_entries());
    if (pivots_since_refactor_ >= opt_.refactor_interval || eta_heavy) {
      bool ok__ = true;
      NPPROF(tp_refac, { ok__ = refactor(); recompute_basics();
#ifdef NETPLAN_LP_PROFILE
        ++n_refac;
#endif
      });
      if (!ok__) return false;
      reduced_valid = false;
    }

    NPPROF(tp_classify, classify());
    if (phase1_ != was_phase1) {
      bland_ = false;
      degen_streak_ = 0;
      was_phase1 = phase1_;
      std::fill(devex_w_.begin(), devex_w_.end(), 1.0);
      if (opt_.log_every > 0)
        std::fprintf(stderr, "[simplex] iter=%lld entering phase %d (infeas=%.3g)\n",
                     static_cast<long long>(iters_), phase1_ ? 1 : 2, infeas_sum_);
    }

    Pricing pr;
    if (phase1_) {
      NPPROF(tp_price, pr = price_phase1());
    } else {
      if (!reduced_valid) {
        NPPROF(tp_refresh, refresh_reduced());
        reduced_valid = true;
      }
      NPPROF(tp_price, pr = price_phase2());
    }

    if (pr.col < 0) {
      if (pivots_since_refactor_ > 0) {
        // confirm on a fresh factorization
        if (!refactor()) return false;
        recompute_basics();
        reduced_valid = false;
        classify();
        if (phase1_) {
          pr = price_phase1();
        } else {
          refresh_reduced();
          reduced_valid = true;
          pr = price_phase2();
        }
      }
      if (pr.col < 0) {
        if (phase1_) {
          out.status = LpStatus::Infeasible;
          out.iterations = iters_;
          return true;
        }
        break;  // optimal
      }
    }

    const int q = pr.col;
    const int dir = pr.dir;

    NPPROF(tp_ftran, {
      std::fill(alpha.begin(), alpha.end(), 0.0);
      for_column(q, [&](int r, double v) { alpha[r] += v; });
      ftran(alpha);
      alpha_rows.clear();
      for (int r = 0; r < m_; ++r)
        if (alpha[r] != 0.0) alpha_rows.push_back(r);
    });

    const double own_range = ub_[q] - lb_[q];
    int block_row = -1;
    double theta = 0.0;
    VStat leave_stat = VStat::AtLower;
    bool unbounded = false;

    if (phase1_) {
      // long-step ratio test on the piecewise-linear infeasibility sum
      breaks.clear();
      for (const int r : alpha_rows) {
        const double g = dir * alpha[r];  // basic moves at rate -g
        if (std::abs(g) <= opt_.pivot_tol) continue;
        const int p = basic_col_[r];
        const double v = -g;
        const double lo = lb_[p], hi = ub_[p];
        const bool below = x_[p] < lo - feas_tol(lo);
        const bool above = x_[p] > hi + feas_tol(hi);
        if (v > 0) {
          if (below) {
            breaks.push_back({(lo - x_[p]) / v, v, r, VStat::AtLower});
            if (std::isfinite(hi)) breaks.push_back({(hi - x_[p]) / v, v, r, VStat::AtUpper});
          } else if (!above && std::isfinite(hi)) {
            breaks.push_back({std::max(0.0, (hi - x_[p]) / v), v, r, VStat::AtUpper});
          }
        } else {
          const double w = -v;  // decreasing
          if (above) {
            breaks.push_back({(x_[p] - hi) / w, w, r, VStat::AtUpper});
            if (std::isfinite(lo)) breaks.push_back({(x_[p] - lo) / w, w, r, VStat::AtLower});
          } else if (!below && std::isfinite(lo)) {
            breaks.push_back({std::max(0.0, (x_[p] - lo) / w), w, r, VStat::AtLower});
          }
        }
      }
      if (std::isfinite(own_range))
        breaks.push_back({own_range, kInfinity, -1, dir > 0 ? VStat::AtUpper : VStat::AtLower});
      if (breaks.empty()) return false;  // infeasibility sum unbounded below: inconsistent
      std::sort(breaks.begin(), breaks.end(), [](const Breakpoint& a, const Breakpoint& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.row < b.row;
      });
      double slope = -std::abs(pr.reduced);
      std::size_t i = 0;
      for (; i < breaks.size(); ++i) {
        if (bland_) break;  // textbook rule: stop at the first breakpoint
        slope += breaks[i].slope_gain;
        if (slope >= -1e-12) break;
      }
      if (i >= breaks.size()) i = breaks.size() - 1;
      block_row = breaks[i].row;
      theta = std::max(0.0, breaks[i].t);
      leave_stat = breaks[i].stat;
    } else {
      // Harris-style two-pass
      double theta_relaxed = own_range;
      for (const int r : alpha_rows) {
        const double g = dir * alpha[r];
        if (std::abs(g) <= opt_.pivot_tol) continue;
        const int p = basic_col_[r];
        double ratio;
        if (g > 0) {
          if (!std::isfinite(lb_[p])) continue;
          ratio = (x_[p] - lb_[p] + feas_tol(lb_[p])) / g;
        } else {
          if (!std::isfinite(ub_[p])) continue;
          ratio = (x_[p] - ub_[p] - feas_tol(ub_[p])) / g;
        }
        if (ratio < theta_relaxed) theta_relaxed = ratio;
      }
      if (!std::isfinite(theta_relaxed)) {
        unbounded = true;
      } else {
        double best_pivot = 0.0;
        double bland_best = kInfinity;
        for (const int r : alpha_rows) {
          const double g = dir * alpha[r];
          if (std::abs(g) <= opt_.pivot_tol) continue;
          const int p = basic_col_[r];
          double strict;
          VStat stat;
          if (g > 0) {
            if (!std::isfinite(lb_[p])) continue;
            strict = (x_[p] - lb_[p]) / g;
            stat = VStat::AtLower;
          } else {
            if (!std::isfinite(ub_[p])) continue;
            strict = (x_[p] - ub_[p]) / g;
            stat = VStat::AtUpper;
          }
          if (bland_) {
            const double key = std::max(strict, 0.0);
            if (key < bland_best - 1e-15 ||
                (std::abs(key - bland_best) <= 1e-15 &&
                 (block_row < 0 || p < basic_col_[block_row]))) {
              bland_best = key;
              block_row = r;
              theta = key;
              leave_stat = stat;
            }
          } else if (strict <= theta_relaxed) {
            const double a = std::abs(g);
            if (a > best_pivot) {
              best_pivot = a;
              block_row = r;
              theta = std::max(strict, 0.0);
              leave_stat = stat;
            }
          }
        }
        if (block_row < 0 && !std::isfinite(own_range)) unbounded = true;
      }
      if (unbounded) {
        out.status = LpStatus::Unbounded;
        out.iterations = iters_;
        return true;
      }
      if (block_row < 0 || (std::isfinite(own_range) && own_range <= theta)) {
        block_row = -1;
        theta = own_range;
      }
    }

    if (block_row < 0) {
      // bound flip: entering runs to its opposite bound, basis unchanged
      for (const int r : alpha_rows) x_[basic_col_[r]] -= dir * theta * alpha[r];
      x_[q] = dir > 0 ? ub_[q] : lb_[q];
      vstat_[q] = dir > 0 ? VStat::AtUpper : VStat::AtLower;
      ++iters_;
      degen_streak_ = 0;
      continue;
    }

    if (phase1_)
      reduced_valid = false;  // basis changes during repair invalidate the cache
    else if (!bland_)
      NPPROF(tp_devex,
             update_devex_and_reduced(q, pr.reduced, block_row, alpha[block_row], reduced_valid));
    else
      reduced_valid = false;

    const int leave = basic_col_[block_row];
    for (const int r : alpha_rows) x_[basic_col_[r]] -= dir * theta * alpha[r];
    x_[leave] = leave_stat == VStat::AtLower ? lb_[leave] : ub_[leave];
    vstat_[leave] = leave_stat;
    x_[q] = x_[q] + dir * theta;
    vstat_[q] = VStat::Basic;
    basic_col_[block_row] = q;
    if (!phase1_ && reduced_valid) {
      reduced_[leave] = -pr.reduced / alpha[block_row];
      reduced_[q] = 0.0;
    }

    eta_pivot_row_.push_back(block_row);
    eta_pivot_val_.push_back(alpha[block_row]);
    for (const int r : alpha_rows) {
      if (r != block_row && std::abs(alpha[r]) > kDropTol) {
        eta_row_.push_back(r);
        eta_val_.push_back(alpha[r]);
      }
    }
    eta_start_.push_back(static_cast<int>(eta_row_.size()));

    ++iters_;
    ++pivots_since_refactor_;
    if (theta <= 1e-12) {
      if (++degen_streak_ >= opt_.bland_threshold) bland_ = true;
    } else {
      degen_streak_ = 0;
      bland_ = false;
    }
    if (opt_.log_every > 0 && iters_ % opt_.log_every == 0)
      std::fprintf(stderr, "[simplex] iter=%lld phase%d obj=%.6g infeas=%.3g eta_nnz=%zu\n",
                   static_cast<long long>(iters_), phase1_ ? 1 : 2, structural_objective(),
                   infeas_sum_, eta_row_.size());
  }

#ifdef NETPLAN_LP_PROFILE
  std::fprintf(stderr,
               "[profile] price=%.1f ftran=%.1f devex=%.1f refac=%.1f(%lld) classify=%.1f refresh=%.1f\n",
               tp_price, tp_ftran, tp_devex, tp_refac, n_refac, tp_classify, tp_refresh);
#endif
#undef NPPROF
  if (!feasibility_check()) return false;

  out.status = LpStatus::Optimal;
  out.objective_value = structural_objective();
  out.iterations = iters_;
  out.primal.assign(n_, 0.0);
  for (int j = 0; j < n_; ++j) {
    double v = x_[j];
    if (v < lb_[j] && v > lb_[j] - feas_tol(lb_[j])) v = lb_[j];
    if (v > ub_[j] && v < ub_[j] + feas_tol(ub_[j])) v = ub_[j];
    out.primal[j] = v;
  }
  out.basis.resize(total_);
  for (int j = 0; j < total_; ++j) out.basis[j] = static_cast<unsigned char>(vstat_[j]);
  return true;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) { return solve_lp(lp, SimplexOptions{}); }

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  lp.validate();
  LpSolution sol;
  {
    Simplex engine(lp, options);
    if (engine.run(sol)) return sol;
  }
  // numerical breakdown: one conservative retry from a cold start
  SimplexOptions retry = options;
  retry.warm_basis.clear();
  retry.refactor_interval = std::max(10, options.refactor_interval / 4);
  retry.bland_threshold = std::max(50, options.bland_threshold / 5);
  retry.pivot_tol = std::max(options.pivot_tol, 1e-8);
  sol = LpSolution{};
  Simplex engine(lp, retry);
  if (engine.run(sol)) return sol;
  return LpSolution{};
}

std::unordered_map<std::string, double> primal_map(const LinearProgram& lp,
                                                   const LpSolution& sol) {
  std::unordered_map<std::string, double> out;
  out.reserve(sol.primal.size());
  for (std::size_t j = 0; j < sol.primal.size(); ++j) out.emplace(lp.variable_name(j), sol.primal[j]);
  return out;
}

void dump_lp(const LinearProgram& lp, std::ostream& out) {
  char buf[64];
  auto num = [&](double v) -> const char* {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
  };
  out << "minimize " << lp.num_variables() << " variables, " << lp.num_constraints()
      << " constraints\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    out << "var " << lp.variable_name(j);
    out << " [" << num(lp.lower_bound(j));
    out << ", " << num(lp.upper_bound(j));
    out << "] obj " << num(lp.objective_coeff(j)) << "\n";
  }
  for (int i = 0; i < lp.num_constraints(); ++i) {
    const auto& row = lp.rows()[i];
    out << "row " << i << ":";
    for (std::size_t t = 0; t < row.vars.size(); ++t) {
      out << " " << (row.coeffs[t] >= 0 && t > 0 ? "+" : "") << num(row.coeffs[t]) << "*"
          << lp.variable_name(row.vars[t]);
    }
    const char* rel = row.rel == Relation::LessEqual   ? "<="
                      : row.rel == Relation::GreaterEqual ? ">="
                                                          : "=";
    out << " " << rel << " " << num(row.rhs) << "\n";
  }
}

}  // namespace netplan
