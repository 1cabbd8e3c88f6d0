// Sparse LU factorization of a simplex basis (solver-internal).
#pragma once

#include <utility>
#include <vector>

namespace netplan::detail {

/// Right-looking Gaussian elimination with Markowitz-flavoured pivoting:
/// column/row singletons first (no fill), then smallest-column pivots under
/// threshold partial pivoting. Solves keep the engine's row-labelled basis
/// convention: after factorize(), position k's column owns pivot row
/// pivot_row(k), and ftran writes the coefficient of that column into slot
/// pivot_row(k) of the vector.
class BasisLu {
 public:
  using SparseCol = std::vector<std::pair<int, double>>;  // (row, value)

  /// Returns false when the basis is numerically singular.
  bool factorize(int m, const std::vector<SparseCol>& columns);

  int pivot_row(int position) const { return pos_pivot_row_[position]; }
  std::size_t fill_entries() const { return l_rows_.size() + u_pos_.size(); }

  /// In place: w := B^{-1} w (result row-labelled as described above).
  void ftran(std::vector<double>& w) const;
  /// In place: w := B^{-T} w (input row-labelled, output in plain row space).
  void btran(std::vector<double>& w) const;

 private:
  struct Step {
    int pivot_row = -1;
    double pivot_val = 0.0;
    int l_begin = 0, l_end = 0;  // multiplier slice
    int u_begin = 0, u_end = 0;  // retired-row slice
  };
  std::vector<Step> steps_;          // elimination order; steps_[k] pivots position order_[k]
  std::vector<int> order_;           // elimination order -> basis position
  std::vector<int> pos_pivot_row_;   // basis position -> pivot row
  std::vector<int> l_rows_;          // rows receiving the (pre-divided) multipliers
  std::vector<double> l_mul_;
  std::vector<int> u_pos_;           // pivot rows referenced by U rows (after finalize)
  std::vector<double> u_val_;
  int m_ = 0;

  // elimination workspaces, reused across factorize() calls
  std::vector<std::vector<std::pair<int, double>>> ws_rows_;
  std::vector<std::vector<int>> ws_col_rows_;
  std::vector<int> ws_rowcount_, ws_colcount_;
  std::vector<unsigned char> ws_row_done_, ws_col_done_;
  std::vector<int> ws_col_singles_, ws_row_singles_;
  std::vector<int> ws_active_cols_;
};

}  // namespace netplan::detail
