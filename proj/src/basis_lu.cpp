#include "basis_lu.hpp"

#include <algorithm>
#include <cmath>

namespace netplan::detail {

namespace {
constexpr double kThreshold = 0.01;  // relative pivot magnitude floor
constexpr double kAbsTiny = 1e-12;
}  // namespace

bool BasisLu::factorize(int m, const std::vector<SparseCol>& columns) {
  m_ = m;
  steps_.assign(m, Step{});
  order_.assign(m, -1);
  l_rows_.clear();
  l_mul_.clear();
  u_pos_.clear();
  u_val_.clear();
  if (m == 0) return true;

  // active matrix, row-wise; entries carry the owning column position.
  // workspaces keep their capacity between calls
  if (static_cast<int>(ws_rows_.size()) < m) {
    ws_rows_.resize(m);
    ws_col_rows_.resize(m);
  }
  auto& rows = ws_rows_;
  auto& col_rows = ws_col_rows_;
  for (int i = 0; i < m; ++i) {
    rows[i].clear();
    col_rows[i].clear();
  }
  ws_rowcount_.assign(m, 0);
  ws_colcount_.assign(m, 0);
  auto& rowcount = ws_rowcount_;
  auto& colcount = ws_colcount_;
  for (int c = 0; c < m; ++c) {
    for (const auto& [r, v] : columns[c]) {
      if (v == 0.0) continue;
      rows[r].emplace_back(c, v);
      col_rows[c].push_back(r);
      ++rowcount[r];
      ++colcount[c];
    }
  }

  ws_row_done_.assign(m, 0);
  ws_col_done_.assign(m, 0);
  ws_col_singles_.clear();
  ws_row_singles_.clear();
  auto& row_done = ws_row_done_;
  auto& col_done = ws_col_done_;
  auto& col_singles = ws_col_singles_;
  auto& row_singles = ws_row_singles_;
  for (int c = 0; c < m; ++c)
    if (colcount[c] == 1) col_singles.push_back(c);
  for (int r = 0; r < m; ++r)
    if (rowcount[r] == 1) row_singles.push_back(r);
  ws_active_cols_.resize(m);
  for (int c = 0; c < m; ++c) ws_active_cols_[c] = c;
  auto& active_cols = ws_active_cols_;

  auto row_find = [&](int r, int c) -> double* {
    for (auto& e : rows[r])
      if (e.first == c) return &e.second;
    return nullptr;
  };
  auto note_col = [&](int c) {
    if (!col_done[c] && colcount[c] == 1) col_singles.push_back(c);
  };
  auto note_row = [&](int r) {
    if (!row_done[r] && rowcount[r] == 1) row_singles.push_back(r);
  };

  for (int step = 0; step < m; ++step) {
    int pr = -1, pc = -1;

    // cheapest first: a column with one active row needs no update at all
    while (!col_singles.empty()) {
      const int c = col_singles.back();
      col_singles.pop_back();
      if (col_done[c] || colcount[c] != 1) continue;
      for (int r : col_rows[c]) {
        if (row_done[r]) continue;
        if (row_find(r, c)) {
          pr = r;
          pc = c;
          break;
        }
      }
      if (pc >= 0) break;
    }
    if (pc < 0) {
      while (!row_singles.empty()) {
        const int r = row_singles.back();
        row_singles.pop_back();
        if (row_done[r] || rowcount[r] != 1) continue;
        for (const auto& [c, v] : rows[r]) {
          if (!col_done[c]) {
            pr = r;
            pc = c;
            break;
          }
        }
        if (pc >= 0) break;
      }
    }
    if (pc < 0) {
      // Markowitz-lite: smallest active column, then the entry with the
      // smallest row count whose magnitude clears the threshold. The active
      // list compacts itself as done columns are swept out.
      int best_count = m + 1;
      int cand = -1;
      int scanned = 0;
      std::size_t i = 0;
      while (i < active_cols.size()) {
        const int c = active_cols[i];
        if (col_done[c]) {
          active_cols[i] = active_cols.back();
          active_cols.pop_back();
          continue;
        }
        ++i;
        ++scanned;
        if (colcount[c] < best_count) {
          best_count = colcount[c];
          cand = c;
          if (best_count <= 2) break;
        }
        if (scanned > 512 && cand >= 0) break;  // bounded scan keeps this cheap
      }
      if (cand < 0) return false;
      pc = cand;
      double colmax = 0.0;
      for (int r : col_rows[pc]) {
        if (row_done[r]) continue;
        if (const double* v = row_find(r, pc)) colmax = std::max(colmax, std::abs(*v));
      }
      if (colmax < kAbsTiny) return false;
      int best_rc = m + 1;
      for (int r : col_rows[pc]) {
        if (row_done[r]) continue;
        const double* v = row_find(r, pc);
        if (!v || std::abs(*v) < kThreshold * colmax) continue;
        if (rowcount[r] < best_rc) {
          best_rc = rowcount[r];
          pr = r;
        }
      }
      if (pr < 0) return false;
    }

    const double pivot = *row_find(pr, pc);
    if (std::abs(pivot) < kAbsTiny) return false;

    Step& s = steps_[step];
    s.pivot_row = pr;
    s.pivot_val = pivot;
    order_[step] = pc;
    row_done[pr] = 1;
    col_done[pc] = 1;

    // U part: the rest of the pivot row, finalized now
    s.u_begin = static_cast<int>(u_pos_.size());
    for (const auto& [c, v] : rows[pr]) {
      if (c == pc || col_done[c]) continue;
      u_pos_.push_back(c);  // rewritten to the owning pivot row afterwards
      u_val_.push_back(v);
      --colcount[c];
    }
    s.u_end = static_cast<int>(u_pos_.size());

    // L part: eliminate the pivot column from the remaining rows
    s.l_begin = static_cast<int>(l_rows_.size());
    for (int r : col_rows[pc]) {
      if (row_done[r]) continue;
      double mul = 0.0;
      bool present = false;
      for (std::size_t i = 0; i < rows[r].size(); ++i) {
        if (rows[r][i].first == pc) {
          mul = rows[r][i].second / pivot;
          rows[r][i] = rows[r].back();
          rows[r].pop_back();
          present = true;
          break;
        }
      }
      if (!present) continue;  // stale pattern entry
      l_rows_.push_back(r);
      l_mul_.push_back(mul);
      --rowcount[r];
      if (mul != 0.0) {
        for (const auto& [c, v] : rows[pr]) {
          if (c == pc || col_done[c]) continue;
          if (double* t = row_find(r, c)) {
            *t -= mul * v;
            if (std::abs(*t) < kAbsTiny) {
              // exact-ish cancellation: remove the entry
              for (auto& e : rows[r])
                if (e.first == c) {
                  e = rows[r].back();
                  rows[r].pop_back();
                  break;
                }
              --rowcount[r];
              --colcount[c];
              note_row(r);
              note_col(c);
            }
          } else {
            rows[r].emplace_back(c, -mul * v);
            col_rows[c].push_back(r);
            ++rowcount[r];
            ++colcount[c];
          }
        }
      }
      note_row(r);
    }
    s.l_end = static_cast<int>(l_rows_.size());
    for (const auto& e : rows[pr]) note_col(e.first);
    rows[pr].clear();
  }

  // map U column positions onto the pivot rows that own them
  pos_pivot_row_.assign(m, -1);
  for (int k = 0; k < m; ++k) pos_pivot_row_[order_[k]] = steps_[k].pivot_row;
  for (int& c : u_pos_) c = pos_pivot_row_[c];
  return true;
}

void BasisLu::ftran(std::vector<double>& w) const {
  // forward elimination
  for (const Step& s : steps_) {
    const double t = w[s.pivot_row];
    if (t == 0.0) continue;
    for (int e = s.l_begin; e < s.l_end; ++e) w[l_rows_[e]] -= l_mul_[e] * t;
  }
  // back substitution, later positions first
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    double t = w[it->pivot_row];
    for (int e = it->u_begin; e < it->u_end; ++e) t -= u_val_[e] * w[u_pos_[e]];
    w[it->pivot_row] = t / it->pivot_val;
  }
}

void BasisLu::btran(std::vector<double>& w) const {
  // transposed back substitution (scatter form)
  for (const Step& s : steps_) {
    const double t = w[s.pivot_row] / s.pivot_val;
    w[s.pivot_row] = t;
    if (t == 0.0) continue;
    for (int e = s.u_begin; e < s.u_end; ++e) w[u_pos_[e]] -= u_val_[e] * t;
  }
  // transposed forward elimination
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    double t = w[it->pivot_row];
    for (int e = it->l_begin; e < it->l_end; ++e) t -= l_mul_[e] * w[l_rows_[e]];
    w[it->pivot_row] = t;
  }
}

}  // namespace netplan::detail
