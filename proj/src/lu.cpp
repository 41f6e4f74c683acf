#include "lu.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace encplan::detail {

namespace {

constexpr double kPivotThreshold = 0.1;
constexpr double kAbsolutePivotTol = 1e-11;
constexpr int kMarkowitzColumns = 4;

}  // namespace

void BasisFactor::factorize(const std::vector<SparseColumn>& columns, int dim) {
  dim_ = dim;
  pivot_row_.clear();
  pivot_col_.clear();
  diag_.clear();
  lcols_.clear();
  urows_.clear();
  etas_.clear();
  singular_positions_.clear();
  singular_rows_.clear();
  work_.assign(dim, 0.0);

  std::vector<SparseColumn> cols(columns.begin(), columns.end());
  std::vector<std::vector<int>> rows(dim);
  std::vector<int> row_count(dim, 0);
  for (int j = 0; j < dim; ++j) {
    for (const auto& e : cols[j]) {
      rows[e.index].push_back(j);
      ++row_count[e.index];
    }
  }
  std::vector<char> col_active(dim, 1), row_active(dim, 1);
  std::vector<int> active_cols(dim);
  for (int j = 0; j < dim; ++j) active_cols[j] = j;
  std::vector<int> slot(dim, -1);

  auto col_max = [&](int j) {
    double mx = 0.0;
    for (const auto& e : cols[j]) mx = std::max(mx, std::abs(e.value));
    return mx;
  };

  while (!active_cols.empty()) {
    int p = -1, q = -1;
    double apq = 0.0;

    // Column singletons, dropping empty columns as they appear.
    for (std::size_t k = 0; k < active_cols.size() && q < 0; ++k) {
      const int j = active_cols[k];
      if (cols[j].size() == 1 && std::abs(cols[j][0].value) > kAbsolutePivotTol) {
        q = j;
        p = cols[j][0].index;
        apq = cols[j][0].value;
      }
    }
    if (q < 0) {
      for (int i = 0; i < dim && q < 0; ++i) {
        if (!row_active[i] || row_count[i] != 1) continue;
        for (int j : rows[i]) {
          if (!col_active[j]) continue;
          for (const auto& e : cols[j]) {
            if (e.index == i && std::abs(e.value) > kAbsolutePivotTol &&
                std::abs(e.value) >= kPivotThreshold * col_max(j)) {
              p = i;
              q = j;
              apq = e.value;
            }
          }
          break;
        }
      }
    }
    if (q < 0) {
      std::array<int, kMarkowitzColumns> cand;
      cand.fill(-1);
      for (int j : active_cols) {
        const auto cnt = cols[j].size();
        if (cnt == 0) continue;
        for (int s = 0; s < kMarkowitzColumns; ++s) {
          if (cand[s] < 0 || cnt < cols[cand[s]].size()) {
            for (int t = kMarkowitzColumns - 1; t > s; --t) cand[t] = cand[t - 1];
            cand[s] = j;
            break;
          }
        }
      }
      double best_cost = std::numeric_limits<double>::infinity();
      double best_mag = 0.0;
      for (int j : cand) {
        if (j < 0) continue;
        const double mx = col_max(j);
        if (mx <= kAbsolutePivotTol) continue;
        const double cc = static_cast<double>(cols[j].size()) - 1.0;
        for (const auto& e : cols[j]) {
          const double mag = std::abs(e.value);
          if (mag < kPivotThreshold * mx || mag <= kAbsolutePivotTol) continue;
          const double cost = (row_count[e.index] - 1.0) * cc;
          const double rel = mag / mx;
          if (cost < best_cost || (cost == best_cost && rel > best_mag)) {
            best_cost = cost;
            best_mag = rel;
            p = e.index;
            q = j;
            apq = e.value;
          }
        }
      }
    }
    if (q < 0) break;  // remaining active submatrix is numerically singular

    SparseColumn lcol;
    for (const auto& e : cols[q]) {
      if (e.index != p) lcol.push_back({e.index, e.value / apq});
    }
    SparseColumn urow;
    for (int j : rows[p]) {
      if (!col_active[j] || j == q) continue;
      auto& cj = cols[j];
      auto it = std::find_if(cj.begin(), cj.end(), [p](const SparseEntry& e) { return e.index == p; });
      if (it == cj.end()) continue;
      const double apj = it->value;
      *it = cj.back();
      cj.pop_back();
      urow.push_back({j, apj});
      if (lcol.empty() || apj == 0.0) continue;
      for (std::size_t s = 0; s < cj.size(); ++s) slot[cj[s].index] = static_cast<int>(s);
      for (const auto& l : lcol) {
        const double delta = -l.value * apj;
        if (slot[l.index] >= 0) {
          cj[slot[l.index]].value += delta;
        } else {
          slot[l.index] = static_cast<int>(cj.size());
          cj.push_back({l.index, delta});
          rows[l.index].push_back(j);
          ++row_count[l.index];
        }
      }
      for (const auto& e : cj) slot[e.index] = -1;
    }
    for (const auto& e : cols[q]) --row_count[e.index];

    col_active[q] = 0;
    row_active[p] = 0;
    active_cols.erase(std::find(active_cols.begin(), active_cols.end(), q));
    cols[q].clear();
    rows[p].clear();

    pivot_row_.push_back(p);
    pivot_col_.push_back(q);
    diag_.push_back(apq);
    lcols_.push_back(std::move(lcol));
    urows_.push_back(std::move(urow));
  }

  if (!active_cols.empty()) {
    singular_positions_ = active_cols;
    std::sort(singular_positions_.begin(), singular_positions_.end());
    for (int i = 0; i < dim; ++i) {
      if (row_active[i]) singular_rows_.push_back(i);
    }
  }
}

void BasisFactor::ftran(std::vector<double>& rhs) const {
  const int npiv = static_cast<int>(pivot_row_.size());
  for (int k = 0; k < npiv; ++k) {
    const double yk = rhs[pivot_row_[k]];
    if (yk == 0.0) continue;
    for (const auto& l : lcols_[k]) rhs[l.index] -= l.value * yk;
  }
  auto& x = work_;
  std::fill(x.begin(), x.end(), 0.0);
  for (int k = npiv - 1; k >= 0; --k) {
    double v = rhs[pivot_row_[k]];
    for (const auto& u : urows_[k]) v -= u.value * x[u.index];
    x[pivot_col_[k]] = v / diag_[k];
  }
  rhs.swap(x);
  for (const auto& eta : etas_) {
    double& xr = rhs[eta.position];
    if (xr == 0.0) continue;
    xr /= eta.pivot;
    for (const auto& e : eta.others) rhs[e.index] -= e.value * xr;
  }
}

void BasisFactor::btran(std::vector<double>& rhs) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double v = rhs[it->position];
    for (const auto& e : it->others) v -= e.value * rhs[e.index];
    rhs[it->position] = v / it->pivot;
  }
  const int npiv = static_cast<int>(pivot_row_.size());
  auto& w = work_;
  std::fill(w.begin(), w.end(), 0.0);
  for (int k = 0; k < npiv; ++k) {
    const double wk = rhs[pivot_col_[k]] / diag_[k];
    w[pivot_row_[k]] = wk;
    if (wk == 0.0) continue;
    for (const auto& u : urows_[k]) rhs[u.index] -= u.value * wk;
  }
  for (int k = npiv - 1; k >= 0; --k) {
    double v = w[pivot_row_[k]];
    for (const auto& l : lcols_[k]) v -= l.value * w[l.index];
    w[pivot_row_[k]] = v;
  }
  rhs.swap(w);
}

void BasisFactor::update(int position, const std::vector<double>& alpha) {
  Eta eta;
  eta.position = position;
  eta.pivot = alpha[position];
  for (int i = 0; i < dim_; ++i) {
    if (i != position && alpha[i] != 0.0) eta.others.push_back({i, alpha[i]});
  }
  etas_.push_back(std::move(eta));
}

}  // namespace encplan::detail
