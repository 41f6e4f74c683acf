#pragma once

#include <vector>

namespace encplan::detail {

struct SparseEntry {
  int index;
  double value;
};

using SparseColumn = std::vector<SparseEntry>;

/// Sparse LU of a square basis matrix with Markowitz pivot selection and
/// threshold partial pivoting, plus product-form eta updates.
///
/// Columns are addressed by basis position, rows by constraint index. After
/// `factorize`, `singular_positions()` lists positions whose column could not
/// be pivoted; `singular_rows()` lists the rows left uncovered, pairwise.
class BasisFactor {
 public:
  void factorize(const std::vector<SparseColumn>& columns, int dim);

  /// Solves B x = rhs in place (rhs indexed by row, result by position).
  void ftran(std::vector<double>& rhs) const;
  /// Solves B^T y = rhs in place (rhs indexed by position, result by row).
  void btran(std::vector<double>& rhs) const;

  /// Registers the replacement of the column at `position` by a column whose
  /// FTRAN image is `alpha`.
  void update(int position, const std::vector<double>& alpha);

  int num_updates() const { return static_cast<int>(etas_.size()); }
  const std::vector<int>& singular_positions() const { return singular_positions_; }
  const std::vector<int>& singular_rows() const { return singular_rows_; }

 private:
  struct Eta {
    int position;
    double pivot;
    SparseColumn others;
  };

  int dim_ = 0;
  std::vector<int> pivot_row_;
  std::vector<int> pivot_col_;
  std::vector<double> diag_;
  std::vector<SparseColumn> lcols_;
  std::vector<SparseColumn> urows_;
  std::vector<Eta> etas_;
  std::vector<int> singular_positions_;
  std::vector<int> singular_rows_;
  mutable std::vector<double> work_;
};

}  // namespace encplan::detail
