#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace encplan {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary, Integer };
enum class RowSense { LessEqual, GreaterEqual, Equal, Range };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInf;
};

struct Term {
  int var;
  double coef;
};

/// A linear row `lower <= sum(coef * x) <= upper`. `sense` records how the row
/// was stated; for Range rows `rhs` is the lower end and `range` the width.
struct Row {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
  double range = 0.0;

  double lower() const;
  double upper() const;
};

/// Solver-agnostic minimization model. Names double as tags: they are unique
/// and encode the equation family plus indices, e.g. `bal[b3,t7,a0]`.
class MilpModel {
 public:
  int add_var(std::string name, VarKind kind, double lower, double upper, double cost = 0.0);
  int add_continuous(std::string name, double lower, double upper, double cost = 0.0) {
    return add_var(std::move(name), VarKind::Continuous, lower, upper, cost);
  }
  int add_binary(std::string name, double cost = 0.0) {
    return add_var(std::move(name), VarKind::Binary, 0.0, 1.0, cost);
  }
  int add_row(std::string name, std::vector<Term> terms, RowSense sense, double rhs);
  int add_range(std::string name, std::vector<Term> terms, double lower, double upper);

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  std::size_t num_nonzeros() const;
  int num_integer() const;

  const Variable& var(int j) const { return vars_[j]; }
  Variable& var(int j) { return vars_[j]; }
  const Row& row(int i) const { return rows_[i]; }
  Row& row(int i) { return rows_[i]; }
  const std::vector<Variable>& vars() const { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }

  double cost(int j) const { return cost_[j]; }
  void set_cost(int j, double c) { cost_[j] = c; }
  const std::vector<double>& costs() const { return cost_; }
  double objective_offset() const { return offset_; }
  void set_objective_offset(double v) { offset_ = v; }

  void set_bounds(int j, double lower, double upper);
  void fix(int j, double value) { set_bounds(j, value, value); }

  /// -1 when absent.
  int find_var(const std::string& name) const;
  int find_row(const std::string& name) const;

  std::string name;

  double objective_value(std::span<const double> x) const;
  double row_activity(int i, std::span<const double> x) const;
  /// Largest bound or row violation of `x`; integrality is not considered.
  double max_violation(std::span<const double> x) const;
  /// Largest distance of an integer-kind variable from the nearest integer.
  double max_integrality_violation(std::span<const double> x) const;

  /// Throws std::invalid_argument on non-finite coefficients, inverted
  /// bounds, out-of-range indices or duplicate names.
  void validate() const;

 private:
  std::vector<Variable> vars_;
  std::vector<double> cost_;
  std::vector<Row> rows_;
  double offset_ = 0.0;
  std::unordered_map<std::string, int> var_index_;
  std::unordered_map<std::string, int> row_index_;
};

}  // namespace encplan
