#include "encplan/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace encplan {

double Row::lower() const {
  switch (sense) {
    case RowSense::LessEqual: return -kInf;
    case RowSense::GreaterEqual:
    case RowSense::Equal:
    case RowSense::Range: return rhs;
  }
  return -kInf;
}

double Row::upper() const {
  switch (sense) {
    case RowSense::LessEqual:
    case RowSense::Equal: return rhs;
    case RowSense::GreaterEqual: return kInf;
    case RowSense::Range: return rhs + range;
  }
  return kInf;
}

int MilpModel::add_var(std::string var_name, VarKind kind, double lower, double upper, double cost) {
  const int j = num_vars();
  auto [it, inserted] = var_index_.emplace(var_name, j);
  if (!inserted) throw std::invalid_argument("duplicate variable name: " + var_name);
  vars_.push_back(Variable{std::move(var_name), kind, lower, upper});
  cost_.push_back(cost);
  return j;
}

int MilpModel::add_row(std::string row_name, std::vector<Term> terms, RowSense sense, double rhs) {
  const int i = num_rows();
  auto [it, inserted] = row_index_.emplace(row_name, i);
  if (!inserted) throw std::invalid_argument("duplicate row name: " + row_name);
  rows_.push_back(Row{std::move(row_name), std::move(terms), sense, rhs, 0.0});
  return i;
}

int MilpModel::add_range(std::string row_name, std::vector<Term> terms, double lower, double upper) {
  if (!std::isfinite(lower) && !std::isfinite(upper)) throw std::invalid_argument("free row " + row_name);
  if (!std::isfinite(lower)) return add_row(std::move(row_name), std::move(terms), RowSense::LessEqual, upper);
  if (!std::isfinite(upper)) return add_row(std::move(row_name), std::move(terms), RowSense::GreaterEqual, lower);
  const int i = add_row(std::move(row_name), std::move(terms), RowSense::Range, lower);
  rows_[i].range = upper - lower;
  return i;
}

std::size_t MilpModel::num_nonzeros() const {
  std::size_t nnz = 0;
  for (const auto& r : rows_) nnz += r.terms.size();
  return nnz;
}

int MilpModel::num_integer() const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(),
                                        [](const Variable& v) { return v.kind != VarKind::Continuous; }));
}

void MilpModel::set_bounds(int j, double lower, double upper) {
  vars_.at(j).lower = lower;
  vars_.at(j).upper = upper;
}

int MilpModel::find_var(const std::string& key) const {
  auto it = var_index_.find(key);
  return it == var_index_.end() ? -1 : it->second;
}

int MilpModel::find_row(const std::string& key) const {
  auto it = row_index_.find(key);
  return it == row_index_.end() ? -1 : it->second;
}

double MilpModel::objective_value(std::span<const double> x) const {
  double v = offset_;
  for (int j = 0; j < num_vars(); ++j) v += cost_[j] * x[j];
  return v;
}

double MilpModel::row_activity(int i, std::span<const double> x) const {
  double a = 0.0;
  for (const auto& t : rows_[i].terms) a += t.coef * x[t.var];
  return a;
}

double MilpModel::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    worst = std::max(worst, vars_[j].lower - x[j]);
    worst = std::max(worst, x[j] - vars_[j].upper);
  }
  for (int i = 0; i < num_rows(); ++i) {
    const double a = row_activity(i, x);
    worst = std::max(worst, rows_[i].lower() - a);
    worst = std::max(worst, a - rows_[i].upper());
  }
  return worst;
}

double MilpModel::max_integrality_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    if (vars_[j].kind == VarKind::Continuous) continue;
    worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  }
  return worst;
}

void MilpModel::validate() const {
  for (int j = 0; j < num_vars(); ++j) {
    const auto& v = vars_[j];
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
      throw std::invalid_argument("invalid bounds on variable " + v.name);
    if (!std::isfinite(cost_[j])) throw std::invalid_argument("non-finite cost on " + v.name);
  }
  if (!std::isfinite(offset_)) throw std::invalid_argument("non-finite objective offset");
  for (const auto& r : rows_) {
    if (!std::isfinite(r.rhs) || !std::isfinite(r.range) || r.range < 0.0)
      throw std::invalid_argument("invalid right-hand side on row " + r.name);
    for (const auto& t : r.terms) {
      if (t.var < 0 || t.var >= num_vars())
        throw std::invalid_argument("row " + r.name + " references unknown variable");
      if (!std::isfinite(t.coef)) throw std::invalid_argument("non-finite coefficient in row " + r.name);
    }
  }
}

}  // namespace encplan
