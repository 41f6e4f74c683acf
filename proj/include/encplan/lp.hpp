#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "encplan/model.hpp"

namespace encplan {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus s);

struct LpOptions {
  double primal_tol = 1e-7;
  double dual_tol = 1e-7;
  int max_iterations = 200000;
  int refactor_interval = 80;
};

/// Result of an LP solve. Row duals follow the minimization convention
/// `dual_i = d objective / d bound_i` for the row bound that is active, so a
/// binding `>=` row has a nonnegative dual and a binding `<=` row a
/// nonpositive one. Reduced costs use the same convention for variable bounds.
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;
  std::vector<double> row_activity;
  int iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

/// Solves the continuous relaxation of `model` (integrality is ignored).
LpSolution solve_lp(const MilpModel& model, const LpOptions& options = {});

/// Objective of the dual problem evaluated at the solution's duals.
double dual_objective(const MilpModel& model, const LpSolution& sol);

/// Max over rows and bounds of |dual| * distance-to-its-bound, plus any
/// sign-convention violation of the duals.
double complementary_slackness_residual(const MilpModel& model, const LpSolution& sol);

/// Max violation of the dual constraints c_j - a_j^T y - d_j = 0.
double dual_feasibility_residual(const MilpModel& model, const LpSolution& sol);

namespace detail {
class SimplexCore;
}

/// Bounded revised simplex that keeps its basis between solves. Column bounds
/// can be tightened between calls; the next solve then starts from the
/// previous basis with the dual simplex, which is how branch-and-bound nodes
/// are re-optimized.
class SimplexEngine {
 public:
  explicit SimplexEngine(const MilpModel& model, LpOptions options = {});
  ~SimplexEngine();
  SimplexEngine(SimplexEngine&&) noexcept;
  SimplexEngine& operator=(SimplexEngine&&) noexcept;

  using Basis = std::vector<std::int8_t>;

  void set_col_bounds(int j, double lower, double upper);
  double col_lower(int j) const;
  double col_upper(int j) const;

  LpStatus solve();
  LpSolution solution() const;
  double objective() const;
  const std::vector<double>& primal() const;
  int iterations() const;

  Basis basis() const;
  void set_basis(const Basis& basis);

 private:
  std::unique_ptr<detail::SimplexCore> core_;
};

}  // namespace encplan
