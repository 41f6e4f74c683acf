#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "encplan/lp.hpp"
#include "encplan/model.hpp"

namespace encplan {

enum class MilpStatus {
  Optimal,     // gap <= target
  Feasible,    // limit reached with an incumbent
  Infeasible,
  Unbounded,
  Unknown,     // limit reached without an incumbent; only the bound is valid
};

const char* to_string(MilpStatus s);

struct MilpOptions {
  double gap_target = 1e-3;
  double time_limit = 600.0;  // seconds
  long node_limit = 5'000'000;
  double integrality_tol = 1e-6;
  double feasibility_tol = 1e-6;
  int dive_every = 50;        // nodes between diving heuristics; 0 disables
  LpOptions lp;
  /// Optional feasible starting point; ignored unless it passes the checks.
  std::vector<double> initial_solution;
};

struct MilpSolution {
  MilpStatus status = MilpStatus::Unknown;
  std::vector<double> x;
  double objective = kInf;
  double bound = -kInf;
  double gap = kInf;  // (objective - bound) / max(1, |objective|)
  long nodes = 0;     // LP nodes solved, root included
  long branchings = 0;
  long lp_iterations = 0;
  double seconds = 0.0;
  /// Global bound after each processed node; nondecreasing.
  std::vector<double> bound_trace;

  bool has_incumbent() const { return status == MilpStatus::Optimal || status == MilpStatus::Feasible; }
};

/// Best-first branch-and-bound on the most fractional variable (lowest index on
/// ties). Nodes are re-optimized from their parent's basis with the dual simplex.
MilpSolution solve_milp(const MilpModel& model, const MilpOptions& options = {});

inline double relative_gap(double incumbent, double bound) {
  return (incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

}  // namespace encplan
