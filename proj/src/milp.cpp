#include "encplan/milp.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <stdexcept>

namespace encplan {

const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::Optimal: return "optimal";
    case MilpStatus::Feasible: return "feasible";
    case MilpStatus::Infeasible: return "infeasible";
    case MilpStatus::Unbounded: return "unbounded";
    case MilpStatus::Unknown: return "unknown";
  }
  return "unknown";
}

namespace {

struct BoundChange {
  int var;
  double lower, upper;
};

struct Node {
  double bound;
  long id;
  std::vector<BoundChange> changes;
  std::shared_ptr<const SimplexEngine::Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node* a, const Node* b) const {
    if (a->bound != b->bound) return a->bound > b->bound;
    return a->id > b->id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, const MilpOptions& opt)
      : model_(model), opt_(opt), engine_(model, opt.lp), start_(std::chrono::steady_clock::now()) {
    for (int j = 0; j < model.num_vars(); ++j) {
      root_lo_.push_back(model.var(j).lower);
      root_hi_.push_back(model.var(j).upper);
      if (model.var(j).kind != VarKind::Continuous) ints_.push_back(j);
    }
  }

  MilpSolution run() {
    if (!opt_.initial_solution.empty()) try_incumbent(opt_.initial_solution);

    const LpStatus root = engine_.solve();
    result_.nodes = 1;
    if (root == LpStatus::Infeasible) return finish(MilpStatus::Infeasible);
    if (root == LpStatus::Unbounded) return finish(MilpStatus::Unbounded);
    if (root == LpStatus::IterationLimit) return finish_unknown_root();

    auto pending = std::make_unique<Node>(Node{engine_.objective(), next_id_++, {}, nullptr});
    // The root is handled as an already-solved node.
    process_solved(*pending);
    maybe_dive(*pending, true);

    while (!open_.empty()) {
      const double global = global_bound();
      record_bound(global);
      if (has_incumbent() && relative_gap(incumbent_obj_, global) <= opt_.gap_target) break;
      if (elapsed() > opt_.time_limit || result_.nodes >= opt_.node_limit) break;
      Node* raw = open_.top();
      open_.pop();
      std::unique_ptr<Node> node(raw);
      if (has_incumbent() && node->bound >= incumbent_obj_ - prune_tol()) continue;
      apply(node->changes);
      if (node->basis) engine_.set_basis(*node->basis);
      const LpStatus st = engine_.solve();
      ++result_.nodes;
      if (st == LpStatus::Infeasible) continue;
      if (st != LpStatus::Optimal) {
        lost_bound_ = std::min(lost_bound_, node->bound);
        continue;
      }
      node->bound = std::max(node->bound, engine_.objective());
      process_solved(*node);
      if (opt_.dive_every > 0 && result_.nodes % opt_.dive_every == 0) maybe_dive(*node, false);
    }
    const double global = global_bound();
    record_bound(global);
    const bool done = open_.empty() || relative_gap(incumbent_obj_, global) <= opt_.gap_target;
    while (!open_.empty()) {
      delete open_.top();
      open_.pop();
    }
    if (!has_incumbent()) return finish(done && lost_bound_ == kInf ? MilpStatus::Infeasible : MilpStatus::Unknown);
    return finish(done && lost_bound_ >= incumbent_obj_ - prune_tol() ? MilpStatus::Optimal : MilpStatus::Feasible);
  }

 private:
  bool has_incumbent() const { return incumbent_obj_ < kInf; }
  double prune_tol() const { return 1e-9 * std::max(1.0, std::abs(incumbent_obj_)); }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  double global_bound() const {
    double b = has_incumbent() ? incumbent_obj_ : kInf;
    if (!open_.empty()) b = std::min(b, open_.top()->bound);
    b = std::min(b, lost_bound_);
    return b;
  }

  void record_bound(double b) {
    if (!result_.bound_trace.empty()) b = std::max(b, result_.bound_trace.back());
    result_.bound_trace.push_back(b);
  }

  void apply(const std::vector<BoundChange>& changes) {
    for (const auto& c : applied_) engine_.set_col_bounds(c.var, root_lo_[c.var], root_hi_[c.var]);
    for (const auto& c : changes) engine_.set_col_bounds(c.var, c.lower, c.upper);
    applied_ = changes;
  }

  // Most fractional integer variable; -1 when the point is integral.
  int select_branch(const std::vector<double>& x) const {
    int best = -1;
    double best_frac = opt_.integrality_tol;
    for (int j : ints_) {
      const double f = x[j] - std::floor(x[j]);
      const double dist = std::min(f, 1.0 - f);
      if (dist > best_frac) {
        best_frac = dist;
        best = j;
      }
    }
    return best;
  }

  bool try_incumbent(const std::vector<double>& x) {
    std::vector<double> snapped = x;
    for (int j : ints_) snapped[j] = std::round(snapped[j]);
    const std::vector<double>* cand = &snapped;
    if (model_.max_violation(snapped) > opt_.feasibility_tol) {
      if (model_.max_violation(x) > opt_.feasibility_tol || model_.max_integrality_violation(x) > opt_.integrality_tol)
        return false;
      cand = &x;
    }
    const double obj = model_.objective_value(*cand);
    if (obj < incumbent_obj_) {
      incumbent_obj_ = obj;
      result_.x = *cand;
      return true;
    }
    return false;
  }

  // Node LP is optimal and current in the engine.
  void process_solved(Node& node) {
    const auto& x = engine_.primal();
    const double obj = std::max(node.bound, engine_.objective());
    if (has_incumbent() && obj >= incumbent_obj_ - prune_tol()) return;
    const int j = select_branch(x);
    if (j < 0) {
      if (!try_incumbent(x)) {
        // integral but rejected by the independent check: branch would loop, so keep its bound
        lost_bound_ = std::min(lost_bound_, obj);
      }
      return;
    }
    ++result_.branchings;
    auto basis = std::make_shared<const SimplexEngine::Basis>(engine_.basis());
    auto down = new Node{obj, next_id_++, node.changes, basis};
    down->changes.push_back({j, engine_.col_lower(j), std::floor(x[j])});
    auto up = new Node{obj, next_id_++, node.changes, basis};
    up->changes.push_back({j, std::ceil(x[j]), engine_.col_upper(j)});
    open_.push(down);
    open_.push(up);
  }

  // Fractional diving: round the least fractional variable, re-solve, repeat.
  void maybe_dive(const Node& node, bool root) {
    if (ints_.empty() || engine_.primal().empty()) return;
    if (select_branch(engine_.primal()) < 0) return;
    const auto saved_basis = engine_.basis();
    std::vector<BoundChange> changes = node.changes;
    const int max_depth = static_cast<int>(ints_.size()) * 2 + 10;
    const long max_lp = root ? static_cast<long>(ints_.size()) * 2 + 50 : static_cast<long>(ints_.size()) + 20;
    long lps = 0;
    for (int depth = 0; depth < max_depth && lps < max_lp; ++depth) {
      const auto& x = engine_.primal();
      int pick = -1;
      double pick_frac = 1.0;
      for (int j : ints_) {
        const double f = x[j] - std::floor(x[j]);
        const double dist = std::min(f, 1.0 - f);
        if (dist > opt_.integrality_tol && dist < pick_frac) {
          pick_frac = dist;
          pick = j;
        }
      }
      if (pick < 0) {
        try_incumbent(x);
        break;
      }
      const double v = x[pick];
      const double near = std::round(v);
      const double far = near > v ? std::floor(v) : std::ceil(v);
      bool ok = false;
      for (double target : {near, far}) {
        auto trial = changes;
        if (target <= v) trial.push_back({pick, engine_.col_lower(pick), target});
        else trial.push_back({pick, target, engine_.col_upper(pick)});
        const auto before = engine_.basis();
        apply(trial);
        ++lps;
        if (engine_.solve() == LpStatus::Optimal &&
            (!has_incumbent() || engine_.objective() < incumbent_obj_ - prune_tol())) {
          changes = std::move(trial);
          ok = true;
          break;
        }
        engine_.set_basis(before);
      }
      if (!ok) break;
    }
    result_.lp_iterations = engine_.iterations();
    apply(node.changes);
    engine_.set_basis(saved_basis);
  }

  MilpSolution finish(MilpStatus status) {
    result_.status = status;
    result_.objective = has_incumbent() ? incumbent_obj_ : kInf;
    if (status == MilpStatus::Infeasible) {
      result_.bound = kInf;
      result_.gap = 0.0;
    } else if (status == MilpStatus::Unbounded) {
      result_.bound = -kInf;
    } else {
      result_.bound = result_.bound_trace.empty() ? result_.objective : result_.bound_trace.back();
      if (has_incumbent()) {
        result_.bound = std::min(result_.bound, incumbent_obj_);
        result_.gap = std::max(0.0, relative_gap(incumbent_obj_, result_.bound));
      }
    }
    result_.lp_iterations = engine_.iterations();
    result_.seconds = elapsed();
    return std::move(result_);
  }

  MilpSolution finish_unknown_root() {
    lost_bound_ = -kInf;
    record_bound(-kInf);
    return finish(MilpStatus::Unknown);
  }

  const MilpModel& model_;
  MilpOptions opt_;
  SimplexEngine engine_;
  std::chrono::steady_clock::time_point start_;
  std::vector<double> root_lo_, root_hi_;
  std::vector<int> ints_;
  std::vector<BoundChange> applied_;
  std::priority_queue<Node*, std::vector<Node*>, NodeOrder> open_;
  long next_id_ = 0;
  double incumbent_obj_ = kInf;
  double lost_bound_ = kInf;
  MilpSolution result_;
};

}  // namespace

MilpSolution solve_milp(const MilpModel& model, const MilpOptions& options) {
  model.validate();
  if (!(options.gap_target > 0.0)) throw std::invalid_argument("gap_target must be positive");
  BranchAndBound bb(model, options);
  return bb.run();
}

}  // namespace encplan
