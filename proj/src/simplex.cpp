#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "encplan/lp.hpp"
#include "lu.hpp"

namespace encplan {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace detail {

namespace {

enum : std::int8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2, kAtZero = 3 };

enum class Phase { Done, Infeasible, Unbounded, IterationLimit };

constexpr double kPivotTol = 1e-9;
constexpr int kDegenerateBeforeBland = 60;

}  // namespace

class SimplexCore {
 public:
  SimplexCore(const MilpModel& model, LpOptions options) : opt_(options) {
    n_ = model.num_vars();
    m_ = model.num_rows();
    const int total = n_ + m_;
    acol_.assign(n_, {});
    arow_.assign(m_, {});
    for (int i = 0; i < m_; ++i) {
      const auto& r = model.row(i);
      // merge duplicate terms within a row
      std::vector<Term> terms = r.terms;
      std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
      for (std::size_t k = 0; k < terms.size(); ++k) {
        double v = terms[k].coef;
        while (k + 1 < terms.size() && terms[k + 1].var == terms[k].var) v += terms[++k].coef;
        if (v == 0.0) continue;
        arow_[i].push_back({terms[k].var, v});
        acol_[terms[k].var].push_back({i, v});
      }
    }
    c_.assign(total, 0.0);
    lb_.assign(total, 0.0);
    ub_.assign(total, 0.0);
    for (int j = 0; j < n_; ++j) {
      c_[j] = model.cost(j);
      lb_[j] = model.var(j).lower;
      ub_[j] = model.var(j).upper;
    }
    for (int i = 0; i < m_; ++i) {
      lb_[n_ + i] = model.row(i).lower();
      ub_[n_ + i] = model.row(i).upper();
    }
    offset_ = model.objective_offset();
    x_.assign(total, 0.0);
    status_.assign(total, kAtLower);
    head_.assign(m_, -1);
    pos_.assign(total, -1);
    y_.assign(m_, 0.0);
    d_.assign(total, 0.0);
  }

  void set_col_bounds(int j, double lo, double hi) {
    lb_[j] = lo;
    ub_[j] = hi;
  }
  double col_lower(int j) const { return lb_[j]; }
  double col_upper(int j) const { return ub_[j]; }
  int iterations() const { return iters_; }
  const std::vector<double>& primal() const { return xs_; }
  double objective() const { return obj_; }

  SimplexEngine::Basis basis() const { return SimplexEngine::Basis(status_.begin(), status_.end()); }

  void set_basis(const SimplexEngine::Basis& b) {
    if (static_cast<int>(b.size()) != n_ + m_) throw std::invalid_argument("basis size mismatch");
    int nb = 0;
    for (auto s : b) nb += (s == kBasic);
    if (nb != m_) throw std::invalid_argument("basis must hold exactly one basic variable per row");
    status_.assign(b.begin(), b.end());
    int p = 0;
    std::fill(pos_.begin(), pos_.end(), -1);
    for (int j = 0; j < n_ + m_; ++j) {
      if (status_[j] == kBasic) {
        head_[p] = j;
        pos_[j] = p++;
      }
    }
    has_basis_ = true;
  }

  LpStatus solve() {
    if (!has_basis_) crash_basis();
    iter_start_ = iters_;
    normalize_nonbasic();
    LpStatus result = LpStatus::IterationLimit;
    for (int round = 0; round < 12; ++round) {
      refactor();
      compute_primal();
      compute_duals();
      bool pf = primal_feasible();
      if (!pf) {
        flip_boxed_to_dual_feasible();
        compute_primal();
        pf = primal_feasible();
      }
      const bool df = dual_feasible();
      if (pf && df) {
        result = LpStatus::Optimal;
        break;
      }
      Phase outcome;
      if (pf) outcome = primal_simplex(false);
      else if (df) outcome = dual_simplex();
      else outcome = primal_simplex(true);
      if (outcome == Phase::Infeasible) { result = LpStatus::Infeasible; break; }
      if (outcome == Phase::Unbounded) { result = LpStatus::Unbounded; break; }
      if (outcome == Phase::IterationLimit) { result = LpStatus::IterationLimit; break; }
    }
    status_result_ = result;
    finalize();
    return result;
  }

  LpSolution solution(const MilpModel* model) const {
    LpSolution s;
    s.status = status_result_;
    s.objective = obj_;
    s.x = xs_;
    s.iterations = iters_;
    s.row_duals.assign(y_.begin(), y_.end());
    s.reduced_costs.assign(d_.begin(), d_.begin() + n_);
    for (int j = 0; j < n_; ++j) {
      if (status_[j] == kBasic) s.reduced_costs[j] = 0.0;
    }
    s.row_activity.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      double a = 0.0;
      for (const auto& e : arow_[i]) a += e.value * xs_[e.index];
      s.row_activity[i] = a;
    }
    (void)model;
    return s;
  }

 private:
  // --- basis bookkeeping -------------------------------------------------

  bool is_fixed(int j) const { return lb_[j] == ub_[j]; }

  double nonbasic_value(int j) const {
    switch (status_[j]) {
      case kAtLower: return lb_[j];
      case kAtUpper: return ub_[j];
      default: return 0.0;
    }
  }

  std::int8_t default_status(int j, double cost) const {
    const bool lo = std::isfinite(lb_[j]);
    const bool hi = std::isfinite(ub_[j]);
    if (lo && hi) return cost >= 0.0 ? kAtLower : kAtUpper;
    if (lo) return kAtLower;
    if (hi) return kAtUpper;
    return kAtZero;
  }

  void crash_basis() {
    for (int j = 0; j < n_; ++j) {
      status_[j] = default_status(j, c_[j]);
      pos_[j] = -1;
    }
    for (int i = 0; i < m_; ++i) {
      status_[n_ + i] = kBasic;
      head_[i] = n_ + i;
      pos_[n_ + i] = i;
    }
    has_basis_ = true;
  }

  void normalize_nonbasic() {
    for (int j = 0; j < n_ + m_; ++j) {
      if (status_[j] == kBasic) continue;
      const bool lo = std::isfinite(lb_[j]);
      const bool hi = std::isfinite(ub_[j]);
      if (status_[j] == kAtLower && !lo) status_[j] = hi ? kAtUpper : kAtZero;
      else if (status_[j] == kAtUpper && !hi) status_[j] = lo ? kAtLower : kAtZero;
      else if (status_[j] == kAtZero && (lo || hi)) status_[j] = lo ? kAtLower : kAtUpper;
      x_[j] = nonbasic_value(j);
    }
  }

  SparseColumn column(int j) const {
    if (j < n_) return acol_[j];
    return SparseColumn{{j - n_, -1.0}};
  }

  void refactor() {
    for (int attempt = 0; attempt < 4; ++attempt) {
      std::vector<SparseColumn> cols(m_);
      for (int p = 0; p < m_; ++p) cols[p] = column(head_[p]);
      lu_.factorize(cols, m_);
      const auto& bad = lu_.singular_positions();
      if (bad.empty()) return;
      const auto& rows = lu_.singular_rows();
      for (std::size_t t = 0; t < bad.size(); ++t) {
        const int p = bad[t];
        const int out = head_[p];
        const int in = n_ + rows[t];
        if (pos_[in] >= 0) continue;
        status_[out] = default_status(out, c_[out]);
        x_[out] = nonbasic_value(out);
        pos_[out] = -1;
        head_[p] = in;
        pos_[in] = p;
        status_[in] = kBasic;
      }
    }
    throw std::runtime_error("simplex: unable to repair singular basis");
  }

  void compute_primal() {
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (status_[j] == kBasic) continue;
      const double v = x_[j] = nonbasic_value(j);
      if (v == 0.0) continue;
      for (const auto& e : acol_[j]) rhs[e.index] -= e.value * v;
    }
    for (int i = 0; i < m_; ++i) {
      const int j = n_ + i;
      if (status_[j] == kBasic) continue;
      x_[j] = nonbasic_value(j);
      rhs[i] += x_[j];
    }
    lu_.ftran(rhs);
    for (int p = 0; p < m_; ++p) x_[head_[p]] = rhs[p];
  }

  void compute_duals(const std::vector<double>* phase1_cost = nullptr) {
    std::vector<double> cb(m_);
    for (int p = 0; p < m_; ++p) cb[p] = phase1_cost ? (*phase1_cost)[p] : c_[head_[p]];
    lu_.btran(cb);
    y_ = cb;
    for (int j = 0; j < n_; ++j) {
      if (status_[j] == kBasic) {
        d_[j] = 0.0;
        continue;
      }
      double v = phase1_cost ? 0.0 : c_[j];
      for (const auto& e : acol_[j]) v -= e.value * y_[e.index];
      d_[j] = v;
    }
    for (int i = 0; i < m_; ++i) d_[n_ + i] = status_[n_ + i] == kBasic ? 0.0 : y_[i];
  }

  double infeasibility(int j) const {
    if (x_[j] < lb_[j] - opt_.primal_tol) return lb_[j] - x_[j];
    if (x_[j] > ub_[j] + opt_.primal_tol) return x_[j] - ub_[j];
    return 0.0;
  }

  bool primal_feasible() const {
    for (int p = 0; p < m_; ++p) {
      if (infeasibility(head_[p]) > 0.0) return false;
    }
    return true;
  }

  bool dual_ok(int j) const {
    if (status_[j] == kBasic || is_fixed(j)) return true;
    switch (status_[j]) {
      case kAtLower: return d_[j] >= -opt_.dual_tol;
      case kAtUpper: return d_[j] <= opt_.dual_tol;
      default: return std::abs(d_[j]) <= opt_.dual_tol;
    }
  }

  bool dual_feasible() const {
    for (int j = 0; j < n_ + m_; ++j) {
      if (!dual_ok(j)) return false;
    }
    return true;
  }

  void flip_boxed_to_dual_feasible() {
    for (int j = 0; j < n_ + m_; ++j) {
      if (status_[j] == kBasic || dual_ok(j)) continue;
      if (std::isfinite(lb_[j]) && std::isfinite(ub_[j])) {
        status_[j] = d_[j] >= 0.0 ? kAtLower : kAtUpper;
        x_[j] = nonbasic_value(j);
      }
    }
  }

  std::vector<double> ftran_column(int q) const {
    std::vector<double> a(m_, 0.0);
    if (q < n_) {
      for (const auto& e : acol_[q]) a[e.index] = e.value;
    } else {
      a[q - n_] = -1.0;
    }
    lu_.ftran(a);
    return a;
  }

  // rho^T [A -I] for all columns; basic entries are meaningless.
  std::vector<double> pivot_row(int r) const {
    std::vector<double> rho(m_, 0.0);
    rho[r] = 1.0;
    lu_.btran(rho);
    std::vector<double> alpha(n_ + m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double ri = rho[i];
      if (ri == 0.0) continue;
      for (const auto& e : arow_[i]) alpha[e.index] += ri * e.value;
      alpha[n_ + i] = -ri;
    }
    return alpha;
  }

  void basis_change(int r, int q, const std::vector<double>& alpha_q) {
    const int leaving = head_[r];
    pos_[leaving] = -1;
    head_[r] = q;
    pos_[q] = r;
    status_[q] = kBasic;
    lu_.update(r, alpha_q);
    (void)leaving;
  }

  bool need_refactor() const { return lu_.num_updates() >= opt_.refactor_interval; }

  // --- primal simplex ----------------------------------------------------

  Phase primal_simplex(bool phase1) {
    int degenerate = 0;
    bool bland = false;
    std::vector<double> p1cost(m_, 0.0);
    while (true) {
      if (iters_ - iter_start_ >= opt_.max_iterations) return Phase::IterationLimit;
      if (need_refactor()) {
        refactor();
        compute_primal();
      }
      if (phase1) {
        bool any = false;
        for (int p = 0; p < m_; ++p) {
          const int j = head_[p];
          p1cost[p] = 0.0;
          if (x_[j] < lb_[j] - opt_.primal_tol) {
            p1cost[p] = -1.0;
            any = true;
          } else if (x_[j] > ub_[j] + opt_.primal_tol) {
            p1cost[p] = 1.0;
            any = true;
          }
        }
        if (!any) {
          compute_duals();
          return Phase::Done;
        }
        compute_duals(&p1cost);
      } else {
        compute_duals();
      }

      // pricing
      int q = -1;
      double best = 0.0;
      int dir = 0;
      for (int j = 0; j < n_ + m_; ++j) {
        if (status_[j] == kBasic || is_fixed(j)) continue;
        const double dj = d_[j];
        int dj_dir = 0;
        if ((status_[j] == kAtLower || status_[j] == kAtZero) && dj < -opt_.dual_tol) dj_dir = 1;
        else if ((status_[j] == kAtUpper || status_[j] == kAtZero) && dj > opt_.dual_tol) dj_dir = -1;
        if (dj_dir == 0) continue;
        if (bland) {
          q = j;
          dir = dj_dir;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          q = j;
          dir = dj_dir;
        }
      }
      if (q < 0) {
        if (phase1) {
          // no improving direction while still infeasible
          compute_duals();
          return Phase::Infeasible;
        }
        return Phase::Done;
      }

      const auto alpha = ftran_column(q);
      const double tol = opt_.primal_tol;
      // Harris pass 1
      double tmax = ub_[q] - lb_[q];
      for (int p = 0; p < m_; ++p) {
        const double a = alpha[p];
        if (std::abs(a) < kPivotTol) continue;
        const int j = head_[p];
        const double delta = -dir * a;
        const double xv = x_[j];
        double t = kInf;
        if (phase1 && xv < lb_[j] - tol) {
          if (delta > 0) t = (lb_[j] - xv + tol) / delta;
        } else if (phase1 && xv > ub_[j] + tol) {
          if (delta < 0) t = (xv - ub_[j] + tol) / -delta;
        } else if (delta < 0 && std::isfinite(lb_[j])) {
          t = (xv - lb_[j] + tol) / -delta;
        } else if (delta > 0 && std::isfinite(ub_[j])) {
          t = (ub_[j] - xv + tol) / delta;
        }
        tmax = std::min(tmax, t);
      }
      if (!std::isfinite(tmax)) {
        if (phase1) return Phase::Infeasible;
        return Phase::Unbounded;
      }
      // pass 2
      int r = -1;
      double rmag = 0.0, rstep = 0.0;
      bool to_lower = false;
      for (int p = 0; p < m_; ++p) {
        const double a = alpha[p];
        if (std::abs(a) < kPivotTol) continue;
        const int j = head_[p];
        const double delta = -dir * a;
        const double xv = x_[j];
        double t = kInf;
        bool lower = false;
        if (phase1 && xv < lb_[j] - tol) {
          if (delta > 0) { t = (lb_[j] - xv) / delta; lower = true; }
        } else if (phase1 && xv > ub_[j] + tol) {
          if (delta < 0) { t = (xv - ub_[j]) / -delta; lower = false; }
        } else if (delta < 0 && std::isfinite(lb_[j])) {
          t = (xv - lb_[j]) / -delta;
          lower = true;
        } else if (delta > 0 && std::isfinite(ub_[j])) {
          t = (ub_[j] - xv) / delta;
          lower = false;
        }
        if (t > tmax) continue;
        const bool better = bland ? (r < 0 || t < rstep - 1e-12 || (t <= rstep + 1e-12 && head_[p] < head_[r]))
                                  : std::abs(a) > rmag;
        if (better) {
          rmag = std::abs(a);
          r = p;
          rstep = std::max(t, 0.0);
          to_lower = lower;
        }
      }

      const double range = ub_[q] - lb_[q];
      ++iters_;
      if (r < 0 && !std::isfinite(range)) return phase1 ? Phase::Infeasible : Phase::Unbounded;
      if (r < 0 || range <= rstep) {
        // bound flip of the entering variable
        const double t = range;
        for (int p = 0; p < m_; ++p) x_[head_[p]] -= t * dir * alpha[p];
        status_[q] = dir > 0 ? kAtUpper : kAtLower;
        x_[q] = nonbasic_value(q);
        degenerate = 0;
        bland = false;
        continue;
      }
      const double t = rstep;
      for (int p = 0; p < m_; ++p) x_[head_[p]] -= t * dir * alpha[p];
      const int leaving = head_[r];
      const double xq = x_[q] + t * dir;
      status_[leaving] = to_lower ? kAtLower : kAtUpper;
      x_[leaving] = nonbasic_value(leaving);
      basis_change(r, q, alpha);
      x_[q] = xq;
      if (t < 1e-12) {
        if (++degenerate > kDegenerateBeforeBland) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
    }
  }

  // --- dual simplex ------------------------------------------------------

  Phase dual_simplex() {
    while (true) {
      if (iters_ - iter_start_ >= opt_.max_iterations) return Phase::IterationLimit;
      if (need_refactor()) {
        refactor();
        compute_primal();
        compute_duals();
        if (!dual_feasible()) {
          flip_boxed_to_dual_feasible();
          compute_primal();
          if (!dual_feasible()) return Phase::Done;  // caller falls back to primal
        }
      }
      int r = -1;
      double worst = 0.0;
      for (int p = 0; p < m_; ++p) {
        const double inf = infeasibility(head_[p]);
        if (inf > worst) {
          worst = inf;
          r = p;
        }
      }
      if (r < 0) return Phase::Done;
      const int leaving = head_[r];
      const bool up = x_[leaving] < lb_[leaving];
      const double target = up ? lb_[leaving] : ub_[leaving];
      const auto arow = pivot_row(r);

      // Harris pass 1
      double tmax = kInf;
      for (int j = 0; j < n_ + m_; ++j) {
        if (status_[j] == kBasic || is_fixed(j)) continue;
        const double a = arow[j];
        if (std::abs(a) < kPivotTol) continue;
        const bool can_inc = status_[j] == kAtLower || status_[j] == kAtZero;
        const bool can_dec = status_[j] == kAtUpper || status_[j] == kAtZero;
        const bool ok = up ? ((can_inc && a < 0) || (can_dec && a > 0)) : ((can_inc && a > 0) || (can_dec && a < 0));
        if (!ok) continue;
        tmax = std::min(tmax, (std::abs(d_[j]) + opt_.dual_tol) / std::abs(a));
      }
      if (!std::isfinite(tmax)) return Phase::Infeasible;
      int q = -1;
      double qmag = 0.0;
      for (int j = 0; j < n_ + m_; ++j) {
        if (status_[j] == kBasic || is_fixed(j)) continue;
        const double a = arow[j];
        if (std::abs(a) < kPivotTol) continue;
        const bool can_inc = status_[j] == kAtLower || status_[j] == kAtZero;
        const bool can_dec = status_[j] == kAtUpper || status_[j] == kAtZero;
        const bool ok = up ? ((can_inc && a < 0) || (can_dec && a > 0)) : ((can_inc && a > 0) || (can_dec && a < 0));
        if (!ok) continue;
        if (std::abs(d_[j]) / std::abs(a) <= tmax && std::abs(a) > qmag) {
          qmag = std::abs(a);
          q = j;
        }
      }
      if (q < 0) return Phase::Infeasible;

      const auto alpha = ftran_column(q);
      const double arq = alpha[r];
      if (std::abs(arq) < kPivotTol || std::abs(arq - arow[q]) > 1e-6 * (1.0 + std::abs(arq))) {
        // numerical trouble: refresh the factorization and retry
        refactor();
        compute_primal();
        compute_duals();
        if (lu_.num_updates() == 0 && std::abs(arq) < kPivotTol) return Phase::Infeasible;
        continue;
      }
      ++iters_;
      const double theta_p = (x_[leaving] - target) / arq;
      const double theta_d = d_[q] / arow[q];
      for (int j = 0; j < n_ + m_; ++j) {
        if (status_[j] == kBasic) continue;
        d_[j] -= theta_d * arow[j];
      }
      d_[q] = 0.0;
      for (int p = 0; p < m_; ++p) x_[head_[p]] -= theta_p * alpha[p];
      const double xq = x_[q] + theta_p;
      status_[leaving] = up ? kAtLower : kAtUpper;
      x_[leaving] = target;
      d_[leaving] = -theta_d;
      basis_change(r, q, alpha);
      x_[q] = xq;
    }
  }

  void finalize() {
    xs_.assign(x_.begin(), x_.begin() + n_);
    obj_ = offset_;
    for (int j = 0; j < n_; ++j) obj_ += c_[j] * xs_[j];
  }

  LpOptions opt_;
  int n_ = 0, m_ = 0;
  std::vector<SparseColumn> acol_;
  std::vector<std::vector<SparseEntry>> arow_;
  std::vector<double> c_, lb_, ub_;
  double offset_ = 0.0;
  std::vector<double> x_;
  std::vector<std::int8_t> status_;
  std::vector<int> head_, pos_;
  BasisFactor lu_;
  bool has_basis_ = false;
  std::vector<double> y_, d_;
  int iters_ = 0;
  int iter_start_ = 0;
  LpStatus status_result_ = LpStatus::IterationLimit;
  std::vector<double> xs_;
  double obj_ = 0.0;
};

}  // namespace detail

SimplexEngine::SimplexEngine(const MilpModel& model, LpOptions options)
    : core_(std::make_unique<detail::SimplexCore>(model, options)) {}
SimplexEngine::~SimplexEngine() = default;
SimplexEngine::SimplexEngine(SimplexEngine&&) noexcept = default;
SimplexEngine& SimplexEngine::operator=(SimplexEngine&&) noexcept = default;

void SimplexEngine::set_col_bounds(int j, double lower, double upper) { core_->set_col_bounds(j, lower, upper); }
double SimplexEngine::col_lower(int j) const { return core_->col_lower(j); }
double SimplexEngine::col_upper(int j) const { return core_->col_upper(j); }
LpStatus SimplexEngine::solve() { return core_->solve(); }
LpSolution SimplexEngine::solution() const { return core_->solution(nullptr); }
double SimplexEngine::objective() const { return core_->objective(); }
const std::vector<double>& SimplexEngine::primal() const { return core_->primal(); }
int SimplexEngine::iterations() const { return core_->iterations(); }
SimplexEngine::Basis SimplexEngine::basis() const { return core_->basis(); }
void SimplexEngine::set_basis(const Basis& basis) { core_->set_basis(basis); }

LpSolution solve_lp(const MilpModel& model, const LpOptions& options) {
  model.validate();
  SimplexEngine engine(model, options);
  engine.solve();
  return engine.solution();
}

namespace {

double active_bound(double dual, double lo, double hi, double value) {
  if (dual > 0.0) return std::isfinite(lo) ? lo : value;
  if (dual < 0.0) return std::isfinite(hi) ? hi : value;
  return value;
}

}  // namespace

double dual_objective(const MilpModel& model, const LpSolution& sol) {
  double v = model.objective_offset();
  for (int i = 0; i < model.num_rows(); ++i) {
    const auto& r = model.row(i);
    v += sol.row_duals[i] * active_bound(sol.row_duals[i], r.lower(), r.upper(), sol.row_activity[i]);
  }
  for (int j = 0; j < model.num_vars(); ++j) {
    const auto& var = model.var(j);
    v += sol.reduced_costs[j] * active_bound(sol.reduced_costs[j], var.lower, var.upper, sol.x[j]);
  }
  return v;
}

double complementary_slackness_residual(const MilpModel& model, const LpSolution& sol) {
  double worst = 0.0;
  auto check = [&](double dual, double lo, double hi, double value) {
    if (dual > 0.0) {
      worst = std::max(worst, std::isfinite(lo) ? dual * std::abs(value - lo) : dual);
    } else if (dual < 0.0) {
      worst = std::max(worst, std::isfinite(hi) ? -dual * std::abs(hi - value) : -dual);
    }
  };
  for (int i = 0; i < model.num_rows(); ++i) {
    const auto& r = model.row(i);
    check(sol.row_duals[i], r.lower(), r.upper(), sol.row_activity[i]);
  }
  for (int j = 0; j < model.num_vars(); ++j) {
    check(sol.reduced_costs[j], model.var(j).lower, model.var(j).upper, sol.x[j]);
  }
  return worst;
}

double dual_feasibility_residual(const MilpModel& model, const LpSolution& sol) {
  std::vector<double> aty(model.num_vars(), 0.0);
  for (int i = 0; i < model.num_rows(); ++i) {
    for (const auto& t : model.row(i).terms) aty[t.var] += t.coef * sol.row_duals[i];
  }
  double worst = 0.0;
  for (int j = 0; j < model.num_vars(); ++j) {
    worst = std::max(worst, std::abs(model.cost(j) - aty[j] - sol.reduced_costs[j]));
  }
  return worst;
}

}  // namespace encplan
