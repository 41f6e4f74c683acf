#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

using encplan::MilpModel;
using encplan::RowSense;
using Real = long double;

namespace {

constexpr Real kEps = 1e-12L;

// Textbook form: min c^T z, A z (<=,>=,=) b, z >= 0.
struct Standard {
  std::vector<std::vector<Real>> a;
  std::vector<int> sense;  // -1 <=, 0 =, +1 >=
  std::vector<Real> b;
  std::vector<Real> c;
  Real offset = 0;
};

// Maps each model variable to z columns: x = shift + z_pos - z_neg.
struct Mapping {
  std::vector<int> pos, neg;
  std::vector<Real> shift, sign;
};

Standard to_standard(const MilpModel& m, Mapping& map) {
  Standard s;
  const int n = m.num_vars();
  map.pos.assign(n, -1);
  map.neg.assign(n, -1);
  map.shift.assign(n, 0);
  map.sign.assign(n, 1);
  int nz = 0;
  for (int j = 0; j < n; ++j) {
    const auto& v = m.var(j);
    if (std::isfinite(v.lower)) {
      map.shift[j] = v.lower;
      map.pos[j] = nz++;
    } else if (std::isfinite(v.upper)) {
      map.shift[j] = v.upper;
      map.sign[j] = -1;
      map.pos[j] = nz++;
    } else {
      map.pos[j] = nz++;
      map.neg[j] = nz++;
    }
  }
  s.c.assign(nz, 0);
  s.offset = m.objective_offset();
  for (int j = 0; j < n; ++j) {
    s.c[map.pos[j]] += map.sign[j] * m.cost(j);
    if (map.neg[j] >= 0) s.c[map.neg[j]] -= m.cost(j);
    s.offset += m.cost(j) * map.shift[j];
  }
  auto add_row = [&](const std::vector<Real>& coef, int sense, Real rhs) {
    s.a.push_back(coef);
    s.sense.push_back(sense);
    s.b.push_back(rhs);
  };
  for (int i = 0; i < m.num_rows(); ++i) {
    const auto& r = m.row(i);
    std::vector<Real> coef(nz, 0);
    Real shift = 0;
    for (const auto& t : r.terms) {
      coef[map.pos[t.var]] += map.sign[t.var] * t.coef;
      if (map.neg[t.var] >= 0) coef[map.neg[t.var]] -= t.coef;
      shift += t.coef * map.shift[t.var];
    }
    const Real lo = r.lower(), hi = r.upper();
    if (r.sense == RowSense::Equal) {
      add_row(coef, 0, lo - shift);
    } else {
      if (std::isfinite(static_cast<double>(lo))) add_row(coef, 1, lo - shift);
      if (std::isfinite(static_cast<double>(hi))) add_row(coef, -1, hi - shift);
    }
  }
  for (int j = 0; j < n; ++j) {
    const auto& v = m.var(j);
    if (std::isfinite(v.lower) && std::isfinite(v.upper)) {
      std::vector<Real> coef(nz, 0);
      coef[map.pos[j]] = 1;
      add_row(coef, -1, static_cast<Real>(v.upper) - v.lower);
    }
  }
  return s;
}

}  // namespace

TableauResult tableau_simplex(const MilpModel& model) {
  Mapping map;
  Standard s = to_standard(model, map);
  const int rows = static_cast<int>(s.a.size());
  const int nz = static_cast<int>(s.c.size());
  // columns: z (nz), slack/surplus (rows), artificial (rows)
  const int ns = nz + rows;
  const int total = ns + rows;
  std::vector<std::vector<Real>> t(rows, std::vector<Real>(total + 1, 0));
  std::vector<int> basis(rows);
  for (int i = 0; i < rows; ++i) {
    Real flip = s.b[i] < 0 ? -1 : 1;
    for (int j = 0; j < nz; ++j) t[i][j] = flip * s.a[i][j];
    if (s.sense[i] != 0) t[i][nz + i] = flip * (s.sense[i] < 0 ? 1 : -1);
    t[i][ns + i] = 1;
    t[i][total] = flip * s.b[i];
    basis[i] = ns + i;
  }

  auto pivot = [&](int r, int q) {
    const Real p = t[r][q];
    for (auto& v : t[r]) v /= p;
    for (int i = 0; i < rows; ++i) {
      if (i == r || t[i][q] == 0) continue;
      const Real f = t[i][q];
      for (int j = 0; j <= total; ++j) t[i][j] -= f * t[r][j];
    }
    basis[r] = q;
  };

  // Bland's rule on the given cost over allowed columns.
  auto run = [&](const std::vector<Real>& cost, int allowed) -> bool {
    for (int iter = 0; iter < 100000; ++iter) {
      int q = -1;
      for (int j = 0; j < allowed && q < 0; ++j) {
        Real dj = cost[j];
        for (int i = 0; i < rows; ++i) dj -= cost[basis[i]] * t[i][j];
        if (dj < -1e-11L) q = j;
      }
      if (q < 0) return true;
      int r = -1;
      Real best = 0;
      for (int i = 0; i < rows; ++i) {
        if (t[i][q] <= kEps) continue;
        const Real ratio = t[i][total] / t[i][q];
        if (r < 0 || ratio < best - 1e-14L || (ratio <= best + 1e-14L && basis[i] < basis[r])) {
          r = i;
          best = ratio;
        }
      }
      if (r < 0) return false;
      pivot(r, q);
    }
    throw std::runtime_error("tableau simplex iteration limit");
  };

  std::vector<Real> phase1(total, 0);
  for (int i = 0; i < rows; ++i) phase1[ns + i] = 1;
  run(phase1, total);
  Real infeas = 0;
  for (int i = 0; i < rows; ++i) {
    if (basis[i] >= ns) infeas += t[i][total];
  }
  TableauResult res;
  if (infeas > 1e-9L) return res;
  // drive remaining artificials out of the basis
  for (int i = 0; i < rows; ++i) {
    if (basis[i] < ns) continue;
    for (int j = 0; j < ns; ++j) {
      if (std::abs(t[i][j]) > 1e-9L) {
        pivot(i, j);
        break;
      }
    }
  }
  std::vector<Real> phase2(total, 0);
  for (int j = 0; j < nz; ++j) phase2[j] = s.c[j];
  if (!run(phase2, ns)) {
    res.status = TableauResult::Status::Unbounded;
    return res;
  }
  std::vector<Real> z(total, 0);
  for (int i = 0; i < rows; ++i) z[basis[i]] = t[i][total];
  res.status = TableauResult::Status::Optimal;
  Real obj = s.offset;
  for (int j = 0; j < nz; ++j) obj += s.c[j] * z[j];
  res.objective = static_cast<double>(obj);
  res.x.assign(model.num_vars(), 0.0);
  for (int j = 0; j < model.num_vars(); ++j) {
    Real v = map.shift[j] + map.sign[j] * z[map.pos[j]];
    if (map.neg[j] >= 0) v -= z[map.neg[j]];
    res.x[j] = static_cast<double>(v);
  }
  return res;
}

TableauResult enumerate_milp(const MilpModel& model) {
  std::vector<int> ints;
  for (int j = 0; j < model.num_vars(); ++j) {
    if (model.var(j).kind != encplan::VarKind::Continuous) ints.push_back(j);
  }
  TableauResult best;
  std::vector<long> value(ints.size());
  for (std::size_t k = 0; k < ints.size(); ++k) {
    const auto& v = model.var(ints[k]);
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) throw std::invalid_argument("unbounded integer");
    value[k] = static_cast<long>(std::ceil(v.lower));
  }
  MilpModel fixed = model;
  while (true) {
    for (std::size_t k = 0; k < ints.size(); ++k) fixed.fix(ints[k], static_cast<double>(value[k]));
    auto r = tableau_simplex(fixed);
    if (r.status == TableauResult::Status::Unbounded) return r;
    if (r.status == TableauResult::Status::Optimal &&
        (best.status != TableauResult::Status::Optimal || r.objective < best.objective - 1e-12)) {
      best = r;
    }
    std::size_t k = 0;
    for (; k < ints.size(); ++k) {
      if (value[k] + 1 <= std::floor(model.var(ints[k]).upper)) {
        ++value[k];
        break;
      }
      value[k] = static_cast<long>(std::ceil(model.var(ints[k]).lower));
    }
    if (k == ints.size()) break;
  }
  return best;
}

encplan::MilpModel random_lp(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.5, 3.0);
  std::uniform_int_distribution<int> kind(0, 3);
  MilpModel m;
  std::vector<double> x0(cols);
  for (int j = 0; j < cols; ++j) {
    double lo = 0.0, hi = encplan::kInf;
    switch (kind(rng)) {
      case 0: lo = 0.0; hi = pos(rng) * 4; break;
      case 1: lo = -pos(rng); hi = pos(rng); break;
      case 2: lo = 0.0; hi = encplan::kInf; break;
      default: lo = -pos(rng) * 2; hi = encplan::kInf; break;
    }
    x0[j] = std::isfinite(hi) ? lo + 0.4 * (hi - lo) : lo + pos(rng);
    // nonnegative costs on upward-unbounded variables keep the LP bounded
    const double c = std::isfinite(hi) ? u(rng) * 5 : pos(rng);
    m.add_continuous("x" + std::to_string(j), lo, hi, c);
  }
  for (int i = 0; i < rows; ++i) {
    std::vector<encplan::Term> terms;
    double act = 0.0;
    for (int j = 0; j < cols; ++j) {
      const double a = std::round(u(rng) * 40.0) / 10.0;
      if (a == 0.0) continue;
      terms.push_back({j, a});
      act += a * x0[j];
    }
    const int s = i % 3;
    const double slack = pos(rng);
    if (s == 0) m.add_row("r" + std::to_string(i), terms, RowSense::LessEqual, act + slack);
    else if (s == 1) m.add_row("r" + std::to_string(i), terms, RowSense::GreaterEqual, act - slack);
    else m.add_row("r" + std::to_string(i), terms, RowSense::Equal, act);
  }
  return m;
}

encplan::MilpModel random_milp(std::mt19937_64& rng, int binaries, int continuous, int rows) {
  std::uniform_real_distribution<double> w(1.0, 10.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MilpModel m;
  double total_weight = 0.0;
  for (int j = 0; j < binaries; ++j) m.add_binary("b" + std::to_string(j), -std::round(w(rng) * 10.0) / 10.0);
  for (int j = 0; j < continuous; ++j) m.add_continuous("c" + std::to_string(j), 0.0, 5.0, std::round(u(rng) * 30.0) / 10.0);
  for (int i = 0; i < rows; ++i) {
    std::vector<encplan::Term> terms;
    total_weight = 0.0;
    for (int j = 0; j < binaries; ++j) {
      const double a = std::round(w(rng) * 10.0) / 10.0;
      terms.push_back({j, a});
      total_weight += a;
    }
    for (int j = 0; j < continuous; ++j) terms.push_back({binaries + j, std::round(u(rng) * 20.0) / 10.0});
    m.add_row("cap" + std::to_string(i), terms, RowSense::LessEqual, std::round(total_weight * 4.0) / 10.0);
  }
  return m;
}

}  // namespace oracle

#include <Eigen/Dense>

#include "encplan/lp.hpp"

namespace oracle {

namespace {

bool cyclic_ok(const std::vector<int>& u, int up, int down) {
  const int T = static_cast<int>(u.size());
  up = std::min(up, T);
  down = std::min(down, T);
  for (int t = 0; t < T; ++t) {
    int sv = 0, sz = 0;
    for (int k = 0; k < up; ++k) {
      const int s = (t - k + T) % T, p = (s + T - 1) % T;
      sv += u[s] > u[p];
    }
    for (int k = 0; k < down; ++k) {
      const int s = (t - k + T) % T, p = (s + T - 1) % T;
      sz += u[s] < u[p];
    }
    if (sv > u[t] || sz > 1 - u[t]) return false;
  }
  return true;
}

}  // namespace

CommitmentOracleResult uc_commitment_oracle(const encplan::PowerSystem& sys, const encplan::DailyProfile& day,
                                            const encplan::EconomicParams& econ) {
  using encplan::Term;
  const int T = day.hours, B = sys.num_buses(), L = static_cast<int>(sys.lines.size());
  const int ref = sys.reference_bus();
  // PTDF from the reduced susceptance matrix
  Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(B, B);
  for (const auto& l : sys.lines) {
    bmat(l.from, l.from) += l.admittance;
    bmat(l.to, l.to) += l.admittance;
    bmat(l.from, l.to) -= l.admittance;
    bmat(l.to, l.from) -= l.admittance;
  }
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(B, B);
  if (B > 1) {
    std::vector<int> keep;
    for (int b = 0; b < B; ++b)
      if (b != ref) keep.push_back(b);
    Eigen::MatrixXd red(B - 1, B - 1);
    for (int i = 0; i < B - 1; ++i)
      for (int j = 0; j < B - 1; ++j) red(i, j) = bmat(keep[i], keep[j]);
    const Eigen::MatrixXd inv = red.inverse();
    for (int i = 0; i < B - 1; ++i)
      for (int j = 0; j < B - 1; ++j) x(keep[i], keep[j]) = inv(i, j);
  }
  Eigen::MatrixXd ptdf(L, B);
  for (int l = 0; l < L; ++l) {
    const auto& ln = sys.lines[l];
    for (int b = 0; b < B; ++b) ptdf(l, b) = ln.admittance * (x(ln.from, b) - x(ln.to, b));
  }

  std::vector<int> committed;
  for (int i = 0; i < static_cast<int>(sys.generators.size()); ++i)
    if (!sys.generators[i].flexible()) committed.push_back(i);
  // feasible patterns per committed unit
  std::vector<std::vector<std::vector<int>>> options;
  for (int i : committed) {
    std::vector<std::vector<int>> pats;
    for (long mask = 0; mask < (1L << T); ++mask) {
      std::vector<int> u(T);
      for (int t = 0; t < T; ++t) u[t] = (mask >> t) & 1;
      if (cyclic_ok(u, sys.generators[i].min_up, sys.generators[i].min_down)) pats.push_back(u);
    }
    options.push_back(pats);
  }

  CommitmentOracleResult best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(committed.size(), 0);
  while (true) {
    encplan::MilpModel m;
    double fixed = 0.0;
    std::vector<std::vector<Term>> inj(static_cast<std::size_t>(B) * T);
    std::vector<double> inj_const(static_cast<std::size_t>(B) * T, 0.0);
    for (int i = 0; i < static_cast<int>(sys.generators.size()); ++i) {
      const auto& g = sys.generators[i];
      const auto it = std::find(committed.begin(), committed.end(), i);
      for (int t = 0; t < T; ++t) {
        int u = 1, v = 0;
        if (it != committed.end()) {
          const auto& pat = options[it - committed.begin()][pick[it - committed.begin()]];
          u = pat[t];
          v = pat[t] > pat[(t + T - 1) % T];
        }
        fixed += g.cmin * u + g.csu * v;
        inj_const[static_cast<std::size_t>(g.bus) * T + t] += g.gmin * u;
        for (std::size_t s = 0; s < g.segments.size(); ++s) {
          const int j = m.add_continuous("g" + std::to_string(i) + "_" + std::to_string(s) + "_" + std::to_string(t), 0.0,
                                         g.segments[s].mw * u, g.segments[s].cost);
          inj[static_cast<std::size_t>(g.bus) * T + t].push_back({j, 1.0});
        }
      }
    }
    for (int b = 0; b < B; ++b) {
      for (int t = 0; t < T; ++t) {
        const std::size_t k = static_cast<std::size_t>(b) * T + t;
        inj_const[k] += day.ren[b][t] - day.load[b][t];
        if (day.load[b][t] > 0)
          inj[k].push_back({m.add_continuous("shed" + std::to_string(k), 0.0, day.load[b][t], econ.load_shed_penalty), 1.0});
        if (day.ren[b][t] > 0)
          inj[k].push_back({m.add_continuous("spill" + std::to_string(k), 0.0, day.ren[b][t], econ.ren_shed_penalty), -1.0});
      }
    }
    for (int t = 0; t < T; ++t) {
      std::vector<Term> total;
      double c = 0.0;
      for (int b = 0; b < B; ++b) {
        const std::size_t k = static_cast<std::size_t>(b) * T + t;
        total.insert(total.end(), inj[k].begin(), inj[k].end());
        c += inj_const[k];
      }
      m.add_row("balance" + std::to_string(t), total, encplan::RowSense::Equal, -c);
      for (int l = 0; l < L; ++l) {
        std::vector<Term> flow;
        double fc = 0.0;
        for (int b = 0; b < B; ++b) {
          const std::size_t k = static_cast<std::size_t>(b) * T + t;
          if (std::abs(ptdf(l, b)) < 1e-14) continue;
          for (const auto& term : inj[k]) flow.push_back({term.var, term.coef * ptdf(l, b)});
          fc += ptdf(l, b) * inj_const[k];
        }
        if (flow.empty()) continue;
        m.add_range("line" + std::to_string(l) + "_" + std::to_string(t), flow, -sys.lines[l].capacity - fc,
                    sys.lines[l].capacity - fc);
      }
    }
    const auto r = encplan::solve_lp(m);
    if (r.optimal()) {
      ++best.patterns;
      best.cost = std::min(best.cost, r.objective + fixed);
    }
    std::size_t d = 0;
    while (d < pick.size() && ++pick[d] == options[d].size()) pick[d++] = 0;
    if (d == pick.size()) break;
  }
  return best;
}

}  // namespace oracle

namespace oracle {

InvestmentEnumeration enumerate_investment(const encplan::PowerSystem& system,
                                           const std::vector<encplan::RepresentativeDay>& days,
                                           const encplan::EconomicParams& econ, const encplan::UcSpec& spec,
                                           int q_top, int max_per_bus, const encplan::MilpOptions& options) {
  const auto cand = system.candidate_buses();
  InvestmentEnumeration out;
  std::vector<int> count(cand.size(), 0);
  // odometer over per-bus counts
  while (true) {
    int total = 0;
    for (int c : count) total += c;
    if (total <= q_top) {
      auto alloc = encplan::StorageAllocation::none(system);
      for (std::size_t k = 0; k < cand.size(); ++k) alloc.units[cand[k]] = count[k];
      const auto e = encplan::evaluate_allocation(system, days, econ, alloc, spec, options);
      out.pairs.push_back({alloc, e.social_cost, total == 0 ? 0.0 : e.profit});
    }
    std::size_t k = 0;
    while (k < count.size() && ++count[k] > max_per_bus) count[k++] = 0;
    if (k == count.size()) break;
  }
  out.best_per_q.assign(q_top + 1, EnumeratedPair{});
  std::vector<bool> seen(q_top + 1, false);
  for (const auto& p : out.pairs) {
    const int q = p.alloc.total();
    if (!seen[q] || p.social_cost < out.best_per_q[q].social_cost) out.best_per_q[q] = p;
    seen[q] = true;
  }
  out.cheapest = out.best_per_q[0];
  out.most_profitable_pair = out.pairs[0];
  for (const auto& p : out.pairs) {
    if (p.social_cost < out.cheapest.social_cost) out.cheapest = p;
    if (p.profit > out.most_profitable_pair.profit) out.most_profitable_pair = p;
  }
  bool have_phsi = false;
  out.pmsi = out.best_per_q[0];
  for (int q = 0; q <= q_top; ++q) {
    const auto& p = out.best_per_q[q];
    if ((q == 0 || p.profit >= econ.min_return) && (!have_phsi || p.social_cost < out.phsi.social_cost)) {
      out.phsi = p;
      out.phsi_q = q;
      have_phsi = true;
    }
    if (p.profit > out.pmsi.profit) {
      out.pmsi = p;
      out.pmsi_q = q;
    }
  }
  return out;
}

double signed_rank_bruteforce(const std::vector<double>& deltas) {
  const std::size_t n = deltas.size();
  std::vector<double> ranks;
  std::vector<int> signs;
  for (std::size_t i = 0; i < n; ++i) {
    if (deltas[i] == 0.0) continue;
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(deltas[j]) < std::abs(deltas[i])) ++less;
      else if (std::abs(deltas[j]) == std::abs(deltas[i])) ++equal;
    }
    ranks.push_back(less + (equal + 1) / 2.0);
    signs.push_back(deltas[i] > 0 ? 1 : -1);
  }
  if (ranks.empty()) return 1.0;
  double total = 0, obs = 0;
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    total += ranks[k];
    if (signs[k] > 0) obs += ranks[k];
  }
  const double centre = total / 2, dev = std::abs(obs - centre);
  const unsigned long long patterns = 1ULL << ranks.size();
  unsigned long long extreme = 0;
  for (unsigned long long m = 0; m < patterns; ++m) {
    double w = 0;
    for (std::size_t k = 0; k < ranks.size(); ++k)
      if (m >> k & 1ULL) w += ranks[k];
    if (std::abs(w - centre) >= dev - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(patterns);
}

}  // namespace oracle
