#include "encplan/duality.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <unordered_map>

namespace encplan {

namespace {

std::string tag(const char* family, const std::string& a, int t) {
  return std::string(family) + "[" + a + ",t" + std::to_string(t) + "]";
}

std::vector<Term> merged(std::vector<Term> terms) {
  std::map<int, double> acc;
  for (const auto& t : terms) acc[t.var] += t.coef;
  terms.clear();
  for (const auto& [j, c] : acc) {
    if (c != 0.0) terms.push_back({j, c});
  }
  return terms;
}

using Grid = std::vector<std::vector<double>>;
Grid grid(int n, int t) { return Grid(n, std::vector<double>(t, 0.0)); }

std::string with_day(const std::string& name, int a) {
  const std::string d = "a" + std::to_string(a);
  if (!name.empty() && name.back() == ']') return name.substr(0, name.size() - 1) + "," + d + "]";
  return name + "[" + d + "]";
}

}  // namespace

Commitment Commitment::from_dispatch(const DayDispatch& d) { return Commitment{d.u, d.v}; }

Commitment Commitment::all_on(const PowerSystem& system, int hours) {
  const int G = static_cast<int>(system.generators.size());
  Commitment c;
  c.u = Grid(G, std::vector<double>(hours, 1.0));
  c.v = grid(G, hours);
  return c;
}

TcedModel build_tced(const PowerSystem& system, const DailyProfile& day, const EconomicParams& econ,
                     const StorageAllocation& alloc, const StorageSpec& storage, const Commitment& commitment,
                     std::optional<double> baseline) {
  validate_allocation(system, alloc);
  const int T = day.hours, B = system.num_buses(), L = static_cast<int>(system.lines.size());
  const int G = static_cast<int>(system.generators.size());
  if (static_cast<int>(commitment.u.size()) != G || static_cast<int>(commitment.v.size()) != G)
    throw DomainError("commitment does not match the generator count");
  int S = 0;
  for (const auto& g : system.generators) S = std::max(S, static_cast<int>(g.segments.size()));
  const double eta = storage.efficiency;
  const double P = econ.carbon_price;

  TcedModel tm;
  tm.hours = T;
  tm.buses = B;
  tm.lines = L;
  for (const auto& g : system.generators) tm.segments.push_back(static_cast<int>(g.segments.size()));
  auto& m = tm.lp;
  m.name = "tced";
  tm.g = IndexTable(S, G, T);
  tm.spill = tm.shed = tm.soc = tm.chg = tm.dis = tm.theta = tm.balance = tm.socdef = IndexTable(1, B, T);
  tm.flow = tm.flowdef = IndexTable(1, L, T);
  const int ref = system.reference_bus();

  for (int i = 0; i < G; ++i) {
    const auto& gen = system.generators[i];
    for (int t = 0; t < T; ++t) {
      const double u = commitment.u[i][t];
      for (std::size_t s = 0; s < gen.segments.size(); ++s) {
        const auto& seg = gen.segments[s];
        tm.g(s, i, t) = m.add_continuous("g[" + gen.id + ",s" + std::to_string(s + 1) + ",t" + std::to_string(t) + "]",
                                         0.0, seg.mw * u, seg.cost);
      }
    }
  }
  for (int b = 0; b < B; ++b) {
    const auto& id = system.buses[b].id;
    for (int t = 0; t < T; ++t) {
      if (day.ren[b][t] > 0.0) tm.spill(0, b, t) = m.add_continuous(tag("spill", id, t), 0.0, day.ren[b][t], econ.ren_shed_penalty);
      if (day.load[b][t] > 0.0)
        tm.shed(0, b, t) = m.add_continuous(tag("shed", id, t), 0.0, day.load[b][t], econ.load_shed_penalty);
      if (b != ref && L > 0) tm.theta(0, b, t) = m.add_continuous(tag("theta", id, t), -kInf, kInf);
    }
    if (alloc.units[b] <= 0) continue;
    for (int t = 0; t < T; ++t) {
      tm.soc(0, b, t) = m.add_continuous(tag("soc", id, t), 0.0, alloc.energy(b, storage));
      tm.chg(0, b, t) = m.add_continuous(tag("chg", id, t), 0.0, alloc.power(b, storage));
      tm.dis(0, b, t) = m.add_continuous(tag("dis", id, t), 0.0, alloc.power(b, storage));
    }
    for (int t = 0; t < T; ++t) {
      const int p = (t + T - 1) % T;
      tm.socdef(0, b, t) = m.add_row(tag("socdef", id, t),
                                     merged({{tm.soc(0, b, t), 1.0},
                                             {tm.soc(0, b, p), -1.0},
                                             {tm.chg(0, b, t), -eta},
                                             {tm.dis(0, b, t), 1.0 / eta}}),
                                     RowSense::Equal, 0.0);
    }
  }
  for (int l = 0; l < L; ++l) {
    const auto& line = system.lines[l];
    for (int t = 0; t < T; ++t) {
      tm.flow(0, l, t) = m.add_continuous(tag("f", line.id, t), -line.capacity, line.capacity);
      std::vector<Term> row{{tm.flow(0, l, t), 1.0}};
      if (tm.theta(0, line.from, t) >= 0) row.push_back({tm.theta(0, line.from, t), -line.admittance});
      if (tm.theta(0, line.to, t) >= 0) row.push_back({tm.theta(0, line.to, t), line.admittance});
      tm.flowdef(0, l, t) = m.add_row(tag("flowdef", line.id, t), row, RowSense::Equal, 0.0);
    }
  }
  for (int b = 0; b < B; ++b) {
    for (int t = 0; t < T; ++t) {
      std::vector<Term> row;
      double rhs = day.load[b][t] - day.ren[b][t];
      for (int i = 0; i < G; ++i) {
        const auto& gen = system.generators[i];
        if (gen.bus != b) continue;
        rhs -= gen.gmin * commitment.u[i][t];
        for (std::size_t s = 0; s < gen.segments.size(); ++s) row.push_back({tm.g(s, i, t), 1.0});
      }
      if (tm.dis(0, b, t) >= 0) {
        row.push_back({tm.dis(0, b, t), 1.0});
        row.push_back({tm.chg(0, b, t), -1.0});
      }
      for (int l = 0; l < L; ++l) {
        if (system.lines[l].from == b) row.push_back({tm.flow(0, l, t), -1.0});
        if (system.lines[l].to == b) row.push_back({tm.flow(0, l, t), 1.0});
      }
      if (tm.spill(0, b, t) >= 0) row.push_back({tm.spill(0, b, t), -1.0});
      if (tm.shed(0, b, t) >= 0) row.push_back({tm.shed(0, b, t), 1.0});
      tm.balance(0, b, t) = m.add_row(tag("bal", system.buses[b].id, t), merged(row), RowSense::Equal, rhs);
    }
  }
  tm.emissions = m.add_continuous("E", -kInf, kInf, P);
  std::vector<Term> def{{tm.emissions, 1.0}};
  double fixed = 0.0;
  for (int i = 0; i < G; ++i) {
    const auto& gen = system.generators[i];
    for (int t = 0; t < T; ++t) {
      fixed += gen.emin * commitment.u[i][t] + gen.esu * commitment.v[i][t];
      for (std::size_t s = 0; s < gen.segments.size(); ++s) {
        if (gen.segments[s].emissions != 0.0) def.push_back({tm.g(s, i, t), -gen.segments[s].emissions});
      }
    }
  }
  tm.emissions_row = m.add_row("Edef", def, RowSense::Equal, fixed);
  if (baseline) tm.enc_row = m.add_row("enc", {{tm.emissions, 1.0}}, RowSense::LessEqual, econ.chi * *baseline);
  return tm;
}

LpDual dualize(const MilpModel& lp, const std::function<std::string(const std::string&, const char*)>& namer) {
  auto name = [&](const std::string& n, const char* side) {
    return namer ? namer(n, side) : std::string("y_") + side + "_" + n;
  };
  LpDual d;
  auto& D = d.model;
  D.name = lp.name + "_dual";
  d.constant = lp.objective_offset();
  const int n = lp.num_vars(), mr = lp.num_rows();
  d.row_free.assign(mr, -1);
  d.row_lo.assign(mr, -1);
  d.row_up.assign(mr, -1);
  d.col_free.assign(n, -1);
  d.col_lo.assign(n, -1);
  d.col_up.assign(n, -1);
  d.constraint.assign(n, -1);

  // costs are negated: the dual is stored as a minimization
  for (int r = 0; r < mr; ++r) {
    const auto& row = lp.row(r);
    const double L = row.lower(), U = row.upper();
    if (L == U) {
      d.row_free[r] = D.add_continuous(name(row.name, "row"), -kInf, kInf, -L);
      continue;
    }
    if (std::isfinite(L)) d.row_lo[r] = D.add_continuous(name(row.name, "lo"), 0.0, kInf, -L);
    if (std::isfinite(U)) d.row_up[r] = D.add_continuous(name(row.name, "up"), 0.0, kInf, U);
  }
  for (int j = 0; j < n; ++j) {
    const auto& v = lp.var(j);
    if (v.lower == v.upper) {
      d.col_free[j] = D.add_continuous(name(v.name, "fix"), -kInf, kInf, -v.lower);
      continue;
    }
    if (std::isfinite(v.lower)) d.col_lo[j] = D.add_continuous(name(v.name, "lo"), 0.0, kInf, -v.lower);
    if (std::isfinite(v.upper)) d.col_up[j] = D.add_continuous(name(v.name, "up"), 0.0, kInf, v.upper);
  }

  std::vector<std::vector<Term>> cols(n);
  for (int r = 0; r < mr; ++r) {
    for (const auto& t : lp.row(r).terms) {
      if (d.row_free[r] >= 0) {
        cols[t.var].push_back({d.row_free[r], t.coef});
        continue;
      }
      if (d.row_lo[r] >= 0) cols[t.var].push_back({d.row_lo[r], t.coef});
      if (d.row_up[r] >= 0) cols[t.var].push_back({d.row_up[r], -t.coef});
    }
  }
  for (int j = 0; j < n; ++j) {
    auto& terms = cols[j];
    if (d.col_free[j] >= 0) terms.push_back({d.col_free[j], 1.0});
    if (d.col_lo[j] >= 0) terms.push_back({d.col_lo[j], 1.0});
    if (d.col_up[j] >= 0) terms.push_back({d.col_up[j], -1.0});
    d.constraint[j] = D.add_row("dual[" + lp.var(j).name + "]", std::move(terms), RowSense::Equal, lp.cost(j));
  }
  return d;
}

DualTced build_dual_tced(const PowerSystem& system, const DailyProfile& day, const EconomicParams& econ,
                         const StorageAllocation& alloc, const StorageSpec& storage, const Commitment& commitment,
                         std::optional<double> baseline) {
  static const std::unordered_map<std::string, std::string> rows{
      {"bal", "lambda"}, {"flowdef", "beta"}, {"socdef", "kappa"}, {"Edef", "mu"}, {"enc", "alpha"}};
  static const std::unordered_map<std::string, std::string> cols{
      {"g", "delta"}, {"spill", "phi"}, {"shed", "sigma"}, {"soc", "xi"},
      {"chg", "rho_chg"}, {"dis", "rho_dis"}, {"f", "gamma"}};
  DualTced d;
  d.primal = build_tced(system, day, econ, alloc, storage, commitment, baseline);
  d.dual = dualize(d.primal.lp, [](const std::string& n, const char* side) {
    const auto k = n.find('[');
    const std::string fam = n.substr(0, k), rest = k == std::string::npos ? "" : n.substr(k);
    const std::string s = side;
    if (s == "row" || (fam == "enc" && s == "up")) {
      auto it = rows.find(fam);
      if (it != rows.end()) return it->second + rest;
    } else if (auto it = cols.find(fam); it != cols.end()) {
      return it->second + "_" + s + rest;
    }
    return "y_" + s + "_" + n;
  });
  return d;
}

DualSolution read_dual(const DualTced& d, std::span<const double> y) {
  const auto& p = d.primal;
  const auto& D = d.dual;
  const int T = p.hours, B = p.buses, L = p.lines, G = static_cast<int>(p.segments.size());
  auto val = [&](int k) { return k >= 0 ? y[k] : 0.0; };
  // bound multipliers of a column; a fixed column's single one is split by sign
  auto bounds = [&](int j, double& lo, double& up) {
    if (j < 0) return;
    if (D.col_free[j] >= 0) {
      const double w = y[D.col_free[j]];
      lo = std::max(w, 0.0);
      up = std::max(-w, 0.0);
      return;
    }
    lo = val(D.col_lo[j]);
    up = val(D.col_up[j]);
  };

  DualSolution s;
  s.objective = D.objective(y);
  s.lambda = s.kappa = s.xi_lo = s.xi_up = s.rho_chg_lo = s.rho_chg_up = s.rho_dis_lo = s.rho_dis_up = grid(B, T);
  s.phi_lo = s.phi_up = s.sigma_lo = s.sigma_up = grid(B, T);
  s.beta = s.gamma_lo = s.gamma_up = grid(L, T);
  s.storage.assign(B, 0);
  for (int b = 0; b < B; ++b) {
    s.storage[b] = T > 0 && p.dis(0, b, 0) >= 0;
    for (int t = 0; t < T; ++t) {
      s.lambda[b][t] = val(D.row_free[p.balance(0, b, t)]);
      if (p.socdef(0, b, t) >= 0) s.kappa[b][t] = -val(D.row_free[p.socdef(0, b, t)]);
      bounds(p.soc(0, b, t), s.xi_lo[b][t], s.xi_up[b][t]);
      bounds(p.chg(0, b, t), s.rho_chg_lo[b][t], s.rho_chg_up[b][t]);
      bounds(p.dis(0, b, t), s.rho_dis_lo[b][t], s.rho_dis_up[b][t]);
      bounds(p.spill(0, b, t), s.phi_lo[b][t], s.phi_up[b][t]);
      bounds(p.shed(0, b, t), s.sigma_lo[b][t], s.sigma_up[b][t]);
    }
  }
  for (int l = 0; l < L; ++l) {
    for (int t = 0; t < T; ++t) {
      s.beta[l][t] = -val(D.row_free[p.flowdef(0, l, t)]);
      bounds(p.flow(0, l, t), s.gamma_lo[l][t], s.gamma_up[l][t]);
    }
  }
  s.mu = val(D.row_free[p.emissions_row]);
  if (p.enc_row >= 0) s.alpha = val(D.row_up[p.enc_row]);
  s.delta_lo.resize(G);
  s.delta_up.resize(G);
  for (int i = 0; i < G; ++i) {
    s.delta_lo[i] = s.delta_up[i] = grid(p.segments[i], T);
    for (int k = 0; k < p.segments[i]; ++k) {
      for (int t = 0; t < T; ++t) bounds(p.g(k, i, t), s.delta_lo[i][k][t], s.delta_up[i][k][t]);
    }
  }
  return s;
}

double profit_via_duals(const DualSolution& dual, const StorageAllocation& alloc, const StorageSpec& storage) {
  double p = 0.0;
  for (std::size_t b = 0; b < dual.xi_up.size(); ++b) {
    const double q = alloc.energy(static_cast<int>(b), storage), j = alloc.power(static_cast<int>(b), storage);
    for (std::size_t t = 0; t < dual.xi_up[b].size(); ++t)
      p += q * dual.xi_up[b][t] + j * (dual.rho_dis_up[b][t] + dual.rho_chg_up[b][t]);
  }
  return p;
}

double profit_via_lambda(const DualSolution& dual, const TcedModel& primal, std::span<const double> x) {
  double p = 0.0;
  for (int b = 0; b < primal.buses; ++b) {
    for (int t = 0; t < primal.hours; ++t) {
      if (primal.dis(0, b, t) < 0) continue;
      p += dual.lambda[b][t] * (x[primal.dis(0, b, t)] - x[primal.chg(0, b, t)]);
    }
  }
  return p;
}

double PrintedResiduals::max() const { return std::max({gist, jdis, jchg, theta, flow, soc, spill}); }

PrintedResiduals printed_dual_residuals(const PowerSystem& system, const DailyProfile& day, const EconomicParams& econ,
                                        const StorageSpec& storage, const DualSolution& dual) {
  PrintedResiduals r;
  const int T = day.hours, B = system.num_buses();
  const double eta = storage.efficiency, P = econ.carbon_price;
  auto bump = [](double& slot, double v) { slot = std::max(slot, std::abs(v)); };
  for (std::size_t i = 0; i < system.generators.size(); ++i) {
    const auto& gen = system.generators[i];
    for (std::size_t s = 0; s < gen.segments.size(); ++s) {
      const auto& seg = gen.segments[s];
      for (int t = 0; t < T; ++t) {
        bump(r.gist, (seg.cost + P * seg.emissions) + seg.emissions * dual.alpha - dual.lambda[gen.bus][t] -
                         dual.delta_lo[i][s][t] + dual.delta_up[i][s][t]);
      }
    }
  }
  for (int b = 0; b < B; ++b) {
    for (int t = 0; t < T; ++t) {
      const double lam = dual.lambda[b][t], kap = dual.kappa[b][t];
      if (dual.storage[b]) {
        bump(r.jdis, kap / eta + dual.rho_dis_up[b][t] - dual.rho_dis_lo[b][t] - lam);
        bump(r.jchg, lam + dual.rho_chg_up[b][t] - dual.rho_chg_lo[b][t] - eta * kap);
        bump(r.soc, kap - dual.kappa[b][(t + 1) % T] + dual.xi_up[b][t] - dual.xi_lo[b][t]);
      }
      if (day.ren[b][t] > 0.0) bump(r.spill, lam + dual.phi_up[b][t] - dual.phi_lo[b][t] + econ.ren_shed_penalty);
      double th = 0.0;
      for (std::size_t l = 0; l < system.lines.size(); ++l) {
        const auto& line = system.lines[l];
        if (line.from == b) th += line.admittance * dual.beta[l][t];
        if (line.to == b) th -= line.admittance * dual.beta[l][t];
      }
      bump(r.theta, th);
    }
  }
  for (std::size_t l = 0; l < system.lines.size(); ++l) {
    const auto& line = system.lines[l];
    for (int t = 0; t < T; ++t) {
      bump(r.flow, dual.lambda[line.from][t] - dual.lambda[line.to][t] + dual.beta[l][t] - dual.gamma_lo[l][t] +
                       dual.gamma_up[l][t]);
    }
  }
  return r;
}

TcedDualityCheck check_tced_duality(const PowerSystem& system, const DailyProfile& day, const EconomicParams& econ,
                                    const StorageAllocation& alloc, const StorageSpec& storage,
                                    const Commitment& commitment, std::optional<double> baseline) {
  const auto d = build_dual_tced(system, day, econ, alloc, storage, commitment, baseline);
  TcedDualityCheck c;
  const auto ps = solve_lp(d.primal.lp);
  const auto ds = solve_lp(d.dual.model);
  c.primal_status = ps.status;
  c.dual_status = ds.status;
  if (!ps.optimal() || !ds.optimal()) return c;
  c.primal = ps.objective;
  c.values = read_dual(d, ds.x);
  c.dual = c.values.objective;
  c.sd_residual = std::abs(c.primal - c.dual) / (1.0 + std::abs(c.primal));
  c.profit_lambda = profit_via_lambda(c.values, d.primal, ps.x);
  c.profit_dual = profit_via_duals(c.values, alloc, storage);
  c.profit_residual = std::abs(c.profit_lambda - c.profit_dual) / (1.0 + std::abs(c.profit_lambda));
  c.printed_residual = printed_dual_residuals(system, day, econ, storage, c.values).max();
  return c;
}

BigM compute_bigM(const PowerSystem& system, const EconomicParams& econ, bool enc_active, const StorageSpec& storage) {
  BigM M;
  double hmin = kInf;
  for (const auto& g : system.generators) {
    for (const auto& s : g.segments) {
      if (s.emissions > 0.0) hmin = std::min(hmin, s.emissions);
    }
  }
  M.alpha_hat = enc_active && std::isfinite(hmin) ? econ.load_shed_penalty / hmin : 0.0;
  double top = 0.0;
  for (const auto& g : system.generators) {
    for (const auto& s : g.segments)
      top = std::max(top, s.cost + econ.carbon_price * s.emissions + M.alpha_hat * s.emissions);
  }
  M.lambda = top + econ.load_shed_penalty;
  M.delta = M.lambda;
  M.alpha = M.alpha_hat;
  const double eta = storage.efficiency;
  M.xi = 2.0 * M.lambda / eta;
  M.rho = M.lambda * (1.0 + 1.0 / (eta * eta));
  return M;
}

BigMAudit audit_bigM(BigM& M, const std::vector<DualSolution>& duals) {
  double lam = 0.0, del = 0.0, alp = 0.0, xi = 0.0, rho = 0.0;
  for (const auto& d : duals) {
    for (const auto& row : d.lambda)
      for (double v : row) lam = std::max(lam, std::abs(v));
    for (const auto& g : d.delta_up)
      for (const auto& row : g)
        for (double v : row) del = std::max(del, std::abs(v));
    alp = std::max(alp, std::abs(d.alpha));
    for (const auto& row : d.xi_up)
      for (double v : row) xi = std::max(xi, std::abs(v));
    for (std::size_t b = 0; b < d.rho_chg_up.size(); ++b) {
      for (std::size_t t = 0; t < d.rho_chg_up[b].size(); ++t)
        rho = std::max({rho, std::abs(d.rho_chg_up[b][t]), std::abs(d.rho_dis_up[b][t])});
    }
  }
  BigMAudit a;
  while (true) {
    a.families = {{"lambda", M.lambda, lam}, {"delta", M.delta, del}, {"alpha", M.alpha, alp},
                  {"xi", M.xi, xi},         {"rho", M.rho, rho}};
    a.ok = true;
    for (auto& f : a.families) {
      f.ok = f.max_abs == 0.0 || f.max_abs < 0.99 * f.M;
      a.ok = a.ok && f.ok;
    }
    if (a.ok || a.escalations >= 3) break;
    for (double* v : {&M.lambda, &M.delta, &M.alpha, &M.xi, &M.rho}) *v *= 10.0;
    ++a.escalations;
  }
  M.escalations += a.escalations;
  return a;
}

int expansion_bits(int max_units) {
  if (max_units < 0) throw DomainError("unit count must be nonnegative");
  int n = 0;
  while (((1LL << n) - 1) < max_units) ++n;
  return n;
}

std::vector<int> binary_expansion(int units, int bits) {
  if (units < 0 || bits < 0 || bits > 30 || units > (1 << bits) - 1)
    throw DomainError(std::to_string(units) + " units do not fit in " + std::to_string(bits) + " bits");
  std::vector<int> x(bits);
  for (int n = 0; n < bits; ++n) x[n] = (units >> n) & 1;
  return x;
}

PcsleModel build_pcsle(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                       const EconomicParams& econ, const UcSpec& spec, int max_units_per_bus, const BigM& M,
                       int bits) {
  if (spec.enc == EncMode::Aggregate) throw DomainError("the single-level reformulation needs a daily ENC or none");
  if (max_units_per_bus < 1) throw DomainError("the single-level reformulation needs at least one unit per bus");
  const auto cands = system.candidate_buses();
  if (cands.empty()) throw DomainError("no candidate storage buses");
  const int need = expansion_bits(max_units_per_bus);
  if (bits == 0) bits = need;
  if (bits < need || bits > 30)
    throw DomainError(std::to_string(bits) + " bits cannot express " + std::to_string(max_units_per_bus) + " units");

  PcsleModel pm;
  pm.M = M;
  pm.bits_per_bus = bits;
  pm.uc = build_uc(system, days, econ, StorageAllocation::none(system), spec, InvestSpec{max_units_per_bus, {}});
  auto& uc = pm.uc;
  auto& m = uc.model;
  m.name = "pcsle";
  const auto& st = spec.storage;
  const int B = system.num_buses(), G = static_cast<int>(system.generators.size());
  const bool enc = spec.enc == EncMode::Daily;
  const double P = econ.carbon_price;

  pm.bits.assign(B, {});
  for (int b : cands) {
    std::vector<Term> link{{uc.units[b], 1.0}};
    for (int n = 0; n < bits; ++n) {
      const int x = m.add_binary("x[" + system.buses[b].id + ",n" + std::to_string(n) + "]");
      pm.bits[b].push_back(x);
      link.push_back({x, -static_cast<double>(1 << n)});
    }
    m.add_row("expand[" + system.buses[b].id + "]", link, RowSense::Equal, 0.0);
  }

  auto product = [&](int binary, int cont, double lo, double hi) {
    const std::string base = m.var(binary).name + "*" + m.var(cont).name;
    const int w = m.add_continuous("w[" + base + "]", std::min(0.0, lo), std::max(0.0, hi));
    m.add_row("wu[" + base + "]", {{w, 1.0}, {binary, -hi}}, RowSense::LessEqual, 0.0);
    m.add_row("wl[" + base + "]", {{w, 1.0}, {binary, -lo}}, RowSense::GreaterEqual, 0.0);
    m.add_row("wyu[" + base + "]", {{w, 1.0}, {cont, -1.0}, {binary, -lo}}, RowSense::LessEqual, -lo);
    m.add_row("wyl[" + base + "]", {{w, 1.0}, {cont, -1.0}, {binary, -hi}}, RowSense::GreaterEqual, -hi);
    pm.aux.push_back({w, binary, cont});
    return w;
  };

  StorageAllocation full = StorageAllocation::none(system);
  for (int b : cands) full.units[b] = max_units_per_bus;
  std::vector<Term> profit;
  const double year = econ.days_per_year;

  for (std::size_t a = 0; a < days.size(); ++a) {
    const auto& day = days[a].profile;
    const int T = day.hours;
    const double pi = days[a].probability;
    std::optional<double> base;
    if (enc) base = spec.baselines[a];
    const auto d = build_dual_tced(system, day, econ, full, st, Commitment::all_on(system, T), base);
    const auto& tp = d.primal;
    const auto& D = d.dual;

    std::vector<int> map(D.model.num_vars());
    for (int k = 0; k < D.model.num_vars(); ++k) {
      const auto& v = D.model.var(k);
      map[k] = m.add_continuous(with_day(v.name, static_cast<int>(a)), v.lower, v.upper);
    }
    for (const auto& row : D.model.rows()) {
      std::vector<Term> terms;
      for (const auto& t : row.terms) terms.push_back({map[t.var], t.coef});
      m.add_row(with_day(row.name, static_cast<int>(a)), terms, row.sense, row.rhs);
    }

    // strong duality: dispatch cost - dual objective = 0; handled terms are flagged
    std::vector<Term> sd;
    std::vector<bool> done(D.model.num_vars(), false);
    for (int i = 0; i < G; ++i) {
      const auto& gen = system.generators[i];
      for (int t = 0; t < T; ++t) {
        for (std::size_t s = 0; s < gen.segments.size(); ++s) {
          const auto& seg = gen.segments[s];
          sd.push_back({uc.g[s](a, i, t), seg.cost});
          const int k = D.col_up[tp.g(s, i, t)];
          if (k < 0 || uc.u(a, i, t) < 0) continue;
          m.set_bounds(map[k], 0.0, M.delta);
          sd.push_back({product(uc.u(a, i, t), map[k], 0.0, M.delta), seg.mw});
          done[k] = true;
        }
      }
    }
    sd.push_back({uc.emissions[a], P});
    for (int b = 0; b < B; ++b) {
      for (int t = 0; t < T; ++t) {
        if (uc.shed(a, b, t) >= 0) sd.push_back({uc.shed(a, b, t), econ.load_shed_penalty});
        if (uc.spill(a, b, t) >= 0) sd.push_back({uc.spill(a, b, t), econ.ren_shed_penalty});
        const int k = D.row_free[tp.balance(0, b, t)];
        const int lam = map[k];
        sd.push_back({lam, -(day.load[b][t] - day.ren[b][t])});
        done[k] = true;
        for (int i = 0; i < G; ++i) {
          const auto& gen = system.generators[i];
          if (gen.bus != b || gen.gmin == 0.0 || uc.u(a, i, t) < 0) continue;
          m.set_bounds(lam, -M.lambda, M.lambda);
          sd.push_back({product(uc.u(a, i, t), lam, -M.lambda, M.lambda), gen.gmin});
        }
      }
    }
    {
      const int k = D.row_free[tp.emissions_row];
      const int mu = map[k];
      done[k] = true;
      for (int i = 0; i < G; ++i) {
        const auto& gen = system.generators[i];
        for (int t = 0; t < T; ++t) {
          if (uc.u(a, i, t) < 0) continue;
          if (!enc) {
            if (gen.emin != 0.0) sd.push_back({uc.u(a, i, t), -P * gen.emin});
            if (gen.esu != 0.0) sd.push_back({uc.v(a, i, t), -P * gen.esu});
            continue;
          }
          m.set_bounds(mu, P, P + M.alpha);
          if (gen.emin != 0.0) sd.push_back({product(uc.u(a, i, t), mu, P, P + M.alpha), -gen.emin});
          if (gen.esu != 0.0) sd.push_back({product(uc.v(a, i, t), mu, P, P + M.alpha), -gen.esu});
        }
      }
    }
    for (int b : cands) {
      for (int t = 0; t < T; ++t) {
        const struct {
          int col;
          double unit, bound;
        } parts[] = {{tp.soc(0, b, t), st.unit_energy(), M.xi},
                     {tp.chg(0, b, t), st.unit_power, M.rho},
                     {tp.dis(0, b, t), st.unit_power, M.rho}};
        for (const auto& part : parts) {
          const int k = D.col_up[part.col];
          m.set_bounds(map[k], 0.0, part.bound);
          done[k] = true;
          for (int n = 0; n < bits; ++n) {
            const int w = product(pm.bits[b][n], map[k], 0.0, part.bound);
            const double c = static_cast<double>(1 << n) * part.unit;
            sd.push_back({w, c});
            profit.push_back({w, pi * c});
          }
        }
      }
    }
    for (int k = 0; k < D.model.num_vars(); ++k) {
      if (!done[k] && D.model.cost(k) != 0.0) sd.push_back({map[k], D.model.cost(k)});
    }
    pm.strong_duality_rows.push_back(
        m.add_row("sd[a" + std::to_string(a) + "]", merged(sd), RowSense::Equal, D.constant));
  }
  for (int b : cands) profit.push_back({uc.units[b], -st.unit_cost() / year});
  // the floor binds only when something is built; no investment always qualifies
  const int any = m.add_binary("invests");
  std::vector<Term> gate{{any, -static_cast<double>(max_units_per_bus) * static_cast<double>(cands.size())}};
  for (int b : cands) gate.push_back({uc.units[b], 1.0});
  m.add_row("invests_gate", gate, RowSense::LessEqual, 0.0);
  profit.push_back({any, -econ.min_return / year});
  pm.profit_row = m.add_row("profit", merged(profit), RowSense::GreaterEqual, 0.0);
  return pm;
}

PcsleResult solve_pcsle(const PcsleModel& model, const PowerSystem& system, const EconomicParams& econ,
                        const MilpOptions& options) {
  const auto ms = solve_milp(model.uc.model, options);
  if (ms.status == MilpStatus::Infeasible) throw DomainError("single-level reformulation is infeasible");
  PcsleResult r;
  r.status = ms.status;
  r.nodes = ms.nodes;
  const double year = econ.days_per_year;
  r.bound = std::isfinite(ms.bound) ? year * ms.bound : std::numeric_limits<double>::quiet_NaN();
  r.alloc = StorageAllocation::none(system);
  if (!ms.has_incumbent()) {
    r.objective = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.objective = year * ms.objective;
  for (int b = 0; b < system.num_buses(); ++b) {
    if (model.uc.units[b] >= 0) r.alloc.units[b] = static_cast<int>(std::lround(ms.x[model.uc.units[b]]));
  }
  for (const auto& a : model.aux)
    r.max_linearization_error = std::max(r.max_linearization_error, std::abs(ms.x[a.w] - ms.x[a.binary] * ms.x[a.continuous]));
  return r;
}

void write_duality_audit_json(const std::filesystem::path& path, const std::string& case_id, double primal,
                              double dual, const BigM& M, const BigMAudit& audit, const std::string& config_hash,
                              std::uint64_t seed) {
  using json = nlohmann::ordered_json;
  json j;
  j["case"] = case_id;
  j["primal"] = primal;
  j["dual"] = dual;
  j["gap"] = std::abs(primal - dual) / (1.0 + std::abs(primal));
  json a;
  a["ok"] = audit.ok;
  a["escalations"] = audit.escalations;
  a["alpha_hat"] = M.alpha_hat;
  json fam = json::array();
  for (const auto& f : audit.families) fam.push_back({{"family", f.family}, {"M", f.M}, {"max_abs", f.max_abs}, {"ok", f.ok}});
  a["families"] = fam;
  j["M_audit"] = a;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  out << j.dump(1) << "\n";
}

}  // namespace encplan
