#include "encplan/uc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <json.hpp>
#include <sstream>

#include "csv.hpp"

namespace encplan {

namespace {

std::string tag(const char* family, const std::string& a, int t, int d) {
  std::string s = family;
  s += '[';
  s += a;
  s += ",t";
  s += std::to_string(t);
  s += ",a";
  s += std::to_string(d);
  s += ']';
  return s;
}

// Merges repeated columns so that rows never mention a variable twice.
std::vector<Term> merged(std::vector<Term> terms) {
  std::map<int, double> acc;
  for (const auto& t : terms) acc[t.var] += t.coef;
  terms.clear();
  for (const auto& [j, c] : acc) {
    if (c != 0.0) terms.push_back({j, c});
  }
  return terms;
}

void check_days(const PowerSystem& system, const std::vector<RepresentativeDay>& days) {
  if (days.empty()) throw DomainError("at least one representative day is required");
  const int hours = days[0].profile.hours;
  if (hours < 1) throw DomainError("representative days need at least one hour");
  for (const auto& d : days) {
    const auto& p = d.profile;
    if (p.hours != hours) throw DomainError("representative days must share one horizon");
    if (static_cast<int>(p.load.size()) != system.num_buses() || static_cast<int>(p.ren.size()) != system.num_buses())
      throw DomainError("representative day does not match the bus count");
    for (int b = 0; b < system.num_buses(); ++b) {
      if (static_cast<int>(p.load[b].size()) != hours || static_cast<int>(p.ren[b].size()) != hours)
        throw DomainError("representative day series length differs from its horizon");
    }
    if (!(d.probability >= 0.0)) throw DomainError("day probability must be nonnegative");
  }
}

}  // namespace

int StorageAllocation::total() const {
  int s = 0;
  for (int u : units) s += u;
  return s;
}

double StorageAllocation::cost(const StorageSpec& spec) const { return total() * spec.unit_cost(); }

std::string StorageAllocation::to_json(const PowerSystem& system) const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (int b = 0; b < static_cast<int>(units.size()); ++b) {
    if (units[b] != 0) j[system.buses[b].id] = units[b];
  }
  return j.dump();
}

void validate_allocation(const PowerSystem& system, const StorageAllocation& alloc) {
  if (static_cast<int>(alloc.units.size()) != system.num_buses())
    throw DomainError("storage allocation must list every bus");
  for (int b = 0; b < system.num_buses(); ++b) {
    if (alloc.units[b] < 0) throw DomainError("negative storage units at bus " + system.buses[b].id);
    if (alloc.units[b] > 0 && !system.buses[b].candidate_storage)
      throw DomainError("storage placed at non-candidate bus " + system.buses[b].id);
  }
}

const char* to_string(EncMode m) {
  switch (m) {
    case EncMode::Off: return "off";
    case EncMode::Daily: return "daily";
    case EncMode::Aggregate: return "aggregate";
  }
  return "?";
}

EncMode enc_mode_from_string(const std::string& s) {
  if (s == "off") return EncMode::Off;
  if (s == "on" || s == "daily") return EncMode::Daily;
  if (s == "aggregate") return EncMode::Aggregate;
  throw DomainError("unknown ENC mode '" + s + "' (expected off, on, daily or aggregate)");
}

UcModel build_uc(const PowerSystem& system, const std::vector<RepresentativeDay>& days, const EconomicParams& econ,
                 const StorageAllocation& alloc, const UcSpec& spec, const std::optional<InvestSpec>& invest) {
  check_days(system, days);
  if (!invest) validate_allocation(system, alloc);
  if (spec.enc != EncMode::Off && spec.baselines.size() != days.size())
    throw DomainError("ENC requested without a baseline for every representative day");
  if (econ.load_shed_penalty < 0 || econ.ren_shed_penalty < 0) throw DomainError("penalties must be nonnegative");
  if (spec.enc != EncMode::Off && econ.chi < 1.0) throw DomainError("chi must be >= 1 when the ENC is active");
  const auto& st = spec.storage;
  if (!(st.duration > 0) || !(st.unit_power > 0) || !(st.efficiency > 0 && st.efficiency <= 1))
    throw DomainError("storage needs duration > 0, unit power > 0 and efficiency in (0, 1]");

  UcModel uc;
  auto& m = uc.model;
  m.name = invest ? "uc_invest" : "uc";
  const int A = static_cast<int>(days.size());
  const int T = days[0].profile.hours;
  const int B = system.num_buses();
  const int L = static_cast<int>(system.lines.size());
  const int G = static_cast<int>(system.generators.size());
  int S = 0;
  for (const auto& g : system.generators) S = std::max(S, static_cast<int>(g.segments.size()));
  uc.days = A;
  uc.hours = T;
  uc.buses = B;
  uc.lines = L;
  uc.generators = G;
  uc.max_segments = S;
  uc.invest = invest.has_value();
  for (const auto& d : days) uc.probability.push_back(d.probability);
  uc.u = uc.v = uc.z = IndexTable(A, G, T);
  uc.g.assign(S, IndexTable(A, G, T));
  uc.soc = uc.chg = uc.dis = uc.spill = uc.shed = uc.theta = uc.balance = IndexTable(A, B, T);
  uc.flow = IndexTable(A, L, T);
  const int ref = system.reference_bus();
  const double eta = st.efficiency;

  // storage sizing columns come first so they read naturally in exports
  std::vector<bool> has_storage(B, false);
  uc.units.assign(B, -1);
  if (invest) {
    std::vector<Term> total;
    for (int b : system.candidate_buses()) {
      has_storage[b] = true;
      uc.units[b] = m.add_var("units[" + system.buses[b].id + "]", VarKind::Integer, 0.0, invest->max_units_per_bus,
                              st.unit_cost() / econ.days_per_year);
      total.push_back({uc.units[b], 1.0});
    }
    if (invest->total_units) {
      if (*invest->total_units < 0) throw DomainError("total storage units must be nonnegative");
      uc.total_units_row = m.add_row("total_units", total, RowSense::Equal, *invest->total_units);
    }
  } else {
    for (int b = 0; b < B; ++b) has_storage[b] = alloc.units[b] > 0;
  }

  for (int a = 0; a < A; ++a) {
    const auto& p = days[a].profile;
    const double pi = days[a].probability;
    auto prev = [T](int t) { return (t + T - 1) % T; };

    for (int i = 0; i < G; ++i) {
      const auto& gen = system.generators[i];
      const bool committed = !gen.flexible();
      for (int t = 0; t < T; ++t) {
        if (committed) {
          uc.u(a, i, t) = m.add_binary(tag("u", gen.id, t, a), pi * gen.cmin);
          uc.v(a, i, t) = m.add_binary(tag("v", gen.id, t, a), pi * gen.csu);
          uc.z(a, i, t) = m.add_binary(tag("z", gen.id, t, a));
        }
        for (std::size_t s = 0; s < gen.segments.size(); ++s) {
          const auto& seg = gen.segments[s];
          uc.g[s](a, i, t) = m.add_continuous(tag(("g" + std::to_string(s + 1)).c_str(), gen.id, t, a), 0.0, seg.mw,
                                              pi * seg.cost);
        }
      }
      if (!committed) continue;
      const int up = std::min(gen.min_up, T), down = std::min(gen.min_down, T);
      for (int t = 0; t < T; ++t) {
        m.add_row(tag("logic", gen.id, t, a),
                  merged({{uc.v(a, i, t), 1.0}, {uc.z(a, i, t), -1.0}, {uc.u(a, i, t), -1.0}, {uc.u(a, i, prev(t)), 1.0}}),
                  RowSense::Equal, 0.0);
        std::vector<Term> win{{uc.u(a, i, t), -1.0}};
        for (int k = 0; k < up; ++k) win.push_back({uc.v(a, i, (t - k + T) % T), 1.0});
        m.add_row(tag("minup", gen.id, t, a), merged(win), RowSense::LessEqual, 0.0);
        win = {{uc.u(a, i, t), 1.0}};
        for (int k = 0; k < down; ++k) win.push_back({uc.z(a, i, (t - k + T) % T), 1.0});
        m.add_row(tag("mindown", gen.id, t, a), merged(win), RowSense::LessEqual, 1.0);
        for (std::size_t s = 0; s < gen.segments.size(); ++s) {
          m.add_row(tag(("seg" + std::to_string(s + 1)).c_str(), gen.id, t, a),
                    {{uc.g[s](a, i, t), 1.0}, {uc.u(a, i, t), -gen.segments[s].mw}}, RowSense::LessEqual, 0.0);
        }
      }
    }

    for (int b = 0; b < B; ++b) {
      const auto& id = system.buses[b].id;
      for (int t = 0; t < T; ++t) {
        if (p.ren[b][t] > 0.0)
          uc.spill(a, b, t) = m.add_continuous(tag("spill", id, t, a), 0.0, p.ren[b][t], pi * econ.ren_shed_penalty);
        if (p.load[b][t] > 0.0)
          uc.shed(a, b, t) = m.add_continuous(tag("shed", id, t, a), 0.0, p.load[b][t], pi * econ.load_shed_penalty);
        if (b != ref && L > 0) uc.theta(a, b, t) = m.add_continuous(tag("theta", id, t, a), -kInf, kInf);
      }
      if (!has_storage[b]) continue;
      const double qmax = invest ? invest->max_units_per_bus * st.unit_energy() : alloc.energy(b, st);
      const double jmax = invest ? invest->max_units_per_bus * st.unit_power : alloc.power(b, st);
      for (int t = 0; t < T; ++t) {
        uc.soc(a, b, t) = m.add_continuous(tag("soc", id, t, a), 0.0, qmax);
        uc.chg(a, b, t) = m.add_continuous(tag("chg", id, t, a), 0.0, jmax);
        uc.dis(a, b, t) = m.add_continuous(tag("dis", id, t, a), 0.0, jmax);
      }
      for (int t = 0; t < T; ++t) {
        m.add_row(tag("socdef", id, t, a),
                  merged({{uc.soc(a, b, t), 1.0},
                          {uc.soc(a, b, prev(t)), -1.0},
                          {uc.chg(a, b, t), -eta},
                          {uc.dis(a, b, t), 1.0 / eta}}),
                  RowSense::Equal, 0.0);
        if (invest) {
          const int n = uc.units[b];
          m.add_row(tag("socmax", id, t, a), {{uc.soc(a, b, t), 1.0}, {n, -st.unit_energy()}}, RowSense::LessEqual, 0.0);
          m.add_row(tag("chgmax", id, t, a), {{uc.chg(a, b, t), 1.0}, {n, -st.unit_power}}, RowSense::LessEqual, 0.0);
          m.add_row(tag("dismax", id, t, a), {{uc.dis(a, b, t), 1.0}, {n, -st.unit_power}}, RowSense::LessEqual, 0.0);
        }
      }
    }

    for (int l = 0; l < L; ++l) {
      const auto& line = system.lines[l];
      for (int t = 0; t < T; ++t) {
        uc.flow(a, l, t) = m.add_continuous(tag("f", line.id, t, a), -line.capacity, line.capacity);
        std::vector<Term> row{{uc.flow(a, l, t), 1.0}};
        if (uc.theta(a, line.from, t) >= 0) row.push_back({uc.theta(a, line.from, t), -line.admittance});
        if (uc.theta(a, line.to, t) >= 0) row.push_back({uc.theta(a, line.to, t), line.admittance});
        m.add_row(tag("flowdef", line.id, t, a), row, RowSense::Equal, 0.0);
      }
    }

    for (int b = 0; b < B; ++b) {
      for (int t = 0; t < T; ++t) {
        std::vector<Term> row;
        double rhs = p.load[b][t] - p.ren[b][t];
        for (int i = 0; i < G; ++i) {
          const auto& gen = system.generators[i];
          if (gen.bus != b) continue;
          if (uc.u(a, i, t) >= 0) {
            if (gen.gmin != 0.0) row.push_back({uc.u(a, i, t), gen.gmin});
          } else {
            rhs -= gen.gmin;  // flexible units are always committed
          }
          for (std::size_t s = 0; s < gen.segments.size(); ++s) row.push_back({uc.g[s](a, i, t), 1.0});
        }
        if (uc.dis(a, b, t) >= 0) {
          row.push_back({uc.dis(a, b, t), 1.0});
          row.push_back({uc.chg(a, b, t), -1.0});
        }
        for (int l = 0; l < L; ++l) {
          if (system.lines[l].from == b) row.push_back({uc.flow(a, l, t), -1.0});
          if (system.lines[l].to == b) row.push_back({uc.flow(a, l, t), 1.0});
        }
        if (uc.spill(a, b, t) >= 0) row.push_back({uc.spill(a, b, t), -1.0});
        if (uc.shed(a, b, t) >= 0) row.push_back({uc.shed(a, b, t), 1.0});
        uc.balance(a, b, t) = m.add_row(tag("bal", system.buses[b].id, t, a), merged(row), RowSense::Equal, rhs);
      }
    }

    const int e = m.add_continuous("E[a" + std::to_string(a) + "]", -kInf, kInf);
    std::vector<Term> def{{e, 1.0}};
    double fixed_emissions = 0.0;
    for (int i = 0; i < G; ++i) {
      const auto& gen = system.generators[i];
      for (int t = 0; t < T; ++t) {
        if (uc.u(a, i, t) >= 0) {
          if (gen.emin != 0.0) def.push_back({uc.u(a, i, t), -gen.emin});
          if (gen.esu != 0.0) def.push_back({uc.v(a, i, t), -gen.esu});
        } else {
          fixed_emissions += gen.emin;
        }
        for (std::size_t s = 0; s < gen.segments.size(); ++s) {
          if (gen.segments[s].emissions != 0.0) def.push_back({uc.g[s](a, i, t), -gen.segments[s].emissions});
        }
      }
    }
    uc.emissions.push_back(e);
    uc.emissions_row.push_back(m.add_row("Edef[a" + std::to_string(a) + "]", def, RowSense::Equal, fixed_emissions));
    if (spec.enc == EncMode::Daily) {
      uc.enc_rows.push_back(m.add_row("enc[a" + std::to_string(a) + "]", {{e, 1.0}}, RowSense::LessEqual,
                                      econ.chi * spec.baselines[a]));
    }
  }
  if (spec.enc == EncMode::Aggregate) {
    std::vector<Term> row;
    double cap = 0.0;
    for (int a = 0; a < A; ++a) {
      if (days[a].probability > 0.0) row.push_back({uc.emissions[a], days[a].probability});
      cap += days[a].probability * spec.baselines[a];
    }
    uc.enc_rows.push_back(m.add_row("enc", row, RowSense::LessEqual, econ.chi * cap));
  }
  if (econ.carbon_price < 0) throw DomainError("carbon price must be nonnegative");
  apply_carbon_price(uc, econ.carbon_price);
  return uc;
}

void apply_carbon_price(UcModel& uc, double price) {
  if (!(price >= 0.0) || !std::isfinite(price)) throw DomainError("carbon price must be finite and nonnegative");
  for (int a = 0; a < uc.days; ++a) uc.model.set_cost(uc.emissions[a], uc.probability[a] * price);
}

double DayDispatch::storage_revenue() const {
  double r = 0.0;
  for (std::size_t b = 0; b < lmp.size(); ++b) {
    for (std::size_t t = 0; t < lmp[b].size(); ++t) r += lmp[b][t] * (dis[b][t] - chg[b][t]);
  }
  return r;
}

double DispatchSolution::expected_emissions() const {
  double e = 0.0;
  for (std::size_t a = 0; a < days.size(); ++a) e += probability[a] * days[a].emissions;
  return e;
}

double DispatchSolution::expected_revenue() const {
  double r = 0.0;
  for (std::size_t a = 0; a < days.size(); ++a) r += probability[a] * days[a].storage_revenue();
  return r;
}

std::vector<double> DispatchSolution::emissions_by_day() const {
  std::vector<double> e;
  for (const auto& d : days) e.push_back(d.emissions);
  return e;
}

DayDispatch read_day(const UcModel& uc, const PowerSystem& system, const EconomicParams& econ, int a,
                     std::span<const double> x) {
  const int T = uc.hours, B = uc.buses, L = uc.lines, G = uc.generators;
  auto val = [&](int j, double absent) { return j >= 0 ? x[j] : absent; };
  auto grid = [](int n, int t) { return std::vector<std::vector<double>>(n, std::vector<double>(t, 0.0)); };
  DayDispatch d;
  d.u = grid(G, T);
  d.v = grid(G, T);
  d.z = grid(G, T);
  d.gen = grid(G, T);
  d.seg.resize(G);
  d.flow = grid(L, T);
  d.theta = grid(B, T);
  d.soc = grid(B, T);
  d.chg = grid(B, T);
  d.dis = grid(B, T);
  d.spill = grid(B, T);
  d.shed = grid(B, T);
  for (int i = 0; i < G; ++i) {
    const auto& gen = system.generators[i];
    d.seg[i] = grid(static_cast<int>(gen.segments.size()), T);
    for (int t = 0; t < T; ++t) {
      d.u[i][t] = val(uc.u(a, i, t), 1.0);
      d.v[i][t] = val(uc.v(a, i, t), 0.0);
      d.z[i][t] = val(uc.z(a, i, t), 0.0);
      double out = gen.gmin * d.u[i][t];
      d.gen_cost += gen.cmin * d.u[i][t] + gen.csu * d.v[i][t];
      for (std::size_t s = 0; s < gen.segments.size(); ++s) {
        d.seg[i][s][t] = x[uc.g[s](a, i, t)];
        out += d.seg[i][s][t];
        d.gen_cost += gen.segments[s].cost * d.seg[i][s][t];
      }
      d.gen[i][t] = out;
    }
  }
  for (int l = 0; l < L; ++l) {
    for (int t = 0; t < T; ++t) d.flow[l][t] = x[uc.flow(a, l, t)];
  }
  for (int b = 0; b < B; ++b) {
    for (int t = 0; t < T; ++t) {
      d.theta[b][t] = val(uc.theta(a, b, t), 0.0);
      d.soc[b][t] = val(uc.soc(a, b, t), 0.0);
      d.chg[b][t] = val(uc.chg(a, b, t), 0.0);
      d.dis[b][t] = val(uc.dis(a, b, t), 0.0);
      d.spill[b][t] = val(uc.spill(a, b, t), 0.0);
      d.shed[b][t] = val(uc.shed(a, b, t), 0.0);
      d.shed_cost += econ.load_shed_penalty * d.shed[b][t] + econ.ren_shed_penalty * d.spill[b][t];
    }
  }
  d.emissions = x[uc.emissions[a]];
  d.carbon_cost = econ.carbon_price * d.emissions;
  return d;
}

std::vector<std::vector<std::vector<double>>> extract_lmps(const UcModel& uc, std::span<const double> x,
                                                           std::vector<double>* fixed_x) {
  MilpModel lp = uc.model;
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (lp.var(j).kind != VarKind::Continuous) lp.fix(j, std::round(x[j]));
  }
  const auto sol = solve_lp(lp);
  if (!sol.optimal())
    throw DomainError(std::string("LP with fixed commitment is ") + to_string(sol.status) +
                      "; solver tolerances disagree");
  const double dres = dual_feasibility_residual(lp, sol);
  if (dres > 1e-7) throw DomainError("LMP duals violate dual feasibility by " + std::to_string(dres));
  std::vector<std::vector<std::vector<double>>> lmp(
      uc.days, std::vector<std::vector<double>>(uc.buses, std::vector<double>(uc.hours, 0.0)));
  for (int a = 0; a < uc.days; ++a) {
    const double pi = uc.probability[a];
    for (int b = 0; b < uc.buses; ++b) {
      for (int t = 0; t < uc.hours; ++t) lmp[a][b][t] = pi > 0.0 ? sol.row_duals[uc.balance(a, b, t)] / pi : 0.0;
    }
  }
  if (fixed_x) *fixed_x = sol.x;
  return lmp;
}

namespace {

void solve_block(const PowerSystem& system, const std::vector<RepresentativeDay>& block, const EconomicParams& econ,
                 const StorageAllocation& alloc, const UcSpec& spec, const MilpOptions& options,
                 DispatchSolution& out, std::vector<int> day_ids) {
  const auto uc = build_uc(system, block, econ, alloc, spec);
  const auto ms = solve_milp(uc.model, options);
  out.nodes += ms.nodes;
  out.seconds += ms.seconds;
  if (!ms.has_incumbent())
    throw DomainError(std::string("unit commitment solve ended ") + to_string(ms.status) + " without a schedule");
  if (ms.status == MilpStatus::Feasible && out.status == MilpStatus::Optimal) out.status = MilpStatus::Feasible;
  std::vector<double> x;
  const auto lmp = extract_lmps(uc, ms.x, &x);
  for (std::size_t k = 0; k < block.size(); ++k) {
    auto d = read_day(uc, system, econ, static_cast<int>(k), x);
    d.lmp = lmp[k];
    out.days[day_ids[k]] = std::move(d);
  }
  out.bound += ms.bound;
}

}  // namespace

DispatchSolution solve_uc(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                          const EconomicParams& econ, const StorageAllocation& alloc, const UcSpec& spec,
                          const MilpOptions& options) {
  check_days(system, days);
  DispatchSolution out;
  out.status = MilpStatus::Optimal;
  out.alloc = alloc;
  out.days.resize(days.size());
  for (const auto& d : days) out.probability.push_back(d.probability);
  if (spec.enc == EncMode::Aggregate) {
    std::vector<int> ids(days.size());
    for (std::size_t a = 0; a < days.size(); ++a) ids[a] = static_cast<int>(a);
    solve_block(system, days, econ, alloc, spec, options, out, ids);
  } else {
    double bound = 0.0;
    for (std::size_t a = 0; a < days.size(); ++a) {
      auto one = days[a];
      one.probability = 1.0;
      UcSpec s = spec;
      if (spec.enc == EncMode::Daily) s.baselines = {spec.baselines.at(a)};
      out.bound = 0.0;
      solve_block(system, {one}, econ, alloc, s, options, out, {static_cast<int>(a)});
      bound += days[a].probability * out.bound;
    }
    out.bound = bound;
  }
  out.objective = 0.0;
  for (std::size_t a = 0; a < days.size(); ++a) out.objective += days[a].probability * out.days[a].cost();
  out.gap = std::max(0.0, relative_gap(out.objective, out.bound));
  return out;
}

std::vector<double> compute_baseline(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                                     const EconomicParams& econ, const StorageSpec& storage,
                                     const MilpOptions& options) {
  UcSpec spec;
  spec.storage = storage;
  return solve_uc(system, days, econ, StorageAllocation::none(system), spec, options).emissions_by_day();
}

bool DispatchAudit::ok(double tol) const {
  return max_violation <= tol && max_energy_residual <= tol && max_soc_residual <= tol && max_enc_excess <= tol &&
         max_emissions_residual <= tol;
}

DispatchAudit audit_dispatch(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                             const EconomicParams& econ, const UcSpec& spec, const DispatchSolution& sol) {
  DispatchAudit au;
  const auto& st = spec.storage;
  const double eta = st.efficiency;
  const int ref = system.reference_bus();
  auto viol = [&](double amount, const std::string& what) {
    if (amount > au.max_violation) au.max_violation = amount;
    if (amount > 1e-6 && au.messages.size() < 50) au.messages.push_back(what + " violated by " + detail::exact(amount));
  };
  auto outside = [](double v, double lo, double hi) { return std::max({0.0, lo - v, v - hi}); };
  double weighted_e = 0.0, weighted_base = 0.0;
  for (std::size_t a = 0; a < days.size(); ++a) {
    const auto& p = days[a].profile;
    const auto& d = sol.days.at(a);
    const int T = p.hours;
    const std::string day = " day " + std::to_string(a);
    double emissions = 0.0;
    for (std::size_t i = 0; i < system.generators.size(); ++i) {
      const auto& gen = system.generators[i];
      const int up = std::min(gen.min_up, T), down = std::min(gen.min_down, T);
      for (int t = 0; t < T; ++t) {
        const int pt = (t + T - 1) % T;
        for (double b : {d.u[i][t], d.v[i][t], d.z[i][t]})
          viol(std::min(std::abs(b), std::abs(b - 1.0)), "binary " + gen.id + day);
        viol(std::abs(d.v[i][t] - d.z[i][t] - d.u[i][t] + d.u[i][pt]), "commitment logic " + gen.id + day);
        double sv = 0.0, sz = 0.0;
        for (int k = 0; k < up; ++k) sv += d.v[i][(t - k + T) % T];
        for (int k = 0; k < down; ++k) sz += d.z[i][(t - k + T) % T];
        viol(sv - d.u[i][t], "minimum up time " + gen.id + day);
        viol(sz - (1.0 - d.u[i][t]), "minimum down time " + gen.id + day);
        if (d.v[i][t] * d.z[i][t] > 1e-9) ++au.startup_shutdown_overlaps;
        double out = gen.gmin * d.u[i][t];
        emissions += gen.emin * d.u[i][t] + gen.esu * d.v[i][t];
        for (std::size_t s = 0; s < gen.segments.size(); ++s) {
          const double g = d.seg[i][s][t];
          viol(outside(g, 0.0, gen.segments[s].mw * d.u[i][t]), "segment limit " + gen.id + day);
          out += g;
          emissions += gen.segments[s].emissions * g;
        }
        viol(std::abs(out - d.gen[i][t]), "generation sum " + gen.id + day);
      }
    }
    au.max_emissions_residual =
        std::max(au.max_emissions_residual, std::abs(emissions - d.emissions) / std::max(1.0, std::abs(emissions)));
    for (int t = 0; t < T; ++t) {
      double energy = 0.0;
      for (int b = 0; b < system.num_buses(); ++b) {
        const double qmax = sol.alloc.energy(b, st), jmax = sol.alloc.power(b, st);
        viol(outside(d.soc[b][t], 0.0, qmax), "state of charge limit bus " + system.buses[b].id + day);
        viol(outside(d.chg[b][t], 0.0, jmax), "charge limit bus " + system.buses[b].id + day);
        viol(outside(d.dis[b][t], 0.0, jmax), "discharge limit bus " + system.buses[b].id + day);
        viol(outside(d.spill[b][t], 0.0, p.ren[b][t]), "spill limit bus " + system.buses[b].id + day);
        viol(outside(d.shed[b][t], 0.0, p.load[b][t]), "load shed limit bus " + system.buses[b].id + day);
        if (d.chg[b][t] > 1e-6 && d.dis[b][t] > 1e-6) ++au.simultaneous_charge_hours;
        const int pt = (t + T - 1) % T;
        au.max_soc_residual = std::max(
            au.max_soc_residual, std::abs(d.soc[b][t] - d.soc[b][pt] - eta * d.chg[b][t] + d.dis[b][t] / eta));
        double inj = d.dis[b][t] - d.chg[b][t] + p.ren[b][t] - d.spill[b][t] + d.shed[b][t] - p.load[b][t];
        for (std::size_t i = 0; i < system.generators.size(); ++i) {
          if (system.generators[i].bus == b) inj += d.gen[i][t];
        }
        energy += inj;
        for (std::size_t l = 0; l < system.lines.size(); ++l) {
          if (system.lines[l].from == b) inj -= d.flow[l][t];
          if (system.lines[l].to == b) inj += d.flow[l][t];
        }
        viol(std::abs(inj), "power balance bus " + system.buses[b].id + day);
      }
      au.max_energy_residual = std::max(au.max_energy_residual, std::abs(energy));
      for (std::size_t l = 0; l < system.lines.size(); ++l) {
        const auto& line = system.lines[l];
        viol(outside(d.flow[l][t], -line.capacity, line.capacity), "line limit " + line.id + day);
        const double tf = line.from == ref ? 0.0 : d.theta[line.from][t];
        const double tt = line.to == ref ? 0.0 : d.theta[line.to][t];
        viol(std::abs(d.flow[l][t] - line.admittance * (tf - tt)), "flow definition " + line.id + day);
      }
    }
    if (spec.enc == EncMode::Daily)
      au.max_enc_excess = std::max(au.max_enc_excess, emissions - econ.chi * spec.baselines.at(a));
    weighted_e += days[a].probability * emissions;
    if (spec.enc == EncMode::Aggregate) weighted_base += days[a].probability * spec.baselines.at(a);
  }
  if (spec.enc == EncMode::Aggregate) au.max_enc_excess = std::max(0.0, weighted_e - econ.chi * weighted_base);
  au.max_enc_excess = std::max(0.0, au.max_enc_excess);
  if (au.simultaneous_charge_hours > 0)
    au.messages.push_back(std::to_string(au.simultaneous_charge_hours) + " hour(s) charge and discharge together");
  return au;
}

void write_solution_json(const DispatchSolution& sol, const PowerSystem& system, const std::string& case_id,
                         const std::filesystem::path& path, const std::string& config_hash, std::uint64_t seed) {
  using json = nlohmann::ordered_json;
  json j;
  j["case_id"] = case_id;
  if (!config_hash.empty()) {
    j["config_hash"] = config_hash;
    j["seed"] = seed;
  }
  j["objective"] = sol.objective;
  j["emissions_by_day"] = sol.emissions_by_day();
  json lmps = json::array();
  json schedules = json::array();
  for (std::size_t a = 0; a < sol.days.size(); ++a) {
    const auto& d = sol.days[a];
    json l = json::object();
    for (int b = 0; b < system.num_buses(); ++b) l[system.buses[b].id] = d.lmp.empty() ? std::vector<double>{} : d.lmp[b];
    lmps.push_back(l);
    json s;
    s["day"] = a;
    s["probability"] = sol.probability[a];
    json gens = json::object();
    for (std::size_t i = 0; i < system.generators.size(); ++i)
      gens[system.generators[i].id] = {{"u", d.u[i]}, {"mw", d.gen[i]}};
    s["generators"] = gens;
    json storage = json::object();
    for (int b = 0; b < system.num_buses(); ++b) {
      if (sol.alloc.units[b] > 0) storage[system.buses[b].id] = {{"soc", d.soc[b]}, {"chg", d.chg[b]}, {"dis", d.dis[b]}};
    }
    s["storage"] = storage;
    json flows = json::object();
    for (std::size_t l2 = 0; l2 < system.lines.size(); ++l2) flows[system.lines[l2].id] = d.flow[l2];
    s["flows"] = flows;
    json shed = json::object(), spill = json::object();
    for (int b = 0; b < system.num_buses(); ++b) {
      shed[system.buses[b].id] = d.shed[b];
      spill[system.buses[b].id] = d.spill[b];
    }
    s["load_shed"] = shed;
    s["spill"] = spill;
    s["emissions"] = d.emissions;
    s["cost"] = d.cost();
    schedules.push_back(s);
  }
  j["lmps"] = lmps;
  j["schedules"] = schedules;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  out << j.dump(1) << "\n";
}

}  // namespace encplan
