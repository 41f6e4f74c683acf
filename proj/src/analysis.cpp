#include "encplan/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "csv.hpp"
#include "encplan/duality.hpp"
#include "hash.hpp"

namespace encplan {

namespace {

void check_axis(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw DomainError(std::string("sweep grid has no ") + what);
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v[k]) || v[k] < 0) throw DomainError(std::string(what) + " must be finite and nonnegative");
    if (k > 0 && !(v[k] > v[k - 1])) throw DomainError(std::string(what) + " must be ascending without duplicates");
  }
}

std::string num(double v) { return std::isfinite(v) ? detail::exact(v) : ""; }

std::string fingerprint(const PowerSystem& system, const std::vector<RepresentativeDay>& days) {
  std::ostringstream s;
  for (const auto& b : system.buses) s << b.id << b.candidate_storage << ';';
  for (const auto& l : system.lines) s << l.id << ',' << l.from << ',' << l.to << ',' << num(l.admittance) << ',' << num(l.capacity) << ';';
  for (const auto& g : system.generators) {
    s << g.id << ',' << g.bus << ',' << num(g.gmin) << ',' << num(g.cmin) << ',' << num(g.csu) << ',' << num(g.emin)
      << ',' << num(g.esu) << ',' << g.min_up << ',' << g.min_down;
    for (const auto& sg : g.segments) s << ',' << num(sg.mw) << ',' << num(sg.cost) << ',' << num(sg.emissions);
    s << ';';
  }
  for (const auto& d : days) {
    s << num(d.probability) << ':';
    for (const auto& row : d.profile.load)
      for (double v : row) s << num(v) << ',';
    for (const auto& row : d.profile.ren)
      for (double v : row) s << num(v) << ',';
  }
  return detail::fnv1a_hex(s.str());
}

}  // namespace

void SweepGrid::validate() const {
  check_axis(carbon_prices, "carbon prices");
  check_axis(storage_prices, "storage prices");
  if (perspectives.empty()) throw DomainError("sweep grid has no perspectives");
  if (enc_modes.empty()) throw DomainError("sweep grid has no ENC modes");
  for (std::size_t k = 0; k < perspectives.size(); ++k)
    for (std::size_t j = 0; j < k; ++j)
      if (perspectives[j] == perspectives[k]) throw DomainError("duplicate perspective in sweep grid");
  for (std::size_t k = 0; k < enc_modes.size(); ++k)
    for (std::size_t j = 0; j < k; ++j)
      if (enc_modes[j] == enc_modes[k]) throw DomainError("duplicate ENC mode in sweep grid");
}

std::vector<double> SweepGrid::steps(double lo, double hi, double step) {
  if (!(step > 0) || !(hi >= lo)) throw DomainError("grid range needs step > 0 and hi >= lo");
  std::vector<double> v;
  for (int k = 0;; ++k) {
    const double x = lo + k * step;
    if (x > hi + step * 1e-6) break;
    v.push_back(x);
  }
  return v;
}

double SweepCell::emissions_change_pct() const {
  if (!ok || !(baseline_emissions > 0)) return kNaN;
  return 100.0 * (outcome.emissions - baseline_emissions) / baseline_emissions;
}

SweepResult run_sweep(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                      const EconomicParams& econ, const SweepGrid& grid, const SweepOptions& options) {
  grid.validate();
  const int C = static_cast<int>(grid.carbon_prices.size());
  const int S = static_cast<int>(grid.storage_prices.size());
  const int E = static_cast<int>(grid.enc_modes.size());
  const int P = static_cast<int>(grid.perspectives.size());
  const std::string fp = fingerprint(system, days);

  struct Baseline {
    std::vector<double> by_day;
    double emissions = kNaN, cost = kNaN;
    std::string error;
  };
  std::vector<Baseline> base(C);
  parallel_for(C, options.workers, [&](int c) {
    EconomicParams e = econ;
    e.carbon_price = grid.carbon_prices[c];
    UcSpec spec;
    spec.storage = options.plan.spec.storage;
    try {
      const auto ev = evaluate_allocation(system, days, e, StorageAllocation::none(system), spec, options.plan.milp);
      base[c].by_day = ev.dispatch.emissions_by_day();
      base[c].emissions = ev.emissions;
      base[c].cost = ev.social_cost;
    } catch (const std::exception& ex) {
      base[c].error = std::string("baseline: ") + ex.what();
    }
  });

  SweepResult res;
  res.grid = grid;
  res.cells.resize(static_cast<std::size_t>(C) * S * E * P);
  parallel_for(C * S * E, options.workers, [&](int run) {
    const int c = run / (S * E), s = (run / E) % S, k = run % E;
    const EncMode enc = grid.enc_modes[k];
    EconomicParams ec = econ;
    ec.carbon_price = grid.carbon_prices[c];
    PlanOptions po = options.plan;
    po.workers = 1;
    po.spec.storage.cost_power = grid.storage_prices[s];
    po.spec.enc = enc;
    SweepCell* cells = &res.cells[static_cast<std::size_t>(run) * P];
    for (int p = 0; p < P; ++p) {
      auto& cell = cells[p];
      cell.carbon_price = ec.carbon_price;
      cell.storage_price = po.spec.storage.cost_power;
      cell.perspective = grid.perspectives[p];
      cell.enc = enc;
      cell.baseline_emissions = base[c].emissions;
      cell.baseline_cost = base[c].cost;
      cell.baseline_by_day = base[c].by_day;
      std::ostringstream key;
      key << fp << '|' << num(ec.carbon_price) << '|' << num(cell.storage_price) << '|' << to_string(cell.perspective)
          << '|' << num(ec.chi) << '|' << num(ec.min_return) << '|' << num(ec.load_shed_penalty) << '|'
          << num(ec.ren_shed_penalty) << '|' << num(po.spec.storage.duration) << '|'
          << num(po.spec.storage.efficiency) << '|' << num(po.spec.storage.unit_power) << '|'
          << num(po.spec.storage.cost_energy) << '|' << po.invest.max_units_per_bus;
      cell.input_hash = detail::fnv1a_hex(key.str());
    }
    try {
      if (!base[c].error.empty()) throw DomainError(base[c].error);
      if (enc != EncMode::Off) po.spec.baselines = base[c].by_day;
      const auto h = run_heuristic(system, days, ec, po);
      for (int p = 0; p < P; ++p) {
        auto& cell = cells[p];
        switch (cell.perspective) {
          case Perspective::VIU: cell.outcome = h.viu; break;
          case Perspective::PhSI: cell.outcome = h.phsi; break;
          case Perspective::PMSI: cell.outcome = h.pmsi; break;
        }
        auto& o = cell.outcome;
        if (cell.perspective == Perspective::PMSI && options.verify_pmsi) {
          const auto rep = verify_pmsi_local(o, system, days, ec, po);
          o.evidence.perturbation_checked = true;
          o.evidence.perturbation_verified = rep.verified;
        }
        if (cell.perspective == Perspective::PhSI) {
          if (options.pcsle_time_limit > 0) {
            try {
              const auto M = compute_bigM(system, ec, enc != EncMode::Off, po.spec.storage);
              const auto pm = build_pcsle(system, days, ec, po.spec, po.invest.max_units_per_bus, M);
              MilpOptions mo = po.milp;
              mo.time_limit = options.pcsle_time_limit;
              const auto r = solve_pcsle(pm, system, ec, mo);
              if (std::isfinite(r.bound)) o.evidence.pcsle_bound = r.bound;
            } catch (const DomainError&) {
              // unsupported configuration: the VIU bound stands alone
            }
          }
          cell.phsi_gap = assess_phsi_gap(o, o.evidence.viu_bound, o.evidence.pcsle_bound);
        }
        const auto& d = o.dispatch;
        if (enc == EncMode::Daily) {
          cell.enc_max_excess = -kInf;
          for (std::size_t a = 0; a < d.days.size(); ++a)
            cell.enc_max_excess = std::max(cell.enc_max_excess, d.days[a].emissions - ec.chi * base[c].by_day[a]);
        } else if (enc == EncMode::Aggregate) {
          double cap = 0.0;
          for (std::size_t a = 0; a < days.size(); ++a) cap += days[a].probability * base[c].by_day[a];
          cell.enc_max_excess = d.expected_emissions() - ec.chi * cap;
        }
        if (options.duality_checks && enc != EncMode::Aggregate) {
          cell.sd_max_residual = cell.profit_max_residual = cell.printed_max_residual = 0.0;
          for (std::size_t a = 0; a < days.size(); ++a) {
            std::optional<double> cap;
            if (enc == EncMode::Daily) cap = base[c].by_day[a];
            const auto chk = check_tced_duality(system, days[a].profile, ec, o.alloc, po.spec.storage,
                                                Commitment::from_dispatch(d.days[a]), cap);
            if (chk.primal_status != LpStatus::Optimal || chk.dual_status != LpStatus::Optimal) {
              cell.sd_max_residual = cell.profit_max_residual = cell.printed_max_residual = kInf;
              break;
            }
            cell.sd_max_residual = std::max(cell.sd_max_residual, chk.sd_residual);
            cell.profit_max_residual = std::max(cell.profit_max_residual, chk.profit_residual);
            cell.printed_max_residual = std::max(cell.printed_max_residual, chk.printed_residual);
            ++cell.duality_days;
          }
        }
        cell.ok = true;
      }
    } catch (const std::exception& ex) {
      for (int p = 0; p < P; ++p) {
        cells[p].ok = false;
        cells[p].error = ex.what();
      }
    }
  });
  for (const auto& c : res.cells) res.failures += c.ok ? 0 : 1;
  return res;
}

void write_sweep_csv(const SweepResult& result, const PowerSystem& system, const StorageSpec& storage,
                     const std::filesystem::path& path,
                     const std::string& config_hash, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "# config_hash=" << config_hash << " seed=" << seed << "\n";
  out << "carbon_price,storage_price,perspective,enc,status,error,total_units,storage_mw,allocation,battery_cost,"
         "operating_cost,social_cost,revenue,profit,emissions,baseline_emissions,emissions_change_pct,baseline_cost,"
         "viu_bound,pcsle_bound,phsi_gap,perturbation_verified,enc_max_excess,sd_max_residual,"
         "profit_identity_max_residual,printed_dual_max_residual,input_hash\n";
  for (const auto& c : result.cells) {
    const auto& o = c.outcome;
    std::string err = c.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    std::replace(err.begin(), err.end(), '\n', ' ');
    std::string alloc;
    if (c.ok) {
      alloc = "\"";
      for (char ch : o.alloc.to_json(system)) {
        if (ch == '"') alloc += '"';
        alloc += ch;
      }
      alloc += '"';
    }
    out << num(c.carbon_price) << ',' << num(c.storage_price) << ',' << to_string(c.perspective) << ','
        << to_string(c.enc) << ',' << (c.ok ? "ok" : "failed") << ",\"" << err << "\",";
    if (c.ok) {
      out << o.alloc.total() << ',' << num(c.storage_mw(storage)) << ',' << alloc << ',' << num(o.battery_cost) << ','
          << num(o.operating_cost) << ',' << num(o.social_cost) << ',' << num(o.revenue) << ',' << num(o.profit)
          << ',' << num(o.emissions) << ',';
    } else {
      out << ",,,,,,,,,";
    }
    out << num(c.baseline_emissions) << ',' << num(c.emissions_change_pct()) << ',' << num(c.baseline_cost) << ','
        << num(o.evidence.viu_bound) << ',' << num(o.evidence.pcsle_bound) << ',' << num(c.phsi_gap) << ','
        << (o.evidence.perturbation_checked ? (o.evidence.perturbation_verified ? "1" : "0") : "") << ','
        << num(c.enc_max_excess) << ',' << num(c.sd_max_residual) << ',' << num(c.profit_max_residual) << ','
        << num(c.printed_max_residual) << ',' << c.input_hash << "\n";
  }
}

const char* to_string(Metric m) {
  switch (m) {
    case Metric::StorageMw: return "storage_mw";
    case Metric::Emissions: return "emissions";
    case Metric::SocialCost: return "social_cost";
  }
  return "?";
}

namespace {

double metric_value(const SweepCell& c, Metric m, const StorageSpec& st) {
  switch (m) {
    case Metric::StorageMw: return c.storage_mw(st);
    case Metric::Emissions: return c.outcome.emissions;
    case Metric::SocialCost: return c.outcome.social_cost;
  }
  return kNaN;
}

const SweepCell* find_cell(const SweepResult& r, double carbon, double price, Perspective p, EncMode enc) {
  for (const auto& c : r.cells) {
    if (c.carbon_price == carbon && c.storage_price == price && c.perspective == p && c.enc == enc) return &c;
  }
  return nullptr;
}

// the first ENC mode other than Off in the grid, Daily if none is listed
EncMode enc_arm(const SweepGrid& g) {
  for (auto e : g.enc_modes)
    if (e != EncMode::Off) return e;
  return EncMode::Daily;
}

}  // namespace

std::vector<PairedSample> paired_samples(const SweepResult& result, Perspective p, Metric metric,
                                         const StorageSpec& storage) {
  std::vector<PairedSample> out;
  const EncMode on = enc_arm(result.grid);
  for (double carbon : result.grid.carbon_prices) {
    for (double price : result.grid.storage_prices) {
      const auto* a = find_cell(result, carbon, price, p, on);
      const auto* b = find_cell(result, carbon, price, p, EncMode::Off);
      if (!a || !b || !a->ok || !b->ok) continue;
      if (a->input_hash != b->input_hash)
        throw std::logic_error("ENC arms of one cell were built from different inputs");
      PairedSample s;
      s.carbon_price = carbon;
      s.storage_price = price;
      s.perspective = p;
      s.with_enc = metric_value(*a, metric, storage);
      s.without_enc = metric_value(*b, metric, storage);
      s.delta = s.with_enc - s.without_enc;
      out.push_back(s);
    }
  }
  return out;
}

WilcoxonResult wilcoxon_pratt(const std::vector<double>& deltas) {
  if (deltas.empty()) throw DomainError("the signed-rank test needs at least one difference");
  WilcoxonResult r;
  r.n = static_cast<int>(deltas.size());
  std::vector<std::size_t> order(deltas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(deltas[a]) < std::abs(deltas[b]); });
  // doubled average ranks keep ties integral
  std::vector<long long> rank2(deltas.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::abs(deltas[order[j + 1]]) == std::abs(deltas[order[i]])) ++j;
    const long long r2 = static_cast<long long>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    i = j + 1;
  }
  std::vector<long long> nz;
  long long wplus2 = 0, total2 = 0;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (deltas[k] == 0.0) continue;
    nz.push_back(rank2[k]);
    total2 += rank2[k];
    if (deltas[k] > 0) wplus2 += rank2[k];
  }
  r.nonzero = static_cast<int>(nz.size());
  r.w_plus = wplus2 / 2.0;
  r.statistic = std::min(wplus2, total2 - wplus2) / 2.0;
  if (nz.empty()) {
    r.p_value = 1.0;
    return r;
  }
  if (r.nonzero <= 25) {
    r.exact = true;
    std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
    count[0] = 1.0;
    long long reach = 0;
    for (long long v : nz) {
      for (long long s = reach; s >= 0; --s) {
        if (count[s] != 0.0) count[s + v] += count[s];
      }
      reach += v;
    }
    const double all = std::ldexp(1.0, r.nonzero);
    double le = 0.0, ge = 0.0;
    for (long long s = 0; s <= total2; ++s) {
      if (s <= wplus2) le += count[s];
      if (s >= wplus2) ge += count[s];
    }
    r.p_value = std::min(1.0, 2.0 * std::min(le, ge) / all);
    return r;
  }
  r.exact = false;
  double var = 0.0;
  for (long long v : nz) var += (v / 2.0) * (v / 2.0);
  var /= 4.0;
  const double z = (r.w_plus - total2 / 4.0) / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
  return r;
}

WilcoxonResult wilcoxon_pratt(const std::vector<PairedSample>& samples) {
  std::vector<double> d;
  for (const auto& s : samples) d.push_back(s.delta);
  return wilcoxon_pratt(d);
}

namespace {

std::string fmt(double v, const char* f = "%.6g") {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

struct Panel {
  std::string row;  // enc-off, enc-on, delta
  Perspective perspective;
  std::vector<std::vector<double>> values;  // [carbon][price]
};

// white -> dark for magnitudes, blue -> white -> red for signed deltas
std::string colour(double v, double lo, double hi, bool diverging) {
  if (!std::isfinite(v)) return "#cccccc";
  auto mix = [](int a, int b, double t) { return static_cast<int>(std::lround(a + (b - a) * t)); };
  char buf[8];
  if (diverging) {
    const double m = std::max(std::abs(lo), std::abs(hi));
    const double t = m > 0 ? std::clamp(v / m, -1.0, 1.0) : 0.0;
    if (t >= 0) std::snprintf(buf, sizeof buf, "#%02x%02x%02x", 255, mix(255, 40, t), mix(255, 40, t));
    else std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(255, 40, -t), mix(255, 90, -t), 255);
  } else {
    const double t = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.0;
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(255, 20, t), mix(255, 90, t), mix(255, 60, t));
  }
  return buf;
}

void write_heatmap(const SweepResult& r, const std::vector<Panel>& panels, const std::string& title,
                   const std::filesystem::path& svg, const std::filesystem::path& csv, const std::string& stamp) {
  const auto& g = r.grid;
  const int C = static_cast<int>(g.carbon_prices.size()), S = static_cast<int>(g.storage_prices.size());
  {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw DomainError("cannot write " + csv.string());
    out << "# " << stamp << "\n";
    out << "row,perspective,carbon_price,storage_price,value\n";
    for (const auto& p : panels)
      for (int c = 0; c < C; ++c)
        for (int s = 0; s < S; ++s)
          out << p.row << ',' << to_string(p.perspective) << ',' << num(g.carbon_prices[c]) << ','
              << num(g.storage_prices[s]) << ',' << num(p.values[c][s]) << "\n";
  }
  const int cell = 26, margin = 70, gap = 40, head = 50;
  const int pw = S * cell, ph = C * cell;
  const int P = static_cast<int>(g.perspectives.size());
  const int W = margin + P * (pw + gap), H = head + 3 * (ph + gap + 20) + 20;
  std::ofstream out(svg, std::ios::binary);
  if (!out) throw DomainError("cannot write " + svg.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  out << "<!-- " << stamp << " -->\n";
  out << "<text x=\"10\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
  const char* rows[] = {"enc-off", "enc-on", "delta"};
  for (int row = 0; row < 3; ++row) {
    double lo = kInf, hi = -kInf;
    for (const auto& p : panels) {
      if (p.row != rows[row]) continue;
      for (const auto& line : p.values)
        for (double v : line)
          if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
          }
    }
    const int y0 = head + row * (ph + gap + 20);
    out << "<text x=\"4\" y=\"" << y0 + ph / 2 << "\">" << rows[row] << "</text>\n";
    for (int k = 0; k < P; ++k) {
      const Panel* pan = nullptr;
      for (const auto& p : panels)
        if (p.row == rows[row] && p.perspective == g.perspectives[k]) pan = &p;
      const int x0 = margin + k * (pw + gap);
      out << "<text x=\"" << x0 << "\" y=\"" << y0 - 6 << "\">" << to_string(g.perspectives[k]) << " ("
          << rows[row] << ")</text>\n";
      for (int c = 0; c < C; ++c) {
        for (int s = 0; s < S; ++s) {
          const double v = pan ? pan->values[c][s] : kNaN;
          // carbon increases upward
          const int y = y0 + (C - 1 - c) * cell, x = x0 + s * cell;
          out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
              << "\" fill=\"" << colour(v, lo, hi, row == 2) << "\" stroke=\"#ffffff\"><title>carbon "
              << fmt(g.carbon_prices[c]) << ", storage " << fmt(g.storage_prices[s]) << ": " << fmt(v)
              << "</title></rect>\n";
        }
      }
      for (int s = 0; s < S; ++s)
        out << "<text x=\"" << x0 + s * cell + 2 << "\" y=\"" << y0 + ph + 12 << "\" font-size=\"8\">"
            << fmt(g.storage_prices[s] / 1000.0) << "k</text>\n";
      for (int c = 0; c < C; ++c)
        out << "<text x=\"" << x0 - 22 << "\" y=\"" << y0 + (C - 1 - c) * cell + cell / 2 + 3
            << "\" font-size=\"8\">" << fmt(g.carbon_prices[c]) << "</text>\n";
    }
  }
  out << "<text x=\"" << margin << "\" y=\"" << H - 6
      << "\">x: storage price ($/MW-yr), y: carbon price ($/t)</text>\n</svg>\n";
}

}  // namespace

ReportSummary emissions_report(const SweepResult& result, const StorageSpec& storage,
                               const std::filesystem::path& dir, const std::string& config_hash, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const std::string stamp = "config_hash=" + config_hash + " seed=" + std::to_string(seed);
  const auto& g = result.grid;
  const EncMode on = enc_arm(g);
  ReportSummary rep;

  for (auto p : g.perspectives) {
    PerspectiveSummary s;
    s.perspective = p;
    const auto mw = paired_samples(result, p, Metric::StorageMw, storage);
    const auto em = paired_samples(result, p, Metric::Emissions, storage);
    const auto co = paired_samples(result, p, Metric::SocialCost, storage);
    s.pairs = static_cast<int>(mw.size());
    std::vector<double> off, onv, de, dc;
    for (const auto& x : mw) {
      off.push_back(x.without_enc);
      onv.push_back(x.with_enc);
    }
    for (const auto& x : em)
      if (x.without_enc != 0.0) de.push_back(100.0 * x.delta / x.without_enc);
    for (const auto& x : co)
      if (x.without_enc != 0.0) dc.push_back(100.0 * x.delta / x.without_enc);
    s.storage_mw_off = mean(off);
    s.storage_mw_on = mean(onv);
    s.emissions_delta_pct = mean(de);
    s.cost_delta_pct = mean(dc);
    s.too_few = s.pairs < 2;
    if (!s.too_few) {
      s.p_storage = wilcoxon_pratt(mw).p_value;
      s.p_emissions = wilcoxon_pratt(em).p_value;
      s.p_cost = wilcoxon_pratt(co).p_value;
    }
    rep.perspectives.push_back(s);
  }
  double worst = -kInf;
  for (const auto& c : result.cells) {
    if (!c.ok || c.enc == EncMode::Off) continue;
    ++rep.enc_cells;
    worst = std::max(worst, c.enc_max_excess);
    if (!(c.enc_max_excess <= 1e-6)) ++rep.enc_violations;
  }
  if (rep.enc_cells > 0) rep.enc_max_excess = worst;

  auto file = [&](const std::string& name) {
    rep.files.push_back(name);
    return dir / name;
  };
  {
    std::ofstream out(file("summary.csv"), std::ios::binary);
    out << "# " << stamp << "\n";
    out << "perspective,pairs,storage_mw_enc_off,storage_mw_enc_on,emissions_delta_pct,cost_delta_pct,p_storage,"
           "p_emissions,p_cost,statistics\n";
    for (const auto& s : rep.perspectives) {
      out << to_string(s.perspective) << ',' << s.pairs << ',' << num(s.storage_mw_off) << ',' << num(s.storage_mw_on)
          << ',' << num(s.emissions_delta_pct) << ',' << num(s.cost_delta_pct) << ',' << num(s.p_storage) << ','
          << num(s.p_emissions) << ',' << num(s.p_cost) << ',' << (s.too_few ? "n<2" : "wilcoxon_pratt") << "\n";
    }
  }
  {
    std::ofstream out(file("cells.csv"), std::ios::binary);
    out << "# " << stamp << "\n";
    out << "carbon_price,storage_price,perspective,enc,status,storage_mw,emissions,baseline_emissions,"
           "emissions_change_pct,social_cost,cost_change_pct\n";
    for (const auto& c : result.cells) {
      const double cost_pct =
          c.ok && c.baseline_cost > 0 ? 100.0 * (c.outcome.social_cost - c.baseline_cost) / c.baseline_cost : kNaN;
      out << num(c.carbon_price) << ',' << num(c.storage_price) << ',' << to_string(c.perspective) << ','
          << to_string(c.enc) << ',' << (c.ok ? "ok" : "failed") << ','
          << (c.ok ? num(c.storage_mw(storage)) : "") << ',' << (c.ok ? num(c.outcome.emissions) : "") << ','
          << num(c.baseline_emissions) << ',' << num(c.emissions_change_pct()) << ','
          << (c.ok ? num(c.outcome.social_cost) : "") << ',' << num(cost_pct) << "\n";
    }
  }
  {
    std::ofstream out(file("enc_audit.csv"), std::ios::binary);
    out << "# " << stamp << "\n";
    out << "carbon_price,storage_price,perspective,enc,max_excess_t,within_baseline\n";
    for (const auto& c : result.cells) {
      if (!c.ok || c.enc == EncMode::Off) continue;
      out << num(c.carbon_price) << ',' << num(c.storage_price) << ',' << to_string(c.perspective) << ','
          << to_string(c.enc) << ',' << num(c.enc_max_excess) << ',' << (c.enc_max_excess <= 1e-6 ? 1 : 0) << "\n";
    }
  }

  const int C = static_cast<int>(g.carbon_prices.size()), S = static_cast<int>(g.storage_prices.size());
  struct Spec {
    const char* name;
    const char* title;
    double (*value)(const SweepCell&, const StorageSpec&);
  };
  const Spec specs[] = {
      {"storage_mw", "Installed storage (MW)", [](const SweepCell& c, const StorageSpec& st) { return c.storage_mw(st); }},
      {"emissions_change", "Emissions change vs no storage (%)",
       [](const SweepCell& c, const StorageSpec&) { return c.emissions_change_pct(); }},
      {"social_cost_change", "Social cost change vs no storage (%)",
       [](const SweepCell& c, const StorageSpec&) {
         return c.baseline_cost > 0 ? 100.0 * (c.outcome.social_cost - c.baseline_cost) / c.baseline_cost : kNaN;
       }},
  };
  for (const auto& sp : specs) {
    std::vector<Panel> panels;
    for (auto p : g.perspectives) {
      Panel po{"enc-off", p, std::vector<std::vector<double>>(C, std::vector<double>(S, kNaN))};
      Panel pn{"enc-on", p, po.values};
      Panel pd{"delta", p, po.values};
      for (int c = 0; c < C; ++c) {
        for (int s = 0; s < S; ++s) {
          const auto* a = find_cell(result, g.carbon_prices[c], g.storage_prices[s], p, EncMode::Off);
          const auto* b = find_cell(result, g.carbon_prices[c], g.storage_prices[s], p, on);
          if (a && a->ok) po.values[c][s] = sp.value(*a, storage);
          if (b && b->ok) pn.values[c][s] = sp.value(*b, storage);
          pd.values[c][s] = pn.values[c][s] - po.values[c][s];
        }
      }
      panels.push_back(std::move(po));
      panels.push_back(std::move(pn));
      panels.push_back(std::move(pd));
    }
    const std::string base = std::string("heatmap_") + sp.name;
    rep.files.push_back(base + ".csv");
    rep.files.push_back(base + ".svg");
    write_heatmap(result, panels, sp.title, dir / (base + ".svg"), dir / (base + ".csv"), stamp);
  }
  return rep;
}

}  // namespace encplan
