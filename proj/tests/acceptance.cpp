// Acceptance run: one line per criterion, PASS / FAIL / SKIP.
//
//   acceptance [--workers N] [--known-failures 7,..] [--only 1,2,..]
//
// Exit status is 0 when every criterion passes or is skipped, apart from the
// ones listed in --known-failures, which still print FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "encplan/cli.hpp"
#include "encplan/duality.hpp"
#include "encplan/lp.hpp"
#include "encplan/milp.hpp"
#include "oracles.hpp"

using namespace encplan;
namespace fs = std::filesystem;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict = Verdict::Pass;
  std::string detail;
  std::vector<std::string> info;
};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path desk_dir() { return fs::path(ENCPLAN_DATA_DIR) / "desk5"; }

struct Desk {
  PowerSystem system;
  std::vector<RepresentativeDay> days;
  ReductionResult reduction;
};

const Desk& desk() {
  static const Desk d = [] {
    Desk x;
    x.system = load_system(desk_dir());
    validate(x.system);
    x.reduction = reduce_days(x.system.days(), 5, 0.95, 7);
    x.days = x.reduction.days;
    return x;
  }();
  return d;
}

int g_workers = 1;

struct DeskSweep {
  SweepResult result;
  SweepOptions options;
  double seconds = 0.0;
};

// Carbon 0/50/100 $/t, storage 25/42.5/60 k$/MW-yr, all perspectives, ENC off and daily.
const DeskSweep& desk_sweep() {
  static const DeskSweep s = [] {
    DeskSweep x;
    SweepGrid g;
    g.carbon_prices = SweepGrid::steps(0, 100, 50);
    g.storage_prices = SweepGrid::steps(25000, 60000, 17500);
    x.options.plan.invest.max_units_per_bus = 4;
    x.options.plan.milp.gap_target = 1e-4;
    x.options.workers = g_workers;
    const auto t0 = Clock::now();
    x.result = run_sweep(desk().system, desk().days, EconomicParams{}, g, x.options);
    x.seconds = since(t0);
    return x;
  }();
  return s;
}

std::string cell_name(const SweepCell& c) {
  std::ostringstream s;
  s << "(carbon " << c.carbon_price << ", storage " << c.storage_price << ", " << to_string(c.perspective) << ", enc "
    << to_string(c.enc) << ")";
  return s.str();
}

Outcome fail_if(bool bad, std::string detail) {
  Outcome o;
  o.verdict = bad ? Verdict::Fail : Verdict::Pass;
  o.detail = std::move(detail);
  return o;
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20261016);
  int lp_ok = 0, lp_n = 0, milp_ok = 0, milp_n = 0;
  double worst_lp = 0.0;
  for (int i = 0; i < 60; ++i) {
    const int cols = 5 + static_cast<int>(rng() % 26);
    const int rows = 3 + static_cast<int>(rng() % 20);
    const auto m = oracle::random_lp(rng, rows, cols);
    const auto ref = oracle::tableau_simplex(m);
    const auto s = solve_lp(m);
    ++lp_n;
    if (ref.status != oracle::TableauResult::Status::Optimal || !s.optimal()) continue;
    const double err = std::abs(s.objective - ref.objective) / std::max(1.0, std::abs(ref.objective));
    worst_lp = std::max(worst_lp, err);
    if (err <= 1e-8) ++lp_ok;
  }
  MilpOptions exact;
  exact.gap_target = 1e-12;
  for (int i = 0; i < 60; ++i) {
    const int bins = 4 + static_cast<int>(rng() % 9);
    const auto m = oracle::random_milp(rng, bins, 1 + static_cast<int>(rng() % 5), 2 + static_cast<int>(rng() % 4));
    const auto ref = oracle::enumerate_milp(m);
    const auto s = solve_milp(m, exact);
    ++milp_n;
    if (ref.status != oracle::TableauResult::Status::Optimal || s.status != MilpStatus::Optimal) continue;
    if (std::abs(s.objective - ref.objective) <= 1e-9 * std::max(1.0, std::abs(ref.objective)) && s.gap <= 1e-12)
      ++milp_ok;
  }
  const double sec = since(t0);
  std::ostringstream d;
  d << "LP " << lp_ok << "/" << lp_n << " within 1e-8 (worst " << fmt("%.1e", worst_lp) << "), MILP " << milp_ok
    << "/" << milp_n << " equal to enumeration at gap 0, " << fmt("%.1f", sec) << " s";
  return fail_if(lp_ok != lp_n || milp_ok != milp_n || sec >= 60.0, d.str());
}

// Re-solves every fixed-commitment day of every successful cell.
struct DualityRecheck {
  int instances = 0, sd_bad = 0, profit_bad = 0, unsolved = 0;
  double worst_sd = 0.0, worst_profit = 0.0, seconds = 0.0;
  std::string worst_sd_cell, worst_profit_cell;
};

const DualityRecheck& duality_recheck() {
  static const DualityRecheck r = [] {
    DualityRecheck x;
    const auto& sw = desk_sweep();
    const auto t0 = Clock::now();
    for (const auto& c : sw.result.cells) {
      if (!c.ok || c.enc == EncMode::Aggregate) continue;
      EconomicParams econ;
      econ.carbon_price = c.carbon_price;
      StorageSpec st = sw.options.plan.spec.storage;
      st.cost_power = c.storage_price;
      for (std::size_t a = 0; a < desk().days.size(); ++a) {
        std::optional<double> cap;
        if (c.enc == EncMode::Daily) cap = c.baseline_by_day[a];
        const auto chk = check_tced_duality(desk().system, desk().days[a].profile, econ, c.outcome.alloc, st,
                                            Commitment::from_dispatch(c.outcome.dispatch.days[a]), cap);
        ++x.instances;
        if (chk.primal_status != LpStatus::Optimal || chk.dual_status != LpStatus::Optimal) {
          ++x.unsolved;
          continue;
        }
        if (chk.sd_residual > x.worst_sd) {
          x.worst_sd = chk.sd_residual;
          x.worst_sd_cell = cell_name(c);
        }
        if (chk.profit_residual > x.worst_profit) {
          x.worst_profit = chk.profit_residual;
          x.worst_profit_cell = cell_name(c);
        }
        if (chk.sd_residual > 1e-7) ++x.sd_bad;
        if (chk.profit_residual > 1e-6) ++x.profit_bad;
      }
    }
    x.seconds = since(t0);
    return x;
  }();
  return r;
}

Outcome criterion2() {
  const auto& r = duality_recheck();
  const auto& sw = desk_sweep();
  std::ostringstream d;
  d << r.instances << " fixed-commitment days, worst |primal - dual| / (1 + |primal|) = " << fmt("%.2e", r.worst_sd)
    << " (tolerance 1e-7), " << r.sd_bad << " above, " << r.unsolved << " unsolved; recheck "
    << fmt("%.1f", r.seconds) << " s";
  auto o = fail_if(r.instances == 0 || r.sd_bad > 0 || r.unsolved > 0 || sw.result.failures > 0 || r.seconds >= 300,
                   d.str());
  if (sw.result.failures > 0) o.info.push_back(std::to_string(sw.result.failures) + " sweep cells failed");
  return o;
}

Outcome criterion3() {
  const auto& r = duality_recheck();
  int cells = 0;
  for (const auto& c : desk_sweep().result.cells) cells += c.ok ? 1 : 0;
  std::ostringstream d;
  d << cells << " solved cells, " << r.instances << " days, worst profit identity residual "
    << fmt("%.2e", r.worst_profit) << " (tolerance 1e-6), " << r.profit_bad << " above";
  return fail_if(r.instances == 0 || r.profit_bad > 0 || r.unsolved > 0, d.str());
}

Outcome criterion4() {
  int cells = 0, bad = 0;
  double worst = -kInf;
  for (const auto& c : desk_sweep().result.cells) {
    if (c.enc != EncMode::Daily) continue;
    ++cells;
    if (!c.ok) {
      ++bad;
      continue;
    }
    for (std::size_t a = 0; a < c.baseline_by_day.size(); ++a) {
      const double excess = c.outcome.emissions_by_day[a] - c.baseline_by_day[a];
      worst = std::max(worst, excess);
      if (excess > 1e-6) {
        ++bad;
        break;
      }
    }
  }
  std::ostringstream d;
  d << cells - bad << "/" << cells << " ENC cells within baseline + 1e-6 on every day (largest excess "
    << fmt("%.2e", worst) << " t)";
  return fail_if(cells == 0 || bad > 0, d.str());
}

Outcome criterion5() {
  const auto& dk = desk();
  Outcome o;
  if (dk.system.candidate_buses().size() > 3) return {Verdict::Fail, "desk system has more than 3 candidate buses", {}};
  PlanOptions opt;
  opt.invest.max_units_per_bus = 4;
  opt.milp.gap_target = 1e-7;
  std::ostringstream d;
  int mismatches = 0;
  for (double price : {25000.0, 40000.0}) {
    opt.spec.storage.cost_power = price;
    const auto h = run_heuristic(dk.system, dk.days, EconomicParams{}, opt);
    const int top = std::min(4, h.q_viu + 1);
    const auto orc =
        oracle::enumerate_investment(dk.system, dk.days, EconomicParams{}, opt.spec, top, 4, opt.milp);
    const bool phsi = h.phsi.alloc == orc.phsi.alloc && h.phsi.social_cost == orc.phsi.social_cost;
    const bool pmsi = h.pmsi.alloc == orc.pmsi.alloc && h.pmsi.profit == orc.pmsi.profit;
    mismatches += (phsi ? 0 : 1) + (pmsi ? 0 : 1) + (h.q_max <= 4 ? 0 : 1);
    d << (d.tellp() > 0 ? "; " : "") << "price " << price << ": " << orc.pairs.size() << " pairs, PhSI "
      << h.phsi.alloc.to_json(dk.system) << (phsi ? " =" : " !=") << " enumeration, PMSI "
      << h.pmsi.alloc.to_json(dk.system) << (pmsi ? " =" : " !=") << " enumeration";
    std::ostringstream info;
    info << "price " << price << ": most profitable of all enumerated pairs "
         << orc.most_profitable_pair.alloc.to_json(dk.system) << " profit " << fmt("%.0f", orc.most_profitable_pair.profit)
         << " vs PMSI profit " << fmt("%.0f", h.pmsi.profit);
    o.info.push_back(info.str());
  }
  o.verdict = mismatches == 0 ? Verdict::Pass : Verdict::Fail;
  o.detail = d.str();
  return o;
}

Outcome criterion6() {
  std::vector<double> gaps;
  int negative = 0;
  for (const auto& c : desk_sweep().result.cells) {
    if (c.perspective != Perspective::PhSI || !c.ok) continue;
    gaps.push_back(c.phsi_gap);
    if (!(c.phsi_gap >= 0)) ++negative;
  }
  if (gaps.empty()) return {Verdict::Fail, "no PhSI cell solved", {}};
  auto sorted = gaps;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  std::ostringstream d;
  d << n << " PhSI cells, median gap " << fmt("%.4f", 100 * median) << "% (limit 0.5%), max "
    << fmt("%.4f", 100 * sorted.back()) << "%, " << negative << " negative; bound = VIU MILP bound"
    << (desk_sweep().options.pcsle_time_limit > 0 ? " or PCSLE" : "");
  return fail_if(median > 0.005 || negative > 0, d.str());
}

Outcome criterion7() {
  int cells = 0, verified = 0;
  std::vector<std::string> bad;
  for (const auto& c : desk_sweep().result.cells) {
    if (c.perspective != Perspective::PMSI) continue;
    ++cells;
    if (c.ok && c.outcome.evidence.perturbation_checked && c.outcome.evidence.perturbation_verified) ++verified;
    else bad.push_back(cell_name(c) + " " + (c.ok ? c.outcome.alloc.to_json(desk().system) : c.error));
  }
  std::ostringstream d;
  d << verified << "/" << cells << " PMSI outcomes survive every +/-1 unit perturbation";
  auto o = fail_if(cells == 0 || verified != cells, d.str());
  for (const auto& b : bad) o.info.push_back("improvable: " + b);
  return o;
}

// Cost increase is judged on the per-perspective mean over the carbon-0 cells,
// the same aggregation as the reported report deltas; the worst cell is printed.
Outcome criterion8() {
  const auto& sw = desk_sweep();
  bool increases = false;
  std::string which;
  int enc_cells = 0, enc_within = 0;
  std::map<std::tuple<double, Perspective>, const SweepCell*> off;
  for (const auto& c : sw.result.cells)
    if (c.ok && c.carbon_price == 0 && c.enc == EncMode::Off) off[{c.storage_price, c.perspective}] = &c;
  for (const auto& [k, c] : off) {
    if (c->outcome.alloc.total() > 0 && c->outcome.emissions > c->baseline_emissions && !increases) {
      increases = true;
      which = cell_name(*c) + " +" + fmt("%.3f", c->emissions_change_pct()) + "%";
    }
  }
  std::map<Perspective, std::pair<double, int>> cost;
  double worst_cost = -kInf;
  std::string worst_cell;
  for (const auto& c : sw.result.cells) {
    if (c.carbon_price != 0 || c.enc != EncMode::Daily) continue;
    ++enc_cells;
    if (!c.ok) continue;
    bool within = c.outcome.emissions <= c.baseline_emissions + 1e-6;
    for (std::size_t a = 0; a < c.baseline_by_day.size(); ++a)
      within = within && c.outcome.emissions_by_day[a] <= c.baseline_by_day[a] + 1e-6;
    enc_within += within ? 1 : 0;
    const auto it = off.find({c.storage_price, c.perspective});
    if (it == off.end()) continue;
    const double dc = (c.outcome.social_cost - it->second->outcome.social_cost) / it->second->outcome.social_cost;
    cost[c.perspective].first += dc;
    cost[c.perspective].second += 1;
    if (dc > worst_cost) {
      worst_cost = dc;
      worst_cell = cell_name(c);
    }
  }
  bool cost_ok = !cost.empty();
  std::ostringstream means;
  for (const auto& [p, v] : cost) {
    const double mean = v.first / v.second;
    cost_ok = cost_ok && mean <= 0.01;
    means << (means.tellp() > 0 ? ", " : "") << to_string(p) << " +" << fmt("%.3f", 100 * mean) << "%";
  }
  std::ostringstream d;
  d << "carbon 0, ENC off: storage raises emissions in " << (increases ? which : std::string("no cell"))
    << "; ENC on: " << enc_within << "/" << enc_cells << " cells at or below baseline, mean social cost change "
    << means.str() << " (limit 1%); sweep " << fmt("%.0f", sw.seconds) << " s on " << sw.options.workers
    << " worker(s)";
  auto o = fail_if(!increases || enc_cells == 0 || enc_within != enc_cells || !cost_ok || sw.seconds >= 1800, d.str());
  o.info.push_back("largest single-cell social cost change " + fmt("%.3f", 100 * worst_cost) + "% at " + worst_cell);
  return o;
}

Outcome criterion9() {
  std::vector<std::vector<double>> fixtures = {{0}, {0, 0, 0}, {0, 1}, {0, 1, 2}, {0, 0, 1, -1}, {1, 2, 3, 4, 5},
                                               {-1, 2, -3, 4, -5, 0}, {2, 2, -2, 0, 0, 1}};
  std::mt19937_64 rng(9);
  while (fixtures.size() < 400) {
    const int n = 1 + static_cast<int>(rng() % 10);
    std::vector<double> d(n);
    for (auto& x : d)
      x = fixtures.size() % 4 == 0 ? std::uniform_real_distribution<double>(-3, 3)(rng)
                                   : static_cast<double>(static_cast<int>(rng() % 7) - 3);
    fixtures.push_back(d);
  }
  int ok = 0, with_zero = 0;
  double worst = 0.0;
  for (const auto& f : fixtures) {
    const double want = oracle::signed_rank_bruteforce(f);
    const auto got = wilcoxon_pratt(f);
    const double err = std::abs(got.p_value - want);
    worst = std::max(worst, err);
    if (got.exact && err <= 1e-12) ++ok;
    if (std::count(f.begin(), f.end(), 0.0) > 0) ++with_zero;
  }
  std::ostringstream d;
  d << ok << "/" << fixtures.size() << " fixtures (" << with_zero << " with zero deltas) match sign enumeration, worst |dp| "
    << fmt("%.1e", worst);
  return fail_if(ok != static_cast<int>(fixtures.size()), d.str());
}

Outcome criterion10() {
  const auto& dk = desk();
  const auto& r = dk.reduction;
  const int c = r.components;
  const bool minimal = r.cumulative_variance[c - 1] >= 0.95 && (c == 1 || r.cumulative_variance[c - 2] < 0.95);
  double psum = 0.0, wmean = 0.0;
  for (const auto& d : r.days) {
    psum += d.probability;
    wmean += d.probability * d.profile.total_load();
  }
  double year = 0.0;
  const auto all = dk.system.days();
  for (const auto& d : all) year += d.total_load();
  year /= static_cast<double>(all.size());
  const double rel = std::abs(wmean - year) / year;
  std::ostringstream d;
  d << r.days.size() << " days, " << c << " components (cumulative " << fmt("%.4f", r.cumulative_variance[c - 1])
    << (c > 1 ? ", previous " + fmt("%.4f", r.cumulative_variance[c - 2]) : std::string()) << "), sum of weights - 1 = "
    << fmt("%.1e", psum - 1.0) << ", weighted daily load off the annual mean by " << fmt("%.3f", 100 * rel) << "%";
  return fail_if(r.days.size() != 5 || !minimal || psum != 1.0 || rel > 0.02, d.str());
}

Outcome criterion11() {
  const char* dir = std::getenv("ENCPLAN_RTS_DIR");
  if (!dir || !*dir)
    return {Verdict::Skip, "set ENCPLAN_RTS_DIR to a system directory built from the full dataset to run it", {}};
  RunConfig c;
  c.system = dir;
  c.penetration = 0.30;
  c.out = fs::temp_directory_path() / "encplan_acceptance_full";
  c.workers = g_workers;
  std::error_code ec;
  fs::remove_all(c.out, ec);
  try {
    auto mps = c;
    mps.solver = SolverMode::MpsOnly;
    mps.out = c.out / "mps_export";
    const auto m = cmd_plan(mps);
    const auto v = cmd_verify(c);
    std::ostringstream d;
    d << m.files.size() << " export files, " << v.summary;
    return fail_if(m.exit_code != 0 || v.exit_code != 0, d.str());
  } catch (const std::exception& e) {
    return {Verdict::Fail, std::string("pipeline stopped: ") + e.what(), {}};
  }
}

std::set<int> parse_ids(const std::string& s) {
  std::set<int> ids;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) ids.insert(std::stoi(item));
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known, only;
  g_workers = std::max(1u, std::thread::hardware_concurrency());
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--known-failures" && i + 1 < argc) known = parse_ids(argv[++i]);
    else if (a == "--only" && i + 1 < argc) only = parse_ids(argv[++i]);
    else if (a == "--workers" && i + 1 < argc) g_workers = std::max(1, std::atoi(argv[++i]));
    else {
      std::cerr << "usage: acceptance [--workers N] [--known-failures 7,..] [--only 1,2,..]\n";
      return 2;
    }
  }
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10, criterion11};
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {Verdict::Fail, std::string("threw: ") + e.what(), {}};
    }
    const char* v = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
    std::cout << "criterion " << id << ": " << v << "  " << o.detail << " [" << fmt("%.1f", since(t0)) << " s]";
    if (o.verdict == Verdict::Fail && known.count(id)) std::cout << " (known failure)";
    std::cout << "\n";
    for (const auto& line : o.info) std::cout << "    " << line << "\n";
    std::cout.flush();
    if (o.verdict == Verdict::Fail && !known.count(id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
