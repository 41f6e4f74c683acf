#include "encplan/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include "encplan/duality.hpp"
#include "encplan/mps.hpp"

namespace encplan {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string stamp(const RunConfig& c) { return "config_hash=" + c.hash() + " seed=" + std::to_string(c.seed); }

void prepare_out(const RunConfig& c, CommandResult& r) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw DomainError("cannot create output directory " + c.out.string() + ": " + ec.message());
  std::ofstream f(c.out / "config.txt", std::ios::binary);
  if (!f) throw DomainError("cannot write " + (c.out / "config.txt").string());
  f << "# " << stamp(c) << "\n" << c.to_text();
  r.files.push_back("config.txt");
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DomainError("cannot write " + p.string());
  out << j.dump(1) << "\n";
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const InvestmentOutcome& pick(const HeuristicResult& h, Perspective p) {
  switch (p) {
    case Perspective::VIU: return h.viu;
    case Perspective::PhSI: return h.phsi;
    case Perspective::PMSI: break;
  }
  return h.pmsi;
}

std::string lower_name(Perspective p) {
  std::string s = to_string(p);
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

struct DayChecks {
  double primal = 0.0, dual = 0.0;  // expected daily values
  double sd = 0.0, profit = 0.0, printed = 0.0;
  bool solved = true;
  std::vector<DualSolution> duals;
};

DayChecks duality_checks(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                         const EconomicParams& econ, const UcSpec& spec, const InvestmentOutcome& o) {
  DayChecks r;
  for (std::size_t a = 0; a < days.size(); ++a) {
    std::optional<double> cap;
    if (spec.enc == EncMode::Daily) cap = spec.baselines[a];
    const auto chk = check_tced_duality(system, days[a].profile, econ, o.alloc, spec.storage,
                                        Commitment::from_dispatch(o.dispatch.days[a]), cap);
    if (chk.primal_status != LpStatus::Optimal || chk.dual_status != LpStatus::Optimal) {
      r.solved = false;
      r.sd = r.profit = r.printed = kInf;
      return r;
    }
    r.primal += days[a].probability * chk.primal;
    r.dual += days[a].probability * chk.dual;
    r.sd = std::max(r.sd, chk.sd_residual);
    r.profit = std::max(r.profit, chk.profit_residual);
    r.printed = std::max(r.printed, chk.printed_residual);
    r.duals.push_back(chk.values);
  }
  return r;
}

CommandResult plan_mps_only(const RunConfig& config, const PowerSystem& system,
                            const std::vector<RepresentativeDay>& days, CommandResult r) {
  const auto econ = config.economics();
  const auto po = config.plan_options();
  fs::create_directories(config.out / "mps");
  std::ostringstream manifest;
  manifest << "# " << stamp(config) << "\n";
  auto emit = [&](const MilpModel& m, const std::string& name, const std::string& what) {
    const std::string rel = "mps/" + name + ".mps";
    const auto info = export_mps(m, (config.out / rel).string(), stamp(config));
    r.files.push_back(rel);
    manifest << rel << "," << what << "\n";
    if (info.mangled) {
      r.files.push_back(rel + ".names");
      manifest << rel << ".names,name map for " << rel << "\n";
    }
  };
  UcSpec base = po.spec;
  base.enc = EncMode::Off;
  base.baselines.clear();
  emit(build_uc(system, days, econ, StorageAllocation::none(system), base).model, "baseline",
       "no-storage UC; its per-day E[aN] values are the ENC baselines");
  UcSpec spec = po.spec;
  if (spec.enc != EncMode::Off) {
    if (config.baselines.size() != days.size()) {
      manifest << "# viu skipped: the ENC needs baselines=<one value per representative day>, read from the "
                  "baseline solution\n";
    } else {
      spec.baselines = config.baselines;
    }
  }
  if (spec.enc == EncMode::Off || !spec.baselines.empty())
    emit(build_uc(system, days, econ, StorageAllocation::none(system), spec, po.invest).model, "viu",
         "storage sizing and UC in one MILP");
  std::ofstream(config.out / "mps" / "manifest.txt", std::ios::binary) << manifest.str();
  r.files.push_back("mps/manifest.txt");
  r.summary = std::to_string(r.files.size() - 2) + " MPS files written, nothing solved";
  return r;
}

}  // namespace

PowerSystem load_configured_system(const RunConfig& config) {
  auto s = load_system(config.system);
  validate(s);
  if (config.penetration > 0) s = scale_renewables(s, config.penetration);
  return s;
}

std::vector<RepresentativeDay> configured_days(const RunConfig& config, const PowerSystem& system) {
  return reduce_days(system.days(), config.k, config.variance, config.seed).days;
}

CommandResult cmd_reduce(const RunConfig& config) {
  config.validate();
  CommandResult r;
  const auto system = load_configured_system(config);
  const auto red = reduce_days(system.days(), config.k, config.variance, config.seed);
  prepare_out(config, r);
  write_repdays_csv(red.days, config.out / "repdays.csv", stamp(config));
  r.files.push_back("repdays.csv");
  r.summary = std::to_string(red.days.size()) + " representative days from " + std::to_string(system.num_days()) +
              " days, " + std::to_string(red.components) + " principal components";
  return r;
}

CommandResult cmd_plan(const RunConfig& config) {
  config.validate();
  if (config.perspectives.empty()) throw UsageError("no perspective requested");
  CommandResult r;
  const auto system = load_configured_system(config);
  const auto days = configured_days(config, system);
  prepare_out(config, r);
  write_repdays_csv(days, config.out / "repdays.csv", stamp(config));
  r.files.push_back("repdays.csv");
  if (config.solver == SolverMode::MpsOnly) return plan_mps_only(config, system, days, r);

  const auto econ = config.economics();
  auto po = config.plan_options();
  if (po.spec.enc != EncMode::Off)
    po.spec.baselines = compute_baseline(system, days, econ, po.spec.storage, po.milp);
  const auto h = run_heuristic(system, days, econ, po);
  write_records_csv(h.records, system, config.out / "records.csv", stamp(config));
  r.files.push_back("records.csv");

  std::vector<InvestmentOutcome> outcomes;
  for (auto p : config.perspectives) {
    auto o = pick(h, p);
    if (p == Perspective::PMSI) {
      const auto rep = verify_pmsi_local(o, system, days, econ, po);
      o.evidence.perturbation_checked = true;
      o.evidence.perturbation_verified = rep.verified;
    }
    if (p == Perspective::PhSI && config.pcsle_time_limit > 0) {
      const auto M = compute_bigM(system, econ, po.spec.enc != EncMode::Off, po.spec.storage);
      const auto pm = build_pcsle(system, days, econ, po.spec, po.invest.max_units_per_bus, M);
      MilpOptions mo = po.milp;
      mo.time_limit = config.pcsle_time_limit;
      const auto res = solve_pcsle(pm, system, econ, mo);
      if (std::isfinite(res.bound)) o.evidence.pcsle_bound = res.bound;
    }
    outcomes.push_back(o);
  }
  write_outcomes_json(outcomes, system, config.out / "outcome.json", config.hash(), config.seed);
  r.files.push_back("outcome.json");

  std::ostringstream sum;
  for (const auto& o : outcomes) {
    const auto name = lower_name(o.perspective);
    write_solution_json(o.dispatch, system, name, config.out / ("solution_" + name + ".json"), config.hash(),
                        config.seed);
    r.files.push_back("solution_" + name + ".json");
    if (po.spec.enc != EncMode::Aggregate) {
      const auto dc = duality_checks(system, days, econ, po.spec, o);
      auto M = compute_bigM(system, econ, po.spec.enc != EncMode::Off, po.spec.storage);
      const auto audit = audit_bigM(M, dc.duals);
      write_duality_audit_json(config.out / ("audit_" + name + ".json"), name, dc.primal, dc.dual, M, audit,
                               config.hash(), config.seed);
      r.files.push_back("audit_" + name + ".json");
    }
    sum << to_string(o.perspective) << " " << o.alloc.to_json(system) << " social_cost=" << o.social_cost
        << " profit=" << o.profit << "; ";
  }
  r.summary = sum.str();
  return r;
}

CommandResult cmd_sweep(const RunConfig& config) {
  config.validate();
  const auto grid = config.grid();
  try {
    grid.validate();
  } catch (const DomainError& e) {
    throw UsageError(std::string("sweep grid: ") + e.what());
  }
  if (config.solver == SolverMode::MpsOnly) throw UsageError("the mps-only solver applies to plan");
  CommandResult r;
  const auto system = load_configured_system(config);
  const auto days = configured_days(config, system);
  prepare_out(config, r);
  SweepOptions so;
  so.plan = config.plan_options();
  so.workers = config.workers;
  so.pcsle_time_limit = config.pcsle_time_limit;
  const auto res = run_sweep(system, days, config.economics(), grid, so);
  write_sweep_csv(res, system, so.plan.spec.storage, config.out / "sweep.csv", config.hash(), config.seed);
  r.files.push_back("sweep.csv");
  const auto rep = emissions_report(res, so.plan.spec.storage, config.out / "report", config.hash(), config.seed);
  for (const auto& f : rep.files) r.files.push_back("report/" + f);

  json m;
  m["config_hash"] = config.hash();
  m["seed"] = config.seed;
  m["cells"] = res.cells.size();
  m["failures"] = res.failures;
  json failed = json::array();
  for (const auto& c : res.cells) {
    if (c.ok) continue;
    failed.push_back({{"carbon_price", c.carbon_price},
                      {"storage_price", c.storage_price},
                      {"perspective", to_string(c.perspective)},
                      {"enc", to_string(c.enc)},
                      {"error", c.error}});
  }
  m["failed"] = failed;
  m["enc_violations"] = rep.enc_violations;
  m["enc_max_excess"] = finite_or_null(rep.enc_max_excess);
  write_json(config.out / "manifest.json", m);
  r.files.push_back("manifest.json");
  r.exit_code = res.failures > 0 ? 1 : 0;
  r.summary = std::to_string(res.cells.size()) + " cells, " + std::to_string(res.failures) + " failed";
  return r;
}

CommandResult cmd_verify(const RunConfig& config) {
  config.validate();
  CommandResult r;
  const auto system = load_configured_system(config);
  const auto red = reduce_days(system.days(), config.k, config.variance, config.seed);
  const auto& days = red.days;
  prepare_out(config, r);

  json checks = json::array();
  int failed = 0, findings = 0;
  auto add = [&](const std::string& name, bool invariant, bool ok, double value, double tol) {
    checks.push_back({{"check", name},
                      {"kind", invariant ? "invariant" : "evidence"},
                      {"ok", ok},
                      {"value", finite_or_null(value)},
                      {"tolerance", tol}});
    if (!ok) ++(invariant ? failed : findings);
  };

  double psum = 0.0, wmean = 0.0;
  for (const auto& d : days) {
    psum += d.probability;
    wmean += d.probability * d.profile.total_load();
  }
  add("probabilities sum to one", true, psum == 1.0, psum - 1.0, 0.0);
  const int c = red.components;
  const bool minimal = red.cumulative_variance[c - 1] >= config.variance &&
                       (c == 1 || red.cumulative_variance[c - 2] < config.variance);
  add("principal components minimal for the variance target", true, minimal, c, 0.0);
  double year = 0.0;
  const auto all = system.days();
  for (const auto& d : all) year += d.total_load();
  year /= static_cast<double>(all.size());
  add("weighted daily load vs annual mean (relative)", true, std::abs(wmean - year) <= 0.02 * year,
      std::abs(wmean - year) / year, 0.02);

  const auto econ = config.economics();
  auto po = config.plan_options();
  UcSpec off = po.spec;
  off.enc = EncMode::Off;
  const auto base = solve_uc(system, days, econ, StorageAllocation::none(system), off, po.milp);
  const auto ba = audit_dispatch(system, days, econ, off, base);
  add("baseline dispatch audit", true, ba.ok(), ba.max_violation, 1e-6);

  if (po.spec.enc == EncMode::Off) po.spec.enc = EncMode::Daily;
  po.spec.baselines = base.emissions_by_day();
  const auto h = run_heuristic(system, days, econ, po);
  for (auto p : config.perspectives) {
    const auto& o = pick(h, p);
    const std::string tag = std::string(to_string(p)) + " ENC " + to_string(po.spec.enc);
    const auto au = audit_dispatch(system, days, econ, po.spec, o.dispatch);
    add(tag + ": dispatch audit", true, au.ok(), au.max_violation, 1e-6);
    add(tag + ": emissions above baseline", true, au.max_enc_excess <= 1e-6, au.max_enc_excess, 1e-6);
    if (po.spec.enc != EncMode::Aggregate) {
      const auto dc = duality_checks(system, days, econ, po.spec, o);
      add(tag + ": strong duality (relative)", true, dc.solved && dc.sd <= 1e-7, dc.sd, 1e-7);
      add(tag + ": profit identity (relative)", true, dc.solved && dc.profit <= 1e-6, dc.profit, 1e-6);
      add(tag + ": printed dual rows", true, dc.solved && dc.printed <= 1e-6, dc.printed, 1e-6);
      auto M = compute_bigM(system, econ, true, po.spec.storage);
      const auto audit = audit_bigM(M, dc.duals);
      add(tag + ": big-M escalations", true, audit.ok && audit.escalations == 0, audit.escalations, 0.0);
    }
    if (p == Perspective::PhSI) {
      double gap = kNaN;
      bool ok = true;
      try {
        gap = assess_phsi_gap(o, o.evidence.viu_bound, o.evidence.pcsle_bound);
      } catch (const std::logic_error&) {
        ok = false;
      }
      add(tag + ": gap to VIU bound nonnegative", true, ok, gap, 0.0);
      add(tag + ": profit floor", true, o.profit >= econ.min_return - 1e-6 * (1 + std::abs(o.profit)), o.profit, 0.0);
    }
    if (p == Perspective::PMSI) {
      const auto rep = verify_pmsi_local(o, system, days, econ, po);
      add(tag + ": no single-unit perturbation improves profit", false, rep.verified, rep.base_profit, 0.0);
    }
  }

  json j;
  j["config_hash"] = config.hash();
  j["seed"] = config.seed;
  j["invariant_failures"] = failed;
  j["evidence_findings"] = findings;
  j["checks"] = checks;
  write_json(config.out / "verify.json", j);
  r.files.push_back("verify.json");
  r.exit_code = failed > 0 ? 1 : 0;
  r.summary = std::to_string(checks.size()) + " checks, " + std::to_string(failed) + " invariant failures, " +
              std::to_string(findings) + " evidence findings";
  return r;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Storage siting and sizing under an emissions-neutrality constraint"};
  app.require_subcommand(1);
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
  app.add_option("--config", config_file, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", sets, "key=value override (repeatable)");
  for (const auto& key : RunConfig::keys()) {
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    std::string names = "--" + dashed;
    if (key == "perspectives") names += ",--perspective";
    if (key == "variance") names += ",--variance-target";
    app.add_option_function<std::string>(names, [&flags, key](const std::string& v) { flags[key] = v; },
                                         "config key " + key)
        ->group("Configuration");
  }
  app.fallthrough();
  auto* reduce = app.add_subcommand("reduce", "write representative days");
  auto* plan = app.add_subcommand("plan", "investment outcome for one cell");
  auto* sweep = app.add_subcommand("sweep", "carbon x storage price sweep with report");
  auto* verify = app.add_subcommand("verify", "invariant and audit suite");
  for (auto* s : {reduce, plan, sweep, verify}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg;
    if (!config_file.empty()) read_config_file(cfg, config_file);
    for (const auto& [k, v] : flags) cfg.set(k, v);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
      cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    CommandResult r;
    if (reduce->parsed()) r = cmd_reduce(cfg);
    else if (plan->parsed()) r = cmd_plan(cfg);
    else if (sweep->parsed()) r = cmd_sweep(cfg);
    else r = cmd_verify(cfg);
    std::cout << r.summary << "\n";
    for (const auto& f : r.files) std::cout << "  " << (cfg.out / f).generic_string() << "\n";
    return r.exit_code;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace encplan
