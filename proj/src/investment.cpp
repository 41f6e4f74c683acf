#include "encplan/investment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "csv.hpp"

namespace encplan {

const char* to_string(Perspective p) {
  switch (p) {
    case Perspective::VIU: return "viu";
    case Perspective::PhSI: return "phsi";
    case Perspective::PMSI: return "pmsi";
  }
  return "?";
}

Perspective perspective_from_string(const std::string& s) {
  if (s == "viu" || s == "VIU") return Perspective::VIU;
  if (s == "phsi" || s == "PhSI") return Perspective::PhSI;
  if (s == "pmsi" || s == "PMSI") return Perspective::PMSI;
  throw DomainError("unknown perspective '" + s + "' (expected viu, phsi or pmsi)");
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  int failed_at = n;
  std::exception_ptr error;
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

AllocationEval evaluate_allocation(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                                   const EconomicParams& econ, const StorageAllocation& alloc, const UcSpec& spec,
                                   const MilpOptions& options) {
  validate_allocation(system, alloc);
  AllocationEval e;
  e.alloc = alloc;
  e.dispatch = solve_uc(system, days, econ, alloc, spec, options);
  const double year = econ.days_per_year;
  e.battery_cost = alloc.cost(spec.storage);
  e.operating_cost = year * e.dispatch.objective;
  e.social_cost = e.battery_cost + e.operating_cost;
  e.revenue = year * e.dispatch.expected_revenue();
  e.profit = e.revenue - e.battery_cost;
  e.emissions = year * e.dispatch.expected_emissions();
  return e;
}

InvestmentOutcome make_outcome(Perspective p, const AllocationEval& eval, EncMode enc) {
  InvestmentOutcome o;
  o.perspective = p;
  o.alloc = eval.alloc;
  o.battery_cost = eval.battery_cost;
  o.operating_cost = eval.operating_cost;
  o.social_cost = eval.social_cost;
  o.revenue = eval.revenue;
  o.profit = eval.profit;
  o.emissions = eval.emissions;
  o.emissions_by_day = eval.dispatch.emissions_by_day();
  o.enc_active = enc != EncMode::Off;
  o.dispatch = eval.dispatch;
  return o;
}

ViuResult solve_viu(const PowerSystem& system, const std::vector<RepresentativeDay>& days, const EconomicParams& econ,
                    const UcSpec& spec, const InvestSpec& invest, const MilpOptions& options) {
  if (system.candidate_buses().empty()) throw DomainError("no candidate storage buses");
  if (invest.max_units_per_bus < 0) throw DomainError("max units per bus must be nonnegative");
  const auto uc = build_uc(system, days, econ, StorageAllocation::none(system), spec, invest);
  const auto ms = solve_milp(uc.model, options);
  if (ms.status == MilpStatus::Infeasible) throw DomainError("storage investment model is infeasible");
  if (!ms.has_incumbent())
    throw DomainError(std::string("storage investment solve ended ") + to_string(ms.status) + " without a plan");
  ViuResult r;
  r.alloc = StorageAllocation::none(system);
  for (int b = 0; b < system.num_buses(); ++b) {
    if (uc.units[b] >= 0) r.alloc.units[b] = static_cast<int>(std::lround(ms.x[uc.units[b]]));
  }
  r.objective = econ.days_per_year * ms.objective;
  r.bound = econ.days_per_year * ms.bound;
  r.gap = ms.gap;
  r.nodes = ms.nodes;
  r.status = ms.status;
  return r;
}

std::size_t select_phsi(const std::vector<QuantityRecord>& records, double min_return) {
  if (records.empty()) throw std::invalid_argument("no records to select from");
  std::size_t best = records.size();
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    if (r.q != 0 && !(r.net_profit >= min_return)) continue;
    if (best == records.size() || r.social_cost < records[best].social_cost) best = k;
  }
  if (best == records.size()) throw DomainError("no record satisfies the profit floor");
  return best;
}

std::size_t select_pmsi(const std::vector<QuantityRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no records to select from");
  std::size_t best = 0;
  for (std::size_t k = 1; k < records.size(); ++k) {
    if (records[k].net_profit > records[best].net_profit) best = k;
  }
  return best;
}

HeuristicResult run_heuristic(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                              const EconomicParams& econ, const PlanOptions& options) {
  HeuristicResult h;
  h.viu_solve = solve_viu(system, days, econ, options.spec, options.invest, options.milp);
  h.q_viu = h.viu_solve.alloc.total();
  h.q_max = std::max(0, h.q_viu - 1);

  // q = 0 .. q_viu; the last slot is the VIU allocation itself
  const int n = h.q_viu + 1;
  std::vector<AllocationEval> evals(n);
  parallel_for(n, options.workers, [&](int q) {
    StorageAllocation alloc;
    if (q == h.q_viu) {
      alloc = h.viu_solve.alloc;
    } else if (q == 0) {
      alloc = StorageAllocation::none(system);
    } else {
      InvestSpec fixed = options.invest;
      fixed.total_units = q;
      alloc = solve_viu(system, days, econ, options.spec, fixed, options.milp).alloc;
    }
    evals[q] = evaluate_allocation(system, days, econ, alloc, options.spec, options.milp);
  });
  for (int q = 0; q < n; ++q) {
    QuantityRecord r;
    r.q = q;
    r.alloc = evals[q].alloc;
    r.net_profit = q == 0 ? 0.0 : evals[q].profit;
    r.social_cost = evals[q].social_cost;
    r.emissions = evals[q].emissions;
    r.from_viu = q == h.q_viu;
    h.records.push_back(r);
  }

  const auto enc = options.spec.enc;
  h.viu = make_outcome(Perspective::VIU, evals[h.q_viu], enc);
  h.viu.evidence.viu_bound = h.viu.social_cost;
  const auto ip = select_phsi(h.records, econ.min_return);
  const auto im = select_pmsi(h.records);
  h.phsi = make_outcome(Perspective::PhSI, evals[ip], enc);
  h.pmsi = make_outcome(Perspective::PMSI, evals[im], enc);
  h.phsi.profit = h.records[ip].net_profit;
  h.pmsi.profit = h.records[im].net_profit;
  h.phsi.evidence.viu_bound = h.viu_solve.bound;
  h.pmsi.evidence.viu_bound = h.viu_solve.bound;
  return h;
}

PerturbationReport verify_pmsi_local(const InvestmentOutcome& outcome, const PowerSystem& system,
                                     const std::vector<RepresentativeDay>& days, const EconomicParams& econ,
                                     const PlanOptions& options) {
  PerturbationReport rep;
  rep.base_profit = outcome.profit;
  std::vector<PerturbationTrial> trials;
  for (int b : system.candidate_buses()) {
    for (int delta : {+1, -1}) {
      if (outcome.alloc.units[b] + delta < 0) continue;
      PerturbationTrial t;
      t.bus = b;
      t.delta = delta;
      t.alloc = outcome.alloc;
      t.alloc.units[b] += delta;
      trials.push_back(t);
    }
  }
  parallel_for(static_cast<int>(trials.size()), options.workers, [&](int k) {
    auto& t = trials[k];
    t.profit = t.alloc.total() == 0 ? 0.0
                                    : evaluate_allocation(system, days, econ, t.alloc, options.spec, options.milp).profit;
  });
  const double tol = 1e-6 * (1.0 + std::abs(rep.base_profit));
  for (auto& t : trials) {
    t.improves = t.profit > rep.base_profit + tol;
    if (t.improves) {
      rep.verified = false;
      const auto& id = system.buses[t.bus].id;
      if (rep.improving_buses.empty() || rep.improving_buses.back() != id) rep.improving_buses.push_back(id);
    }
  }
  rep.trials = std::move(trials);
  return rep;
}

double assess_phsi_gap(const InvestmentOutcome& phsi, double viu_bound, double pcsle_bound) {
  if (!std::isfinite(viu_bound)) throw std::invalid_argument("a finite VIU bound is required");
  double best = viu_bound;
  if (std::isfinite(pcsle_bound)) best = std::max(best, pcsle_bound);
  const double gap = (phsi.social_cost - best) / viu_bound;
  if (gap < -1e-9) {
    throw std::logic_error("negative PhSI gap " + std::to_string(gap) + ": a bound exceeds a feasible social cost");
  }
  return std::max(0.0, gap);
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_records_csv(const std::vector<QuantityRecord>& records, const PowerSystem& system,
                       const std::filesystem::path& path, const std::string& header_comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "q,social_cost,net_profit,emissions,allocation\n";
  for (const auto& r : records) {
    out << r.q << ',' << detail::exact(r.social_cost) << ',' << detail::exact(r.net_profit) << ','
        << detail::exact(r.emissions) << ',' << csv_quote(r.alloc.to_json(system)) << "\n";
  }
}

void write_outcomes_json(const std::vector<InvestmentOutcome>& outcomes, const PowerSystem& system,
                         const std::filesystem::path& path, const std::string& config_hash, std::uint64_t seed) {
  using json = nlohmann::ordered_json;
  json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  for (const auto& o : outcomes) {
    json e;
    e["perspective"] = to_string(o.perspective);
    e["allocation"] = json::parse(o.alloc.to_json(system));
    e["total_units"] = o.alloc.total();
    e["battery_cost"] = o.battery_cost;
    e["operating_cost"] = o.operating_cost;
    e["social_cost"] = o.social_cost;
    e["revenue"] = o.revenue;
    e["profit"] = o.profit;
    e["emissions"] = o.emissions;
    e["emissions_by_day"] = o.emissions_by_day;
    e["enc_active"] = o.enc_active;
    json ev;
    ev["viu_bound"] = num(o.evidence.viu_bound);
    ev["pcsle_bound"] = num(o.evidence.pcsle_bound);
    if (o.evidence.perturbation_checked) ev["perturbation_verified"] = o.evidence.perturbation_verified;
    else ev["perturbation_verified"] = nullptr;
    e["evidence"] = ev;
    j[to_string(o.perspective)] = e;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  out << j.dump(1) << "\n";
}

}  // namespace encplan
