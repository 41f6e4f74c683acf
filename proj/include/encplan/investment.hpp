#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "encplan/uc.hpp"

namespace encplan {

enum class Perspective { VIU, PhSI, PMSI };
const char* to_string(Perspective p);
Perspective perspective_from_string(const std::string& s);

/// A fixed allocation evaluated by re-solving the UC. Annual figures.
struct AllocationEval {
  StorageAllocation alloc;
  DispatchSolution dispatch;
  double battery_cost = 0.0;    // C^batt, $/yr
  double operating_cost = 0.0;  // 365 * expected daily cost, $/yr
  double social_cost = 0.0;     // battery + operating
  double revenue = 0.0;         // 365 * expected sum lmp * (dis - chg)
  double profit = 0.0;          // revenue - battery cost
  double emissions = 0.0;       // 365 * expected daily emissions, t/yr
};

struct Evidence {
  double viu_bound = std::numeric_limits<double>::quiet_NaN();    // $/yr
  double pcsle_bound = std::numeric_limits<double>::quiet_NaN();  // $/yr
  bool perturbation_checked = false;
  bool perturbation_verified = false;
};

struct InvestmentOutcome {
  Perspective perspective = Perspective::VIU;
  StorageAllocation alloc;
  double battery_cost = 0.0;
  double operating_cost = 0.0;
  double social_cost = 0.0;
  double revenue = 0.0;
  double profit = 0.0;
  double emissions = 0.0;
  std::vector<double> emissions_by_day;
  bool enc_active = false;
  Evidence evidence;
  DispatchSolution dispatch;  // the evaluation behind the figures above
};

struct QuantityRecord {
  int q = 0;
  StorageAllocation alloc;
  double net_profit = 0.0;
  double social_cost = 0.0;
  double emissions = 0.0;
  bool from_viu = false;
};

struct PlanOptions {
  UcSpec spec;
  InvestSpec invest;
  MilpOptions milp;
  /// Parallel solves inside the quantity loop; results do not depend on it.
  int workers = 1;
};

AllocationEval evaluate_allocation(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                                   const EconomicParams& econ, const StorageAllocation& alloc, const UcSpec& spec,
                                   const MilpOptions& options);

InvestmentOutcome make_outcome(Perspective p, const AllocationEval& eval, EncMode enc);

struct ViuResult {
  StorageAllocation alloc;
  double objective = 0.0;  // annual, incumbent
  double bound = 0.0;      // annual, valid lower bound
  double gap = 0.0;
  long nodes = 0;
  MilpStatus status = MilpStatus::Unknown;
};

/// Storage sizing and UC in one MILP. With `total_units` set in the invest
/// spec it becomes the siting problem at a fixed quantity.
ViuResult solve_viu(const PowerSystem& system, const std::vector<RepresentativeDay>& days, const EconomicParams& econ,
                    const UcSpec& spec, const InvestSpec& invest, const MilpOptions& options);

struct HeuristicResult {
  int q_viu = 0;
  int q_max = 0;
  ViuResult viu_solve;
  std::vector<QuantityRecord> records;  // sorted by q, q = 0 .. q_viu
  InvestmentOutcome viu, phsi, pmsi;
};

/// Heuristic for the two bi-level investors: solve the VIU, then site every
/// quantity below it, recording profit and social cost of each.
HeuristicResult run_heuristic(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                              const EconomicParams& econ, const PlanOptions& options);

/// Selection rules on a record list. PhSI: least social cost with profit at
/// least `min_return` (q = 0 always qualifies). PMSI: greatest profit. Ties go
/// to the smaller q.
std::size_t select_phsi(const std::vector<QuantityRecord>& records, double min_return);
std::size_t select_pmsi(const std::vector<QuantityRecord>& records);

struct PerturbationTrial {
  int bus = 0;
  int delta = 0;
  StorageAllocation alloc;
  double profit = 0.0;
  bool improves = false;
};

struct PerturbationReport {
  bool verified = true;
  double base_profit = 0.0;
  std::vector<PerturbationTrial> trials;
  std::vector<std::string> improving_buses;
};

/// Tries +1 and -1 unit at each candidate bus and re-evaluates profit.
PerturbationReport verify_pmsi_local(const InvestmentOutcome& outcome, const PowerSystem& system,
                                     const std::vector<RepresentativeDay>& days, const EconomicParams& econ,
                                     const PlanOptions& options);

/// (social cost - best bound) / viu_bound. NaN bounds are ignored. Throws
/// std::logic_error when the gap is negative beyond rounding, which means a
/// bound is not a relaxation.
double assess_phsi_gap(const InvestmentOutcome& phsi, double viu_bound, double pcsle_bound);

void write_records_csv(const std::vector<QuantityRecord>& records, const PowerSystem& system,
                       const std::filesystem::path& path, const std::string& header_comment);

/// One JSON object per perspective, keyed by name.
void write_outcomes_json(const std::vector<InvestmentOutcome>& outcomes, const PowerSystem& system,
                         const std::filesystem::path& path, const std::string& config_hash, std::uint64_t seed);

/// Runs fn(0..n-1) on up to `workers` threads. Exceptions are rethrown after
/// all workers stop (the lowest index wins).
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace encplan
