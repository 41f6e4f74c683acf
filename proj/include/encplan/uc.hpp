#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "encplan/milp.hpp"
#include "encplan/model.hpp"
#include "encplan/scenario.hpp"
#include "encplan/system.hpp"

namespace encplan {

/// Storage units per bus (indexed like PowerSystem::buses).
struct StorageAllocation {
  std::vector<int> units;

  static StorageAllocation none(const PowerSystem& system) { return {std::vector<int>(system.num_buses(), 0)}; }
  int total() const;
  double power(int bus, const StorageSpec& spec) const { return units[bus] * spec.unit_power; }
  double energy(int bus, const StorageSpec& spec) const { return units[bus] * spec.unit_energy(); }
  /// Annualized investment cost.
  double cost(const StorageSpec& spec) const;
  /// {"3":1,"5":2}, buses with zero units omitted.
  std::string to_json(const PowerSystem& system) const;
  bool operator==(const StorageAllocation&) const = default;
};

/// Throws DomainError unless the allocation has one entry per bus, no negative
/// counts and units only on candidate buses.
void validate_allocation(const PowerSystem& system, const StorageAllocation& alloc);

enum class EncMode { Off, Daily, Aggregate };
const char* to_string(EncMode m);
EncMode enc_mode_from_string(const std::string& s);

struct UcSpec {
  StorageSpec storage;
  EncMode enc = EncMode::Off;
  /// E_a^baseline per representative day; required unless enc is Off.
  std::vector<double> baselines;
};

/// Storage becomes a decision: integer unit counts per candidate bus, shared
/// by all days, with their annualized cost in the objective.
struct InvestSpec {
  int max_units_per_bus = 8;
  /// Fixes the total number of units (siting at a given quantity).
  std::optional<int> total_units;
};

/// Dense [d0][d1][d2] table of model indices, -1 where absent.
class IndexTable {
 public:
  IndexTable() = default;
  IndexTable(int n0, int n1, int n2) : n1_(n1), n2_(n2), data_(static_cast<std::size_t>(n0) * n1 * n2, -1) {}
  int& operator()(int a, int b, int c) { return data_[(static_cast<std::size_t>(a) * n1_ + b) * n2_ + c]; }
  int operator()(int a, int b, int c) const { return data_[(static_cast<std::size_t>(a) * n1_ + b) * n2_ + c]; }

 private:
  int n1_ = 0, n2_ = 0;
  std::vector<int> data_;
};

/// A UC model plus the bookkeeping needed to read solutions back.
struct UcModel {
  MilpModel model;
  int days = 0, hours = 0, buses = 0, lines = 0, generators = 0, max_segments = 0;
  std::vector<double> probability;
  bool invest = false;

  IndexTable u, v, z;        // [a][i][t]
  std::vector<IndexTable> g;  // per segment s: [a][i][t]
  IndexTable soc, chg, dis;   // [a][b][t]
  IndexTable spill, shed;     // [a][b][t]
  IndexTable flow;            // [a][l][t]
  IndexTable theta;           // [a][b][t]
  IndexTable balance;         // rows [a][b][t]
  std::vector<int> emissions;      // E_a variable per day
  std::vector<int> emissions_row;  // its defining row
  std::vector<int> enc_rows;       // one per day, or one aggregate row
  std::vector<int> units;          // per bus, invest mode only
  int total_units_row = -1;
};

/// Transmission-constrained UC over the representative days. With `invest`
/// set, storage sizes are variables and `alloc` is ignored.
UcModel build_uc(const PowerSystem& system, const std::vector<RepresentativeDay>& days, const EconomicParams& econ,
                 const StorageAllocation& alloc, const UcSpec& spec, const std::optional<InvestSpec>& invest = {});

/// Sets the carbon-price objective terms; replaces any previous price.
void apply_carbon_price(UcModel& uc, double price);

struct DayDispatch {
  std::vector<std::vector<double>> u, v, z;  // [i][t]
  std::vector<std::vector<std::vector<double>>> seg;  // [i][s][t]
  std::vector<std::vector<double>> gen;      // [i][t], gmin*u + segments
  std::vector<std::vector<double>> flow;     // [l][t]
  std::vector<std::vector<double>> theta;    // [b][t]
  std::vector<std::vector<double>> soc, chg, dis;  // [b][t]
  std::vector<std::vector<double>> spill, shed;    // [b][t]
  std::vector<std::vector<double>> lmp;      // [b][t], $/MWh
  double emissions = 0.0;  // t
  double gen_cost = 0.0;   // commitment + energy, $
  double shed_cost = 0.0;  // load and renewable shedding penalties, $
  double carbon_cost = 0.0;
  double cost() const { return gen_cost + shed_cost + carbon_cost; }
  /// Sum over buses and hours of lmp * (dis - chg), $.
  double storage_revenue() const;
};

struct DispatchSolution {
  MilpStatus status = MilpStatus::Unknown;
  StorageAllocation alloc;
  std::vector<double> probability;
  std::vector<DayDispatch> days;
  /// Expected daily cost sum_a pi_a * cost_a, excluding storage investment.
  double objective = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  long nodes = 0;
  double seconds = 0.0;

  double expected_emissions() const;
  double expected_revenue() const;
  std::vector<double> emissions_by_day() const;
};

/// Reads one day of a solved model back into schedules. LMPs are left empty.
DayDispatch read_day(const UcModel& uc, const PowerSystem& system, const EconomicParams& econ, int day,
                     std::span<const double> x);

/// Fixes every integer variable at its value in `x`, re-solves the LP and
/// returns balance-row duals divided by the day weight, [a][b][t]. Throws
/// DomainError when the fixed LP is not optimal or its duals are not feasible.
std::vector<std::vector<std::vector<double>>> extract_lmps(const UcModel& uc, std::span<const double> x,
                                                           std::vector<double>* fixed_x = nullptr);

/// Solves the UC for a fixed allocation. Days are solved one at a time unless
/// the ENC is aggregate. LMPs are filled in.
DispatchSolution solve_uc(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                          const EconomicParams& econ, const StorageAllocation& alloc, const UcSpec& spec,
                          const MilpOptions& options);

/// Per-day emissions of the no-storage solution with the ENC off.
std::vector<double> compute_baseline(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                                     const EconomicParams& econ, const StorageSpec& storage,
                                     const MilpOptions& options);

/// Independent re-check of a dispatch against the operating constraints.
struct DispatchAudit {
  double max_violation = 0.0;      // bounds, balance, flows, commitment logic
  double max_energy_residual = 0.0;
  double max_soc_residual = 0.0;   // cyclic state-of-charge identity
  double max_enc_excess = 0.0;     // max(E_a - chi*baseline_a), 0 when off
  double max_emissions_residual = 0.0;  // relative, E_a recomputed vs stored
  int startup_shutdown_overlaps = 0;    // hours with v*z != 0
  int simultaneous_charge_hours = 0;    // chg > 0 and dis > 0 in one hour
  std::vector<std::string> messages;
  bool ok(double tol = 1e-6) const;
};

DispatchAudit audit_dispatch(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                             const EconomicParams& econ, const UcSpec& spec, const DispatchSolution& sol);

/// {case_id, objective, emissions_by_day, lmps, schedules}
void write_solution_json(const DispatchSolution& sol, const PowerSystem& system, const std::string& case_id,
                         const std::filesystem::path& path, const std::string& config_hash = "",
                         std::uint64_t seed = 0);

}  // namespace encplan
