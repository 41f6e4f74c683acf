#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "encplan/investment.hpp"

namespace encplan {

struct SweepGrid {
  std::vector<double> carbon_prices;   // $/t
  std::vector<double> storage_prices;  // $/MW-yr
  std::vector<Perspective> perspectives{Perspective::VIU, Perspective::PhSI, Perspective::PMSI};
  std::vector<EncMode> enc_modes{EncMode::Off, EncMode::Daily};

  /// DomainError unless every list is nonempty, sorted ascending and free of
  /// duplicates, and prices are finite and nonnegative.
  void validate() const;
  std::size_t cells() const {
    return carbon_prices.size() * storage_prices.size() * perspectives.size() * enc_modes.size();
  }
  /// lo, lo + step, ... up to hi inclusive (within step / 1e6).
  static std::vector<double> steps(double lo, double hi, double step);
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SweepCell {
  double carbon_price = 0.0;
  double storage_price = 0.0;
  Perspective perspective = Perspective::VIU;
  EncMode enc = EncMode::Off;
  bool ok = false;
  std::string error;
  std::string input_hash;  // everything but the ENC flag
  InvestmentOutcome outcome;

  double baseline_emissions = kNaN;  // t/yr, no storage, ENC off
  double baseline_cost = kNaN;       // $/yr
  std::vector<double> baseline_by_day;

  double phsi_gap = kNaN;             // PhSI cells
  double enc_max_excess = kNaN;       // max_a E_a - chi * baseline_a, ENC cells
  double sd_max_residual = kNaN;      // relative |primal - dual| over days
  double profit_max_residual = kNaN;  // relative |lambda profit - dual profit|
  double printed_max_residual = kNaN;
  int duality_days = 0;

  double storage_mw(const StorageSpec& st) const { return outcome.alloc.total() * st.unit_power; }
  double emissions_change_pct() const;  // vs the no-storage baseline
};

struct SweepOptions {
  PlanOptions plan;  // spec.enc and storage.cost_power are overwritten per cell
  int workers = 1;
  bool duality_checks = true;
  bool verify_pmsi = true;
  /// > 0 adds a PCSLE bound to PhSI cells, solved with this time limit (s).
  double pcsle_time_limit = 0.0;
};

struct SweepResult {
  SweepGrid grid;
  std::vector<SweepCell> cells;  // carbon, then price, then enc, then perspective
  int failures = 0;
};

/// Runs the investment heuristic at every (carbon, storage price, ENC) point;
/// one run yields all requested perspectives. Baselines are solved once per
/// carbon price. A failing run is recorded in its cells and the sweep goes on.
SweepResult run_sweep(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                      const EconomicParams& econ, const SweepGrid& grid, const SweepOptions& options);

void write_sweep_csv(const SweepResult& result, const PowerSystem& system, const StorageSpec& storage,
                     const std::filesystem::path& path,
                     const std::string& config_hash, std::uint64_t seed);

struct PairedSample {
  double carbon_price = 0.0;
  double storage_price = 0.0;
  Perspective perspective = Perspective::VIU;
  double with_enc = 0.0;
  double without_enc = 0.0;
  double delta = 0.0;  // with - without
};

enum class Metric { StorageMw, Emissions, SocialCost };
const char* to_string(Metric m);

/// Pairs ENC-on and ENC-off cells that succeeded. Throws std::logic_error if
/// the two arms were built from different inputs.
std::vector<PairedSample> paired_samples(const SweepResult& result, Perspective p, Metric metric,
                                         const StorageSpec& storage);

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double p_value = 1.0;    // two-sided
  int n = 0;               // samples, zeros included
  int nonzero = 0;
  bool exact = true;
};

/// Signed-rank test with Pratt's treatment of zeros: zeros take part in the
/// ranking and are then dropped. Exact null distribution when at most 25
/// differences are nonzero, normal approximation with tie-corrected variance
/// above.
WilcoxonResult wilcoxon_pratt(const std::vector<double>& deltas);
WilcoxonResult wilcoxon_pratt(const std::vector<PairedSample>& samples);

struct PerspectiveSummary {
  Perspective perspective = Perspective::VIU;
  int pairs = 0;
  double storage_mw_off = kNaN, storage_mw_on = kNaN;
  double emissions_delta_pct = kNaN;  // mean over pairs of (on - off) / off
  double cost_delta_pct = kNaN;
  double p_storage = kNaN, p_emissions = kNaN, p_cost = kNaN;
  bool too_few = false;  // fewer than two pairs: no statistics
};

struct ReportSummary {
  std::vector<PerspectiveSummary> perspectives;
  double enc_max_excess = kNaN;  // over every ENC cell
  int enc_cells = 0;
  int enc_violations = 0;  // cells above baseline + 1e-6
  std::vector<std::string> files;
};

/// Writes report/*.csv and report/*.svg from the stored outcomes.
ReportSummary emissions_report(const SweepResult& result, const StorageSpec& storage,
                               const std::filesystem::path& dir, const std::string& config_hash, std::uint64_t seed);

}  // namespace encplan
