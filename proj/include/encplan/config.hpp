#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "encplan/analysis.hpp"

namespace encplan {

/// Malformed command line or configuration. The CLI maps it to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SolverMode { Builtin, MpsOnly };
const char* to_string(SolverMode m);

struct RunConfig {
  std::filesystem::path system = "data/desk5";
  std::filesystem::path out = "out";
  double penetration = 0.0;  // > 0 rescales renewables to this annual energy share
  int k = 5;
  double variance = 0.95;
  std::uint64_t seed = 7;

  double unit_power = 25.0;  // MW per storage unit
  double duration = 4.0;
  double efficiency = 0.9;
  double storage_price = 25000.0;  // $/MW-yr, plan
  double energy_price = 0.0;       // $/MWh-yr
  int max_units = 8;
  double min_return = 0.0;

  double carbon_price = 0.0;  // $/t, plan
  double chi = 1.0;
  double load_shed_penalty = 10000.0;
  double ren_shed_penalty = 0.0;
  EncMode enc = EncMode::Off;  // plan
  std::vector<double> baselines;  // t/day per representative day, mps-only with the ENC on

  std::vector<Perspective> perspectives{Perspective::VIU, Perspective::PhSI, Perspective::PMSI};
  std::vector<double> carbon_prices;
  std::vector<double> storage_prices;
  std::vector<EncMode> enc_modes{EncMode::Off, EncMode::Daily};

  double gap = 1e-3;
  double time_limit = 600.0;
  double pcsle_time_limit = 0.0;
  SolverMode solver = SolverMode::Builtin;
  int workers = 1;

  /// Sets one key from text. UsageError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  /// UsageError on out-of-range values.
  void validate() const;
  /// Every key in a fixed order.
  static const std::vector<std::string>& keys();
  /// Keys that do not change results (output location, thread count).
  static bool affects_results(const std::string& key);

  /// `key=value` lines for every key.
  std::string to_text() const;
  /// Hash of the result-affecting keys, 16 hex digits.
  std::string hash() const;

  EconomicParams economics() const;
  StorageSpec storage() const;
  PlanOptions plan_options() const;
  SweepGrid grid() const;
};

/// Reads `key=value` lines into `config`. Blank lines and lines starting
/// with '#' are skipped.
void read_config_file(RunConfig& config, const std::filesystem::path& path);

/// "lo:hi:step" or a comma list; empty text gives an empty list.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace encplan
