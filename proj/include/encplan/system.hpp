#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "encplan/errors.hpp"

namespace encplan {

struct Bus {
  std::string id;
  bool candidate_storage = false;
};

struct Line {
  std::string id;
  int from = 0;  // bus indices
  int to = 0;
  double reactance = 0.0;   // ohm
  double admittance = 0.0;  // 1/ohm, 1/reactance
  double capacity = 0.0;    // MW
};

struct Segment {
  double mw = 0.0;
  double cost = 0.0;       // $/MWh
  double emissions = 0.0;  // t/MWh
};

struct Generator {
  std::string id;
  int bus = 0;
  double gmin = 0.0, gmax = 0.0;
  double cmin = 0.0;  // $/h while committed
  double csu = 0.0;   // $ per start
  double emin = 0.0;  // t/h while committed
  double esu = 0.0;   // t per start
  int min_up = 1, min_down = 1;
  std::vector<Segment> segments;

  /// No commitment cost, emissions, minimum output or timing limits: keeping
  /// the unit committed is never worse, so the commitment can be fixed on.
  bool flexible() const {
    return gmin == 0.0 && cmin == 0.0 && csu == 0.0 && emin == 0.0 && esu == 0.0 && min_up <= 1 && min_down <= 1;
  }
};

struct StorageSpec {
  double duration = 4.0;      // h
  double efficiency = 0.9;    // applied on charge and on discharge
  double unit_power = 25.0;   // MW per unit
  double cost_energy = 0.0;   // $/MWh-yr
  double cost_power = 25000;  // $/MW-yr
  double unit_energy() const { return duration * unit_power; }
  /// Annualized cost of one unit.
  double unit_cost() const { return cost_energy * unit_energy() + cost_power * unit_power; }
};

/// One day of hourly data; outer index is the bus.
struct DailyProfile {
  int hours = 0;
  std::vector<std::vector<double>> load;
  std::vector<std::vector<double>> ren;

  double total_load() const;
  double net_load(int t) const;
};

struct EconomicParams {
  double carbon_price = 0.0;          // $/t
  double load_shed_penalty = 10000;   // $/MWh
  double ren_shed_penalty = 0.0;      // $/MWh
  double chi = 1.0;
  double days_per_year = 365.0;       // converts expected daily cost to annual
  double min_return = 0.0;            // $/yr floor on storage profit
};

struct PowerSystem {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  /// Full hourly series per bus (length = 24 * days). Missing files are zero.
  std::vector<std::vector<double>> load;
  std::vector<std::vector<double>> ren;

  int num_buses() const { return static_cast<int>(buses.size()); }
  int num_hours() const { return load.empty() ? 0 : static_cast<int>(load[0].size()); }
  int num_days() const { return num_hours() / 24; }
  /// -1 when absent.
  int bus_index(const std::string& id) const;
  /// Lowest id (numeric order when every id is an integer).
  int reference_bus() const;
  std::vector<int> candidate_buses() const;
  DailyProfile day(int d) const;
  std::vector<DailyProfile> days() const;
};

PowerSystem load_system(const std::filesystem::path& dir);
void save_system(const PowerSystem& system, const std::filesystem::path& dir);

/// Throws DomainError naming the violated invariant.
void validate(const PowerSystem& system);

/// Annual renewable energy divided by annual demand energy.
double renewable_penetration(const PowerSystem& system);

/// Scales every renewable series by one factor so that the annual penetration
/// equals `target`.
PowerSystem scale_renewables(const PowerSystem& system, double target);

}  // namespace encplan
