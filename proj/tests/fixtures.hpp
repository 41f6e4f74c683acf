#pragma once

// Small hand-built systems shared by the tests.

#include <filesystem>
#include <fstream>
#include <string>

#include "encplan/scenario.hpp"
#include "encplan/system.hpp"

namespace fixtures {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "encplan_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline encplan::DailyProfile flat_day(int buses, int hours, double load_per_bus, double ren_per_bus = 0.0) {
  encplan::DailyProfile d;
  d.hours = hours;
  d.load.assign(buses, std::vector<double>(hours, load_per_bus));
  d.ren.assign(buses, std::vector<double>(hours, ren_per_bus));
  return d;
}

/// One bus, one flexible generator: 100 MW at $20/MWh emitting `h` t/MWh.
inline encplan::PowerSystem one_bus(double h = 0.5) {
  encplan::PowerSystem s;
  s.buses = {{"1", true}};
  encplan::Generator g;
  g.id = "G";
  g.bus = 0;
  g.gmax = 100;
  g.segments = {{100, 20.0, h}};
  s.generators = {g};
  s.load = {std::vector<double>(24, 50.0)};
  s.ren = {std::vector<double>(24, 0.0)};
  return s;
}

/// Two buses joined by a 40 MW line: a $20 unit at bus 1 and a $50 unit at
/// bus 2, which carries the load.
inline encplan::PowerSystem two_bus_congested() {
  encplan::PowerSystem s;
  s.buses = {{"1", true}, {"2", true}};
  encplan::Line l;
  l.id = "L";
  l.from = 0;
  l.to = 1;
  l.reactance = 0.1;
  l.admittance = 10.0;
  l.capacity = 40.0;
  s.lines = {l};
  encplan::Generator a;
  a.id = "cheap";
  a.bus = 0;
  a.gmax = 200;
  a.segments = {{200, 20.0, 1.0}};
  encplan::Generator b;
  b.id = "pocket";
  b.bus = 1;
  b.gmax = 200;
  b.segments = {{200, 50.0, 0.5}};
  s.generators = {a, b};
  s.load = {std::vector<double>(24, 0.0), std::vector<double>(24, 100.0)};
  s.ren = {std::vector<double>(24, 0.0), std::vector<double>(24, 0.0)};
  return s;
}

/// One candidate bus with a 60 MW $20 unit and a 100 MW $50 unit. Load is
/// 40 MW for the first 12 hours and 80 MW after, so prices are 20 then 50.
inline encplan::PowerSystem arbitrage_bus() {
  encplan::PowerSystem s;
  s.buses = {{"1", true}};
  encplan::Generator base;
  base.id = "base";
  base.gmax = 60;
  base.segments = {{60, 20.0, 1.0}};
  encplan::Generator peak;
  peak.id = "peak";
  peak.gmax = 100;
  peak.segments = {{100, 50.0, 0.5}};
  s.generators = {base, peak};
  s.load = {std::vector<double>(24, 40.0)};
  for (int t = 12; t < 24; ++t) s.load[0][t] = 80.0;
  s.ren = {std::vector<double>(24, 0.0)};
  return s;
}

inline std::filesystem::path desk_dir() { return std::filesystem::path(ENCPLAN_DATA_DIR) / "desk5"; }

}  // namespace fixtures
