#include "encplan/system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "csv.hpp"

namespace encplan {

namespace fs = std::filesystem;
using detail::CsvTable;
using detail::exact;

double DailyProfile::total_load() const {
  double s = 0.0;
  for (const auto& b : load) s = std::accumulate(b.begin(), b.end(), s);
  return s;
}

double DailyProfile::net_load(int t) const {
  double s = 0.0;
  for (std::size_t b = 0; b < load.size(); ++b) s += load[b][t] - ren[b][t];
  return s;
}

int PowerSystem::bus_index(const std::string& id) const {
  for (int b = 0; b < num_buses(); ++b) {
    if (buses[b].id == id) return b;
  }
  return -1;
}

namespace {

bool parse_long(const std::string& s, long& out) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stol(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size();
}

}  // namespace

int PowerSystem::reference_bus() const {
  if (buses.empty()) return -1;
  bool numeric = true;
  std::vector<long> ids(buses.size());
  for (std::size_t b = 0; b < buses.size(); ++b) numeric = numeric && parse_long(buses[b].id, ids[b]);
  int best = 0;
  for (int b = 1; b < num_buses(); ++b) {
    const bool less = numeric ? ids[b] < ids[best] : buses[b].id < buses[best].id;
    if (less) best = b;
  }
  return best;
}

std::vector<int> PowerSystem::candidate_buses() const {
  std::vector<int> out;
  for (int b = 0; b < num_buses(); ++b) {
    if (buses[b].candidate_storage) out.push_back(b);
  }
  return out;
}

DailyProfile PowerSystem::day(int d) const {
  if (d < 0 || d >= num_days()) throw std::out_of_range("day index");
  DailyProfile p;
  p.hours = 24;
  p.load.resize(buses.size());
  p.ren.resize(buses.size());
  for (std::size_t b = 0; b < buses.size(); ++b) {
    p.load[b].assign(load[b].begin() + 24 * d, load[b].begin() + 24 * (d + 1));
    p.ren[b].assign(ren[b].begin() + 24 * d, ren[b].begin() + 24 * (d + 1));
  }
  return p;
}

std::vector<DailyProfile> PowerSystem::days() const {
  std::vector<DailyProfile> out;
  for (int d = 0; d < num_days(); ++d) out.push_back(day(d));
  return out;
}

namespace {

// Reads day,hour,mw rows into a series; `hours` < 0 means "take the length
// from this file".
std::vector<double> read_series(const fs::path& path, int& hours) {
  const auto t = CsvTable::read(path);
  std::vector<std::pair<long, double>> entries;
  entries.reserve(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    const int day = t.integer(r, "day");
    const int hour = t.integer(r, "hour");
    const double mw = t.number(r, "mw");
    if (day < 1) t.fail(r, "day must be >= 1");
    if (hour < 1 || hour > 24) t.fail(r, "hour must be in 1..24");
    if (mw < 0.0) t.fail(r, "negative mw");
    entries.push_back({static_cast<long>(day - 1) * 24 + (hour - 1), mw});
  }
  if (entries.empty() || entries.size() % 24 != 0)
    throw DomainError(path.string() + ": row count must be a positive multiple of 24");
  const int n = static_cast<int>(entries.size());
  if (hours >= 0 && n != hours)
    throw DomainError(path.string() + ": has " + std::to_string(n) + " hours, expected " + std::to_string(hours));
  hours = n;
  std::vector<double> series(n, 0.0);
  std::vector<char> seen(n, 0);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const long idx = entries[k].first;
    if (idx >= n) t.fail(k, "day/hour outside the series length");
    if (seen[idx]) t.fail(k, "duplicate day/hour");
    seen[idx] = 1;
    series[idx] = entries[k].second;
  }
  return series;
}

}  // namespace

PowerSystem load_system(const fs::path& dir) {
  PowerSystem sys;
  {
    const auto t = CsvTable::read(dir / "buses.csv");
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < t.size(); ++r) {
      Bus b;
      b.id = t.text(r, "id");
      if (b.id.empty()) t.fail(r, "empty bus id");
      if (!seen.insert(b.id).second) t.fail(r, "duplicate bus id " + b.id);
      const int cand = t.integer(r, "candidate_storage");
      if (cand != 0 && cand != 1) t.fail(r, "candidate_storage must be 0 or 1");
      b.candidate_storage = cand == 1;
      sys.buses.push_back(b);
    }
    if (sys.buses.empty()) throw DomainError(t.path() + ": at least one bus is required");
  }
  auto bus_ref = [&](const CsvTable& t, std::size_t r, const std::string& col) {
    const int b = sys.bus_index(t.text(r, col));
    if (b < 0) t.fail(r, "dangling bus reference '" + t.text(r, col) + "'");
    return b;
  };
  {
    const auto t = CsvTable::read(dir / "lines.csv");
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < t.size(); ++r) {
      Line l;
      l.id = t.text(r, "id");
      if (!seen.insert(l.id).second) t.fail(r, "duplicate line id " + l.id);
      l.from = bus_ref(t, r, "from");
      l.to = bus_ref(t, r, "to");
      if (l.from == l.to) t.fail(r, "line connects a bus to itself");
      l.reactance = t.number(r, "reactance_ohm");
      if (!(l.reactance > 0.0)) t.fail(r, "reactance must be positive");
      l.admittance = 1.0 / l.reactance;
      l.capacity = t.number(r, "capacity_mw");
      if (!(l.capacity > 0.0)) t.fail(r, "capacity must be positive");
      sys.lines.push_back(l);
    }
  }
  {
    const auto t = CsvTable::read(dir / "generators.csv");
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < t.size(); ++r) {
      Generator g;
      g.id = t.text(r, "id");
      if (!seen.insert(g.id).second) t.fail(r, "duplicate generator id " + g.id);
      g.bus = bus_ref(t, r, "bus");
      g.gmin = t.number(r, "gmin_mw");
      g.gmax = t.number(r, "gmax_mw");
      g.cmin = t.number(r, "cmin_usd_h");
      g.csu = t.number(r, "csu_usd");
      g.emin = t.number(r, "emin_t_h");
      g.esu = t.number(r, "esu_t");
      g.min_up = t.integer(r, "minup_h");
      g.min_down = t.integer(r, "mindown_h");
      for (int k = 1; k <= 4; ++k) {
        const std::string p = "seg" + std::to_string(k) + "_";
        if (!t.has(p + "mw") || t.text(r, p + "mw").empty()) continue;
        Segment s;
        s.mw = t.number(r, p + "mw");
        s.cost = t.number(r, p + "usd_mwh");
        s.emissions = t.number(r, p + "t_mwh");
        g.segments.push_back(s);
      }
      try {
        PowerSystem probe;
        probe.buses = sys.buses;
        probe.generators = {g};
        probe.load.assign(sys.buses.size(), std::vector<double>(24, 0.0));
        probe.ren = probe.load;
        validate(probe);
      } catch (const DomainError& e) {
        t.fail(r, e.what());
      }
      sys.generators.push_back(g);
    }
  }
  int hours = -1;
  const fs::path ts = dir / "timeseries";
  sys.load.assign(sys.buses.size(), {});
  sys.ren.assign(sys.buses.size(), {});
  for (std::size_t b = 0; b < sys.buses.size(); ++b) {
    const auto lp = ts / ("load_" + sys.buses[b].id + ".csv");
    const auto rp = ts / ("ren_" + sys.buses[b].id + ".csv");
    if (fs::exists(lp)) sys.load[b] = read_series(lp, hours);
    if (fs::exists(rp)) sys.ren[b] = read_series(rp, hours);
  }
  if (hours < 0) throw DomainError(ts.string() + ": no load or renewable series found");
  if (fs::exists(ts)) {
    for (const auto& e : fs::directory_iterator(ts)) {
      const auto name = e.path().filename().string();
      for (const char* prefix : {"load_", "ren_"}) {
        const std::string p = prefix;
        if (name.rfind(p, 0) == 0 && name.size() > p.size() + 4) {
          const auto id = name.substr(p.size(), name.size() - p.size() - 4);
          if (sys.bus_index(id) < 0) throw DomainError(e.path().string() + ": dangling bus reference '" + id + "'");
        }
      }
    }
  }
  for (auto& s : sys.load) {
    if (s.empty()) s.assign(hours, 0.0);
  }
  for (auto& s : sys.ren) {
    if (s.empty()) s.assign(hours, 0.0);
  }
  validate(sys);
  return sys;
}

void validate(const PowerSystem& sys) {
  if (sys.buses.empty()) throw DomainError("at least one bus is required");
  std::unordered_set<std::string> ids;
  for (const auto& b : sys.buses) {
    if (!ids.insert(b.id).second) throw DomainError("duplicate bus id " + b.id);
  }
  const int nb = sys.num_buses();
  for (const auto& l : sys.lines) {
    if (l.from < 0 || l.from >= nb || l.to < 0 || l.to >= nb) throw DomainError("line " + l.id + ": dangling bus reference");
    if (l.from == l.to) throw DomainError("line " + l.id + " connects a bus to itself");
    if (!(l.capacity > 0.0) || !(l.admittance > 0.0)) throw DomainError("line " + l.id + ": capacity and admittance must be positive");
  }
  for (const auto& g : sys.generators) {
    const std::string who = "generator " + g.id + ": ";
    if (g.bus < 0 || g.bus >= nb) throw DomainError(who + "dangling bus reference");
    if (g.gmin < 0 || g.gmax < 0 || g.cmin < 0 || g.csu < 0 || g.emin < 0 || g.esu < 0)
      throw DomainError(who + "capacities, costs and emissions must be nonnegative");
    if (g.min_up < 1 || g.min_down < 1) throw DomainError(who + "minimum up/down times must be >= 1");
    if (g.segments.empty()) throw DomainError(who + "at least one segment is required");
    double sum = g.gmin;
    for (std::size_t s = 0; s < g.segments.size(); ++s) {
      const auto& seg = g.segments[s];
      if (seg.mw < 0 || seg.emissions < 0) throw DomainError(who + "segment capacity and emissions must be nonnegative");
      if (s > 0 && seg.cost < g.segments[s - 1].cost) throw DomainError(who + "segment marginal costs must be nondecreasing");
      sum += seg.mw;
    }
    if (sum != g.gmax)
      throw DomainError(who + "gmin + sum(segment mw) = " + exact(sum) + " differs from gmax = " + exact(g.gmax));
  }
  if (sys.load.size() != sys.buses.size() || sys.ren.size() != sys.buses.size())
    throw DomainError("one load and one renewable series per bus required");
  const std::size_t n = sys.load.empty() ? 0 : sys.load[0].size();
  if (n == 0 || n % 24 != 0) throw DomainError("series length must be a positive multiple of 24");
  for (std::size_t b = 0; b < sys.buses.size(); ++b) {
    if (sys.load[b].size() != n || sys.ren[b].size() != n) throw DomainError("all series must have the same length");
    for (double v : sys.load[b]) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("load at bus " + sys.buses[b].id + " must be finite and >= 0");
    }
    for (double v : sys.ren[b]) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("renewables at bus " + sys.buses[b].id + " must be finite and >= 0");
    }
  }
}

void save_system(const PowerSystem& sys, const fs::path& dir) {
  validate(sys);
  fs::create_directories(dir / "timeseries");
  auto open = [](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DomainError("cannot write " + p.string());
    return out;
  };
  {
    auto out = open(dir / "buses.csv");
    out << "id,candidate_storage\n";
    for (const auto& b : sys.buses) out << b.id << "," << (b.candidate_storage ? 1 : 0) << "\n";
  }
  {
    auto out = open(dir / "lines.csv");
    out << "id,from,to,reactance_ohm,capacity_mw\n";
    for (const auto& l : sys.lines)
      out << l.id << "," << sys.buses[l.from].id << "," << sys.buses[l.to].id << "," << exact(l.reactance) << ","
          << exact(l.capacity) << "\n";
  }
  {
    auto out = open(dir / "generators.csv");
    out << "id,bus,gmin_mw,gmax_mw,cmin_usd_h,csu_usd,emin_t_h,esu_t,minup_h,mindown_h";
    for (int k = 1; k <= 4; ++k) out << ",seg" << k << "_mw,seg" << k << "_usd_mwh,seg" << k << "_t_mwh";
    out << "\n";
    for (const auto& g : sys.generators) {
      if (g.segments.size() > 4) throw DomainError("generator " + g.id + ": at most 4 segments can be written");
      out << g.id << "," << sys.buses[g.bus].id << "," << exact(g.gmin) << "," << exact(g.gmax) << "," << exact(g.cmin)
          << "," << exact(g.csu) << "," << exact(g.emin) << "," << exact(g.esu) << "," << g.min_up << "," << g.min_down;
      for (std::size_t k = 0; k < 4; ++k) {
        if (k < g.segments.size())
          out << "," << exact(g.segments[k].mw) << "," << exact(g.segments[k].cost) << "," << exact(g.segments[k].emissions);
        else
          out << ",,,";
      }
      out << "\n";
    }
  }
  auto series = [&](const std::string& prefix, const std::vector<std::vector<double>>& data) {
    for (std::size_t b = 0; b < sys.buses.size(); ++b) {
      const auto p = dir / "timeseries" / (prefix + sys.buses[b].id + ".csv");
      const bool any = std::any_of(data[b].begin(), data[b].end(), [](double v) { return v != 0.0; });
      if (!any) {
        std::error_code ec;
        fs::remove(p, ec);
        continue;
      }
      auto out = open(p);
      out << "day,hour,mw\n";
      for (std::size_t h = 0; h < data[b].size(); ++h) out << h / 24 + 1 << "," << h % 24 + 1 << "," << exact(data[b][h]) << "\n";
    }
  };
  series("load_", sys.load);
  series("ren_", sys.ren);
}

double renewable_penetration(const PowerSystem& sys) {
  double l = 0.0, r = 0.0;
  for (const auto& s : sys.load) l = std::accumulate(s.begin(), s.end(), l);
  for (const auto& s : sys.ren) r = std::accumulate(s.begin(), s.end(), r);
  if (!(l > 0.0)) throw DomainError("penetration undefined: zero annual demand");
  return r / l;
}

PowerSystem scale_renewables(const PowerSystem& sys, double target) {
  if (!(target > 0.0 && target <= 1.0)) throw DomainError("target penetration must be in (0, 1]");
  const double current = renewable_penetration(sys);
  if (!(current > 0.0)) throw DomainError("cannot scale all-zero renewable profiles");
  PowerSystem out = sys;
  if (current == target) return out;
  const double factor = target / current;
  for (auto& s : out.ren) {
    for (double& v : s) v *= factor;
  }
  return out;
}

}  // namespace encplan
