#include "encplan/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "csv.hpp"
#include "hash.hpp"

namespace encplan {

using detail::exact;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto t = trim(v);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(x))
    throw UsageError(key + ": '" + v + "' is not a number");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto t = trim(v);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size()) throw UsageError(key + ": '" + v + "' is not an integer");
  return x;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + exact(v[i]);
  return s;
}

template <class T, class F>
std::string join_names(const std::vector<T>& v, F name) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::string(name(v[i]));
  return s;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct Entry {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define NUM(name)                                                         \
  Entry {                                                                 \
    #name, [](const RunConfig& c) { return exact(c.name); },              \
        [](RunConfig& c, const std::string& v) { c.name = to_double(#name, v); } \
  }
#define INT(name)                                                               \
  Entry {                                                                       \
    #name, [](const RunConfig& c) { return std::to_string(c.name); },           \
        [](RunConfig& c, const std::string& v) { c.name = static_cast<decltype(c.name)>(to_int(#name, v)); } \
  }
#define LIST(name)                                                                      \
  Entry {                                                                               \
    #name, [](const RunConfig& c) { return join(c.name); },                             \
        [](RunConfig& c, const std::string& v) {                                        \
          try {                                                                         \
            c.name = parse_number_list(v);                                              \
          } catch (const UsageError& e) {                                               \
            throw UsageError(std::string(#name) + ": " + e.what());                     \
          }                                                                             \
        }                                                                               \
  }

const std::vector<Entry>& table() {
  static const std::vector<Entry> t = {
      {"system", [](const RunConfig& c) { return c.system.generic_string(); },
       [](RunConfig& c, const std::string& v) { c.system = trim(v); }},
      {"out", [](const RunConfig& c) { return c.out.generic_string(); },
       [](RunConfig& c, const std::string& v) { c.out = trim(v); }},
      NUM(penetration),
      INT(k),
      NUM(variance),
      {"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, const std::string& v) {
         const auto s = to_int("seed", v);
         if (s < 0) throw UsageError("seed: must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      NUM(unit_power),
      NUM(duration),
      NUM(efficiency),
      NUM(storage_price),
      NUM(energy_price),
      INT(max_units),
      NUM(min_return),
      NUM(carbon_price),
      NUM(chi),
      NUM(load_shed_penalty),
      NUM(ren_shed_penalty),
      {"enc", [](const RunConfig& c) { return std::string(to_string(c.enc)); },
       [](RunConfig& c, const std::string& v) {
         try {
           c.enc = enc_mode_from_string(lower(trim(v)));
         } catch (const DomainError& e) {
           throw UsageError(e.what());
         }
       }},
      LIST(baselines),
      {"perspectives", [](const RunConfig& c) { return join_names(c.perspectives, [](Perspective p) { return to_string(p); }); },
       [](RunConfig& c, const std::string& v) {
         c.perspectives.clear();
         const auto t = lower(trim(v));
         if (t == "all") {
           c.perspectives = {Perspective::VIU, Perspective::PhSI, Perspective::PMSI};
           return;
         }
         if (t.empty()) return;
         for (const auto& s : split(t, ',')) {
           try {
             c.perspectives.push_back(perspective_from_string(s));
           } catch (const DomainError& e) {
             throw UsageError(e.what());
           }
         }
       }},
      LIST(carbon_prices),
      LIST(storage_prices),
      {"enc_modes", [](const RunConfig& c) { return join_names(c.enc_modes, [](EncMode m) { return to_string(m); }); },
       [](RunConfig& c, const std::string& v) {
         c.enc_modes.clear();
         const auto t = lower(trim(v));
         if (t.empty()) return;
         for (const auto& s : split(t, ',')) {
           try {
             c.enc_modes.push_back(enc_mode_from_string(s));
           } catch (const DomainError& e) {
             throw UsageError(e.what());
           }
         }
       }},
      NUM(gap),
      NUM(time_limit),
      NUM(pcsle_time_limit),
      {"solver", [](const RunConfig& c) { return std::string(to_string(c.solver)); },
       [](RunConfig& c, const std::string& v) {
         const auto t = lower(trim(v));
         if (t == "builtin") c.solver = SolverMode::Builtin;
         else if (t == "mps-only") c.solver = SolverMode::MpsOnly;
         else throw UsageError("solver: expected builtin or mps-only, got '" + v + "'");
       }},
      INT(workers),
  };
  return t;
}

#undef NUM
#undef INT
#undef LIST

const Entry& find(const std::string& key) {
  for (const auto& e : table())
    if (key == e.key) return e;
  throw UsageError("unknown configuration key '" + key + "'");
}

}  // namespace

const char* to_string(SolverMode m) { return m == SolverMode::Builtin ? "builtin" : "mps-only"; }

std::vector<double> parse_number_list(const std::string& text) {
  const auto t = trim(text);
  if (t.empty()) return {};
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw UsageError("range '" + t + "' must be lo:hi:step");
    const double lo = to_double("range", parts[0]), hi = to_double("range", parts[1]),
                 step = to_double("range", parts[2]);
    if (!(step > 0) || hi < lo) throw UsageError("range '" + t + "' needs step > 0 and hi >= lo");
    return SweepGrid::steps(lo, hi, step);
  }
  std::vector<double> out;
  for (const auto& s : split(t, ',')) out.push_back(to_double("list", s));
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) { find(trim(key)).set(*this, value); }

void RunConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw UsageError(what);
  };
  need(k >= 1, "k must be at least 1");
  need(variance > 0 && variance <= 1, "variance must be in (0, 1]");
  need(penetration >= 0 && penetration < 1, "penetration must be in [0, 1)");
  need(unit_power > 0, "unit_power must be positive");
  need(duration > 0, "duration must be positive");
  need(efficiency > 0 && efficiency <= 1, "efficiency must be in (0, 1]");
  need(storage_price >= 0 && energy_price >= 0, "storage prices must be nonnegative");
  need(chi > 0, "chi must be positive");
  need(gap > 0, "gap must be positive");
  need(time_limit > 0, "time_limit must be positive");
  need(pcsle_time_limit >= 0, "pcsle_time_limit must be nonnegative");
  need(workers >= 1, "workers must be at least 1");
}

std::string RunConfig::get(const std::string& key) const { return find(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> v;
    for (const auto& e : table()) v.emplace_back(e.key);
    return v;
  }();
  return k;
}

bool RunConfig::affects_results(const std::string& key) { return key != "out" && key != "workers"; }

std::string RunConfig::to_text() const {
  std::string s;
  for (const auto& e : table()) s += std::string(e.key) + "=" + e.get(*this) + "\n";
  return s;
}

std::string RunConfig::hash() const {
  std::string s;
  for (const auto& e : table())
    if (affects_results(e.key)) s += std::string(e.key) + "=" + e.get(*this) + "\n";
  return detail::fnv1a_hex(s);
}

EconomicParams RunConfig::economics() const {
  EconomicParams e;
  e.carbon_price = carbon_price;
  e.load_shed_penalty = load_shed_penalty;
  e.ren_shed_penalty = ren_shed_penalty;
  e.chi = chi;
  e.min_return = min_return;
  return e;
}

StorageSpec RunConfig::storage() const {
  StorageSpec s;
  s.duration = duration;
  s.efficiency = efficiency;
  s.unit_power = unit_power;
  s.cost_energy = energy_price;
  s.cost_power = storage_price;
  return s;
}

PlanOptions RunConfig::plan_options() const {
  PlanOptions p;
  p.spec.storage = storage();
  p.spec.enc = enc;
  p.invest.max_units_per_bus = max_units;
  p.milp.gap_target = gap;
  p.milp.time_limit = time_limit;
  p.workers = workers;
  return p;
}

SweepGrid RunConfig::grid() const {
  SweepGrid g;
  g.carbon_prices = carbon_prices;
  g.storage_prices = storage_prices;
  g.perspectives = perspectives;
  g.enc_modes = enc_modes;
  return g;
}

void read_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw UsageError(path.string() + ":" + std::to_string(n) + ": expected key=value");
    try {
      config.set(t.substr(0, eq), t.substr(eq + 1));
    } catch (const UsageError& e) {
      throw UsageError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

}  // namespace encplan
