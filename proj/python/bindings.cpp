#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "encplan/cli.hpp"

namespace py = pybind11;
using namespace encplan;

namespace {

RunConfig make_config(const std::map<std::string, std::string>& settings) {
  RunConfig c;
  for (const auto& [k, v] : settings) c.set(k, v);
  c.validate();
  return c;
}

py::dict outcome_dict(const InvestmentOutcome& o, const PowerSystem& s) {
  py::dict d;
  d["perspective"] = to_string(o.perspective);
  py::dict alloc;
  for (int b = 0; b < s.num_buses(); ++b)
    if (o.alloc.units[b] > 0) alloc[py::str(s.buses[b].id)] = o.alloc.units[b];
  d["allocation"] = alloc;
  d["total_units"] = o.alloc.total();
  d["battery_cost"] = o.battery_cost;
  d["operating_cost"] = o.operating_cost;
  d["social_cost"] = o.social_cost;
  d["revenue"] = o.revenue;
  d["profit"] = o.profit;
  d["emissions"] = o.emissions;
  d["emissions_by_day"] = o.emissions_by_day;
  d["viu_bound"] = o.evidence.viu_bound;
  return d;
}

py::dict result_dict(const CommandResult& r) {
  py::dict d;
  d["exit_code"] = r.exit_code;
  d["files"] = r.files;
  d["summary"] = r.summary;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Storage investment planning with an emissions-neutrality constraint";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);

  py::class_<PowerSystem>(m, "PowerSystem")
      .def_property_readonly("num_buses", &PowerSystem::num_buses)
      .def_property_readonly("num_days", &PowerSystem::num_days)
      .def_property_readonly("bus_ids",
                             [](const PowerSystem& s) {
                               std::vector<std::string> ids;
                               for (const auto& b : s.buses) ids.push_back(b.id);
                               return ids;
                             })
      .def_property_readonly("candidate_buses",
                             [](const PowerSystem& s) {
                               std::vector<std::string> ids;
                               for (int b : s.candidate_buses()) ids.push_back(s.buses[b].id);
                               return ids;
                             })
      .def_property_readonly("renewable_penetration", [](const PowerSystem& s) { return renewable_penetration(s); });

  m.def("load_system", [](const std::filesystem::path& dir) {
    auto s = load_system(dir);
    validate(s);
    return s;
  }, py::arg("directory"));

  m.def(
      "reduce_days",
      [](const PowerSystem& s, int k, double variance, std::uint64_t seed) {
        const auto r = reduce_days(s.days(), k, variance, seed);
        py::list days;
        for (const auto& d : r.days) {
          py::dict e;
          e["probability"] = d.probability;
          e["medoid_day"] = d.medoid_day;
          e["member_days"] = d.member_days;
          e["load"] = d.profile.load;
          e["ren"] = d.profile.ren;
          days.append(e);
        }
        py::dict out;
        out["days"] = days;
        out["components"] = r.components;
        out["cumulative_variance"] = r.cumulative_variance;
        return out;
      },
      py::arg("system"), py::arg("k") = 5, py::arg("variance") = 0.95, py::arg("seed") = 7);

  m.def(
      "wilcoxon_pratt",
      [](const std::vector<double>& deltas) {
        const auto r = wilcoxon_pratt(deltas);
        py::dict d;
        d["statistic"] = r.statistic;
        d["w_plus"] = r.w_plus;
        d["p_value"] = r.p_value;
        d["n"] = r.n;
        d["nonzero"] = r.nonzero;
        d["exact"] = r.exact;
        return d;
      },
      py::arg("deltas"));

  m.def(
      "config_text", [](const std::map<std::string, std::string>& settings) { return make_config(settings).to_text(); },
      py::arg("settings") = std::map<std::string, std::string>{});
  m.def(
      "config_hash", [](const std::map<std::string, std::string>& settings) { return make_config(settings).hash(); },
      py::arg("settings") = std::map<std::string, std::string>{});

  m.def(
      "plan_outcomes",
      [](const std::map<std::string, std::string>& settings) {
        const auto c = make_config(settings);
        std::optional<PowerSystem> system;
        HeuristicResult h;
        {
          py::gil_scoped_release release;
          system = load_configured_system(c);
          const auto days = configured_days(c, *system);
          const auto econ = c.economics();
          auto po = c.plan_options();
          if (po.spec.enc != EncMode::Off)
            po.spec.baselines = compute_baseline(*system, days, econ, po.spec.storage, po.milp);
          h = run_heuristic(*system, days, econ, po);
        }
        py::dict out;
        out["viu"] = outcome_dict(h.viu, *system);
        out["phsi"] = outcome_dict(h.phsi, *system);
        out["pmsi"] = outcome_dict(h.pmsi, *system);
        py::list records;
        for (const auto& r : h.records) {
          py::dict d;
          d["q"] = r.q;
          d["social_cost"] = r.social_cost;
          d["net_profit"] = r.net_profit;
          d["emissions"] = r.emissions;
          records.append(d);
        }
        out["records"] = records;
        return out;
      },
      py::arg("settings"), "Runs the investment heuristic for one cell; returns the three outcomes and the records.");

  auto command = [&m](const char* name, CommandResult (*fn)(const RunConfig&), const char* doc) {
    m.def(
        name,
        [fn](const std::map<std::string, std::string>& settings) {
          const auto c = make_config(settings);
          CommandResult r;
          {
            py::gil_scoped_release release;
            r = fn(c);
          }
          return result_dict(r);
        },
        py::arg("settings"), doc);
  };
  command("cmd_reduce", &cmd_reduce, "Writes repdays.csv under settings['out'].");
  command("cmd_plan", &cmd_plan, "Writes the plan artifacts under settings['out'].");
  command("cmd_sweep", &cmd_sweep, "Writes sweep.csv, report/ and manifest.json under settings['out'].");
  command("cmd_verify", &cmd_verify, "Writes verify.json under settings['out'].");
}
