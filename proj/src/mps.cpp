#include "encplan/mps.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace encplan {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

bool fits(const std::string& s) {
  if (s.empty() || s.size() > 8) return false;
  for (char ch : s) {
    if (ch <= ' ' || ch == '$' || ch == '*') return false;
  }
  return true;
}

bool names_fit(const MilpModel& m) {
  std::unordered_set<std::string> rows;
  for (const auto& r : m.rows()) {
    if (!fits(r.name) || r.name == "OBJ") return false;
    rows.insert(r.name);
  }
  for (const auto& v : m.vars()) {
    if (!fits(v.name)) return false;
  }
  return true;
}

std::string mangle(char prefix, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%07d", prefix, index + 1);
  return buf;
}

// One entry per line, fields starting at the fixed-format columns 2, 5, 15, 25.
std::string line(const std::string& f1, const std::string& f2, const std::string& f3, const std::string& f4) {
  std::string s = " " + f1;
  s.resize(4, ' ');
  s += f2;
  if (f3.empty()) return s;
  if (s.size() < 14) s.resize(14, ' ');
  else s += ' ';
  s += f3;
  if (f4.empty()) return s;
  if (s.size() < 24) s.resize(24, ' ');
  else s += ' ';
  s += f4;
  return s;
}

}  // namespace

MpsExportInfo export_mps(const MilpModel& model, const std::string& path, const std::string& header_comment) {
  model.validate();
  MpsExportInfo info;
  info.mangled = !names_fit(model);
  const int n = model.num_vars();
  const int m = model.num_rows();
  std::vector<std::string> cname(n), rname(m);
  for (int j = 0; j < n; ++j) cname[j] = info.mangled ? mangle('C', j) : model.var(j).name;
  for (int i = 0; i < m; ++i) rname[i] = info.mangled ? mangle('R', i) : model.row(i).name;

  // merged column-wise coefficients, rows in ascending order
  std::vector<std::map<int, double>> cols(n);
  for (int i = 0; i < m; ++i) {
    for (const auto& t : model.row(i).terms) cols[t.var][i] += t.coef;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!header_comment.empty()) out << "* " << header_comment << "\n";
  out << "NAME          " << (model.name.empty() ? std::string("ENCPLAN") : model.name) << "\n";
  out << "ROWS\n" << line("N", "OBJ", "", "") << "\n";
  std::vector<char> type(m);
  for (int i = 0; i < m; ++i) {
    const auto& r = model.row(i);
    const double lo = r.lower(), hi = r.upper();
    if (std::isfinite(lo) && std::isfinite(hi)) type[i] = lo == hi ? 'E' : 'R';
    else if (std::isfinite(lo)) type[i] = 'G';
    else if (std::isfinite(hi)) type[i] = 'L';
    else type[i] = 'N';
    out << line(std::string(1, type[i] == 'R' ? 'G' : type[i]), rname[i], "", "") << "\n";
  }
  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (int j = 0; j < n; ++j) {
    const bool is_int = model.var(j).kind != VarKind::Continuous;
    if (is_int != in_int) {
      const std::string tag = is_int ? "'INTORG'" : "'INTEND'";
      out << line("", mangle('M', marker++), "'MARKER'", "") << "                 " << tag << "\n";
      in_int = is_int;
    }
    bool any = false;
    if (model.cost(j) != 0.0) {
      out << line("", cname[j], "OBJ", num(model.cost(j))) << "\n";
      any = true;
    }
    for (const auto& [i, v] : cols[j]) {
      if (v == 0.0) continue;
      out << line("", cname[j], rname[i], num(v)) << "\n";
      any = true;
    }
    if (!any) out << line("", cname[j], "OBJ", "0") << "\n";
  }
  if (in_int) out << line("", mangle('M', marker++), "'MARKER'", "") << "                 'INTEND'\n";

  out << "RHS\n";
  if (model.objective_offset() != 0.0) out << line("", "RHS", "OBJ", num(-model.objective_offset())) << "\n";
  for (int i = 0; i < m; ++i) {
    const auto& r = model.row(i);
    double rhs = 0.0;
    switch (type[i]) {
      case 'E': case 'G': case 'R': rhs = r.lower(); break;
      case 'L': rhs = r.upper(); break;
      default: break;
    }
    if (rhs != 0.0) out << line("", "RHS", rname[i], num(rhs)) << "\n";
  }
  bool ranges = false;
  for (int i = 0; i < m; ++i) {
    if (type[i] != 'R') continue;
    if (!ranges) out << "RANGES\n";
    ranges = true;
    out << line("", "RNG", rname[i], num(model.row(i).upper() - model.row(i).lower())) << "\n";
  }
  bool bounds = false;
  auto bound = [&](const char* t, int j, const std::string& v) {
    if (!bounds) out << "BOUNDS\n";
    bounds = true;
    out << line(t, "BND", cname[j], v) << "\n";
  };
  for (int j = 0; j < n; ++j) {
    const auto& v = model.var(j);
    const bool lo = std::isfinite(v.lower), hi = std::isfinite(v.upper);
    if (v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0) {
      bound("BV", j, "");
      continue;
    }
    if (lo && hi && v.lower == v.upper) {
      bound("FX", j, num(v.lower));
      continue;
    }
    if (!lo && !hi) {
      bound("FR", j, "");
      continue;
    }
    const bool integer = v.kind != VarKind::Continuous;
    if (!lo) bound("MI", j, "");
    else if (v.lower != 0.0 || integer) bound(integer ? "LI" : "LO", j, num(v.lower));
    if (hi) bound(integer ? "UI" : "UP", j, num(v.upper));
    else if (integer && lo) bound("PL", j, "");
  }
  out << "ENDATA\n";
  if (!out) throw std::runtime_error("write failed: " + path);

  const std::string sidecar = path + ".names";
  std::error_code ec;
  if (info.mangled) {
    std::ofstream map(sidecar, std::ios::binary);
    if (!header_comment.empty()) map << "# " << header_comment << "\n";
    for (int j = 0; j < n; ++j) map << "C," << cname[j] << "," << model.var(j).name << "\n";
    for (int i = 0; i < m; ++i) map << "R," << rname[i] << "," << model.row(i).name << "\n";
    info.names_path = sidecar;
  } else {
    std::filesystem::remove(sidecar, ec);
  }
  return info;
}

MilpModel import_mps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::unordered_map<std::string, std::string> original;
  {
    std::ifstream map(path + ".names");
    std::string l;
    while (std::getline(map, l)) {
      const auto a = l.find(',');
      const auto b = l.find(',', a + 1);
      if (a == std::string::npos || b == std::string::npos) continue;
      original[l.substr(0, a) + l.substr(a + 1, b - a - 1)] = l.substr(b + 1);
    }
  }
  auto restore = [&](char kind, const std::string& s) {
    auto it = original.find(std::string(1, kind) + s);
    return it == original.end() ? s : it->second;
  };

  struct RowInfo {
    char type;
    std::vector<Term> terms;
    double rhs = 0.0;
    double range = 0.0;
    bool has_range = false;
  };
  std::vector<std::string> row_names;
  std::unordered_map<std::string, int> row_index;
  std::vector<RowInfo> rows;
  std::string obj_row;
  struct ColInfo {
    std::string name;
    bool integer = false;
    double cost = 0.0;
    double lower = 0.0, upper = kInf;
    bool binary = false, upper_set = false, lower_set = false;
  };
  std::vector<ColInfo> cols;
  std::unordered_map<std::string, int> col_index;
  double offset = 0.0;
  std::string model_name;

  std::string section, l;
  bool integer = false;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + why);
  };
  auto to_d = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) fail("bad number " + s);
      return v;
    } catch (const std::logic_error&) {
      fail("bad number " + s);
    }
    return 0.0;
  };
  auto find_row = [&](const std::string& s) {
    auto it = row_index.find(s);
    if (it == row_index.end()) fail("unknown row " + s);
    return it->second;
  };
  auto find_col = [&](const std::string& s) {
    auto it = col_index.find(s);
    if (it == col_index.end()) fail("unknown column " + s);
    return it->second;
  };

  while (std::getline(in, l)) {
    ++lineno;
    if (!l.empty() && l.back() == '\r') l.pop_back();
    if (l.empty() || l[0] == '*') continue;
    std::istringstream ss(l);
    std::vector<std::string> f;
    for (std::string t; ss >> t;) f.push_back(t);
    if (f.empty()) continue;
    if (l[0] != ' ') {
      section = f[0];
      if (section == "NAME") {
        const auto p = l.find_first_not_of(' ', 4);
        model_name = p == std::string::npos ? "" : l.substr(p);
      }
      if (section == "ENDATA") break;
      continue;
    }
    if (section == "ROWS") {
      if (f.size() < 2) fail("short ROWS line");
      if (f[0] == "N" && obj_row.empty()) {
        obj_row = f[1];
        continue;
      }
      row_index[f[1]] = static_cast<int>(rows.size());
      row_names.push_back(f[1]);
      rows.push_back(RowInfo{f[0][0], {}, 0.0, 0.0, false});
    } else if (section == "COLUMNS") {
      if (f.size() >= 3 && f[1] == "'MARKER'") {
        integer = f[2] == "'INTORG'";
        continue;
      }
      if (f.size() < 3 || f.size() % 2 == 0) fail("malformed COLUMNS line");
      auto it = col_index.find(f[0]);
      int j;
      if (it == col_index.end()) {
        j = static_cast<int>(cols.size());
        col_index[f[0]] = j;
        ColInfo c;
        c.name = f[0];
        c.integer = integer;
        if (integer) c.upper = kInf;
        cols.push_back(c);
      } else {
        j = it->second;
      }
      for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
        const double v = to_d(f[k + 1]);
        if (f[k] == obj_row) cols[j].cost += v;
        else if (v != 0.0) rows[find_row(f[k])].terms.push_back({j, v});
      }
    } else if (section == "RHS") {
      for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
        const double v = to_d(f[k + 1]);
        if (f[k] == obj_row) offset = -v;
        else rows[find_row(f[k])].rhs = v;
      }
    } else if (section == "RANGES") {
      for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
        auto& r = rows[find_row(f[k])];
        r.range = to_d(f[k + 1]);
        r.has_range = true;
      }
    } else if (section == "BOUNDS") {
      if (f.size() < 3) fail("short BOUNDS line");
      auto& c = cols[find_col(f[2])];
      const std::string& t = f[0];
      const double v = f.size() >= 4 ? to_d(f[3]) : 0.0;
      if (t == "UP" || t == "UI") {
        c.upper = v;
        c.upper_set = true;
        if (v < 0.0 && !c.lower_set) c.lower = -kInf;
      } else if (t == "LO" || t == "LI") {
        c.lower = v;
        c.lower_set = true;
      } else if (t == "FX") {
        c.lower = c.upper = v;
      } else if (t == "FR") {
        c.lower = -kInf;
        c.upper = kInf;
      } else if (t == "MI") {
        c.lower = -kInf;
      } else if (t == "PL") {
        c.upper = kInf;
      } else if (t == "BV") {
        c.binary = true;
        c.integer = true;
        c.lower = 0.0;
        c.upper = 1.0;
      } else {
        fail("unsupported bound type " + t);
      }
      if (t == "LI" || t == "UI") c.integer = true;
    }
  }

  MilpModel model;
  model.name = model_name;
  for (const auto& c : cols) {
    const VarKind kind = c.binary ? VarKind::Binary : (c.integer ? VarKind::Integer : VarKind::Continuous);
    model.add_var(restore('C', c.name), kind, c.lower, c.upper, c.cost);
  }
  model.set_objective_offset(offset);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    const std::string name = restore('R', row_names[i]);
    switch (r.type) {
      case 'E':
        if (r.has_range) {
          const double lo = r.range >= 0 ? r.rhs : r.rhs + r.range;
          model.add_range(name, std::move(r.terms), lo, lo + std::abs(r.range));
        } else {
          model.add_row(name, std::move(r.terms), RowSense::Equal, r.rhs);
        }
        break;
      case 'L':
        if (r.has_range) model.add_range(name, std::move(r.terms), r.rhs - std::abs(r.range), r.rhs);
        else model.add_row(name, std::move(r.terms), RowSense::LessEqual, r.rhs);
        break;
      case 'G':
        if (r.has_range) model.add_range(name, std::move(r.terms), r.rhs, r.rhs + std::abs(r.range));
        else model.add_row(name, std::move(r.terms), RowSense::GreaterEqual, r.rhs);
        break;
      case 'N':
        break;  // extra free rows carry no constraint
      default:
        throw std::runtime_error(path + ": unknown row type for " + name);
    }
  }
  return model;
}

}  // namespace encplan
