#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "encplan/errors.hpp"

namespace encplan::detail {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("missing file: " + path.string());
  CsvTable t;
  t.path_ = path.string();
  std::string line;
  int lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (header) {
      t.header_ = fields;
      for (std::size_t k = 0; k < fields.size(); ++k) t.index_[fields[k]] = k;
      header = false;
      continue;
    }
    if (fields.size() > t.header_.size())
      throw DomainError(t.path_ + ":" + std::to_string(lineno) + ": more fields than header columns");
    fields.resize(t.header_.size());
    t.rows_.push_back(std::move(fields));
    t.lines_.push_back(lineno);
  }
  if (header) throw DomainError(t.path_ + ": missing header row");
  return t;
}

const std::string& CsvTable::text(std::size_t r, const std::string& column) const {
  auto it = index_.find(column);
  if (it == index_.end()) throw DomainError(path_ + ": missing column '" + column + "'");
  return rows_[r][it->second];
}

double CsvTable::number(std::size_t r, const std::string& column) const {
  const auto& s = text(r, column);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    fail(r, "column '" + column + "' is not a finite number: '" + s + "'");
  return v;
}

double CsvTable::number_or(std::size_t r, const std::string& column, double fallback) const {
  if (!has(column) || text(r, column).empty()) return fallback;
  return number(r, column);
}

int CsvTable::integer(std::size_t r, const std::string& column) const {
  const double v = number(r, column);
  if (v != std::floor(v) || std::abs(v) > 1e9) fail(r, "column '" + column + "' is not an integer");
  return static_cast<int>(v);
}

void CsvTable::fail(std::size_t r, const std::string& what) const {
  throw DomainError(path_ + ":" + std::to_string(lines_[r]) + ": " + what);
}

std::string exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace encplan::detail
