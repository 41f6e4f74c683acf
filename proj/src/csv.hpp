#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace encplan::detail {

/// Minimal comma-separated table with a header row. Fields are trimmed; no
/// quoting (ids and numbers only).
class CsvTable {
 public:
  static CsvTable read(const std::filesystem::path& path);

  const std::string& path() const { return path_; }
  std::size_t size() const { return rows_.size(); }
  bool has(const std::string& column) const { return index_.count(column) > 0; }

  /// Line number in the file of data row `r` (header is line 1).
  int line(std::size_t r) const { return lines_[r]; }
  const std::string& text(std::size_t r, const std::string& column) const;
  double number(std::size_t r, const std::string& column) const;
  /// Blank cell or absent column gives `fallback`.
  double number_or(std::size_t r, const std::string& column, double fallback) const;
  int integer(std::size_t r, const std::string& column) const;

  [[noreturn]] void fail(std::size_t r, const std::string& what) const;

 private:
  std::string path_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<int> lines_;
};

/// Shortest decimal text that parses back to the same double.
std::string exact(double v);

}  // namespace encplan::detail
