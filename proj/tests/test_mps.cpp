#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "encplan/milp.hpp"
#include "encplan/mps.hpp"
#include "oracles.hpp"

using namespace encplan;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "encplan_mps_test";
  fs::create_directories(dir);
  return dir / name;
}

MilpModel sample_model() {
  MilpModel m;
  m.name = "SAMPLE";
  const int on = m.add_binary("u_g2_t1", 800.0);
  const int g = m.add_continuous("g_g2_s1_t1", 0, 120, 18.0);
  const int n = m.add_var("units_b3", VarKind::Integer, 0, 6, 2500.0);
  const int free = m.add_continuous("theta_b2", -kInf, kInf);
  const int neg = m.add_continuous("w_neg", -kInf, -1.5, 0.25);
  m.add_row("cap_g2_t1", {{g, 1.0}, {on, -120.0}}, RowSense::LessEqual, 0.0);
  m.add_row("bal_b1_t1", {{g, 1.0}, {free, 0.1234567890123}}, RowSense::Equal, 95.5);
  m.add_range("soc_b3", {{n, 100.0}, {g, -1.0}}, -40.0, 260.0);
  m.add_row("lim", {{neg, 1.0}, {n, 1.0}}, RowSense::GreaterEqual, -3.0);
  m.set_objective_offset(12.5);
  return m;
}

}  // namespace

TEST_CASE("export, import, export is byte-identical") {
  const auto m = sample_model();
  const auto a = scratch("a.mps"), b = scratch("b.mps");
  const auto info = export_mps(m, a.string());
  CHECK(info.mangled);
  CHECK(fs::exists(info.names_path));
  const auto back = import_mps(a.string());
  export_mps(back, b.string());
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a.string() + ".names") == slurp(b.string() + ".names"));

  REQUIRE(back.num_vars() == m.num_vars());
  REQUIRE(back.num_rows() == m.num_rows());
  for (int j = 0; j < m.num_vars(); ++j) {
    CHECK(back.var(j).name == m.var(j).name);
    CHECK(back.var(j).kind == m.var(j).kind);
    CHECK(back.var(j).lower == m.var(j).lower);
    CHECK(back.var(j).upper == m.var(j).upper);
    CHECK(back.cost(j) == m.cost(j));
  }
  for (int i = 0; i < m.num_rows(); ++i) {
    CHECK(back.row(i).name == m.row(i).name);
    CHECK(back.row(i).lower() == m.row(i).lower());
    CHECK(back.row(i).upper() == m.row(i).upper());
  }
  CHECK(back.objective_offset() == m.objective_offset());
  // 13 significant digits are rounded to 12
  CHECK(back.row(1).terms[1].coef == 0.123456789012);
}

TEST_CASE("round trip preserves the optimum of random MILPs") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 5; ++k) {
    const auto m = oracle::random_milp(rng, 6, 3, 2);
    const auto p = scratch("r.mps");
    export_mps(m, p.string());
    const auto back = import_mps(p.string());
    CHECK(solve_milp(back).objective == doctest::Approx(solve_milp(m).objective).epsilon(1e-12));
  }
}

TEST_CASE("short names are kept and no sidecar is written") {
  MilpModel m;
  const int x = m.add_continuous("x", 0, 4);
  const int y = m.add_continuous("y", 0, 4);
  m.add_row("r1", {{x, 1.0}, {y, 1.0}}, RowSense::LessEqual, 3.0);
  const auto p = scratch("short.mps");
  const auto info = export_mps(m, p.string());
  CHECK_FALSE(info.mangled);
  CHECK_FALSE(fs::exists(p.string() + ".names"));
  const auto text = slurp(p);
  // empty objective: no OBJ coefficients in COLUMNS
  const auto cols = text.substr(text.find("COLUMNS"), text.find("RHS") - text.find("COLUMNS"));
  CHECK(cols.find("OBJ") == std::string::npos);
  CHECK(text.find("    x         r1        1") != std::string::npos);
  CHECK(text.rfind("ENDATA\n") == text.size() - 7);
}

TEST_CASE("integer markers bracket integer columns") {
  const auto p = scratch("m.mps");
  export_mps(sample_model(), p.string());
  const auto text = slurp(p);
  CHECK(text.find("'INTORG'") != std::string::npos);
  CHECK(text.find("'INTEND'") != std::string::npos);
  CHECK(text.find(" BV BND") != std::string::npos);
  CHECK(text.find(" UI BND") != std::string::npos);
  CHECK(text.find(" FR BND") != std::string::npos);
  CHECK(text.find("RANGES") != std::string::npos);
}
