#include <doctest.h>

#include <cmath>
#include <numeric>

#include "encplan/system.hpp"
#include "fixtures.hpp"

using namespace encplan;
namespace fs = std::filesystem;

namespace {

void write_min_system(const fs::path& dir, const std::string& gen_bus) {
  fixtures::write_file(dir / "buses.csv", "id,candidate_storage\n1,1\n");
  fixtures::write_file(dir / "lines.csv", "id,from,to,reactance_ohm,capacity_mw\n");
  fixtures::write_file(dir / "generators.csv",
                       "id,bus,gmin_mw,gmax_mw,cmin_usd_h,csu_usd,emin_t_h,esu_t,minup_h,mindown_h,seg1_mw,seg1_usd_mwh,"
                       "seg1_t_mwh\nG," +
                           gen_bus + ",0,100,0,0,0,0,1,1,100,20,0.5\n");
  std::string ts = "day,hour,mw\n";
  for (int h = 1; h <= 24; ++h) ts += "1," + std::to_string(h) + ",50\n";
  fixtures::write_file(dir / "timeseries" / "load_1.csv", ts);
}

}  // namespace

TEST_CASE("desk system loads with the expected shape") {
  const auto sys = load_system(fixtures::desk_dir());
  CHECK(sys.num_buses() == 5);
  CHECK(sys.lines.size() == 6);
  CHECK(sys.generators.size() == 5);
  CHECK(sys.num_days() == 365);
  CHECK(sys.candidate_buses().size() == 3);
  CHECK(sys.reference_bus() == 0);
  for (const auto& g : sys.generators) {
    double sum = g.gmin;
    for (const auto& s : g.segments) sum += s.mw;
    CHECK(sum == g.gmax);
  }
  for (const auto& l : sys.lines) CHECK(l.admittance == 1.0 / l.reactance);
}

TEST_CASE("single bus with an empty lines file is valid") {
  const auto dir = fixtures::scratch_dir("one_bus");
  write_min_system(dir, "1");
  const auto sys = load_system(dir);
  CHECK(sys.num_buses() == 1);
  CHECK(sys.lines.empty());
  CHECK(sys.num_days() == 1);
}

TEST_CASE("dangling generator bus is reported with its row") {
  const auto dir = fixtures::scratch_dir("dangling");
  write_min_system(dir, "99");
  try {
    load_system(dir);
    FAIL("expected an error");
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("generators.csv:2") != std::string::npos);
    CHECK(msg.find("dangling bus reference '99'") != std::string::npos);
  }
}

TEST_CASE("generator capacity mismatch names the row") {
  const auto dir = fixtures::scratch_dir("badgen");
  write_min_system(dir, "1");
  fixtures::write_file(dir / "generators.csv",
                       "id,bus,gmin_mw,gmax_mw,cmin_usd_h,csu_usd,emin_t_h,esu_t,minup_h,mindown_h,seg1_mw,seg1_usd_mwh,"
                       "seg1_t_mwh\nG,1,10,100,0,0,0,0,1,1,100,20,0.5\n");
  CHECK_THROWS_WITH_AS(load_system(dir), doctest::Contains("generators.csv:2"), DomainError);
}

TEST_CASE("missing file is a domain error") {
  const auto dir = fixtures::scratch_dir("missing");
  CHECK_THROWS_WITH_AS(load_system(dir), doctest::Contains("missing file"), DomainError);
}

TEST_CASE("save then load reproduces every field exactly") {
  const auto sys = load_system(fixtures::desk_dir());
  auto tweaked = sys;
  tweaked.ren[2][5] = 0.1 + 0.2;  // not representable in short decimal
  const auto dir = fixtures::scratch_dir("roundtrip");
  save_system(tweaked, dir);
  const auto back = load_system(dir);
  REQUIRE(back.num_buses() == tweaked.num_buses());
  for (int b = 0; b < back.num_buses(); ++b) {
    CHECK(back.buses[b].id == tweaked.buses[b].id);
    CHECK(back.buses[b].candidate_storage == tweaked.buses[b].candidate_storage);
    CHECK(back.load[b] == tweaked.load[b]);
    CHECK(back.ren[b] == tweaked.ren[b]);
  }
  REQUIRE(back.lines.size() == tweaked.lines.size());
  for (std::size_t l = 0; l < back.lines.size(); ++l) {
    CHECK(back.lines[l].from == tweaked.lines[l].from);
    CHECK(back.lines[l].reactance == tweaked.lines[l].reactance);
    CHECK(back.lines[l].capacity == tweaked.lines[l].capacity);
  }
  REQUIRE(back.generators.size() == tweaked.generators.size());
  for (std::size_t g = 0; g < back.generators.size(); ++g) {
    const auto& a = back.generators[g];
    const auto& b = tweaked.generators[g];
    CHECK(a.id == b.id);
    CHECK(a.gmin == b.gmin);
    CHECK(a.gmax == b.gmax);
    CHECK(a.cmin == b.cmin);
    CHECK(a.csu == b.csu);
    CHECK(a.emin == b.emin);
    CHECK(a.esu == b.esu);
    CHECK(a.min_up == b.min_up);
    CHECK(a.min_down == b.min_down);
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t s = 0; s < a.segments.size(); ++s) {
      CHECK(a.segments[s].mw == b.segments[s].mw);
      CHECK(a.segments[s].cost == b.segments[s].cost);
      CHECK(a.segments[s].emissions == b.segments[s].emissions);
    }
  }
}

TEST_CASE("renewable scaling hits the annual-energy target") {
  auto sys = fixtures::one_bus();
  // 46% penetration: ren energy / load energy
  sys.ren[0].assign(24, 0.0);
  for (int h = 8; h < 16; ++h) sys.ren[0][h] = 50.0 * 0.46 * 24 / 8;
  CHECK(renewable_penetration(sys) == doctest::Approx(0.46).epsilon(1e-12));
  const auto scaled = scale_renewables(sys, 0.30);
  CHECK(std::abs(renewable_penetration(scaled) - 0.30) <= 1e-9);
  // proportional: every value shrinks by the same factor
  CHECK(scaled.ren[0][10] / sys.ren[0][10] == doctest::Approx(0.30 / 0.46).epsilon(1e-12));
  const auto twice = scale_renewables(scaled, 0.30);
  for (int h = 0; h < 24; ++h) CHECK(std::abs(twice.ren[0][h] - scaled.ren[0][h]) <= 1e-12 * std::abs(scaled.ren[0][h]));

  const auto same = scale_renewables(sys, renewable_penetration(sys));
  CHECK(same.ren == sys.ren);

  auto none = fixtures::one_bus();
  CHECK_THROWS_AS(scale_renewables(none, 0.3), DomainError);
  CHECK_THROWS_AS(scale_renewables(sys, 0.0), DomainError);
}
