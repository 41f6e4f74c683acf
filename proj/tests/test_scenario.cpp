#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "encplan/scenario.hpp"
#include "fixtures.hpp"

using namespace encplan;

namespace {

double day_energy(const DailyProfile& d) { return d.total_load(); }

}  // namespace

TEST_CASE("desk year reduces to five weighted days") {
  const auto sys = load_system(fixtures::desk_dir());
  const auto days = sys.days();
  const auto r = reduce_days(days, 5, 0.95, 7);
  REQUIRE(r.days.size() == 5);
  double sum = 0.0;
  int members = 0;
  for (const auto& d : r.days) {
    sum += d.probability;
    members += static_cast<int>(d.member_days.size());
    CHECK(d.probability == doctest::Approx(d.member_days.size() / 365.0).epsilon(1e-15));
    for (const auto& row : d.profile.load)
      for (double v : row) CHECK(v >= 0.0);
    for (const auto& row : d.profile.ren)
      for (double v : row) CHECK(v >= 0.0);
  }
  CHECK(sum == 1.0);
  CHECK(members == 365);
  // smallest component count reaching the target
  REQUIRE(r.components >= 1);
  CHECK(r.cumulative_variance[r.components - 1] >= 0.95);
  if (r.components > 1) CHECK(r.cumulative_variance[r.components - 2] < 0.95);
  // residual variance of the retained projection
  CHECK(1.0 - r.cumulative_variance[r.components - 1] <= 1.0 - 0.95);

  for (std::size_t i = 1; i < r.wcss_trace.size(); ++i) CHECK(r.wcss_trace[i] <= r.wcss_trace[i - 1] * (1 + 1e-12));

  // probability-weighted daily load within 2% of the annual mean
  double annual = 0.0;
  for (const auto& d : days) annual += day_energy(d);
  annual /= static_cast<double>(days.size());
  double weighted = 0.0;
  for (const auto& d : r.days) weighted += d.probability * day_energy(d.profile);
  CHECK(std::abs(weighted - annual) / annual <= 0.02);
}

TEST_CASE("same seed gives bit-identical output") {
  const auto days = load_system(fixtures::desk_dir()).days();
  const auto a = reduce_days(days, 5, 0.95, 11);
  const auto b = reduce_days(days, 5, 0.95, 11);
  REQUIRE(a.days.size() == b.days.size());
  for (std::size_t i = 0; i < a.days.size(); ++i) {
    CHECK(a.days[i].member_days == b.days[i].member_days);
    CHECK(a.days[i].probability == b.days[i].probability);
    CHECK(a.days[i].profile.load == b.days[i].profile.load);
    CHECK(a.days[i].profile.ren == b.days[i].profile.ren);
  }
  CHECK(a.wcss_trace == b.wcss_trace);
}

TEST_CASE("k = 1 picks the medoid of all days") {
  std::vector<DailyProfile> days;
  for (double level : {10.0, 20.0, 31.0, 40.0, 55.0}) days.push_back(fixtures::flat_day(2, 24, level));
  const auto r = reduce_days(days, 1, 0.95, 1);
  REQUIRE(r.days.size() == 1);
  CHECK(r.days[0].probability == 1.0);
  CHECK(r.days[0].member_days.size() == 5);
  // sum of |level - x| is minimized by the median level
  CHECK(r.days[0].medoid_day == 2);
  CHECK(r.days[0].profile.load[0][5] == doctest::Approx(31.0).epsilon(1e-9));
}

TEST_CASE("two separated templates are recovered exactly") {
  auto template_day = [](bool peaky, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 0.5);
    DailyProfile d = fixtures::flat_day(3, 24, 0.0);
    for (int b = 0; b < 3; ++b) {
      for (int t = 0; t < 24; ++t) {
        const double base = peaky ? 100.0 + 80.0 * std::exp(-(t - 18) * (t - 18) / 6.0) : 60.0 + 10.0 * std::sin(t);
        d.load[b][t] = base * (1.0 + 0.2 * b) + noise(rng);
        d.ren[b][t] = peaky ? 5.0 : 40.0 + noise(rng);
      }
    }
    return d;
  };
  std::mt19937_64 rng(3);
  const std::vector<int> labels = {0, 1, 1, 0, 0, 1, 0, 1, 1, 0};
  std::vector<DailyProfile> days;
  for (int l : labels) days.push_back(template_day(l == 1, rng));
  const auto r = reduce_days(days, 2, 0.95, 5);
  REQUIRE(r.days.size() == 2);
  // clusters come back ordered by first member, so day 0 is in the first
  std::vector<int> got(10, -1);
  for (int c = 0; c < 2; ++c)
    for (int m : r.days[c].member_days) got[m] = c;
  CHECK(got == labels);
  CHECK(r.days[0].probability + r.days[1].probability == 1.0);
}

TEST_CASE("k above the number of distinct days is rejected") {
  std::vector<DailyProfile> days(4, fixtures::flat_day(1, 24, 10.0));
  days[3] = fixtures::flat_day(1, 24, 20.0);
  CHECK_THROWS_AS(reduce_days(days, 3, 0.9, 1), DomainError);
  CHECK_NOTHROW(reduce_days(days, 2, 0.9, 1));
  CHECK_THROWS_AS(reduce_days(days, 0, 0.9, 1), DomainError);
  CHECK_THROWS_AS(reduce_days(days, 1, 0.0, 1), DomainError);
}

TEST_CASE("smoothing a flat day changes nothing") {
  const auto d = fixtures::flat_day(2, 24, 30.0, 5.0);
  const auto s = smooth_boundaries(d);
  CHECK(s.load == d.load);
  CHECK(s.ren == d.ren);
}

TEST_CASE("smoothing closes a 400 MW midnight jump to the interior step") {
  DailyProfile d = fixtures::flat_day(1, 24, 0.0);
  for (int t = 0; t < 24; ++t) d.load[0][t] = std::min(500.0, 100.0 + 50.0 * t);
  REQUIRE(d.net_load(0) == 100.0);
  REQUIRE(d.net_load(23) == 500.0);
  REQUIRE(max_interior_step(d) == 50.0);
  const auto s = smooth_boundaries(d);
  CHECK(std::abs(s.net_load(23) - s.net_load(0)) <= 50.0 + 1e-9);
  CHECK(std::abs(day_energy(s) - day_energy(d)) <= 0.005 * day_energy(d));
  for (int t = 1; t < 23; ++t) CHECK(s.load[0][t] == d.load[0][t]);
}

TEST_CASE("an already smooth day is left alone") {
  DailyProfile d = fixtures::flat_day(1, 24, 0.0);
  for (int t = 0; t < 24; ++t) d.load[0][t] = 100.0 + 10.0 * std::min(t, 23 - t) + (t == 23 ? 5.0 : 0.0);
  REQUIRE(std::abs(d.net_load(23) - d.net_load(0)) < max_interior_step(d));
  CHECK(smooth_boundaries(d).load == d.load);
}

TEST_CASE("a gap made only by renewables leaves the profile untouched") {
  DailyProfile d = fixtures::flat_day(1, 24, 200.0);
  for (int t = 0; t < 24; ++t) d.ren[0][t] = 5.0 * t;
  REQUIRE(std::abs(d.net_load(23) - d.net_load(0)) > max_interior_step(d));
  const auto s = smooth_boundaries(d);
  CHECK(s.ren == d.ren);
  CHECK(s.load == d.load);
}

TEST_CASE("repdays csv lists one-based days and exact weights") {
  const auto dir = fixtures::scratch_dir("repdays");
  std::vector<DailyProfile> days;
  for (double level : {10.0, 11.0, 50.0}) days.push_back(fixtures::flat_day(1, 24, level));
  const auto r = reduce_days(days, 2, 0.99, 2);
  write_repdays_csv(r.days, dir / "repdays.csv", "seed=2");
  std::ifstream in(dir / "repdays.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  CHECK(text.rfind("# seed=2\nday_index,probability,member_days\n", 0) == 0);
  CHECK(text.find(",1;2\n") != std::string::npos);
  CHECK(text.find("3,0.33333333333333") != std::string::npos);
}
