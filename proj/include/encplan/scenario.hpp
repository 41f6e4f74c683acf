#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "encplan/system.hpp"

namespace encplan {

struct RepresentativeDay {
  DailyProfile profile;
  double probability = 0.0;
  std::vector<int> member_days;  // 0-based source day indices, ascending
  int medoid_day = 0;
};

struct ReductionResult {
  std::vector<RepresentativeDay> days;
  int components = 0;
  /// Cumulative explained-variance fraction for 1..all components.
  std::vector<double> cumulative_variance;
  /// Within-cluster sum of squares after every Lloyd iteration.
  std::vector<double> wcss_trace;
  int iterations = 0;
};

/// PCA on standardized day vectors, then k-means++ / Lloyd in the reduced
/// space. Each representative is its cluster's medoid mapped back to full
/// dimension and clipped at zero.
ReductionResult reduce_days(const std::vector<DailyProfile>& profiles, int k, double variance_target,
                            std::uint64_t seed);

/// Blends the first- and last-hour loads toward their per-bus mean until the
/// midnight net-load jump is no larger than the largest interior hourly step.
DailyProfile smooth_boundaries(const DailyProfile& day);

/// Largest |netload(t+1) - netload(t)| for t = 1..T-1.
double max_interior_step(const DailyProfile& day);

/// Representative days used as a single-day set: probability 1, one member.
std::vector<RepresentativeDay> single_day(const DailyProfile& day);

void write_repdays_csv(const std::vector<RepresentativeDay>& days, const std::filesystem::path& path,
                       const std::string& header_comment);

}  // namespace encplan
