#pragma once

#include "panelfx/panel_model.hpp"

#include <span>
#include <string>
#include <vector>

namespace panelfx {

struct CohortInput {
  std::string website_id;
  double delta = 0.0;
  double p_value = 1.0;
  std::string cohort = "all";
};

struct CohortSummary {
  std::string cohort_key = "all";  // all | industry | global_rank_decile | ... | country
  std::string cohort = "all";
  MetricKind metric = MetricKind::TotalVisits;
  WindowLabel window = WindowLabel::M3;
  double mean_delta = 0.0;
  double median_delta = 0.0;
  double share_negative = 0.0;
  double share_significant = 0.0;
  std::size_t n = 0;
};

/// One row per distinct cohort label, sorted by label. Cohorts with no
/// members are not emitted.
std::vector<CohortSummary> summarize(std::span<const CohortInput> effects,
                                     const std::string& cohort_key, MetricKind metric,
                                     WindowLabel window);

/// Decile 1..10 by ascending value: decile = ceil(10 * #{v <= x} / n).
/// Equal values share a decile and values on a decile edge fall into the
/// lower index. Throws std::invalid_argument on empty input.
std::vector<int> assign_deciles(std::span<const long> ranks);
std::vector<int> assign_deciles(std::span<const double> values);

}  // namespace panelfx
