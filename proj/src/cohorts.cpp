#include "panelfx/cohorts.hpp"

#include "panelfx/stats.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace panelfx {

std::vector<CohortSummary> summarize(std::span<const CohortInput> effects,
                                     const std::string& cohort_key, MetricKind metric,
                                     WindowLabel window) {
  std::map<std::string, std::vector<const CohortInput*>> groups;
  for (const auto& e : effects) groups[e.cohort].push_back(&e);

  std::vector<CohortSummary> out;
  for (const auto& [label, members] : groups) {
    std::vector<double> deltas;
    std::size_t negative = 0;
    std::size_t significant = 0;
    for (const auto* m : members) {
      deltas.push_back(m->delta);
      if (m->delta < 0.0) ++negative;
      if (m->p_value < 0.05) ++significant;
    }
    const auto n = static_cast<double>(members.size());
    CohortSummary row;
    row.cohort_key = cohort_key;
    row.cohort = label;
    row.metric = metric;
    row.window = window;
    row.mean_delta = stats::mean(deltas);
    row.median_delta = stats::median(deltas);
    row.share_negative = static_cast<double>(negative) / n;
    row.share_significant = static_cast<double>(significant) / n;
    row.n = members.size();
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

template <typename T>
std::vector<int> deciles_of(std::span<const T> values) {
  if (values.empty()) throw std::invalid_argument("assign_deciles: empty input");
  std::vector<T> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<long long>(sorted.size());
  std::vector<int> out;
  out.reserve(values.size());
  for (const T& v : values) {
    const auto at_most =
        static_cast<long long>(std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
    out.push_back(static_cast<int>((10 * at_most + n - 1) / n));
  }
  return out;
}

}  // namespace

std::vector<int> assign_deciles(std::span<const long> ranks) {
  for (long r : ranks) {
    if (r < 1) throw std::invalid_argument("assign_deciles: ranks must be positive");
  }
  return deciles_of(ranks);
}

std::vector<int> assign_deciles(std::span<const double> values) { return deciles_of(values); }

}  // namespace panelfx
