#include "panelfx/report.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace panelfx {

std::string_view to_string(CohortKey key) {
  switch (key) {
    case CohortKey::All: return "all";
    case CohortKey::Industry: return "industry";
    case CohortKey::GlobalRankDecile: return "global_rank_decile";
    case CohortKey::CountryRankDecile: return "country_rank_decile";
    case CohortKey::IndustryRankDecile: return "industry_rank_decile";
    case CohortKey::Country: return "country";
  }
  return "all";
}

CohortKey parse_cohort_key(std::string_view name) {
  for (auto key : kAllCohortKeys) {
    if (to_string(key) == name) return key;
  }
  throw std::invalid_argument("unknown cohort key '" + std::string(name) + "'");
}

const WebsiteInstance& primary_instance(const PanelDataset& dataset, const WebsiteEffect& effect) {
  if (effect.components.empty()) {
    throw std::invalid_argument("website '" + effect.website_id + "' has no components");
  }
  const auto it = std::max_element(
      effect.components.begin(), effect.components.end(),
      [](const WebsiteComponent& a, const WebsiteComponent& b) {
        // first of equal shares wins
        return a.share < b.share;
      });
  const auto* inst = dataset.find(it->instance_id);
  if (!inst) throw std::invalid_argument("instance '" + it->instance_id + "' not in panel");
  return *inst;
}

std::vector<CohortInput> cohort_inputs(const PanelDataset& dataset,
                                       std::span<const WebsiteEffect> website_effects, CohortKey key,
                                       MetricKind metric, WindowLabel window) {
  std::vector<const WebsiteEffect*> selected;
  for (const auto& e : website_effects) {
    if (e.metric == metric && e.window == window) selected.push_back(&e);
  }
  std::vector<CohortInput> out;
  if (selected.empty()) return out;

  std::vector<const WebsiteInstance*> primary;
  for (const auto* e : selected) primary.push_back(&primary_instance(dataset, *e));

  std::vector<int> deciles;
  if (key == CohortKey::GlobalRankDecile || key == CohortKey::CountryRankDecile ||
      key == CohortKey::IndustryRankDecile) {
    std::vector<long> ranks;
    for (const auto* inst : primary) {
      ranks.push_back(key == CohortKey::GlobalRankDecile    ? inst->global_rank
                      : key == CohortKey::CountryRankDecile ? inst->country_rank
                                                            : inst->industry_rank);
    }
    deciles = assign_deciles(std::span<const long>(ranks));
  }

  for (std::size_t i = 0; i < selected.size(); ++i) {
    CohortInput in;
    in.website_id = selected[i]->website_id;
    in.delta = selected[i]->delta;
    in.p_value = selected[i]->p_value;
    switch (key) {
      case CohortKey::All: in.cohort = "all"; break;
      case CohortKey::Industry: in.cohort = primary[i]->industry; break;
      case CohortKey::Country: in.cohort = primary[i]->user_country; break;
      default: {
        // zero-padded so labels sort numerically
        const int d = deciles[i];
        in.cohort = (d < 10 ? "0" : "") + std::to_string(d);
      }
    }
    out.push_back(std::move(in));
  }
  return out;
}

std::vector<CohortSummary> cohort_report(const PanelDataset& dataset,
                                         std::span<const WebsiteEffect> website_effects,
                                         std::span<const CohortKey> keys) {
  std::set<std::pair<MetricKind, WindowLabel>> present;
  for (const auto& e : website_effects) present.insert({e.metric, e.window});
  std::vector<CohortSummary> out;
  for (auto key : keys) {
    for (const auto& [metric, window] : present) {
      const auto inputs = cohort_inputs(dataset, website_effects, key, metric, window);
      auto rows = summarize(inputs, std::string(to_string(key)), metric, window);
      out.insert(out.end(), rows.begin(), rows.end());
    }
  }
  return out;
}

std::vector<CohortSummary> quantity_summary(std::span<const WebsiteEffect> website_effects) {
  std::map<std::pair<MetricKind, WindowLabel>, std::vector<CohortInput>> groups;
  for (const auto& e : website_effects) {
    groups[{e.metric, e.window}].push_back({e.website_id, e.delta, e.p_value, "all"});
  }
  std::vector<CohortSummary> out;
  for (const auto& [key, inputs] : groups) {
    auto rows = summarize(inputs, "all", key.first, key.second);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

}  // namespace panelfx
