// Website-level summaries: overall quantity-metric tables and cohort
// breakdowns by industry, popularity decile and user country.
#pragma once

#include "panelfx/cohorts.hpp"
#include "panelfx/effects.hpp"
#include "panelfx/ingest.hpp"

#include <span>
#include <string>
#include <vector>

namespace panelfx {

enum class CohortKey { All, Industry, GlobalRankDecile, CountryRankDecile, IndustryRankDecile, Country };
std::string_view to_string(CohortKey key);
CohortKey parse_cohort_key(std::string_view name);
inline constexpr std::array<CohortKey, 6> kAllCohortKeys{
    CohortKey::All, CohortKey::Industry, CohortKey::GlobalRankDecile,
    CohortKey::CountryRankDecile, CohortKey::IndustryRankDecile, CohortKey::Country};

/// Instance carrying the largest share of a website's traffic; its metadata
/// labels the website in cohort breakdowns.
const WebsiteInstance& primary_instance(const PanelDataset& dataset, const WebsiteEffect& effect);

/// Labels each website effect of (metric, window) with its cohort. Rank
/// deciles pool the ranks of all websites in the selection.
std::vector<CohortInput> cohort_inputs(const PanelDataset& dataset,
                                       std::span<const WebsiteEffect> website_effects, CohortKey key,
                                       MetricKind metric, WindowLabel window);

/// summarize() for every key, metric and window present.
std::vector<CohortSummary> cohort_report(const PanelDataset& dataset,
                                         std::span<const WebsiteEffect> website_effects,
                                         std::span<const CohortKey> keys);

/// Overall rows (cohort "all") for every (metric, window) present, without
/// needing the panel.
std::vector<CohortSummary> quantity_summary(std::span<const WebsiteEffect> website_effects);

}  // namespace panelfx
