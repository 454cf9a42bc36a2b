// Panel ingestion: CSV parsing, sample filters and pre-period instance shares.
#pragma once

#include "panelfx/panel_model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace panelfx {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct SourceDigest {
  std::string source;
  std::string fnv1a64;  // hex
  std::size_t bytes = 0;
};

std::string fnv1a64_hex(std::string_view bytes);

class PanelDataset {
 public:
  PanelDataset() = default;
  /// Sorts by instance_id and builds the website index. Throws
  /// std::invalid_argument on duplicate ids, more than two instances per
  /// website, or two instances of a website sharing a user base.
  explicit PanelDataset(std::vector<WebsiteInstance> instances,
                        std::vector<SourceDigest> provenance = {},
                        std::vector<std::string> collapsed = {});

  std::span<const WebsiteInstance> instances() const { return instances_; }
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }
  const std::map<std::string, std::vector<std::size_t>>& websites() const { return websites_; }
  std::span<const SourceDigest> provenance() const { return provenance_; }
  /// Instance ids dropped because another id already covered the same
  /// (website, user base).
  std::span<const std::string> collapsed() const { return collapsed_; }

  const WebsiteInstance* find(std::string_view instance_id) const;
  std::vector<const WebsiteInstance*> website(std::string_view website_id) const;

  /// Subset keeping instances for which `keep` is true; provenance carried over.
  template <typename Pred>
  PanelDataset filtered(Pred keep) const {
    std::vector<WebsiteInstance> kept;
    for (const auto& inst : instances_) {
      if (keep(inst)) kept.push_back(inst);
    }
    return PanelDataset(std::move(kept), provenance_, collapsed_);
  }

 private:
  std::vector<WebsiteInstance> instances_;
  std::map<std::string, std::vector<std::size_t>> websites_;
  std::vector<SourceDigest> provenance_;
  std::vector<std::string> collapsed_;
};

struct SchemaConfig {
  char delimiter = ',';
  /// Collapse several instance ids of one (website, user base) into one.
  bool collapse_duplicate_websites = true;
};

PanelDataset parse_panel(const std::filesystem::path& path, const SchemaConfig& schema = {});
PanelDataset parse_panel(std::istream& in, const std::string& source_name,
                         const SchemaConfig& schema = {});
/// Writes the panel in the input CSV schema, rows ordered by
/// (instance, metric, date). Values are written in shortest round-trip form.
void write_panel(std::ostream& out, const PanelDataset& dataset);

enum class ExclusionReason { BelowThreshold, MonthlyGap, Outlier, BelowUniqueFloor, MissingSeries };
std::string_view to_string(ExclusionReason reason);

struct Exclusion {
  std::string instance_id;
  ExclusionReason reason;
};

struct RuleCount {
  std::string rule;
  std::size_t input = 0;
  std::size_t excluded = 0;
  std::size_t retained = 0;
};

struct FilterReport {
  std::size_t input_count = 0;
  std::size_t retained_count = 0;
  std::vector<RuleCount> rules;
  std::vector<Exclusion> excluded;
};

// Flags a series when log visits stay more than `mad_multiplier` MADs from
// the centred rolling median for `min_consecutive` weeks in a row.
struct OutlierRule {
  bool enabled = true;
  int window = 9;
  double mad_multiplier = 6.0;
  int min_consecutive = 2;
  double mad_floor = 1e-3;
};

struct FilterOptions {
  /// Strict: instances with a mean below this are dropped, equal is kept.
  double min_avg_weekly_visits = 1000.0;
  bool drop_monthly_gaps = true;
  OutlierRule outlier;
};

bool has_monthly_gap(const TimeSeries& weekly_visits);
bool is_outlier(const TimeSeries& weekly_visits, const OutlierRule& rule);

/// Threshold, monthly-gap and outlier rules in that order.
std::pair<PanelDataset, FilterReport> apply_filters(const PanelDataset& dataset,
                                                    const FilterOptions& options = {});

/// Keeps instances whose monthly unique visitors never drop below `floor`
/// (strict, so equal is kept). Exclusions are appended to `report` if given.
PanelDataset unique_visitor_subsample(const PanelDataset& dataset, double floor = 5000.0,
                                      FilterReport* report = nullptr);

struct InstanceShare {
  std::string instance_id;
  Base user_base = Base::EU;
  double share = 0.0;
};

struct InstanceShares {
  std::string website_id;
  std::vector<InstanceShare> shares;

  double share_eu() const;
  double share_noneu() const;
  /// Throws std::out_of_range for an unknown instance.
  double share_of(std::string_view instance_id) const;
};

/// Pre-period mean raw TotalVisits of one instance.
double pre_period_mean_visits(const WebsiteInstance& instance, const Calendar& calendar);

/// Shares of pre-period mean TotalVisits across the given instances of one
/// website. Throws std::domain_error if every pre-period mean is zero.
InstanceShares pre_treatment_shares(std::span<const WebsiteInstance* const> instances,
                                    const Calendar& calendar);
InstanceShares pre_treatment_shares(const PanelDataset& dataset, std::string_view website_id,
                                    const Calendar& calendar = Calendar{});

/// EU-traffic share of an instance's website; 0 if the website has no
/// EU-user instance with TotalVisits.
double eu_traffic_share(const PanelDataset& dataset, const WebsiteInstance& instance,
                        const Calendar& calendar);

}  // namespace panelfx
