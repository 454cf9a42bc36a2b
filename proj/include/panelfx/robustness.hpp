// Robustness analyses: filter-threshold sweeps, reruns without the weeks
// around enforcement, control-group spillover checks and donor-rule
// variants. Reruns go through run_estimation with a changed config only.
#pragma once

#include "panelfx/ingest.hpp"
#include "panelfx/pipeline.hpp"
#include "panelfx/stats.hpp"

#include <optional>
#include <string>
#include <vector>

namespace panelfx {

// --- threshold sweep ---------------------------------------------------------

struct SweepGroup {
  std::size_t added = 0;
  std::size_t removed = 0;
  std::size_t n = 0;
  double mean = 0.0;  // of instance-mean weekly TotalVisits
  double std_dev = 0.0;
  double p_value = 1.0;  // Welch test against the base sample
  bool significant = false;
};

struct SweepRow {
  double threshold = 0.0;
  bool is_base = false;
  SweepGroup eu_users;
  SweepGroup noneu_users;
};

struct SweepReport {
  double base_threshold = 1000.0;
  std::vector<SweepRow> rows;  // in the order of the requested thresholds
};

/// lo, lo+step, ..., hi (inclusive, integer steps).
std::vector<double> threshold_range(double lo, double hi, double step);

/// Refilters `raw` at each threshold (other filter options as given) and
/// compares each sample with the one at `base_threshold`, separately for
/// EU-user and non-EU-user instances.
SweepReport threshold_sweep(const PanelDataset& raw, std::span<const double> thresholds,
                            double base_threshold = 1000.0, const FilterOptions& options = {});

// --- paired reruns -----------------------------------------------------------

struct PairedComparison {
  MetricKind metric = MetricKind::TotalVisits;
  WindowLabel window = WindowLabel::M3;
  std::size_t n_base = 0;
  double base_median = 0.0;
  double base_mean = 0.0;
  std::size_t n_variant = 0;
  double variant_median = 0.0;
  double variant_mean = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

struct RerunReport {
  std::string variant;
  std::vector<std::string> config_diff;
  std::vector<PairedComparison> rows;  // website-level deltas, by (metric, window)
  EstimationResult base;
  EstimationResult rerun;
};

/// Compares website-level deltas of two estimation results per (metric,
/// window) present in both.
std::vector<PairedComparison> compare_results(const EstimationResult& base,
                                              const EstimationResult& variant);

/// Reruns with periods within +-exclude_days of enforcement dropped. `base`
/// is computed from `config` when not given.
RerunReport exclusion_window_rerun(const PanelDataset& dataset, const PipelineConfig& config,
                                   int exclude_days = 30, const EstimationResult* base = nullptr);

enum class DonorVariant { Baseline, NoIndustry, EuShareMatch, K10 };
std::string_view to_string(DonorVariant variant);
DonorVariant parse_donor_variant(std::string_view name);
/// The config `base` altered by one donor rule.
PipelineConfig apply_variant(const PipelineConfig& base, DonorVariant variant);

RerunReport donor_variant_rerun(const PanelDataset& dataset, const PipelineConfig& config,
                                DonorVariant variant, const EstimationResult* base = nullptr);

// --- control-group spillover checks --------------------------------------------

struct ShareDecile {
  int decile = 0;  // 0 = no EU traffic
  std::size_t n = 0;
  double share_min = 0.0;
  double share_max = 0.0;
  double pre_mean = 0.0;  // mean weekly non-EU TotalVisits
  double post_mean = 0.0;
  double difference = 0.0;
};

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_err = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
};

struct EuShareReport {
  std::vector<ShareDecile> deciles;
  std::vector<Coefficient> coefficients;  // intercept, log pre, EU share
  std::size_t n = 0;
};

struct ControlShare {
  std::string instance_id;
  double eu_share = 0.0;
  double pre_mean = 0.0;
  double post_mean = 0.0;
};

/// Decile table and OLS of ln(1 + post) on ln(1 + pre) and EU share with
/// classical standard errors. Needs at least four rows.
EuShareReport eu_share_analysis(std::span<const ControlShare> controls);
/// Collects control instances with their website's EU-traffic share; post
/// runs from the first post week to the end of `window`.
std::vector<ControlShare> control_shares(const PanelDataset& dataset, const Calendar& calendar,
                                         WindowLabel window = WindowLabel::M18);

struct DidCell {
  std::string website_location;
  std::string user_location;
  std::size_t n = 0;
  double pre = 0.0;  // average weekly visits
  double post = 0.0;
};

struct DidTable {
  std::string name;
  DidCell a;  // treated-side cell
  DidCell b;  // comparison cell
  double difference_a = 0.0;  // post - pre
  double difference_b = 0.0;
  double did = 0.0;  // difference_a - difference_b
};

DidTable did_table(std::string name, const DidCell& a, const DidCell& b);

/// Mean over instances of pre/post mean weekly TotalVisits.
DidCell did_cell(std::span<const WebsiteInstance* const> instances, const Calendar& calendar,
                 WindowLabel window, std::string website_location, std::string user_location);

/// Non-EU users on EU vs non-EU websites, and EU vs non-EU users on non-EU
/// websites. Throws std::invalid_argument when a cell is empty.
std::vector<DidTable> crossed_did_table(const PanelDataset& dataset, const Calendar& calendar,
                                        WindowLabel window = WindowLabel::M18);

}  // namespace panelfx
