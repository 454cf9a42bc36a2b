// End-to-end estimation: for every treated instance and metric, select
// donors, fit the synthetic control once on the pre-period, then estimate
// the effect for each expanding window; merge to websites; derive intensity
// effects. Output order is fixed by sorted keys, independent of threads.
#pragma once

#include "panelfx/effects.hpp"
#include "panelfx/ingest.hpp"
#include "panelfx/panel_model.hpp"
#include "panelfx/synthcontrol.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace panelfx {

struct PipelineConfig {
  Calendar calendar;
  std::vector<WindowLabel> windows{kAllWindows.begin(), kAllWindows.end()};
  std::vector<MetricKind> metrics{kAllMetrics.begin(), kAllMetrics.end()};
  DonorSelection donors;
  WeightMode weight_mode = WeightMode::Simplex;
  Inference inference = Inference::HC1;
  std::size_t n_placebo = 99;
  /// Drop periods overlapping +-exclude_days around enforcement (0 = off).
  int exclude_days = 0;
  /// Unique-visitor analysis runs on instances that never fall below this.
  bool apply_unique_floor = true;
  double unique_floor = 5000.0;
  std::size_t threads = 1;

  /// Flat key/value view used for config echoes and diffs. `threads` is
  /// left out because it never changes results.
  std::vector<std::pair<std::string, std::string>> describe() const;
};

/// Keys whose values differ, formatted "key: a -> b".
std::vector<std::string> config_diff(const PipelineConfig& base, const PipelineConfig& variant);

struct SynthFit {
  std::string instance_id;
  MetricKind metric = MetricKind::TotalVisits;
  DonorPool pool;
  SynthWeights weights;
};

struct SkippedUnit {
  std::string instance_id;
  MetricKind metric = MetricKind::TotalVisits;
  std::string reason;
};

struct PlaceboSummary {
  MetricKind metric = MetricKind::TotalVisits;
  std::size_t requested = 0;
  std::size_t used = 0;
  std::size_t shortfall = 0;
};

struct EstimationResult {
  std::vector<EffectEstimate> effects;  // by (instance, metric, window)
  std::vector<SynthFit> fits;           // by (instance, metric)
  std::vector<SkippedUnit> skipped;
  std::vector<PlaceboSummary> placebo;
  std::vector<WebsiteEffect> website_effects;  // by (website, metric, window)
  std::vector<IntensityEffect> intensity_effects;
};

/// Periods 1..last, true where the period overlaps the exclusion band.
std::vector<bool> excluded_periods(const Calendar& calendar, Cadence cadence, int last,
                                   int exclude_days);

EstimationResult run_estimation(const PanelDataset& dataset, const PipelineConfig& config);

/// Merges instance effects into website effects per (metric, window) using
/// pre-period TotalVisits shares of the instances that carry an effect.
std::vector<WebsiteEffect> merge_websites(const PanelDataset& dataset,
                                          std::span<const EffectEstimate> effects,
                                          const Calendar& calendar);

std::vector<double> website_deltas(std::span<const WebsiteEffect> effects, MetricKind metric,
                                   WindowLabel window);

/// Runs body(i) for i in [0, n) on up to `threads` workers. The first
/// exception by index is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace panelfx
