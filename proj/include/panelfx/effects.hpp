// Treatment effects: the two-unit panel regression against a synthetic
// control, placebo inference, website merging and intensity algebra.
#pragma once

#include "panelfx/ingest.hpp"
#include "panelfx/panel_model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace panelfx {

enum class Inference { HC1, Placebo };
std::string_view to_string(Inference inference);
Inference parse_inference(std::string_view name);

struct EffectEstimate {
  std::string instance_id;
  MetricKind metric = MetricKind::TotalVisits;
  WindowLabel window = WindowLabel::M3;
  double beta3 = 0.0;  // log points
  double delta = 0.0;  // exp(beta3) - 1
  double std_err = 0.0;
  double p_value = 1.0;
  bool significant_5pct = false;
  double dof = 0.0;
  /// 95% interval on the relative (delta) scale.
  double ci_low = 0.0;
  double ci_high = 0.0;
  Inference inference = Inference::HC1;
  std::size_t n_pre = 0;
  std::size_t n_post = 0;
};

/// Replaces the p-value (and significance flag) keeping the other fields.
void set_p_value(EffectEstimate& estimate, double p_value, Inference inference);

/// Fits ln(y+1) = b0 + b1*EU + b2*Post + b3*EU*Post by OLS on the stacked
/// panel (treated rows EU = 1, synthetic rows EU = 0) with HC1 standard
/// errors. `post[i]` marks period i as post-treatment. Needs >= 2 pre and
/// >= 2 post periods; throws std::invalid_argument otherwise and
/// std::domain_error on a degenerate design.
EffectEstimate estimate_effect(std::span<const double> treated_log,
                               std::span<const double> synth_log,
                               std::span<const std::uint8_t> post);
/// First `n_pre` periods are pre, the rest post.
EffectEstimate estimate_effect(std::span<const double> treated_log,
                               std::span<const double> synth_log, std::size_t n_pre);

struct PlaceboInference {
  double p_value = 1.0;
  std::size_t n_used = 0;
  std::size_t shortfall = 0;  // requested minus available
};

/// p = (1 + #{|placebo| >= |treated|}) / (1 + n) over the first
/// min(n_requested, placebo.size()) placebo coefficients.
PlaceboInference placebo_p_value(double treated_beta3, std::span<const double> placebo_beta3,
                                 std::size_t n_requested);

struct InstanceDelta {
  std::string instance_id;
  double delta = 0.0;
  double p_value = 1.0;
};

struct WebsiteComponent {
  std::string instance_id;
  double delta = 0.0;
  double share = 0.0;
};

struct WebsiteEffect {
  std::string website_id;
  MetricKind metric = MetricKind::TotalVisits;
  WindowLabel window = WindowLabel::M3;
  double delta = 0.0;
  /// p-value of the component with the largest share.
  double p_value = 1.0;
  std::vector<WebsiteComponent> components;
};

/// Share-weighted mean of instance deltas. Every instance with a nonzero
/// share needs an effect and every effect needs a share; throws
/// std::invalid_argument otherwise.
WebsiteEffect merge_website(std::span<const InstanceDelta> effects, const InstanceShares& shares,
                            MetricKind metric = MetricKind::TotalVisits,
                            WindowLabel window = WindowLabel::M3);

/// (1 + delta_quantity) / (1 + delta_total_visits) - 1. Throws
/// std::domain_error when delta_total_visits <= -1.
double intensity_effect(double delta_quantity, double delta_total_visits);

/// Intensity change from the two deltas of its ratio (numerator over
/// denominator as in ratio_of()).
double intensity_effect(IntensityMetric metric, double delta_numerator, double delta_denominator);

struct IntensityEffect {
  std::string website_id;
  IntensityMetric intensity_metric = IntensityMetric::VisitsPerUnique;
  WindowLabel window = WindowLabel::M3;
  double delta = 0.0;
  double delta_numerator = 0.0;
  double delta_denominator = 0.0;
};

/// Intensity effects for every website with both quantity deltas.
std::vector<IntensityEffect> derive_intensity(std::span<const WebsiteEffect> website_effects);

struct GroupSummary {
  std::size_t n = 0;
  double share = 0.0;
  std::optional<double> median;
  std::optional<double> mean;
};

struct GainLoseTable {
  IntensityMetric intensity_metric = IntensityMetric::VisitsPerUnique;
  MetricKind quantity_metric = MetricKind::UniqueVisitors;
  WindowLabel window = WindowLabel::M3;
  GroupSummary all;
  GroupSummary gain;  // quantity delta >= 0
  GroupSummary lose;  // quantity delta < 0
};

struct GainLoseInput {
  std::string website_id;
  double quantity_delta = 0.0;
  double intensity_delta = 0.0;
};

GainLoseTable gain_lose_split(std::span<const GainLoseInput> websites,
                              IntensityMetric intensity_metric, WindowLabel window);

/// Joins website effects and intensity effects and splits for every
/// (intensity metric, window) present.
std::vector<GainLoseTable> gain_lose_tables(std::span<const WebsiteEffect> website_effects,
                                            std::span<const IntensityEffect> intensity_effects);

}  // namespace panelfx
