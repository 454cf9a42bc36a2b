// Synthetic panels with a known injected effect, used to check that the
// estimation stack recovers what was put in.
#pragma once

#include "panelfx/effects.hpp"
#include "panelfx/ingest.hpp"
#include "panelfx/panel_model.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace panelfx {

enum class EffectShape { Constant, LinearRamp };
std::string_view to_string(EffectShape shape);
EffectShape parse_effect_shape(std::string_view name);

struct EffectProfile {
  EffectShape shape = EffectShape::Constant;
  double delta = 0.0;
  /// Ramp reaches `delta` at this week and stays there.
  int ramp_end_week = 125;

  /// Effect in `week`; zero before the first post week.
  double at(int week, int first_post_week) const;
};

struct SimConfig {
  std::size_t n_treated = 100;
  std::size_t n_control = 100;
  int weeks = 125;
  Calendar calendar;
  double base_level = 10.0;   // mean log weekly visits
  double unit_sigma = 0.5;    // spread of unit levels
  double seasonality_amplitude = 0.1;
  double seasonality_period = 52.0;  // weeks; 0 turns seasonality off
  double noise_sigma = 0.05;
  EffectProfile effect;
  std::vector<std::string> industries{"news", "shopping", "technology", "travel"};
  // Usage-intensity baselines, per-ratio noise and injected intensity effects.
  double visits_per_unique = 2.5;
  double pages_per_visit = 4.0;
  double minutes_per_visit = 3.5;
  double bounce_rate = 0.45;
  double intensity_sigma = 0.02;
  std::map<IntensityMetric, double> intensity_effects;
  /// Share of treated websites that also get a non-EU-user instance, and of
  /// control websites that also get an EU-user instance.
  double dual_instance_fraction = 0.0;
  double control_companion_fraction = 0.0;
  /// Log-level gap of the companion instance below its website's main one.
  double companion_level_gap = 1.5;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TruthEntry {
  std::string instance_id;
  WindowLabel window = WindowLabel::M3;
  double delta_weekly = 0.0;
  double delta_monthly = 0.0;
};

/// Average multiplicative effect over each window's post period:
/// exp(mean ln(1 + effect)) - 1, per instance and window.
struct GroundTruth {
  std::vector<TruthEntry> entries;  // by (instance, window)

  const TruthEntry* find(std::string_view instance_id, WindowLabel window) const;
  /// Truth on the cadence of `metric`.
  double delta(std::string_view instance_id, MetricKind metric, WindowLabel window) const;
};

struct SimPanel {
  PanelDataset dataset;
  GroundTruth truth;
};

/// Throws std::invalid_argument on an invalid config. Output depends only on
/// the config, not on `threads`.
SimPanel generate_panel(const SimConfig& config, std::size_t threads = 1);

/// Truth of a profile for one window, weekly and monthly cadence.
TruthEntry window_truth(const EffectProfile& profile, const Calendar& calendar, WindowLabel window);

struct RecoveryRow {
  WindowLabel window = WindowLabel::M3;
  std::size_t n = 0;
  double mean_estimate = 0.0;
  double mean_truth = 0.0;
  double bias = 0.0;
  double mae = 0.0;
  double coverage = 0.0;
};

struct RecoveryReport {
  std::vector<RecoveryRow> windows;
  std::size_t n = 0;
  double bias = 0.0;
  double mae = 0.0;
  double coverage = 0.0;
};

/// Every estimate must have a truth entry; throws std::invalid_argument
/// otherwise. Coverage counts truths inside [ci_low, ci_high].
RecoveryReport evaluate_recovery(std::span<const EffectEstimate> estimates, const GroundTruth& truth);

}  // namespace panelfx
