// CSV and JSON serialisation of results. Numbers are written in shortest
// round-trip form so reruns produce identical bytes.
#pragma once

#include "panelfx/cohorts.hpp"
#include "panelfx/effects.hpp"
#include "panelfx/ingest.hpp"
#include "panelfx/pipeline.hpp"
#include "panelfx/revenue.hpp"
#include "panelfx/robustness.hpp"
#include "panelfx/simkit.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace panelfx::io {

std::string format_number(double v);

// --- estimation results ---------------------------------------------------------

void write_effects_csv(std::ostream& out, std::span<const EffectEstimate> effects);
/// Throws ParseError on malformed rows.
std::vector<EffectEstimate> read_effects_csv(std::istream& in);

/// Components are packed as "id:share:delta" joined by ';'.
void write_website_effects_csv(std::ostream& out, std::span<const WebsiteEffect> effects);
std::vector<WebsiteEffect> read_website_effects_csv(std::istream& in);

void write_intensity_csv(std::ostream& out, std::span<const IntensityEffect> effects);
void write_skipped_csv(std::ostream& out, std::span<const SkippedUnit> skipped);
std::string synth_fits_json(std::span<const SynthFit> fits);
std::string placebo_json(std::span<const PlaceboSummary> placebo);
std::string filter_report_json(const FilterReport& report);

// --- summaries -------------------------------------------------------------------

void write_cohorts_csv(std::ostream& out, std::span<const CohortSummary> rows);
/// Quantity metrics by window: median, mean, share significant, share
/// negative as rows per metric, windows as columns.
void write_quantity_table_csv(std::ostream& out, std::span<const CohortSummary> overall);
/// Intensity metrics by group (all / gain / lose) with share, median and
/// mean per window.
void write_intensity_table_csv(std::ostream& out, std::span<const GainLoseTable> tables);
void write_gain_lose_csv(std::ostream& out, std::span<const GainLoseTable> tables);
std::string cohorts_json(std::span<const CohortSummary> rows);
std::string gain_lose_json(std::span<const GainLoseTable> tables);

/// Tidy plot series: figure, series, x, y.
void write_effect_distribution_csv(std::ostream& out, std::span<const WebsiteEffect> effects,
                                   MetricKind metric);
void write_cohort_plot_csv(std::ostream& out, std::span<const CohortSummary> rows);

std::string revenue_json(const RevenueModel& model, double delta, const RevenueImpact& impact);

// --- simulation --------------------------------------------------------------------

std::string ground_truth_json(const GroundTruth& truth);
GroundTruth read_ground_truth_json(std::istream& in);
std::string recovery_json(const RecoveryReport& report);

// --- robustness ----------------------------------------------------------------------

void write_sweep_csv(std::ostream& out, const SweepReport& report);
std::string sweep_json(const SweepReport& report);
void write_rerun_csv(std::ostream& out, const RerunReport& report);
std::string rerun_json(const RerunReport& report);
void write_eu_share_deciles_csv(std::ostream& out, const EuShareReport& report);
void write_eu_share_regression_csv(std::ostream& out, const EuShareReport& report);
std::string eu_share_json(const EuShareReport& report);
void write_did_csv(std::ostream& out, std::span<const DidTable> tables);
std::string did_json(std::span<const DidTable> tables);

}  // namespace panelfx::io
