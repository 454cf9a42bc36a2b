// Core panel types: metrics, calendar, series, website-instances and
// analysis windows. Everything downstream is expressed in these terms.
#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace panelfx {

using Date = std::chrono::sys_days;

Date make_date(int year, unsigned month, unsigned day);
/// Parses YYYY-MM-DD. Throws std::invalid_argument on anything else.
Date parse_iso_date(std::string_view text);
std::string format_date(Date date);

enum class MetricKind { TotalVisits, UniqueVisitors, PageImpressions, TimeOnWebsite, BouncingVisitors };
enum class Cadence { Weekly, Monthly };
enum class Base { EU, NonEU };
enum class Treatment { Treated, Control };
enum class IntensityMetric { VisitsPerUnique, PageImpressionsPerVisit, TimePerVisit, BounceRate };
enum class WindowLabel { M3, M6, M9, M12, M18 };
enum class Scale { Raw, Log1p };

inline constexpr std::array<MetricKind, 5> kAllMetrics{
    MetricKind::TotalVisits, MetricKind::UniqueVisitors, MetricKind::PageImpressions,
    MetricKind::TimeOnWebsite, MetricKind::BouncingVisitors};
inline constexpr std::array<IntensityMetric, 4> kAllIntensityMetrics{
    IntensityMetric::VisitsPerUnique, IntensityMetric::PageImpressionsPerVisit,
    IntensityMetric::TimePerVisit, IntensityMetric::BounceRate};
inline constexpr std::array<WindowLabel, 5> kAllWindows{
    WindowLabel::M3, WindowLabel::M6, WindowLabel::M9, WindowLabel::M12, WindowLabel::M18};

constexpr Cadence cadence_of(MetricKind metric) {
  return metric == MetricKind::UniqueVisitors ? Cadence::Monthly : Cadence::Weekly;
}

// Ratio definitions of the intensity metrics. TotalVisits is the numerator
// only for VisitsPerUnique; for the others it is the denominator.
struct IntensityRatio {
  MetricKind numerator;
  MetricKind denominator;
};
constexpr IntensityRatio ratio_of(IntensityMetric metric) {
  switch (metric) {
    case IntensityMetric::VisitsPerUnique:
      return {MetricKind::TotalVisits, MetricKind::UniqueVisitors};
    case IntensityMetric::PageImpressionsPerVisit:
      return {MetricKind::PageImpressions, MetricKind::TotalVisits};
    case IntensityMetric::TimePerVisit:
      return {MetricKind::TimeOnWebsite, MetricKind::TotalVisits};
    case IntensityMetric::BounceRate:
      return {MetricKind::BouncingVisitors, MetricKind::TotalVisits};
  }
  return {MetricKind::TotalVisits, MetricKind::TotalVisits};
}

/// The quantity metric whose gain/loss splits websites for this intensity metric.
constexpr MetricKind split_quantity_of(IntensityMetric metric) {
  return metric == IntensityMetric::VisitsPerUnique ? MetricKind::UniqueVisitors
                                                    : MetricKind::TotalVisits;
}

/// Intensity metric paired with a quantity metric; none for TotalVisits.
std::optional<IntensityMetric> intensity_of(MetricKind metric);

std::string_view to_string(MetricKind metric);
std::string_view to_string(Cadence cadence);
std::string_view to_string(Base base);
std::string_view to_string(Treatment treatment);
std::string_view to_string(IntensityMetric metric);
std::string_view to_string(WindowLabel label);

MetricKind parse_metric(std::string_view name);
Base parse_base(std::string_view name);
IntensityMetric parse_intensity_metric(std::string_view name);
/// Accepts "3m", "6m", "9m", "12m", "18m".
WindowLabel parse_window_label(std::string_view name);
std::vector<WindowLabel> parse_window_list(std::string_view comma_separated);

Treatment assign_treatment(Base website_base, Base user_base) noexcept;

/// Inclusive range of 1-based period indices.
struct PeriodRange {
  int first = 1;
  int last = 0;
  int size() const { return last >= first ? last - first + 1 : 0; }
  bool contains(int period) const { return period >= first && period <= last; }
  bool operator==(const PeriodRange&) const = default;
};

// Week 1 starts on the anchor date; month 1 is the calendar month holding the
// anchor. The week containing the enforcement date is the first post week and
// the month containing it is the first post month.
class Calendar {
 public:
  static Date default_anchor();
  static Date default_enforcement();

  Calendar();
  Calendar(Date anchor, Date enforcement);

  Date anchor() const { return anchor_; }
  Date enforcement() const { return enforcement_; }

  int week_of(Date date) const;
  Date week_start(int week) const;
  Date week_end(int week) const;

  int month_of(Date date) const;
  Date month_start(int month) const;
  Date month_end(int month) const;

  int period_of(Date date, Cadence cadence) const;
  Date period_start(int period, Cadence cadence) const;
  Date period_end(int period, Cadence cadence) const;

  int enforcement_week() const { return week_of(enforcement_); }
  int enforcement_month() const { return month_of(enforcement_); }
  PeriodRange pre_weeks() const { return {1, enforcement_week() - 1}; }
  PeriodRange pre_months() const { return {1, enforcement_month() - 1}; }
  PeriodRange pre_periods(Cadence cadence) const;

  /// Last calendar month that ends on or before the end of `week`.
  int last_full_month_within(int week) const;

  bool operator==(const Calendar&) const = default;

 private:
  Date anchor_;
  Date enforcement_;
};

class TimeSeries {
 public:
  TimeSeries() = default;
  /// Validates length >= 1 and finite values; raw series must be non-negative.
  TimeSeries(MetricKind metric, Date start, std::vector<double> values,
             std::vector<std::size_t> flagged = {}, Scale scale = Scale::Raw);

  MetricKind metric() const { return metric_; }
  Cadence cadence() const { return cadence_of(metric_); }
  Scale scale() const { return scale_; }
  Date start() const { return start_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  /// Indices that were gaps in the source and hold explicit zeros.
  std::span<const std::size_t> flagged() const { return flagged_; }
  Date date_at(std::size_t index) const;

  /// Period indices covered, given the calendar.
  PeriodRange periods(const Calendar& calendar) const;
  /// Values for periods [range.first, range.last]; throws std::out_of_range
  /// if the series does not cover them.
  std::vector<double> slice(const Calendar& calendar, PeriodRange range) const;

 private:
  MetricKind metric_ = MetricKind::TotalVisits;
  Date start_{};
  std::vector<double> values_;
  std::vector<std::size_t> flagged_;
  Scale scale_ = Scale::Raw;
};

/// ln(v + 1) elementwise. Throws std::invalid_argument naming the first
/// negative index.
TimeSeries log1p_transform(const TimeSeries& series);
std::vector<double> log1p_values(std::span<const double> values);

struct WebsiteInstance {
  std::string instance_id;
  std::string website_id;
  Base user_base = Base::EU;
  Base website_base = Base::EU;
  std::string industry;
  long global_rank = 1;
  long country_rank = 1;
  long industry_rank = 1;
  std::string user_country;
  std::map<MetricKind, TimeSeries> series;

  Treatment treatment() const { return assign_treatment(website_base, user_base); }
  bool treated() const { return treatment() == Treatment::Treated; }
  const TimeSeries* find(MetricKind metric) const;
};

struct AnalysisWindow {
  WindowLabel label = WindowLabel::M3;
  PeriodRange pre_weeks;
  int post_end_week = 0;
  Date enforcement_date{};

  /// Pre-period for the cadence (weeks, or whole months before enforcement).
  PeriodRange pre(Cadence cadence, const Calendar& calendar) const;
  /// Last analysed period for the cadence.
  int post_end(Cadence cadence, const Calendar& calendar) const;
  /// Periods 1..post_end(cadence).
  PeriodRange span(Cadence cadence, const Calendar& calendar) const {
    return {1, post_end(cadence, calendar)};
  }
};

/// Weeks after the last pre week at which each window closes.
int post_offset_weeks(WindowLabel label);
AnalysisWindow window_bounds(WindowLabel label, const Calendar& calendar = Calendar{});
AnalysisWindow window_bounds(std::string_view label, const Calendar& calendar = Calendar{});

// One row of the two-unit panel regression. The interaction term is always
// the product of the two dummies.
struct DesignRow {
  double eu = 0.0;
  double post = 0.0;
  double treated() const { return eu * post; }
};

}  // namespace panelfx
