#include "panelfx/panel_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace panelfx {

namespace chr = std::chrono;

Date make_date(int year, unsigned month, unsigned day) {
  const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  if (!ymd.ok()) {
    throw std::invalid_argument("invalid calendar date");
  }
  return Date{ymd};
}

Date parse_iso_date(std::string_view text) {
  auto bad = [&] { return std::invalid_argument("invalid ISO-8601 date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  int year = 0;
  unsigned month = 0;
  unsigned day = 0;
  auto parse = [&](std::string_view part, auto& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc{} || ptr != part.data() + part.size()) throw bad();
  };
  parse(text.substr(0, 4), year);
  parse(text.substr(5, 2), month);
  parse(text.substr(8, 2), day);
  const chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
  if (!ymd.ok()) throw bad();
  return Date{ymd};
}

std::string format_date(Date date) {
  const chr::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<IntensityMetric> intensity_of(MetricKind metric) {
  switch (metric) {
    case MetricKind::TotalVisits: return std::nullopt;
    case MetricKind::UniqueVisitors: return IntensityMetric::VisitsPerUnique;
    case MetricKind::PageImpressions: return IntensityMetric::PageImpressionsPerVisit;
    case MetricKind::TimeOnWebsite: return IntensityMetric::TimePerVisit;
    case MetricKind::BouncingVisitors: return IntensityMetric::BounceRate;
  }
  return std::nullopt;
}

std::string_view to_string(MetricKind metric) {
  switch (metric) {
    case MetricKind::TotalVisits: return "total_visits";
    case MetricKind::UniqueVisitors: return "unique_visitors";
    case MetricKind::PageImpressions: return "page_impressions";
    case MetricKind::TimeOnWebsite: return "time_on_site_min";
    case MetricKind::BouncingVisitors: return "bouncing_visitors";
  }
  return "?";
}

std::string_view to_string(Cadence cadence) {
  return cadence == Cadence::Weekly ? "weekly" : "monthly";
}

std::string_view to_string(Base base) { return base == Base::EU ? "EU" : "NONEU"; }

std::string_view to_string(Treatment treatment) {
  return treatment == Treatment::Treated ? "treated" : "control";
}

std::string_view to_string(IntensityMetric metric) {
  switch (metric) {
    case IntensityMetric::VisitsPerUnique: return "visits_per_unique";
    case IntensityMetric::PageImpressionsPerVisit: return "page_impressions_per_visit";
    case IntensityMetric::TimePerVisit: return "time_per_visit";
    case IntensityMetric::BounceRate: return "bounce_rate";
  }
  return "?";
}

std::string_view to_string(WindowLabel label) {
  switch (label) {
    case WindowLabel::M3: return "3m";
    case WindowLabel::M6: return "6m";
    case WindowLabel::M9: return "9m";
    case WindowLabel::M12: return "12m";
    case WindowLabel::M18: return "18m";
  }
  return "?";
}

MetricKind parse_metric(std::string_view name) {
  for (auto metric : kAllMetrics) {
    if (to_string(metric) == name) return metric;
  }
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

Base parse_base(std::string_view name) {
  if (name == "EU") return Base::EU;
  if (name == "NONEU") return Base::NonEU;
  throw std::invalid_argument("unknown base '" + std::string(name) + "' (expected EU or NONEU)");
}

IntensityMetric parse_intensity_metric(std::string_view name) {
  for (auto metric : kAllIntensityMetrics) {
    if (to_string(metric) == name) return metric;
  }
  throw std::invalid_argument("unknown intensity metric '" + std::string(name) + "'");
}

WindowLabel parse_window_label(std::string_view name) {
  for (auto label : kAllWindows) {
    if (to_string(label) == name) return label;
  }
  throw std::invalid_argument("unknown window label '" + std::string(name) +
                              "' (expected 3m, 6m, 9m, 12m or 18m)");
}

std::vector<WindowLabel> parse_window_list(std::string_view text) {
  std::vector<WindowLabel> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    auto item = text.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const auto label = parse_window_label(item);
      if (std::find(out.begin(), out.end(), label) == out.end()) out.push_back(label);
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Treatment assign_treatment(Base website_base, Base user_base) noexcept {
  return website_base == Base::NonEU && user_base == Base::NonEU ? Treatment::Control
                                                                 : Treatment::Treated;
}

// --- Calendar -------------------------------------------------------------

namespace {

int floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return static_cast<int>(q);
}

int months_since_epoch(Date date) {
  const chr::year_month_day ymd{date};
  return static_cast<int>(ymd.year()) * 12 + static_cast<int>(static_cast<unsigned>(ymd.month())) - 1;
}

Date first_of_month_index(int index) {
  const int year = floor_div(index, 12);
  const unsigned month = static_cast<unsigned>(index - year * 12) + 1;
  return Date{chr::year{year} / chr::month{month} / chr::day{1}};
}

}  // namespace

Date Calendar::default_anchor() { return make_date(2017, 7, 1); }
Date Calendar::default_enforcement() { return make_date(2018, 5, 25); }

Calendar::Calendar() : Calendar(default_anchor(), default_enforcement()) {}

Calendar::Calendar(Date anchor, Date enforcement) : anchor_(anchor), enforcement_(enforcement) {
  if (week_of(enforcement_) < 3 || month_of(enforcement_) < 2) {
    throw std::invalid_argument("enforcement date must leave at least two pre weeks and one pre month");
  }
}

int Calendar::week_of(Date date) const {
  return floor_div((date - anchor_).count(), 7) + 1;
}

Date Calendar::week_start(int week) const { return anchor_ + chr::days{7LL * (week - 1)}; }
Date Calendar::week_end(int week) const { return week_start(week) + chr::days{6}; }

int Calendar::month_of(Date date) const {
  return months_since_epoch(date) - months_since_epoch(anchor_) + 1;
}

Date Calendar::month_start(int month) const {
  return first_of_month_index(months_since_epoch(anchor_) + month - 1);
}

Date Calendar::month_end(int month) const { return month_start(month + 1) - chr::days{1}; }

int Calendar::period_of(Date date, Cadence cadence) const {
  return cadence == Cadence::Weekly ? week_of(date) : month_of(date);
}

Date Calendar::period_start(int period, Cadence cadence) const {
  return cadence == Cadence::Weekly ? week_start(period) : month_start(period);
}

Date Calendar::period_end(int period, Cadence cadence) const {
  return cadence == Cadence::Weekly ? week_end(period) : month_end(period);
}

PeriodRange Calendar::pre_periods(Cadence cadence) const {
  return cadence == Cadence::Weekly ? pre_weeks() : pre_months();
}

int Calendar::last_full_month_within(int week) const {
  const Date end = week_end(week);
  int month = month_of(end);
  if (month_end(month) > end) --month;
  return month;
}

// --- TimeSeries ------------------------------------------------------------

TimeSeries::TimeSeries(MetricKind metric, Date start, std::vector<double> values,
                       std::vector<std::size_t> flagged, Scale scale)
    : metric_(metric), start_(start), values_(std::move(values)), flagged_(std::move(flagged)),
      scale_(scale) {
  if (values_.empty()) {
    throw std::invalid_argument("time series must hold at least one value");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument("non-finite value at index " + std::to_string(i));
    }
    if (scale_ == Scale::Raw && values_[i] < 0.0) {
      throw std::invalid_argument("negative value at index " + std::to_string(i));
    }
  }
  if (cadence() == Cadence::Monthly) {
    const chr::year_month_day ymd{start_};
    start_ = Date{ymd.year() / ymd.month() / chr::day{1}};
  }
}

Date TimeSeries::date_at(std::size_t index) const {
  if (cadence() == Cadence::Weekly) {
    return start_ + chr::days{7LL * static_cast<long long>(index)};
  }
  return first_of_month_index(months_since_epoch(start_) + static_cast<int>(index));
}

PeriodRange TimeSeries::periods(const Calendar& calendar) const {
  const int first = calendar.period_of(start_, cadence());
  return {first, first + static_cast<int>(values_.size()) - 1};
}

std::vector<double> TimeSeries::slice(const Calendar& calendar, PeriodRange range) const {
  const PeriodRange covered = periods(calendar);
  if (range.first < covered.first || range.last > covered.last) {
    throw std::out_of_range("series for " + std::string(to_string(metric_)) + " covers periods " +
                            std::to_string(covered.first) + ".." + std::to_string(covered.last) +
                            ", need " + std::to_string(range.first) + ".." +
                            std::to_string(range.last));
  }
  const auto offset = static_cast<std::size_t>(range.first - covered.first);
  return {values_.begin() + static_cast<std::ptrdiff_t>(offset),
          values_.begin() + static_cast<std::ptrdiff_t>(offset + range.size())};
}

std::vector<double> log1p_values(std::span<const double> values) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0.0) {
      throw std::invalid_argument("log1p_transform: negative value at index " + std::to_string(i));
    }
    out[i] = std::log1p(values[i]);
  }
  return out;
}

TimeSeries log1p_transform(const TimeSeries& series) {
  if (series.scale() != Scale::Raw) {
    throw std::invalid_argument("log1p_transform: series is already on the log scale");
  }
  auto flagged = std::vector<std::size_t>(series.flagged().begin(), series.flagged().end());
  return TimeSeries(series.metric(), series.start(), log1p_values(series.values()),
                    std::move(flagged), Scale::Log1p);
}

const TimeSeries* WebsiteInstance::find(MetricKind metric) const {
  const auto it = series.find(metric);
  return it == series.end() ? nullptr : &it->second;
}

// --- Windows ---------------------------------------------------------------

int post_offset_weeks(WindowLabel label) {
  switch (label) {
    case WindowLabel::M3: return 14;
    case WindowLabel::M6: return 27;
    case WindowLabel::M9: return 40;
    case WindowLabel::M12: return 53;
    case WindowLabel::M18: return 79;
  }
  return 0;
}

PeriodRange AnalysisWindow::pre(Cadence cadence, const Calendar& calendar) const {
  return cadence == Cadence::Weekly ? pre_weeks : calendar.pre_months();
}

int AnalysisWindow::post_end(Cadence cadence, const Calendar& calendar) const {
  return cadence == Cadence::Weekly ? post_end_week : calendar.last_full_month_within(post_end_week);
}

AnalysisWindow window_bounds(WindowLabel label, const Calendar& calendar) {
  AnalysisWindow window;
  window.label = label;
  window.pre_weeks = calendar.pre_weeks();
  window.post_end_week = window.pre_weeks.last + post_offset_weeks(label);
  window.enforcement_date = calendar.enforcement();
  return window;
}

AnalysisWindow window_bounds(std::string_view label, const Calendar& calendar) {
  return window_bounds(parse_window_label(label), calendar);
}

}  // namespace panelfx
