#include "panelfx/ingest.hpp"

#include "panelfx/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace panelfx {

namespace chr = std::chrono;

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

// --- PanelDataset ------------------------------------------------------------

PanelDataset::PanelDataset(std::vector<WebsiteInstance> instances,
                           std::vector<SourceDigest> provenance,
                           std::vector<std::string> collapsed)
    : instances_(std::move(instances)),
      provenance_(std::move(provenance)),
      collapsed_(std::move(collapsed)) {
  std::sort(instances_.begin(), instances_.end(),
            [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const auto& inst = instances_[i];
    if (i > 0 && instances_[i - 1].instance_id == inst.instance_id) {
      throw std::invalid_argument("duplicate instance id '" + inst.instance_id + "'");
    }
    auto& members = websites_[inst.website_id];
    for (auto j : members) {
      if (instances_[j].user_base == inst.user_base) {
        throw std::invalid_argument("website '" + inst.website_id +
                                    "' has two instances for user base " +
                                    std::string(to_string(inst.user_base)));
      }
    }
    members.push_back(i);
    if (members.size() > 2) {
      throw std::invalid_argument("website '" + inst.website_id + "' has more than two instances");
    }
  }
}

const WebsiteInstance* PanelDataset::find(std::string_view instance_id) const {
  const auto it = std::lower_bound(
      instances_.begin(), instances_.end(), instance_id,
      [](const WebsiteInstance& inst, std::string_view id) { return inst.instance_id < id; });
  return it != instances_.end() && it->instance_id == instance_id ? &*it : nullptr;
}

std::vector<const WebsiteInstance*> PanelDataset::website(std::string_view website_id) const {
  std::vector<const WebsiteInstance*> out;
  const auto it = websites_.find(std::string(website_id));
  if (it == websites_.end()) return out;
  for (auto i : it->second) out.push_back(&instances_[i]);
  return out;
}

// --- CSV parsing -------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 12> kColumns{
    "instance_id", "website_id",    "user_base",     "website_base", "user_country", "industry",
    "global_rank", "country_rank",  "industry_rank", "date",         "metric",       "value"};

enum Col { kInstance, kWebsite, kUserBase, kWebsiteBase, kCountry, kIndustry, kGlobalRank,
           kCountryRank, kIndustryRank, kDate, kMetric, kValue };

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(delim, pos);
    auto field = line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    while (!field.empty() && (field.front() == ' ' || field.front() == '"')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '"' || field.back() == '\r')) {
      field.remove_suffix(1);
    }
    out.push_back(field);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

struct PendingInstance {
  WebsiteInstance meta;
  std::size_t first_line = 0;
  std::map<MetricKind, std::map<Date, double>> points;
};

Date normalise_date(Date date, MetricKind metric) {
  if (cadence_of(metric) == Cadence::Monthly) {
    const chr::year_month_day ymd{date};
    return Date{ymd.year() / ymd.month() / chr::day{1}};
  }
  return date;
}

TimeSeries build_series(MetricKind metric, const std::map<Date, double>& points,
                        const std::string& instance_id) {
  const Date start = points.begin()->first;
  std::vector<double> values;
  std::vector<std::size_t> flagged;
  if (cadence_of(metric) == Cadence::Weekly) {
    for (const auto& [date, value] : points) {
      const auto offset = (date - start).count();
      if (offset % 7 != 0) {
        throw std::invalid_argument("instance '" + instance_id + "' metric " +
                                    std::string(to_string(metric)) + ": date " + format_date(date) +
                                    " is not on the weekly grid starting " + format_date(start));
      }
      const auto index = static_cast<std::size_t>(offset / 7);
      while (values.size() < index) {
        flagged.push_back(values.size());
        values.push_back(0.0);
      }
      values.push_back(value);
    }
  } else {
    auto month_index = [](Date d) {
      const chr::year_month_day ymd{d};
      return static_cast<int>(ymd.year()) * 12 + static_cast<int>(static_cast<unsigned>(ymd.month()));
    };
    for (const auto& [date, value] : points) {
      const auto index = static_cast<std::size_t>(month_index(date) - month_index(start));
      while (values.size() < index) {
        flagged.push_back(values.size());
        values.push_back(0.0);
      }
      values.push_back(value);
    }
  }
  return TimeSeries(metric, start, std::move(values), std::move(flagged));
}

bool same_meta(const WebsiteInstance& a, const WebsiteInstance& b) {
  return a.website_id == b.website_id && a.user_base == b.user_base &&
         a.website_base == b.website_base && a.user_country == b.user_country &&
         a.industry == b.industry && a.global_rank == b.global_rank &&
         a.country_rank == b.country_rank && a.industry_rank == b.industry_rank;
}

}  // namespace

PanelDataset parse_panel(const std::filesystem::path& path, const SchemaConfig& schema) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open panel file '" + path.string() + "'");
  }
  return parse_panel(file, path.string(), schema);
}

PanelDataset parse_panel(std::istream& in, const std::string& source_name,
                         const SchemaConfig& schema) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  SourceDigest digest{source_name, fnv1a64_hex(text), text.size()};

  std::map<std::string, PendingInstance> pending;
  std::array<std::size_t, kColumns.size()> index{};
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    const auto fields = split(line, schema.delimiter);
    if (!have_header) {
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto it = std::find(fields.begin(), fields.end(), kColumns[c]);
        if (it == fields.end()) {
          throw ParseError(line_no, "header is missing column '" + std::string(kColumns[c]) + "'");
        }
        index[c] = static_cast<std::size_t>(it - fields.begin());
      }
      have_header = true;
      continue;
    }

    const auto need = *std::max_element(index.begin(), index.end()) + 1;
    if (fields.size() < need) {
      throw ParseError(line_no, "expected " + std::to_string(kColumns.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    auto field = [&](Col c) { return fields[index[c]]; };

    WebsiteInstance meta;
    try {
      meta.instance_id = std::string(field(kInstance));
      meta.website_id = std::string(field(kWebsite));
      if (meta.instance_id.empty() || meta.website_id.empty()) {
        throw std::invalid_argument("empty instance_id or website_id");
      }
      meta.user_base = parse_base(field(kUserBase));
      meta.website_base = parse_base(field(kWebsiteBase));
      meta.user_country = std::string(field(kCountry));
      meta.industry = std::string(field(kIndustry));
      if (!parse_number(field(kGlobalRank), meta.global_rank) ||
          !parse_number(field(kCountryRank), meta.country_rank) ||
          !parse_number(field(kIndustryRank), meta.industry_rank) || meta.global_rank < 1 ||
          meta.country_rank < 1 || meta.industry_rank < 1) {
        throw std::invalid_argument("ranks must be positive integers");
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }

    MetricKind metric;
    Date date;
    double value = 0.0;
    try {
      metric = parse_metric(field(kMetric));
      date = normalise_date(parse_iso_date(field(kDate)), metric);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    if (!parse_number(field(kValue), value) || !std::isfinite(value) || value < 0.0) {
      throw ParseError(line_no, "value must be a finite non-negative number, got '" +
                                    std::string(field(kValue)) + "'");
    }

    auto [it, inserted] = pending.try_emplace(meta.instance_id);
    auto& entry = it->second;
    if (inserted) {
      entry.meta = meta;
      entry.first_line = line_no;
    } else if (!same_meta(entry.meta, meta)) {
      throw ParseError(line_no, "metadata for instance '" + meta.instance_id +
                                    "' differs from line " + std::to_string(entry.first_line));
    }
    auto [pit, fresh] = entry.points[metric].try_emplace(date, value);
    if (!fresh) {
      throw ParseError(line_no, "duplicate observation for (" + meta.instance_id + ", " +
                                    format_date(date) + ", " + std::string(to_string(metric)) + ")");
    }
  }

  // One instance per (website, user base); extra ids are collapsed.
  std::map<std::pair<std::string, Base>, std::string> owner;
  std::vector<std::string> collapsed;
  std::vector<WebsiteInstance> instances;
  for (auto& [id, entry] : pending) {
    const auto key = std::make_pair(entry.meta.website_id, entry.meta.user_base);
    if (auto found = owner.find(key); found != owner.end()) {
      if (!schema.collapse_duplicate_websites) {
        throw ParseError(entry.first_line, "instances '" + found->second + "' and '" + id +
                                               "' describe the same website and user base");
      }
      collapsed.push_back(id);
      continue;
    }
    owner.emplace(key, id);
    WebsiteInstance inst = std::move(entry.meta);
    try {
      for (const auto& [metric, points] : entry.points) {
        inst.series.emplace(metric, build_series(metric, points, id));
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(entry.first_line, e.what());
    }
    instances.push_back(std::move(inst));
  }

  std::vector<SourceDigest> provenance;
  provenance.push_back(std::move(digest));
  return PanelDataset(std::move(instances), std::move(provenance), std::move(collapsed));
}

namespace {

std::string format_value(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace

void write_panel(std::ostream& out, const PanelDataset& dataset) {
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    out << (c ? "," : "") << kColumns[c];
  }
  out << '\n';
  for (const auto& inst : dataset.instances()) {
    std::string prefix = inst.instance_id + ',' + inst.website_id + ',' +
                         std::string(to_string(inst.user_base)) + ',' +
                         std::string(to_string(inst.website_base)) + ',' + inst.user_country +
                         ',' + inst.industry + ',' + std::to_string(inst.global_rank) + ',' +
                         std::to_string(inst.country_rank) + ',' +
                         std::to_string(inst.industry_rank) + ',';
    for (const auto& [metric, series] : inst.series) {
      const auto name = to_string(metric);
      for (std::size_t i = 0; i < series.size(); ++i) {
        out << prefix << format_date(series.date_at(i)) << ',' << name << ','
            << format_value(series[i]) << '\n';
      }
    }
  }
}

// --- Filters ---------------------------------------------------------------

std::string_view to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::BelowThreshold: return "below_threshold";
    case ExclusionReason::MonthlyGap: return "monthly_gap";
    case ExclusionReason::Outlier: return "outlier";
    case ExclusionReason::BelowUniqueFloor: return "below_unique_floor";
    case ExclusionReason::MissingSeries: return "missing_series";
  }
  return "?";
}

bool has_monthly_gap(const TimeSeries& weekly) {
  const auto values = weekly.values();
  std::size_t i = 0;
  while (i < values.size()) {
    if (values[i] != 0.0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < values.size() && values[j + 1] == 0.0) ++j;
    const Date run_start = weekly.date_at(i);
    const Date run_end = weekly.date_at(j) + chr::days{6};
    const chr::year_month_day ymd{run_start};
    Date month_start = Date{ymd.year() / ymd.month() / chr::day{1}};
    if (month_start < run_start) {
      month_start = Date{(ymd.year() / ymd.month() + chr::months{1}) / chr::day{1}};
    }
    const chr::year_month_day ms{month_start};
    const Date month_end = Date{ms.year() / ms.month() / chr::last};
    if (month_end <= run_end) return true;
    i = j + 1;
  }
  return false;
}

bool is_outlier(const TimeSeries& weekly, const OutlierRule& rule) {
  if (!rule.enabled || weekly.size() < 3) return false;
  const auto logs = log1p_values(weekly.values());
  const auto n = logs.size();
  const auto half = static_cast<std::size_t>(std::max(rule.window, 1) / 2);
  std::vector<double> residual(n);
  std::vector<double> buf;
  for (std::size_t t = 0; t < n; ++t) {
    const auto lo = t >= half ? t - half : 0;
    const auto hi = std::min(n - 1, t + half);
    buf.assign(logs.begin() + static_cast<std::ptrdiff_t>(lo),
               logs.begin() + static_cast<std::ptrdiff_t>(hi + 1));
    residual[t] = logs[t] - stats::median(buf);
  }
  std::vector<double> abs_res(n);
  std::transform(residual.begin(), residual.end(), abs_res.begin(),
                 [](double r) { return std::fabs(r); });
  const double mad = std::max(stats::median(abs_res), rule.mad_floor);
  const double limit = rule.mad_multiplier * mad;
  int run = 0;
  for (double r : abs_res) {
    run = r > limit ? run + 1 : 0;
    if (run >= rule.min_consecutive) return true;
  }
  return false;
}

std::pair<PanelDataset, FilterReport> apply_filters(const PanelDataset& dataset,
                                                    const FilterOptions& options) {
  FilterReport report;
  report.input_count = dataset.size();

  std::vector<const WebsiteInstance*> current;
  for (const auto& inst : dataset.instances()) current.push_back(&inst);

  auto run_rule = [&](std::string name, auto rule) {
    RuleCount count{std::move(name), current.size(), 0, 0};
    std::vector<const WebsiteInstance*> next;
    for (const auto* inst : current) {
      if (auto reason = rule(*inst)) {
        report.excluded.push_back({inst->instance_id, *reason});
        ++count.excluded;
      } else {
        next.push_back(inst);
      }
    }
    count.retained = next.size();
    report.rules.push_back(count);
    current = std::move(next);
  };

  using Verdict = std::optional<ExclusionReason>;
  run_rule("below_threshold", [&](const WebsiteInstance& inst) -> Verdict {
    const auto* visits = inst.find(MetricKind::TotalVisits);
    if (!visits) return ExclusionReason::MissingSeries;
    if (stats::mean(visits->values()) < options.min_avg_weekly_visits) {
      return ExclusionReason::BelowThreshold;
    }
    return std::nullopt;
  });
  if (options.drop_monthly_gaps) {
    run_rule("monthly_gap", [&](const WebsiteInstance& inst) -> Verdict {
      if (has_monthly_gap(*inst.find(MetricKind::TotalVisits))) return ExclusionReason::MonthlyGap;
      return std::nullopt;
    });
  }
  if (options.outlier.enabled) {
    run_rule("outlier", [&](const WebsiteInstance& inst) -> Verdict {
      if (is_outlier(*inst.find(MetricKind::TotalVisits), options.outlier)) {
        return ExclusionReason::Outlier;
      }
      return std::nullopt;
    });
  }

  std::set<std::string_view> keep;
  for (const auto* inst : current) keep.insert(inst->instance_id);
  auto survivors = dataset.filtered([&](const WebsiteInstance& inst) {
    return keep.count(inst.instance_id) > 0;
  });
  report.retained_count = survivors.size();
  return {std::move(survivors), std::move(report)};
}

PanelDataset unique_visitor_subsample(const PanelDataset& dataset, double floor,
                                      FilterReport* report) {
  RuleCount count{"below_unique_floor", dataset.size(), 0, 0};
  std::vector<Exclusion> excluded;
  auto kept = dataset.filtered([&](const WebsiteInstance& inst) {
    const auto* uniques = inst.find(MetricKind::UniqueVisitors);
    std::optional<ExclusionReason> reason;
    if (!uniques) {
      reason = ExclusionReason::MissingSeries;
    } else {
      const auto values = uniques->values();
      if (*std::min_element(values.begin(), values.end()) < floor) {
        reason = ExclusionReason::BelowUniqueFloor;
      }
    }
    if (reason) excluded.push_back({inst.instance_id, *reason});
    return !reason.has_value();
  });
  count.excluded = excluded.size();
  count.retained = kept.size();
  if (report) {
    report->rules.push_back(count);
    report->excluded.insert(report->excluded.end(), excluded.begin(), excluded.end());
  }
  return kept;
}

// --- Shares ------------------------------------------------------------------

double InstanceShares::share_eu() const {
  double s = 0.0;
  for (const auto& share : shares) {
    if (share.user_base == Base::EU) s += share.share;
  }
  return s;
}

double InstanceShares::share_noneu() const {
  double s = 0.0;
  for (const auto& share : shares) {
    if (share.user_base == Base::NonEU) s += share.share;
  }
  return s;
}

double InstanceShares::share_of(std::string_view instance_id) const {
  for (const auto& share : shares) {
    if (share.instance_id == instance_id) return share.share;
  }
  throw std::out_of_range("no share recorded for instance '" + std::string(instance_id) + "'");
}

double pre_period_mean_visits(const WebsiteInstance& instance, const Calendar& calendar) {
  const auto* visits = instance.find(MetricKind::TotalVisits);
  if (!visits) {
    throw std::invalid_argument("instance '" + instance.instance_id + "' has no total_visits");
  }
  const auto covered = visits->periods(calendar);
  const auto pre = calendar.pre_weeks();
  const PeriodRange overlap{std::max(pre.first, covered.first), std::min(pre.last, covered.last)};
  if (overlap.size() == 0) {
    throw std::invalid_argument("instance '" + instance.instance_id +
                                "' has no pre-period total_visits");
  }
  return stats::mean(visits->slice(calendar, overlap));
}

InstanceShares pre_treatment_shares(std::span<const WebsiteInstance* const> instances,
                                    const Calendar& calendar) {
  if (instances.empty()) throw std::invalid_argument("pre_treatment_shares: no instances");
  InstanceShares out;
  out.website_id = instances.front()->website_id;
  std::vector<double> means;
  double total = 0.0;
  for (const auto* inst : instances) {
    if (inst->website_id != out.website_id) {
      throw std::invalid_argument("pre_treatment_shares: instances belong to different websites");
    }
    means.push_back(pre_period_mean_visits(*inst, calendar));
    total += means.back();
  }
  if (!(total > 0.0)) {
    throw std::domain_error("website '" + out.website_id +
                            "' has zero pre-period visits; shares are undefined");
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    out.shares.push_back({instances[i]->instance_id, instances[i]->user_base, means[i] / total});
  }
  if (out.shares.size() == 1) out.shares.front().share = 1.0;
  return out;
}

InstanceShares pre_treatment_shares(const PanelDataset& dataset, std::string_view website_id,
                                    const Calendar& calendar) {
  auto members = dataset.website(website_id);
  if (members.empty()) {
    throw std::invalid_argument("unknown website '" + std::string(website_id) + "'");
  }
  std::erase_if(members, [](const WebsiteInstance* inst) {
    return inst->find(MetricKind::TotalVisits) == nullptr;
  });
  return pre_treatment_shares(members, calendar);
}

double eu_traffic_share(const PanelDataset& dataset, const WebsiteInstance& instance,
                        const Calendar& calendar) {
  auto members = dataset.website(instance.website_id);
  std::erase_if(members, [](const WebsiteInstance* inst) {
    return inst->find(MetricKind::TotalVisits) == nullptr;
  });
  const bool has_eu = std::any_of(members.begin(), members.end(), [](const WebsiteInstance* inst) {
    return inst->user_base == Base::EU;
  });
  if (!has_eu) return 0.0;
  try {
    return pre_treatment_shares(members, calendar).share_eu();
  } catch (const std::exception&) {
    return 0.0;
  }
}

}  // namespace panelfx
