#include "panelfx/robustness.hpp"

#include "panelfx/cohorts.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace panelfx {

// --- threshold sweep ---------------------------------------------------------

std::vector<double> threshold_range(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("threshold_range: need step > 0 and hi >= lo");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

namespace {

using Sample = std::map<std::string, double>;  // instance id -> mean weekly visits

Sample sample_of(const PanelDataset& filtered, Base user_base) {
  Sample out;
  for (const auto& inst : filtered.instances()) {
    if (inst.user_base != user_base) continue;
    const auto* visits = inst.find(MetricKind::TotalVisits);
    if (visits) out[inst.instance_id] = stats::mean(visits->values());
  }
  return out;
}

std::vector<double> values_of(const Sample& s) {
  std::vector<double> out;
  out.reserve(s.size());
  for (const auto& [id, v] : s) out.push_back(v);
  return out;
}

SweepGroup compare_samples(const Sample& base, const Sample& now) {
  SweepGroup g;
  for (const auto& [id, v] : now) {
    if (!base.contains(id)) ++g.added;
  }
  for (const auto& [id, v] : base) {
    if (!now.contains(id)) ++g.removed;
  }
  const auto values = values_of(now);
  g.n = values.size();
  if (!values.empty()) g.mean = stats::mean(values);
  if (values.size() >= 2) g.std_dev = stats::stddev(values);
  const auto base_values = values_of(base);
  if (values.size() >= 2 && base_values.size() >= 2) {
    g.p_value = stats::welch_t_test(values, base_values).p_value;
  }
  g.significant = g.p_value < 0.05;
  return g;
}

}  // namespace

SweepReport threshold_sweep(const PanelDataset& raw, std::span<const double> thresholds,
                            double base_threshold, const FilterOptions& options) {
  auto filter_at = [&](double threshold) {
    FilterOptions o = options;
    o.min_avg_weekly_visits = threshold;
    return apply_filters(raw, o).first;
  };
  const auto base = filter_at(base_threshold);
  const auto base_eu = sample_of(base, Base::EU);
  const auto base_non = sample_of(base, Base::NonEU);

  SweepReport report;
  report.base_threshold = base_threshold;
  for (double t : thresholds) {
    const auto now = filter_at(t);
    SweepRow row;
    row.threshold = t;
    row.is_base = t == base_threshold;
    row.eu_users = compare_samples(base_eu, sample_of(now, Base::EU));
    row.noneu_users = compare_samples(base_non, sample_of(now, Base::NonEU));
    report.rows.push_back(row);
  }
  return report;
}

// --- paired reruns -----------------------------------------------------------

std::vector<PairedComparison> compare_results(const EstimationResult& base,
                                              const EstimationResult& variant) {
  std::map<std::pair<MetricKind, WindowLabel>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& e : base.website_effects) groups[{e.metric, e.window}].first.push_back(e.delta);
  for (const auto& e : variant.website_effects) groups[{e.metric, e.window}].second.push_back(e.delta);

  std::vector<PairedComparison> out;
  for (const auto& [key, samples] : groups) {
    const auto& [a, b] = samples;
    if (a.empty() || b.empty()) continue;
    PairedComparison row;
    row.metric = key.first;
    row.window = key.second;
    row.n_base = a.size();
    row.base_median = stats::median(a);
    row.base_mean = stats::mean(a);
    row.n_variant = b.size();
    row.variant_median = stats::median(b);
    row.variant_mean = stats::mean(b);
    if (a.size() >= 2 && b.size() >= 2) {
      const auto w = stats::welch_t_test(b, a);
      row.t_stat = w.t;
      row.p_value = w.p_value;
    }
    row.significant = row.p_value < 0.05;
    out.push_back(row);
  }
  return out;
}

namespace {

RerunReport rerun(const PanelDataset& dataset, const PipelineConfig& config,
                  const PipelineConfig& variant, std::string name, const EstimationResult* base) {
  RerunReport report;
  report.variant = std::move(name);
  report.config_diff = config_diff(config, variant);
  report.base = base ? *base : run_estimation(dataset, config);
  report.rerun = report.config_diff.empty() ? report.base : run_estimation(dataset, variant);
  report.rows = compare_results(report.base, report.rerun);
  return report;
}

}  // namespace

RerunReport exclusion_window_rerun(const PanelDataset& dataset, const PipelineConfig& config,
                                   int exclude_days, const EstimationResult* base) {
  if (exclude_days < 0) throw std::invalid_argument("exclusion_window_rerun: exclude_days must be >= 0");
  PipelineConfig variant = config;
  variant.exclude_days = exclude_days;
  return rerun(dataset, config, variant, "exclude_" + std::to_string(exclude_days) + "d", base);
}

std::string_view to_string(DonorVariant variant) {
  switch (variant) {
    case DonorVariant::Baseline: return "baseline";
    case DonorVariant::NoIndustry: return "no_industry";
    case DonorVariant::EuShareMatch: return "eu_share_match";
    case DonorVariant::K10: return "k10";
  }
  return "baseline";
}

DonorVariant parse_donor_variant(std::string_view name) {
  for (auto v : {DonorVariant::Baseline, DonorVariant::NoIndustry, DonorVariant::EuShareMatch,
                 DonorVariant::K10}) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown donor variant '" + std::string(name) + "'");
}

PipelineConfig apply_variant(const PipelineConfig& base, DonorVariant variant) {
  PipelineConfig out = base;
  switch (variant) {
    case DonorVariant::Baseline: break;
    case DonorVariant::NoIndustry: out.donors.match = DonorMatch::None; break;
    case DonorVariant::EuShareMatch: out.donors.match = DonorMatch::EuShare; break;
    case DonorVariant::K10: out.donors.k = 10; break;
  }
  return out;
}

RerunReport donor_variant_rerun(const PanelDataset& dataset, const PipelineConfig& config,
                                DonorVariant variant, const EstimationResult* base) {
  return rerun(dataset, config, apply_variant(config, variant), std::string(to_string(variant)), base);
}

// --- control-group spillover checks --------------------------------------------

namespace {

std::pair<double, double> pre_post_means(const WebsiteInstance& inst, const Calendar& calendar,
                                         WindowLabel window) {
  const auto* visits = inst.find(MetricKind::TotalVisits);
  if (!visits) throw std::invalid_argument("instance '" + inst.instance_id + "' has no total_visits");
  const auto pre = calendar.pre_weeks();
  const PeriodRange post{pre.last + 1, window_bounds(window, calendar).post_end_week};
  return {stats::mean(visits->slice(calendar, pre)), stats::mean(visits->slice(calendar, post))};
}

}  // namespace

std::vector<ControlShare> control_shares(const PanelDataset& dataset, const Calendar& calendar,
                                         WindowLabel window) {
  std::vector<ControlShare> out;
  for (const auto& inst : dataset.instances()) {
    if (inst.treated() || !inst.find(MetricKind::TotalVisits)) continue;
    const auto [pre, post] = pre_post_means(inst, calendar, window);
    out.push_back({inst.instance_id, eu_traffic_share(dataset, inst, calendar), pre, post});
  }
  return out;
}

EuShareReport eu_share_analysis(std::span<const ControlShare> controls) {
  if (controls.size() < 4) throw std::invalid_argument("eu_share_analysis: needs at least 4 controls");
  EuShareReport report;
  report.n = controls.size();

  std::vector<std::size_t> positive;
  for (std::size_t i = 0; i < controls.size(); ++i) {
    if (controls[i].eu_share > 0.0) positive.push_back(i);
  }
  std::vector<int> decile(controls.size(), 0);
  if (!positive.empty()) {
    std::vector<double> shares;
    for (auto i : positive) shares.push_back(controls[i].eu_share);
    const auto d = assign_deciles(std::span<const double>(shares));
    for (std::size_t j = 0; j < positive.size(); ++j) decile[positive[j]] = d[j];
  }
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < controls.size(); ++i) groups[decile[i]].push_back(i);
  for (const auto& [d, members] : groups) {
    ShareDecile row;
    row.decile = d;
    row.n = members.size();
    row.share_min = controls[members.front()].eu_share;
    row.share_max = row.share_min;
    std::vector<double> pre, post;
    for (auto i : members) {
      row.share_min = std::min(row.share_min, controls[i].eu_share);
      row.share_max = std::max(row.share_max, controls[i].eu_share);
      pre.push_back(controls[i].pre_mean);
      post.push_back(controls[i].post_mean);
    }
    row.pre_mean = stats::mean(pre);
    row.post_mean = stats::mean(post);
    row.difference = row.post_mean - row.pre_mean;
    report.deciles.push_back(row);
  }

  const auto n = static_cast<Eigen::Index>(controls.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = controls[static_cast<std::size_t>(i)];
    if (c.pre_mean < 0.0 || c.post_mean < 0.0) {
      throw std::invalid_argument("eu_share_analysis: negative visits for '" + c.instance_id + "'");
    }
    x(i, 0) = 1.0;
    x(i, 1) = std::log1p(c.pre_mean);
    x(i, 2) = c.eu_share;
    y(i) = std::log1p(c.post_mean);
  }
  const auto fit = stats::ols(x, y, stats::Covariance::Classical);
  const char* names[] = {"intercept", "log1p_pre_visits", "eu_share"};
  for (Eigen::Index j = 0; j < 3; ++j) {
    report.coefficients.push_back({names[j], fit.coef(j), fit.std_err(j), fit.t_stat(j), fit.p_value(j)});
  }
  return report;
}

DidTable did_table(std::string name, const DidCell& a, const DidCell& b) {
  DidTable t;
  t.name = std::move(name);
  t.a = a;
  t.b = b;
  t.difference_a = a.post - a.pre;
  t.difference_b = b.post - b.pre;
  t.did = t.difference_a - t.difference_b;
  return t;
}

DidCell did_cell(std::span<const WebsiteInstance* const> instances, const Calendar& calendar,
                 WindowLabel window, std::string website_location, std::string user_location) {
  if (instances.empty()) {
    throw std::invalid_argument("did_cell: no instances for " + website_location + " websites / " +
                                user_location + " users");
  }
  DidCell cell;
  cell.website_location = std::move(website_location);
  cell.user_location = std::move(user_location);
  std::vector<double> pre, post;
  for (const auto* inst : instances) {
    const auto [a, b] = pre_post_means(*inst, calendar, window);
    pre.push_back(a);
    post.push_back(b);
  }
  cell.n = instances.size();
  cell.pre = stats::mean(pre);
  cell.post = stats::mean(post);
  return cell;
}

std::vector<DidTable> crossed_did_table(const PanelDataset& dataset, const Calendar& calendar,
                                        WindowLabel window) {
  std::map<std::pair<Base, Base>, std::vector<const WebsiteInstance*>> cells;  // (website, user)
  for (const auto& inst : dataset.instances()) {
    if (inst.find(MetricKind::TotalVisits)) cells[{inst.website_base, inst.user_base}].push_back(&inst);
  }
  auto cell = [&](Base website, Base user) {
    return did_cell(cells[{website, user}], calendar, window, std::string(to_string(website)),
                    std::string(to_string(user)));
  };
  const auto control = cell(Base::NonEU, Base::NonEU);
  return {did_table("noneu_users_by_website_location", cell(Base::EU, Base::NonEU), control),
          did_table("noneu_websites_by_user_location", cell(Base::NonEU, Base::EU), control)};
}

}  // namespace panelfx
