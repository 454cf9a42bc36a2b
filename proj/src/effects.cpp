#include "panelfx/effects.hpp"

#include "panelfx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace panelfx {

std::string_view to_string(Inference inference) {
  return inference == Inference::HC1 ? "hc1" : "placebo";
}

Inference parse_inference(std::string_view name) {
  if (name == "hc1") return Inference::HC1;
  if (name == "placebo") return Inference::Placebo;
  throw std::invalid_argument("unknown inference '" + std::string(name) +
                              "' (expected hc1 or placebo)");
}

void set_p_value(EffectEstimate& estimate, double p_value, Inference inference) {
  estimate.p_value = p_value;
  estimate.significant_5pct = p_value < 0.05;
  estimate.inference = inference;
}

EffectEstimate estimate_effect(std::span<const double> treated_log,
                               std::span<const double> synth_log,
                               std::span<const std::uint8_t> post) {
  const auto T = treated_log.size();
  if (synth_log.size() != T || post.size() != T) {
    throw std::invalid_argument("estimate_effect: treated, synthetic and period flags differ in length");
  }
  const auto n_post = static_cast<std::size_t>(std::count_if(
      post.begin(), post.end(), [](std::uint8_t p) { return p != 0; }));
  const auto n_pre = T - n_post;
  if (n_pre < 2 || n_post < 2) {
    throw std::invalid_argument("estimate_effect: need at least 2 pre and 2 post periods, got " +
                                std::to_string(n_pre) + " and " + std::to_string(n_post));
  }

  const auto rows = static_cast<Eigen::Index>(2 * T);
  Eigen::MatrixXd X(rows, 4);
  Eigen::VectorXd y(rows);
  for (std::size_t unit = 0; unit < 2; ++unit) {
    const auto values = unit == 0 ? treated_log : synth_log;
    for (std::size_t t = 0; t < T; ++t) {
      const DesignRow row{unit == 0 ? 1.0 : 0.0, post[t] ? 1.0 : 0.0};
      const auto r = static_cast<Eigen::Index>(unit * T + t);
      X(r, 0) = 1.0;
      X(r, 1) = row.eu;
      X(r, 2) = row.post;
      X(r, 3) = row.treated();
      y(r) = values[t];
    }
  }

  const auto fit = stats::ols(X, y, stats::Covariance::HC1);
  EffectEstimate out;
  out.beta3 = fit.coef(3);
  out.delta = std::expm1(out.beta3);
  out.std_err = fit.std_err(3);
  out.dof = fit.dof;
  out.n_pre = n_pre;
  out.n_post = n_post;
  set_p_value(out, fit.p_value(3), Inference::HC1);
  const double q = stats::t_quantile_upper(0.025, fit.dof);
  out.ci_low = std::expm1(out.beta3 - q * out.std_err);
  out.ci_high = std::expm1(out.beta3 + q * out.std_err);
  return out;
}

EffectEstimate estimate_effect(std::span<const double> treated_log,
                               std::span<const double> synth_log, std::size_t n_pre) {
  std::vector<std::uint8_t> post(treated_log.size(), 0);
  for (std::size_t t = n_pre; t < post.size(); ++t) post[t] = 1;
  return estimate_effect(treated_log, synth_log, post);
}

PlaceboInference placebo_p_value(double treated_beta3, std::span<const double> placebo_beta3,
                                 std::size_t n_requested) {
  PlaceboInference out;
  out.n_used = std::min(n_requested, placebo_beta3.size());
  out.shortfall = n_requested - out.n_used;
  const double target = std::fabs(treated_beta3);
  std::size_t at_least = 0;
  for (std::size_t i = 0; i < out.n_used; ++i) {
    if (std::fabs(placebo_beta3[i]) >= target) ++at_least;
  }
  out.p_value = static_cast<double>(1 + at_least) / static_cast<double>(1 + out.n_used);
  return out;
}

WebsiteEffect merge_website(std::span<const InstanceDelta> effects, const InstanceShares& shares,
                            MetricKind metric, WindowLabel window) {
  if (effects.empty()) throw std::invalid_argument("merge_website: no instance effects");
  WebsiteEffect out;
  out.website_id = shares.website_id;
  out.metric = metric;
  out.window = window;

  for (const auto& share : shares.shares) {
    const bool covered = std::any_of(effects.begin(), effects.end(), [&](const InstanceDelta& e) {
      return e.instance_id == share.instance_id;
    });
    if (!covered && share.share != 0.0) {
      throw std::invalid_argument("merge_website: no effect for instance '" + share.instance_id +
                                  "' of website '" + shares.website_id + "'");
    }
  }

  double best_share = -1.0;
  for (const auto& e : effects) {
    const auto it = std::find_if(shares.shares.begin(), shares.shares.end(),
                                 [&](const InstanceShare& s) { return s.instance_id == e.instance_id; });
    if (it == shares.shares.end()) {
      throw std::invalid_argument("merge_website: instance '" + e.instance_id +
                                  "' has no share for website '" + shares.website_id + "'");
    }
    out.components.push_back({e.instance_id, e.delta, it->share});
    if (it->share > best_share) {
      best_share = it->share;
      out.p_value = e.p_value;
    }
  }
  std::sort(out.components.begin(), out.components.end(),
            [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
  for (const auto& c : out.components) out.delta += c.share * c.delta;
  return out;
}

double intensity_effect(double delta_quantity, double delta_total_visits) {
  if (!(delta_total_visits > -1.0)) {
    throw std::domain_error("intensity_effect: denominator delta must exceed -1");
  }
  return (1.0 + delta_quantity) / (1.0 + delta_total_visits) - 1.0;
}

double intensity_effect(IntensityMetric, double delta_numerator, double delta_denominator) {
  return intensity_effect(delta_numerator, delta_denominator);
}

std::vector<IntensityEffect> derive_intensity(std::span<const WebsiteEffect> website_effects) {
  std::map<std::tuple<std::string, WindowLabel, MetricKind>, double> lookup;
  for (const auto& e : website_effects) lookup[{e.website_id, e.window, e.metric}] = e.delta;

  std::vector<IntensityEffect> out;
  for (const auto& [key, delta] : lookup) {
    const auto& [website, window, metric] = key;
    if (metric != MetricKind::TotalVisits) continue;
    for (auto intensity : kAllIntensityMetrics) {
      const auto ratio = ratio_of(intensity);
      const auto num = lookup.find({website, window, ratio.numerator});
      const auto den = lookup.find({website, window, ratio.denominator});
      if (num == lookup.end() || den == lookup.end() || !(den->second > -1.0)) continue;
      out.push_back({website, intensity, window,
                     intensity_effect(intensity, num->second, den->second), num->second,
                     den->second});
    }
  }
  std::sort(out.begin(), out.end(), [](const IntensityEffect& a, const IntensityEffect& b) {
    return std::tie(a.website_id, a.intensity_metric, a.window) <
           std::tie(b.website_id, b.intensity_metric, b.window);
  });
  return out;
}

namespace {

GroupSummary summarise_group(const std::vector<double>& values, std::size_t total) {
  GroupSummary g;
  g.n = values.size();
  g.share = total ? static_cast<double>(values.size()) / static_cast<double>(total) : 0.0;
  if (!values.empty()) {
    g.median = stats::median(values);
    g.mean = stats::mean(values);
  }
  return g;
}

}  // namespace

GainLoseTable gain_lose_split(std::span<const GainLoseInput> websites,
                              IntensityMetric intensity_metric, WindowLabel window) {
  GainLoseTable table;
  table.intensity_metric = intensity_metric;
  table.quantity_metric = split_quantity_of(intensity_metric);
  table.window = window;
  std::vector<double> all;
  std::vector<double> gain;
  std::vector<double> lose;
  for (const auto& w : websites) {
    all.push_back(w.intensity_delta);
    (w.quantity_delta < 0.0 ? lose : gain).push_back(w.intensity_delta);
  }
  table.all = summarise_group(all, all.size());
  table.gain = summarise_group(gain, all.size());
  table.lose = summarise_group(lose, all.size());
  return table;
}

std::vector<GainLoseTable> gain_lose_tables(std::span<const WebsiteEffect> website_effects,
                                            std::span<const IntensityEffect> intensity_effects) {
  std::map<std::tuple<std::string, WindowLabel, MetricKind>, double> quantity;
  for (const auto& e : website_effects) quantity[{e.website_id, e.window, e.metric}] = e.delta;

  std::map<std::pair<IntensityMetric, WindowLabel>, std::vector<GainLoseInput>> groups;
  for (const auto& ie : intensity_effects) {
    const auto q = quantity.find({ie.website_id, ie.window, split_quantity_of(ie.intensity_metric)});
    if (q == quantity.end()) continue;
    groups[{ie.intensity_metric, ie.window}].push_back({ie.website_id, q->second, ie.delta});
  }
  std::vector<GainLoseTable> out;
  for (const auto& [key, inputs] : groups) {
    out.push_back(gain_lose_split(inputs, key.first, key.second));
  }
  return out;
}

}  // namespace panelfx
