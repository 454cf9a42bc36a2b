#include "panelfx/simkit.hpp"

#include "panelfx/pipeline.hpp"
#include "panelfx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <tuple>

namespace panelfx {

std::string_view to_string(EffectShape shape) {
  return shape == EffectShape::Constant ? "constant" : "ramp";
}

EffectShape parse_effect_shape(std::string_view name) {
  if (name == "constant") return EffectShape::Constant;
  if (name == "ramp" || name == "linear_ramp") return EffectShape::LinearRamp;
  throw std::invalid_argument("unknown effect shape '" + std::string(name) + "'");
}

double EffectProfile::at(int week, int first_post_week) const {
  if (week < first_post_week) return 0.0;
  if (shape == EffectShape::Constant) return delta;
  // Ramp: first post week gets delta/steps, ramp_end_week gets delta.
  const int steps = ramp_end_week - first_post_week + 1;
  const int step = week - first_post_week + 1;
  return delta * std::min(1.0, static_cast<double>(step) / static_cast<double>(steps));
}

void SimConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("simulate." + field + ": " + why);
  };
  if (n_treated == 0) fail("n_treated", "must be positive");
  if (n_control == 0) fail("n_control", "must be positive");
  const int first_post = calendar.enforcement_week();
  if (weeks < first_post + 1) {
    fail("weeks", "must cover at least two post weeks (>= " + std::to_string(first_post + 1) + ")");
  }
  if (!std::isfinite(base_level) || base_level <= 0.0) fail("base_level", "must be positive");
  if (!(unit_sigma >= 0.0)) fail("unit_sigma", "must be >= 0");
  if (!(seasonality_amplitude >= 0.0)) fail("seasonality_amplitude", "must be >= 0");
  if (!(seasonality_period >= 0.0)) fail("seasonality_period", "must be >= 0");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail("noise_sigma", "must be >= 0");
  if (!(effect.delta > -1.0) || !std::isfinite(effect.delta)) fail("effect.delta", "must be > -1");
  if (effect.shape == EffectShape::LinearRamp && effect.ramp_end_week < first_post) {
    fail("effect.ramp_end_week", "must not precede the first post week");
  }
  if (industries.empty()) fail("industries", "needs at least one label");
  for (const auto& label : industries) {
    if (label.empty() || label.find(',') != std::string::npos) fail("industries", "bad label '" + label + "'");
  }
  if (!(visits_per_unique >= 1.0)) fail("visits_per_unique", "must be >= 1");
  if (!(pages_per_visit > 0.0)) fail("pages_per_visit", "must be positive");
  if (!(minutes_per_visit > 0.0)) fail("minutes_per_visit", "must be positive");
  if (!(bounce_rate > 0.0 && bounce_rate < 1.0)) fail("bounce_rate", "must be in (0, 1)");
  if (!(intensity_sigma >= 0.0)) fail("intensity_sigma", "must be >= 0");
  for (const auto& [metric, d] : intensity_effects) {
    if (!(d > -1.0)) fail("intensity." + std::string(to_string(metric)), "must be > -1");
  }
  if (!(dual_instance_fraction >= 0.0 && dual_instance_fraction <= 1.0)) {
    fail("dual_instance_fraction", "must be in [0, 1]");
  }
  if (!(control_companion_fraction >= 0.0 && control_companion_fraction <= 1.0)) {
    fail("control_companion_fraction", "must be in [0, 1]");
  }
  if (!(companion_level_gap >= 0.0)) fail("companion_level_gap", "must be >= 0");
}

const TruthEntry* GroundTruth::find(std::string_view instance_id, WindowLabel window) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), std::tie(instance_id, window),
                                   [](const TruthEntry& e, const auto& key) {
                                     return std::tie(e.instance_id, e.window) < key;
                                   });
  return it != entries.end() && it->instance_id == instance_id && it->window == window ? &*it
                                                                                       : nullptr;
}

double GroundTruth::delta(std::string_view instance_id, MetricKind metric, WindowLabel window) const {
  const auto* e = find(instance_id, window);
  if (!e) {
    throw std::invalid_argument("no ground truth for instance '" + std::string(instance_id) +
                                "' window " + std::string(to_string(window)));
  }
  return cadence_of(metric) == Cadence::Weekly ? e->delta_weekly : e->delta_monthly;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t id_hash(std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Week whose effect applies to day `d` of a monthly series. The enforcement
// month is wholly post, as the enforcement week is for weekly series.
int monthly_effect_week(const Calendar& calendar, Date d) {
  const int week = calendar.week_of(d);
  if (calendar.month_of(d) < calendar.enforcement_month()) return week;
  return std::max(week, calendar.enforcement_week());
}

// Day-weighted effect of a month.
double month_effect(const EffectProfile& profile, const Calendar& calendar, int month) {
  const int first_post = calendar.enforcement_week();
  double sum = 0.0;
  int days = 0;
  for (Date d = calendar.month_start(month); d <= calendar.month_end(month); d += std::chrono::days{1}) {
    sum += profile.at(monthly_effect_week(calendar, d), first_post);
    ++days;
  }
  return sum / days;
}

const std::array<std::string_view, 11> kEuCountries{"DE", "FR", "IT", "ES", "NL", "AT",
                                                    "BE", "PL", "SE", "IE", "DK"};
const std::array<std::string_view, 2> kNonEuCountries{"US", "CH"};

struct Spec {
  std::string instance_id;
  std::string website_id;
  Base user_base;
  Base website_base;
  std::size_t industry;
  std::size_t country;
  bool treated;
  bool companion;
  std::size_t parent;  // index of the main instance for companions
};

std::string padded(char prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return std::string(1, prefix) + digits;
}

}  // namespace

TruthEntry window_truth(const EffectProfile& profile, const Calendar& calendar, WindowLabel window) {
  const auto bounds = window_bounds(window, calendar);
  const int first_post = calendar.enforcement_week();
  double sum = 0.0;
  for (int w = first_post; w <= bounds.post_end_week; ++w) sum += std::log1p(profile.at(w, first_post));
  TruthEntry out;
  out.window = window;
  out.delta_weekly = std::expm1(sum / (bounds.post_end_week - first_post + 1));
  const int first_month = calendar.enforcement_month();
  const int last_month = bounds.post_end(Cadence::Monthly, calendar);
  double msum = 0.0;
  for (int m = first_month; m <= last_month; ++m) msum += std::log1p(month_effect(profile, calendar, m));
  out.delta_monthly = last_month >= first_month ? std::expm1(msum / (last_month - first_month + 1)) : 0.0;
  return out;
}

SimPanel generate_panel(const SimConfig& config, std::size_t threads) {
  config.validate();
  const auto& cal = config.calendar;
  const int weeks = config.weeks;
  const int first_post = cal.enforcement_week();
  const int months = cal.last_full_month_within(weeks);
  if (months < cal.enforcement_month() + 1) {
    throw std::invalid_argument("simulate.weeks: too short to cover a post month");
  }

  // Instance layout. Companion draws are taken from a stream of their own so
  // the main instances do not depend on the companion fractions.
  const int width = std::max<int>(4, static_cast<int>(std::to_string(std::max(config.n_treated, config.n_control)).size()));
  std::vector<Spec> specs;
  std::mt19937_64 layout_rng(splitmix64(config.seed ^ 0x6c61796f7574ULL));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t eu_i = 0;
  std::size_t non_i = 0;
  for (std::size_t i = 1; i <= config.n_treated; ++i) {
    const auto id = padded('T', i, width);
    const auto ind = (i - 1) % config.industries.size();
    specs.push_back({id, "W" + id, Base::EU, Base::EU, ind, eu_i++ % kEuCountries.size(), true, false, 0});
    const auto parent = specs.size() - 1;
    if (unif(layout_rng) < config.dual_instance_fraction) {
      specs.push_back({id + "N", "W" + id, Base::NonEU, Base::EU, ind, non_i++ % kNonEuCountries.size(),
                       true, true, parent});
    }
  }
  for (std::size_t i = 1; i <= config.n_control; ++i) {
    const auto id = padded('C', i, width);
    const auto ind = (i - 1) % config.industries.size();
    specs.push_back({id, "W" + id, Base::NonEU, Base::NonEU, ind, non_i++ % kNonEuCountries.size(),
                     false, false, 0});
    const auto parent = specs.size() - 1;
    if (unif(layout_rng) < config.control_companion_fraction) {
      specs.push_back({id + "E", "W" + id, Base::EU, Base::NonEU, ind, eu_i++ % kEuCountries.size(),
                       true, true, parent});
    }
  }

  // Unit levels: companions sit below their website's main instance.
  std::vector<double> level(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(id_hash(specs[s].instance_id))));
    std::normal_distribution<double> z(0.0, 1.0);
    const double draw = z(rng);
    level[s] = specs[s].companion ? level[specs[s].parent] - config.companion_level_gap + 0.25 * draw
                                  : config.base_level + config.unit_sigma * draw;
  }

  std::vector<double> week_effect(static_cast<std::size_t>(weeks) + 1, 0.0);
  for (int w = 1; w <= weeks; ++w) week_effect[w] = config.effect.at(w, first_post);

  auto intensity_at = [&](IntensityMetric m, int week) {
    const auto it = config.intensity_effects.find(m);
    if (it == config.intensity_effects.end() || week < first_post) return 0.0;
    // Same shape as the traffic effect, scaled to its own end value.
    EffectProfile p = config.effect;
    p.delta = it->second;
    return p.at(week, first_post);
  };

  std::vector<WebsiteInstance> instances(specs.size());
  parallel_for(specs.size(), threads, [&](std::size_t s) {
    const auto& spec = specs[s];
    std::mt19937_64 rng(splitmix64(splitmix64(config.seed) ^ id_hash(spec.instance_id)));
    std::normal_distribution<double> z(0.0, 1.0);
    const double phase = config.seasonality_period * static_cast<double>(spec.industry) /
                         static_cast<double>(config.industries.size());

    std::vector<double> visits(weeks), pages(weeks), minutes(weeks), bounces(weeks);
    std::vector<double> raw_visits(weeks);
    for (int w = 1; w <= weeks; ++w) {
      double season = 0.0;
      if (config.seasonality_period > 0.0) {
        season = config.seasonality_amplitude *
                 std::sin(2.0 * std::numbers::pi * (w - 1 + phase) / config.seasonality_period);
      }
      const double eff = spec.treated ? week_effect[w] : 0.0;
      const double untreated = std::exp(level[s] + season + config.noise_sigma * z(rng));
      const double v = untreated * (1.0 + eff);
      const auto idx = static_cast<std::size_t>(w - 1);
      raw_visits[idx] = untreated;
      auto ratio = [&](IntensityMetric m, double base) {
        const double ie = spec.treated ? intensity_at(m, w) : 0.0;
        return base * (1.0 + ie) * std::exp(config.intensity_sigma * z(rng));
      };
      visits[idx] = std::round(v);
      pages[idx] = std::round(v * ratio(IntensityMetric::PageImpressionsPerVisit, config.pages_per_visit));
      minutes[idx] = std::round(v * ratio(IntensityMetric::TimePerVisit, config.minutes_per_visit));
      bounces[idx] = std::round(v * ratio(IntensityMetric::BounceRate, config.bounce_rate));
    }
    std::vector<double> uniques(months);
    for (int m = 1; m <= months; ++m) {
      double total = 0.0;
      double eff_days = 0.0;
      int days = 0;
      for (Date d = cal.month_start(m); d <= cal.month_end(m); d += std::chrono::days{1}) {
        const int w = cal.week_of(d);
        const int ew = monthly_effect_week(cal, d);
        const double eff = spec.treated ? week_effect[ew] : 0.0;
        total += raw_visits[static_cast<std::size_t>(w - 1)] * (1.0 + eff) / 7.0;
        eff_days += spec.treated ? intensity_at(IntensityMetric::VisitsPerUnique, ew) : 0.0;
        ++days;
      }
      const double vpu = config.visits_per_unique * (1.0 + eff_days / days) *
                         std::exp(config.intensity_sigma * z(rng));
      uniques[static_cast<std::size_t>(m - 1)] = std::round(total / vpu);
    }

    WebsiteInstance inst;
    inst.instance_id = spec.instance_id;
    inst.website_id = spec.website_id;
    inst.user_base = spec.user_base;
    inst.website_base = spec.website_base;
    inst.industry = config.industries[spec.industry];
    inst.user_country = std::string(spec.user_base == Base::EU ? kEuCountries[spec.country]
                                                               : kNonEuCountries[spec.country]);
    const Date start = cal.week_start(1);
    inst.series.emplace(MetricKind::TotalVisits, TimeSeries(MetricKind::TotalVisits, start, std::move(visits)));
    inst.series.emplace(MetricKind::PageImpressions,
                        TimeSeries(MetricKind::PageImpressions, start, std::move(pages)));
    inst.series.emplace(MetricKind::TimeOnWebsite,
                        TimeSeries(MetricKind::TimeOnWebsite, start, std::move(minutes)));
    inst.series.emplace(MetricKind::BouncingVisitors,
                        TimeSeries(MetricKind::BouncingVisitors, start, std::move(bounces)));
    inst.series.emplace(MetricKind::UniqueVisitors,
                        TimeSeries(MetricKind::UniqueVisitors, cal.month_start(1), std::move(uniques)));
    instances[s] = std::move(inst);
  });

  // Ranks from levels: global over websites' main instances, then within
  // user country and within industry.
  std::vector<std::size_t> order(specs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(level[b], specs[a].instance_id) < std::tie(level[a], specs[b].instance_id);
  });
  std::map<std::string, long> country_next;
  std::map<std::string, long> industry_next;
  long global_next = 0;
  std::map<std::string, long> website_rank;
  for (auto s : order) {
    auto& inst = instances[s];
    auto [it, fresh] = website_rank.try_emplace(inst.website_id, global_next + 1);
    if (fresh) ++global_next;
    inst.global_rank = it->second;
    inst.country_rank = ++country_next[inst.user_country];
    inst.industry_rank = ++industry_next[inst.industry];
  }

  SimPanel out;
  out.dataset = PanelDataset(std::move(instances));

  std::vector<TruthEntry> per_window;
  for (auto label : kAllWindows) per_window.push_back(window_truth(config.effect, cal, label));
  for (const auto& spec : specs) {
    for (const auto& t : per_window) {
      TruthEntry e = t;
      e.instance_id = spec.instance_id;
      if (!spec.treated) e.delta_weekly = e.delta_monthly = 0.0;
      out.truth.entries.push_back(std::move(e));
    }
  }
  std::sort(out.truth.entries.begin(), out.truth.entries.end(), [](const auto& a, const auto& b) {
    return std::tie(a.instance_id, a.window) < std::tie(b.instance_id, b.window);
  });
  return out;
}

RecoveryReport evaluate_recovery(std::span<const EffectEstimate> estimates, const GroundTruth& truth) {
  struct Acc {
    std::size_t n = 0;
    double est = 0.0, tru = 0.0, err = 0.0, abs = 0.0;
    std::size_t covered = 0;
  };
  std::map<WindowLabel, Acc> by_window;
  Acc all;
  for (const auto& e : estimates) {
    const double t = truth.delta(e.instance_id, e.metric, e.window);
    for (Acc* a : {&by_window[e.window], &all}) {
      ++a->n;
      a->est += e.delta;
      a->tru += t;
      a->err += e.delta - t;
      a->abs += std::abs(e.delta - t);
      if (e.ci_low <= t && t <= e.ci_high) ++a->covered;
    }
  }
  RecoveryReport report;
  for (const auto& [label, a] : by_window) {
    const auto n = static_cast<double>(a.n);
    report.windows.push_back({label, a.n, a.est / n, a.tru / n, a.err / n, a.abs / n,
                              static_cast<double>(a.covered) / n});
  }
  report.n = all.n;
  if (all.n > 0) {
    const auto n = static_cast<double>(all.n);
    report.bias = all.err / n;
    report.mae = all.abs / n;
    report.coverage = static_cast<double>(all.covered) / n;
  }
  return report;
}

}  // namespace panelfx
