#include "panelfx/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

namespace panelfx {

namespace {

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ',';
    out += to_string(item);
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> PipelineConfig::describe() const {
  return {
      {"calendar.anchor", format_date(calendar.anchor())},
      {"calendar.enforcement", format_date(calendar.enforcement())},
      {"windows", join(windows)},
      {"metrics", join(metrics)},
      {"donors.k", std::to_string(donors.k)},
      {"donors.match", std::string(to_string(donors.match))},
      {"donors.eu_share_tolerance", num(donors.eu_share_tolerance)},
      {"donors.min_candidates", std::to_string(donors.min_candidates)},
      {"weights.mode", std::string(to_string(weight_mode))},
      {"inference.method", std::string(to_string(inference))},
      {"inference.n_placebo", std::to_string(n_placebo)},
      {"exclusion.days", std::to_string(exclude_days)},
      {"unique.apply_floor", apply_unique_floor ? "true" : "false"},
      {"unique.floor", num(unique_floor)},
  };
}

std::vector<std::string> config_diff(const PipelineConfig& base, const PipelineConfig& variant) {
  const auto a = base.describe();
  const auto b = variant.describe();
  std::vector<std::string> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].second != b[i].second) {
      out.push_back(a[i].first + ": " + a[i].second + " -> " + b[i].second);
    }
  }
  return out;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<bool> excluded_periods(const Calendar& calendar, Cadence cadence, int last,
                                   int exclude_days) {
  std::vector<bool> out(static_cast<std::size_t>(std::max(last, 0)), false);
  if (exclude_days <= 0) return out;
  const Date lo = calendar.enforcement() - std::chrono::days{exclude_days};
  const Date hi = calendar.enforcement() + std::chrono::days{exclude_days};
  for (int p = 1; p <= last; ++p) {
    out[static_cast<std::size_t>(p - 1)] =
        calendar.period_start(p, cadence) <= hi && calendar.period_end(p, cadence) >= lo;
  }
  return out;
}

namespace {

struct Unit {
  const WebsiteInstance* instance = nullptr;
  std::vector<double> log_full;  // periods 1..last
  std::vector<double> log_pre;   // retained pre periods
  double eu_share = 0.0;
};

struct MetricLayout {
  MetricKind metric;
  Cadence cadence;
  PeriodRange pre;
  int last = 0;
  std::vector<bool> excluded;
  std::vector<std::size_t> pre_rows;  // 0-based rows of retained pre periods
};

struct UnitResult {
  std::optional<SynthFit> fit;
  std::vector<EffectEstimate> effects;
  std::string error;
};

// Fits the synthetic control for one unit against `controls` (skipping the
// unit itself) and estimates every window.
UnitResult fit_unit(const Unit& unit, const std::vector<Unit>& controls, const MetricLayout& layout,
                    const PipelineConfig& config) {
  UnitResult result;
  try {
    std::vector<DonorCandidate> candidates;
    candidates.reserve(controls.size());
    for (const auto& c : controls) {
      if (c.instance == unit.instance) continue;
      candidates.push_back({c.instance->instance_id, c.instance->industry, c.eu_share, c.log_pre});
    }
    const DonorCandidate treated{unit.instance->instance_id, unit.instance->industry, unit.eu_share,
                                unit.log_pre};
    auto pool = select_donors(treated, candidates, config.donors);

    std::vector<const Unit*> donors;
    for (const auto& d : pool.donors) {
      const auto it = std::find_if(controls.begin(), controls.end(), [&](const Unit& c) {
        return c.instance->instance_id == d.instance_id;
      });
      donors.push_back(&*it);
    }
    const auto k = static_cast<Eigen::Index>(donors.size());
    const auto n_pre = static_cast<Eigen::Index>(layout.pre_rows.size());
    Eigen::MatrixXd d_pre(n_pre, k);
    Eigen::MatrixXd d_full(layout.last, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      for (Eigen::Index r = 0; r < n_pre; ++r) {
        d_pre(r, j) = donors[static_cast<std::size_t>(j)]->log_pre[static_cast<std::size_t>(r)];
      }
      for (Eigen::Index t = 0; t < layout.last; ++t) {
        d_full(t, j) = donors[static_cast<std::size_t>(j)]->log_full[static_cast<std::size_t>(t)];
      }
    }
    auto weights = fit_weights(unit.log_pre, d_pre, config.weight_mode, pool.donor_ids());
    const auto synth = synthesize(weights, d_full);

    for (auto label : config.windows) {
      const auto end = window_bounds(label, config.calendar).post_end(layout.cadence, config.calendar);
      std::vector<double> treated_log;
      std::vector<double> synth_log;
      std::vector<std::uint8_t> post;
      for (int p = 1; p <= end; ++p) {
        const auto row = static_cast<std::size_t>(p - 1);
        if (layout.excluded[row]) continue;
        treated_log.push_back(unit.log_full[row]);
        synth_log.push_back(synth[row]);
        post.push_back(p > layout.pre.last ? 1 : 0);
      }
      auto estimate = estimate_effect(treated_log, synth_log, post);
      estimate.instance_id = unit.instance->instance_id;
      estimate.metric = layout.metric;
      estimate.window = label;
      result.effects.push_back(std::move(estimate));
    }
    result.fit = SynthFit{unit.instance->instance_id, layout.metric, std::move(pool), std::move(weights)};
  } catch (const std::exception& e) {
    result.effects.clear();
    result.error = e.what();
  }
  return result;
}

std::optional<Unit> make_unit(const WebsiteInstance& inst, const MetricLayout& layout,
                              const Calendar& calendar, std::string* why) {
  const auto* series = inst.find(layout.metric);
  if (!series) {
    *why = "no " + std::string(to_string(layout.metric)) + " series";
    return std::nullopt;
  }
  Unit unit;
  unit.instance = &inst;
  try {
    unit.log_full = log1p_values(series->slice(calendar, {1, layout.last}));
  } catch (const std::out_of_range& e) {
    *why = e.what();
    return std::nullopt;
  }
  for (auto row : layout.pre_rows) unit.log_pre.push_back(unit.log_full[row]);
  return unit;
}

}  // namespace

EstimationResult run_estimation(const PanelDataset& dataset, const PipelineConfig& config) {
  if (config.windows.empty()) throw std::invalid_argument("run_estimation: no windows requested");
  const auto& calendar = config.calendar;
  EstimationResult result;

  std::map<std::string, double> eu_share;
  if (config.donors.match == DonorMatch::EuShare) {
    for (const auto& inst : dataset.instances()) {
      eu_share[inst.instance_id] = eu_traffic_share(dataset, inst, calendar);
    }
  }

  auto metrics = config.metrics;
  std::sort(metrics.begin(), metrics.end());
  metrics.erase(std::unique(metrics.begin(), metrics.end()), metrics.end());

  for (auto metric : metrics) {
    MetricLayout layout;
    layout.metric = metric;
    layout.cadence = cadence_of(metric);
    layout.pre = calendar.pre_periods(layout.cadence);
    for (auto label : config.windows) {
      layout.last = std::max(layout.last,
                             window_bounds(label, calendar).post_end(layout.cadence, calendar));
    }
    layout.excluded = excluded_periods(calendar, layout.cadence, layout.last, config.exclude_days);
    for (int p = layout.pre.first; p <= layout.pre.last; ++p) {
      if (!layout.excluded[static_cast<std::size_t>(p - 1)]) {
        layout.pre_rows.push_back(static_cast<std::size_t>(p - 1));
      }
    }

    PanelDataset subsample;
    const PanelDataset* source = &dataset;
    if (metric == MetricKind::UniqueVisitors && config.apply_unique_floor) {
      subsample = unique_visitor_subsample(dataset, config.unique_floor);
      source = &subsample;
    }

    std::vector<Unit> controls;
    std::vector<Unit> treated;
    for (const auto& inst : source->instances()) {
      std::string why;
      auto unit = make_unit(inst, layout, calendar, &why);
      if (!unit) {
        if (inst.treated()) result.skipped.push_back({inst.instance_id, metric, why});
        continue;
      }
      if (auto it = eu_share.find(inst.instance_id); it != eu_share.end()) {
        unit->eu_share = it->second;
      }
      (inst.treated() ? treated : controls).push_back(std::move(*unit));
    }

    if (controls.empty()) {
      for (const auto& t : treated) {
        result.skipped.push_back({t.instance->instance_id, metric, "no control instances"});
      }
      continue;
    }

    std::vector<UnitResult> fits(treated.size());
    parallel_for(treated.size(), config.threads,
                 [&](std::size_t i) { fits[i] = fit_unit(treated[i], controls, layout, config); });

    // Placebo distribution: each of the first n_placebo controls refit as
    // if treated, donors drawn from the remaining controls.
    std::map<WindowLabel, std::vector<double>> placebo_betas;
    if (config.inference == Inference::Placebo) {
      const auto n = std::min(config.n_placebo, controls.size());
      std::vector<UnitResult> placebo(n);
      parallel_for(n, config.threads,
                   [&](std::size_t i) { placebo[i] = fit_unit(controls[i], controls, layout, config); });
      std::size_t used = 0;
      for (const auto& p : placebo) {
        if (!p.error.empty()) continue;
        ++used;
        for (const auto& e : p.effects) placebo_betas[e.window].push_back(e.beta3);
      }
      result.placebo.push_back({metric, config.n_placebo, used, config.n_placebo - used});
    }

    for (std::size_t i = 0; i < treated.size(); ++i) {
      auto& fit = fits[i];
      if (!fit.error.empty()) {
        result.skipped.push_back({treated[i].instance->instance_id, metric, fit.error});
        continue;
      }
      for (auto& e : fit.effects) {
        if (config.inference == Inference::Placebo) {
          const auto& betas = placebo_betas[e.window];
          set_p_value(e, placebo_p_value(e.beta3, betas, betas.size()).p_value, Inference::Placebo);
        }
        result.effects.push_back(std::move(e));
      }
      result.fits.push_back(std::move(*fit.fit));
    }
  }

  std::sort(result.effects.begin(), result.effects.end(),
            [](const EffectEstimate& a, const EffectEstimate& b) {
              return std::tie(a.instance_id, a.metric, a.window) <
                     std::tie(b.instance_id, b.metric, b.window);
            });
  std::sort(result.fits.begin(), result.fits.end(), [](const SynthFit& a, const SynthFit& b) {
    return std::tie(a.instance_id, a.metric) < std::tie(b.instance_id, b.metric);
  });
  std::sort(result.skipped.begin(), result.skipped.end(),
            [](const SkippedUnit& a, const SkippedUnit& b) {
              return std::tie(a.instance_id, a.metric) < std::tie(b.instance_id, b.metric);
            });

  result.website_effects = merge_websites(dataset, result.effects, calendar);
  result.intensity_effects = derive_intensity(result.website_effects);
  return result;
}

std::vector<WebsiteEffect> merge_websites(const PanelDataset& dataset,
                                          std::span<const EffectEstimate> effects,
                                          const Calendar& calendar) {
  std::map<std::tuple<std::string, MetricKind, WindowLabel>, std::vector<const EffectEstimate*>> groups;
  for (const auto& e : effects) {
    const auto* inst = dataset.find(e.instance_id);
    if (!inst) {
      throw std::invalid_argument("merge_websites: effect for unknown instance '" + e.instance_id + "'");
    }
    groups[{inst->website_id, e.metric, e.window}].push_back(&e);
  }

  std::map<std::vector<std::string>, std::optional<InstanceShares>> share_cache;
  std::vector<WebsiteEffect> out;
  for (const auto& [key, members] : groups) {
    const auto& [website, metric, window] = key;
    std::vector<std::string> ids;
    for (const auto* e : members) ids.push_back(e->instance_id);
    auto [cached, fresh] = share_cache.try_emplace(ids);
    if (fresh) {
      std::vector<const WebsiteInstance*> instances;
      for (const auto& id : ids) instances.push_back(dataset.find(id));
      try {
        cached->second = pre_treatment_shares(instances, calendar);
      } catch (const std::exception&) {
        cached->second.reset();
      }
    }
    if (!cached->second) continue;
    std::vector<InstanceDelta> deltas;
    for (const auto* e : members) deltas.push_back({e->instance_id, e->delta, e->p_value});
    out.push_back(merge_website(deltas, *cached->second, metric, window));
  }
  return out;
}

std::vector<double> website_deltas(std::span<const WebsiteEffect> effects, MetricKind metric,
                                   WindowLabel window) {
  std::vector<double> out;
  for (const auto& e : effects) {
    if (e.metric == metric && e.window == window) out.push_back(e.delta);
  }
  return out;
}

}  // namespace panelfx
