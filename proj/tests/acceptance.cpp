// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here and not configurable.
#include "panelfx/cohorts.hpp"
#include "panelfx/effects.hpp"
#include "panelfx/ingest.hpp"
#include "panelfx/pipeline.hpp"
#include "panelfx/report.hpp"
#include "panelfx/revenue.hpp"
#include "panelfx/robustness.hpp"
#include "panelfx/simkit.hpp"
#include "panelfx/stats.hpp"
#include "panelfx/synthcontrol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace panelfx;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s [%.2fs]%s%s\n", o.pass ? "PASS" : "FAIL", id, title, seconds_since(t0),
              o.detail.empty() ? "" : " - ", o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<double> mean_by_window(const EstimationResult& r, MetricKind metric) {
  std::vector<double> out;
  for (auto w : kAllWindows) {
    std::vector<double> d;
    for (const auto& e : r.effects) {
      if (e.metric == metric && e.window == w) d.push_back(e.delta);
    }
    out.push_back(d.empty() ? NAN : stats::mean(d));
  }
  return out;
}

Outcome revenue() {
  Outcome o;
  const auto ecom = ecommerce_impact(RevenueModel::reference_ecommerce(), -0.0337);
  const auto ad = ad_impact(RevenueModel::reference_adbased(), -0.0805);
  o.require(ad.baseline_cents == Cents{2045498261},
            "ad baseline " + ad.baseline_cents.to_string() + " != 20454982.61");
  const double r7 = std::fabs(ecom.baseline_revenue / 142643623.54 - 1.0);
  const double r8 = std::fabs(ecom.revenue_change / -7209722.73 - 1.0);
  const double r11 = std::fabs(ad.revenue_change / -2469953.43 - 1.0);
  o.require(r7 <= 1e-6, fmt("e-commerce baseline rel err %.3g > 1e-6", r7));
  o.require(r8 <= 2e-4, fmt("e-commerce change rel err %.3g > 2e-4", r8));
  o.require(r11 <= 1e-4, fmt("ad change rel err %.3g > 1e-4", r11));
  if (o.pass) {
    o.detail = "ad baseline " + ad.baseline_cents.to_string() + ", e-commerce baseline " +
               ecom.baseline_cents.to_string() + fmt(" (rel %.2g)", r7) + fmt(", changes rel %.2g", r8) +
               fmt(" / %.2g", r11);
  }
  return o;
}

Outcome recovery() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto threads = std::max(1u, std::thread::hardware_concurrency());
  SimConfig sc;
  sc.n_treated = 100;
  sc.n_control = 100;
  sc.weeks = 125;
  sc.noise_sigma = 0.05;
  sc.seasonality_amplitude = 0.1;
  sc.effect = {EffectShape::Constant, -0.10, 125};
  sc.seed = 2018;
  PipelineConfig pc;
  pc.threads = threads;
  const auto constant = run_estimation(generate_panel(sc, threads).dataset, pc);
  std::string means;
  for (auto metric : kAllMetrics) {
    const auto m = mean_by_window(constant, metric);
    for (std::size_t w = 0; w < m.size(); ++w) {
      o.require(m[w] >= -0.115 && m[w] <= -0.085,
                std::string(to_string(metric)) + " " + std::string(to_string(kAllWindows[w])) +
                    fmt(" mean %.4f outside [-0.115, -0.085]", m[w]));
    }
    if (metric == MetricKind::TotalVisits) {
      for (double v : m) means += fmt(" %.4f", v);
    }
  }

  sc.effect = {EffectShape::LinearRamp, -0.10, 125};
  const auto ramp = run_estimation(generate_panel(sc, threads).dataset, pc);
  std::string ramp_means;
  for (auto metric : kAllMetrics) {
    const auto m = mean_by_window(ramp, metric);
    for (std::size_t w = 1; w < m.size(); ++w) {
      o.require(m[w] <= m[w - 1] + 0.005, std::string(to_string(metric)) + " ramp not monotone at " +
                                              std::string(to_string(kAllWindows[w])));
    }
    if (metric == MetricKind::TotalVisits) {
      for (double v : m) ramp_means += fmt(" %.4f", v);
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 30.0, fmt("took %.1fs (target < 30s)", secs));
  if (o.pass) o.detail = "total_visits window means" + means + "; ramp" + ramp_means;
  return o;
}

Outcome null_calibration() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto threads = std::max(1u, std::thread::hardware_concurrency());
  SimConfig sc;
  sc.n_treated = 500;
  sc.n_control = 500;
  sc.seasonality_amplitude = 0.0;
  sc.effect = {EffectShape::Constant, 0.0, 125};
  sc.seed = 77;
  const auto sim = generate_panel(sc, threads);
  PipelineConfig pc;
  pc.threads = threads;
  pc.metrics = {MetricKind::TotalVisits};
  pc.windows = {WindowLabel::M18};
  for (auto inference : {Inference::HC1, Inference::Placebo}) {
    pc.inference = inference;
    pc.n_placebo = 499;
    const auto res = run_estimation(sim.dataset, pc);
    std::vector<double> d;
    std::size_t sig = 0;
    for (const auto& e : res.effects) {
      d.push_back(e.delta);
      sig += e.significant_5pct;
    }
    const double mean = stats::mean(d);
    const double share = static_cast<double>(sig) / static_cast<double>(d.size());
    const std::string name(to_string(inference));
    o.require(d.size() >= 500, name + ": fewer than 500 estimates");
    o.require(std::fabs(mean) < 0.005, name + fmt(" |mean delta| %.4f >= 0.005", std::fabs(mean)));
    o.require(share >= 0.02 && share <= 0.08, name + fmt(" rejection share %.3f outside [0.02, 0.08]", share));
    o.detail += (o.detail.empty() ? "" : ", ") + name + fmt(" mean %.4f", mean) + fmt(" reject %.3f", share);
  }
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, fmt("took %.1fs (target < 60s)", secs));
  return o;
}

Outcome closed_form_did() {
  Outcome o;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0.0, 0.25);
  std::uniform_int_distribution<int> len(8, 125);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::uniform_int_distribution<std::size_t> cut(2, n - 2);
    const auto n_pre = cut(rng);
    std::vector<double> t(n), s(n);
    double tp = 0, tq = 0, sp = 0, sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = 9.0 + z(rng);
      s[i] = 8.5 + z(rng);
      (i < n_pre ? tp : tq) += t[i];
      (i < n_pre ? sp : sq) += s[i];
    }
    const double a = static_cast<double>(n_pre), b = static_cast<double>(n - n_pre);
    const double did = (tq / b - tp / a) - (sq / b - sp / a);
    worst = std::max(worst, std::fabs(estimate_effect(t, s, n_pre).beta3 - did));
  }
  o.require(worst < 1e-10, fmt("max |beta3 - DiD| %.3g", worst));
  if (o.pass) o.detail = fmt("max |beta3 - DiD| over 1000 panels %.3g", worst);
  return o;
}

Outcome synth_exactness() {
  Outcome o;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.0, 0.1);
  auto path = [&](double level) {
    std::vector<double> v(46);
    for (int t = 0; t < 46; ++t) v[static_cast<std::size_t>(t)] = level + 0.2 * std::sin(t / 4.0) + z(rng);
    return v;
  };
  auto matrix = [](const std::vector<std::vector<double>>& cols) {
    Eigen::MatrixXd m(46, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (int t = 0; t < 46; ++t) m(t, static_cast<Eigen::Index>(j)) = cols[j][static_cast<std::size_t>(t)];
    }
    return m;
  };
  std::vector<std::vector<double>> pool{path(10), path(10.2), path(9.8), path(10.1), path(9.9)};
  const auto copy = fit_weights(pool[0], matrix(pool), WeightMode::Simplex);
  o.require(copy.weights[0] >= 0.999, fmt("copy weight %.6f < 0.999", copy.weights[0]));
  o.require(copy.pre_mse <= 1e-10, fmt("copy pre-MSE %.3g > 1e-10", copy.pre_mse));

  std::vector<std::vector<double>> ab{path(9.5), path(10.5)};
  std::vector<double> y(46);
  for (std::size_t t = 0; t < 46; ++t) y[t] = 0.5 * ab[0][t] + 0.5 * ab[1][t];
  const auto mix = fit_weights(y, matrix(ab), WeightMode::Simplex);
  const double err = std::max(std::fabs(mix.weights[0] - 0.5), std::fabs(mix.weights[1] - 0.5));
  o.require(err <= 1e-6, fmt("mixture weight error %.3g > 1e-6", err));
  o.require(mix.pre_mse <= 1e-10, fmt("mixture pre-MSE %.3g", mix.pre_mse));
  // 0.01-step grid over the two-donor simplex
  double best = 1e300, arg = -1;
  for (int k = 0; k <= 100; ++k) {
    const double w = k / 100.0;
    double s = 0;
    for (std::size_t t = 0; t < 46; ++t) {
      const double g = y[t] - w * ab[0][t] - (1 - w) * ab[1][t];
      s += g * g;
    }
    if (s < best) best = s, arg = w;
  }
  o.require(std::fabs(mix.weights[0] - arg) <= 1e-6, fmt("grid optimum %.2f disagrees", arg));
  if (o.pass) {
    o.detail = fmt("copy weight %.9f", copy.weights[0]) + fmt(", mixture error %.2g", err) +
               fmt(", grid optimum w1 = %.2f", arg);
  }
  return o;
}

Outcome intensity() {
  Outcome o;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const double dq = u(rng), dv = u(rng);
    worst = std::max(worst, std::fabs((1 + intensity_effect(dq, dv)) * (1 + dv) - 1 - dq));
  }
  o.require(worst <= 1e-12, fmt("round-trip error %.3g", worst));
  o.require(intensity_effect(0.0, 0.0) == 0.0, "(0, 0) != 0");
  o.require(intensity_effect(0.10, 0.10) == 0.0, "(0.1, 0.1) != 0");
  o.require(intensity_effect(IntensityMetric::VisitsPerUnique, -0.0488, -0.0077) == 0.9512 / 0.9923 - 1.0,
            "visits per unique from (-0.0488, -0.0077)");
  if (o.pass) o.detail = fmt("max round-trip error %.2g over 10000 pairs", worst);
  return o;
}

Outcome windows() {
  Outcome o;
  const int expected[] = {60, 73, 86, 99, 125};
  for (std::size_t i = 0; i < kAllWindows.size(); ++i) {
    const int got = window_bounds(kAllWindows[i]).post_end_week;
    o.require(got == expected[i], std::string(to_string(kAllWindows[i])) + " ends at week " + std::to_string(got));
  }
  if (o.pass) o.detail = "post_end_week 60, 73, 86, 99, 125";
  return o;
}

WebsiteInstance flat(std::string id, Base user, Base site, double pre, double post) {
  WebsiteInstance inst;
  inst.instance_id = id;
  inst.website_id = "W" + id;
  inst.user_base = user;
  inst.website_base = site;
  inst.industry = "news";
  std::vector<double> v(125);
  for (int w = 1; w <= 125; ++w) v[static_cast<std::size_t>(w - 1)] = w < 47 ? pre : post;
  inst.series.emplace(MetricKind::TotalVisits, TimeSeries(MetricKind::TotalVisits, Calendar{}.week_start(1), v));
  return inst;
}

Outcome robustness_mechanics() {
  Outcome o;
  std::vector<WebsiteInstance> insts;
  for (int i = 0; i < 6; ++i) {
    insts.push_back(flat("E" + std::to_string(i), Base::EU, Base::EU, 1500 + 300 * i, 1400 + 250 * i));
    insts.push_back(flat("N" + std::to_string(i), Base::NonEU, Base::NonEU, 1200 + 500 * i, 1300 + 450 * i));
  }
  FilterOptions fo;
  fo.outlier.enabled = false;
  const std::vector<double> base{1000};
  const auto sweep = threshold_sweep(PanelDataset(insts), base, 1000, fo);
  o.require(sweep.rows.size() == 1 && sweep.rows[0].eu_users.p_value == 1.0 && sweep.rows[0].noneu_users.p_value == 1.0,
            "base threshold p-value is not 1.0");

  // cells: EU site / non-EU users {100 -> 90, 300 -> 250}, non-EU / non-EU
  // {200 -> 210, 400 -> 420}, non-EU site / EU users {50 -> 40}
  std::vector<WebsiteInstance> did;
  did.push_back(flat("a1", Base::NonEU, Base::EU, 100, 90));
  did.push_back(flat("a2", Base::NonEU, Base::EU, 300, 250));
  did.push_back(flat("c1", Base::NonEU, Base::NonEU, 200, 210));
  did.push_back(flat("c2", Base::NonEU, Base::NonEU, 400, 420));
  did.push_back(flat("e1", Base::EU, Base::NonEU, 50, 40));
  const auto tables = crossed_did_table(PanelDataset(std::move(did)), Calendar{});
  o.require(tables.size() == 2, "expected two DiD tables");
  if (tables.size() == 2) {
    o.require(tables[0].difference_a == -30.0 && tables[0].difference_b == 15.0 && tables[0].did == -45.0,
              fmt("table 1 DiD %.6f != -45", tables[0].did));
    o.require(tables[1].difference_a == -10.0 && tables[1].did == -25.0, fmt("table 2 DiD %.6f != -25", tables[1].did));
  }

  std::vector<ControlShare> persist;
  for (int i = 0; i < 50; ++i) {
    const double v = 800.0 + 97.0 * i + (i % 3) * 1000.0;
    persist.push_back({"C" + std::to_string(i), i % 4 == 0 ? 0.0 : 0.013 * ((i * 7) % 31), v, v});
  }
  const auto eu = eu_share_analysis(persist);
  const double b0 = eu.coefficients[0].estimate, b1 = eu.coefficients[1].estimate, b2 = eu.coefficients[2].estimate;
  o.require(std::fabs(b1 - 1.0) <= 1e-8, fmt("beta1 %.12f", b1));
  o.require(std::fabs(b2) <= 1e-8, fmt("beta2 %.3g", b2));
  o.require(std::fabs(b0) <= 1e-8, fmt("intercept %.3g", b0));
  if (o.pass) o.detail = "sweep base p = 1, DiD -45 / -25, " + fmt("beta1 - 1 = %.2g", b1 - 1.0) + fmt(", beta2 = %.2g", b2);
  return o;
}

bool same_results(const EstimationResult& a, const EstimationResult& b) {
  if (a.effects.size() != b.effects.size() || a.website_effects.size() != b.website_effects.size() ||
      a.intensity_effects.size() != b.intensity_effects.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.effects.size(); ++i) {
    const auto& x = a.effects[i];
    const auto& y = b.effects[i];
    if (x.instance_id != y.instance_id || x.metric != y.metric || x.window != y.window ||
        std::memcmp(&x.beta3, &y.beta3, sizeof(double)) != 0 ||
        std::memcmp(&x.std_err, &y.std_err, sizeof(double)) != 0 ||
        std::memcmp(&x.p_value, &y.p_value, sizeof(double)) != 0) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.website_effects.size(); ++i) {
    if (std::memcmp(&a.website_effects[i].delta, &b.website_effects[i].delta, sizeof(double)) != 0) return false;
  }
  for (std::size_t i = 0; i < a.intensity_effects.size(); ++i) {
    if (std::memcmp(&a.intensity_effects[i].delta, &b.intensity_effects[i].delta, sizeof(double)) != 0) return false;
  }
  return true;
}

Outcome scale() {
  Outcome o;
  SimConfig sc;
  sc.n_treated = 500;
  sc.n_control = 500;
  sc.effect.delta = -0.05;
  sc.seed = 9;
  std::ostringstream csv;
  write_panel(csv, generate_panel(sc).dataset);
  const std::string text = csv.str();

  auto full_pipeline = [&](std::size_t threads, EstimationResult& out) {
    const auto t0 = Clock::now();
    std::istringstream in(text);
    const auto raw = parse_panel(in, "scale.csv");
    auto [panel, filter] = apply_filters(raw);
    PipelineConfig pc;
    pc.threads = threads;
    out = run_estimation(panel, pc);
    const auto quantity = quantity_summary(out.website_effects);
    const auto cohorts = cohort_report(panel, out.website_effects, kAllCohortKeys);
    const auto gain_lose = gain_lose_tables(out.website_effects, out.intensity_effects);
    if (raw.size() != 1000 || quantity.empty() || cohorts.empty() || gain_lose.empty()) {
      throw std::runtime_error("pipeline produced empty output");
    }
    return seconds_since(t0);
  };
  EstimationResult one, many;
  const double t1 = full_pipeline(1, one);
  const auto threads = std::max(4u, std::thread::hardware_concurrency());
  const double tn = full_pipeline(threads, many);
  o.require(t1 < 60.0, fmt("single-thread run took %.1fs", t1));
  o.require(same_results(one, many), "results differ between 1 and " + std::to_string(threads) + " threads");
  o.require(one.effects.size() >= 1000u * 5u / 2u, "too few effects");
  if (o.pass) {
    o.detail = std::to_string(one.effects.size()) + " effects; 1 thread " + fmt("%.1fs", t1) + ", " +
               std::to_string(threads) + " threads " + fmt("%.1fs", tn) + ", bitwise equal";
  }
  return o;
}

}  // namespace

int main() {
  report(1, "revenue arithmetic", revenue);
  report(2, "effect recovery and monotone ramp", recovery);
  report(3, "null calibration (HC1 and placebo)", null_calibration);
  report(4, "closed-form DiD equivalence", closed_form_did);
  report(5, "synthetic-control exactness", synth_exactness);
  report(6, "intensity algebra", intensity);
  report(7, "window constants", windows);
  report(8, "robustness mechanics", robustness_mechanics);
  report(9, "scale and thread stability", scale);
  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
