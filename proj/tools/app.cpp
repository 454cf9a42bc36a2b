#include "app.hpp"

#include "config.hpp"

#include "panelfx/io.hpp"
#include "panelfx/report.hpp"
#include "panelfx/version.hpp"

#include <CLI11/CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace panelfx::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::set<std::string> kCommands{"ingest",  "estimate",   "intensity", "cohorts",
                                      "revenue", "simulate",   "robustness", "report"};

class MissingInput : public std::runtime_error {
 public:
  explicit MissingInput(const fs::path& path, const std::string& what = "input file")
      : std::runtime_error(what + " not found: " + path.string()), path_(path) {}
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

class BadData : public std::runtime_error {
 public:
  BadData(const fs::path& path, const std::string& message)
      : std::runtime_error(path.string() + ": " + message), path_(path) {}
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Runs f, turning std::invalid_argument into a ConfigError on `key`.
template <typename F>
auto field(const std::string& key, F f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

std::string read_bytes(const fs::path& path) {
  std::ifstream file(path, std::ios::binary);
  std::ostringstream text;
  text << file.rdbuf();
  return text.str();
}

struct Settings {
  RunConfig config;
  fs::path out_dir;
  fs::path input_panel;
  PipelineConfig pipeline;
  FilterOptions filter;
  SimConfig sim;
  std::vector<CohortKey> cohort_keys;
  WindowLabel revenue_window = WindowLabel::M18;
  WindowLabel robustness_window = WindowLabel::M18;
  std::vector<double> thresholds;
  std::vector<DonorVariant> donor_variants;
};

Settings resolve(RunConfig config) {
  Settings s;
  s.config = config;
  const auto& c = s.config;

  if (c.get("output.dir").empty()) {
    const char* env = std::getenv("PANELFX_OUT_DIR");
    s.out_dir = env && *env ? fs::path(env) : fs::path("panelfx_out");
  } else {
    s.out_dir = c.get_path("output.dir");
  }
  s.input_panel = c.get("input.panel").empty() ? s.out_dir / "panel.csv" : c.get_path("input.panel");

  const auto anchor = field("calendar.anchor", [&] { return parse_iso_date(c.get("calendar.anchor")); });
  const auto enforcement =
      field("calendar.enforcement", [&] { return parse_iso_date(c.get("calendar.enforcement")); });
  const Calendar calendar = field("calendar.enforcement", [&] { return Calendar(anchor, enforcement); });

  auto& p = s.pipeline;
  p.calendar = calendar;
  p.windows = field("windows", [&] { return parse_window_list(c.get("windows")); });
  if (p.windows.empty()) throw ConfigError("windows", "no windows given");
  p.metrics.clear();
  for (const auto& m : c.get_list("metrics")) {
    p.metrics.push_back(field("metrics", [&] { return parse_metric(m); }));
  }
  if (p.metrics.empty()) throw ConfigError("metrics", "no metrics given");
  p.donors.k = c.get_count("donors.k");
  if (p.donors.k == 0) throw ConfigError("donors.k", "must be >= 1");
  p.donors.match = field("donors.match", [&] { return parse_donor_match(c.get("donors.match")); });
  p.donors.eu_share_tolerance = c.get_double("donors.eu_share_tolerance");
  if (p.donors.eu_share_tolerance < 0.0) throw ConfigError("donors.eu_share_tolerance", "must be >= 0");
  p.donors.min_candidates = c.get_count("donors.min_candidates");
  p.weight_mode = field("weights.mode", [&] { return parse_weight_mode(c.get("weights.mode")); });
  p.inference = field("inference.method", [&] { return parse_inference(c.get("inference.method")); });
  p.n_placebo = c.get_count("inference.n_placebo");
  if (p.inference == Inference::Placebo && p.n_placebo == 0) {
    throw ConfigError("inference.n_placebo", "must be >= 1 with placebo inference");
  }
  p.exclude_days = static_cast<int>(c.get_count("exclusion.days"));
  p.apply_unique_floor = c.get_bool("filter.apply_unique_floor");
  p.unique_floor = c.get_double("filter.unique_floor");
  p.threads = c.get_count("run.threads");
  if (p.threads == 0) throw ConfigError("run.threads", "must be >= 1");

  auto& f = s.filter;
  f.min_avg_weekly_visits = c.get_double("filter.min_avg_weekly_visits");
  f.drop_monthly_gaps = c.get_bool("filter.drop_monthly_gaps");
  f.outlier.enabled = c.get_bool("filter.outlier");
  f.outlier.window = static_cast<int>(c.get_count("filter.outlier_window"));
  if (f.outlier.window < 3 || f.outlier.window % 2 == 0) {
    throw ConfigError("filter.outlier_window", "must be odd and >= 3");
  }
  f.outlier.mad_multiplier = c.get_double("filter.outlier_mad_multiplier");
  if (f.outlier.mad_multiplier <= 0.0) throw ConfigError("filter.outlier_mad_multiplier", "must be positive");
  f.outlier.min_consecutive = static_cast<int>(c.get_count("filter.outlier_min_consecutive"));
  if (f.outlier.min_consecutive < 1) throw ConfigError("filter.outlier_min_consecutive", "must be >= 1");

  auto& sim = s.sim;
  sim.calendar = calendar;
  sim.seed = c.get_u64("run.seed");
  sim.n_treated = c.get_count("simulate.n_treated");
  sim.n_control = c.get_count("simulate.n_control");
  sim.weeks = static_cast<int>(c.get_count("simulate.weeks"));
  sim.base_level = c.get_double("simulate.base_level");
  sim.unit_sigma = c.get_double("simulate.unit_sigma");
  sim.seasonality_amplitude = c.get_double("simulate.seasonality_amplitude");
  sim.seasonality_period = c.get_double("simulate.seasonality_period");
  sim.noise_sigma = c.get_double("simulate.noise_sigma");
  sim.effect.shape = field("simulate.effect_shape", [&] { return parse_effect_shape(c.get("simulate.effect_shape")); });
  sim.effect.delta = c.get_double("simulate.effect_delta");
  sim.effect.ramp_end_week = static_cast<int>(c.get_long("simulate.ramp_end_week"));
  sim.industries = c.get_list("simulate.industries");
  sim.visits_per_unique = c.get_double("simulate.visits_per_unique");
  sim.pages_per_visit = c.get_double("simulate.pages_per_visit");
  sim.minutes_per_visit = c.get_double("simulate.minutes_per_visit");
  sim.bounce_rate = c.get_double("simulate.bounce_rate");
  sim.intensity_sigma = c.get_double("simulate.intensity_sigma");
  for (auto m : kAllIntensityMetrics) {
    const auto key = "simulate.intensity." + std::string(to_string(m));
    const double d = c.get_double(key);
    if (d != 0.0) sim.intensity_effects[m] = d;
  }
  sim.dual_instance_fraction = c.get_double("simulate.dual_instance_fraction");
  sim.control_companion_fraction = c.get_double("simulate.control_companion_fraction");
  try {
    sim.validate();
  } catch (const std::invalid_argument& e) {
    // messages look like "simulate.<field>: reason"
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    throw ConfigError(msg.substr(0, colon), colon == std::string::npos ? msg : msg.substr(colon + 2));
  }

  for (const auto& k : c.get_list("cohorts.keys")) {
    s.cohort_keys.push_back(field("cohorts.keys", [&] { return parse_cohort_key(k); }));
  }
  s.revenue_window = field("revenue.window", [&] { return parse_window_label(c.get("revenue.window")); });
  s.robustness_window =
      field("robustness.window", [&] { return parse_window_label(c.get("robustness.window")); });
  for (const auto* key : {"revenue.years", "revenue.ecommerce.visits_per_year",
                          "revenue.ecommerce.conversion_rate", "revenue.ecommerce.revenue_per_purchase",
                          "revenue.adbased.page_impressions_per_year", "revenue.adbased.ads_per_page",
                          "revenue.adbased.ad_price"}) {
    if (!(c.get_double(key) > 0.0)) throw ConfigError(key, "must be positive");
  }
  for (const auto* key : {"revenue.ecommerce.delta", "revenue.adbased.delta"}) {
    if (!c.get(key).empty() && !(c.get_double(key) > -1.0)) throw ConfigError(key, "must be > -1");
  }

  auto number = [](const std::string& text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ConfigError("robustness.thresholds", "bad number '" + text + "'");
    }
    return v;
  };
  const auto thresholds = c.get("robustness.thresholds");
  if (thresholds.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::istringstream in(thresholds);
    std::string item;
    while (std::getline(in, item, ':')) parts.push_back(number(item));
    if (parts.size() != 3) throw ConfigError("robustness.thresholds", "range must be lo:hi:step");
    s.thresholds = field("robustness.thresholds", [&] { return threshold_range(parts[0], parts[1], parts[2]); });
  } else {
    for (const auto& t : c.get_list("robustness.thresholds")) s.thresholds.push_back(number(t));
  }
  c.get_double("robustness.base_threshold");
  if (c.get_long("robustness.exclude_days") < 0) throw ConfigError("robustness.exclude_days", "must be >= 0");
  for (const auto& v : c.get_list("robustness.donor_variants")) {
    s.donor_variants.push_back(field("robustness.donor_variants", [&] { return parse_donor_variant(v); }));
  }
  return s;
}

std::string iso_utc(std::chrono::sys_seconds t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(day).c_str(),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

// --- artifacts ------------------------------------------------------------------

class Run {
 public:
  Run(std::string command, Settings settings) : command_(std::move(command)), s_(std::move(settings)) {}

  const Settings& settings() const { return s_; }
  const fs::path& out_dir() const { return s_.out_dir; }

  void write(const std::string& name, const std::string& content) {
    const auto path = s_.out_dir / name;
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    file << content;
    if (!file) throw std::runtime_error("cannot write " + path.string());
    outputs_.push_back({name, fnv1a64_hex(content), content.size()});
  }

  template <typename F>
  void write_with(const std::string& name, F f) {
    std::ostringstream ss;
    f(ss);
    write(name, ss.str());
  }

  void note_input(const fs::path& path) {
    const auto bytes = read_bytes(path);
    inputs_.push_back({path.string(), fnv1a64_hex(bytes), bytes.size()});
  }

  void note(std::string text) { notes_.push_back(std::move(text)); }

  /// Panel from `path`; missing file -> MissingInput, parse failure -> BadData.
  PanelDataset load_panel(const fs::path& path) {
    if (!fs::exists(path)) throw MissingInput(path, "panel file");
    try {
      auto dataset = parse_panel(path);
      note_input(path);
      return dataset;
    } catch (const std::exception& e) {
      throw BadData(path, e.what());
    }
  }

  std::vector<WebsiteEffect> load_website_effects() {
    const auto path = s_.out_dir / "website_effects.csv";
    if (!fs::exists(path)) throw MissingInput(path, "website effects (run estimate first)");
    std::ifstream file(path);
    try {
      auto effects = io::read_website_effects_csv(file);
      note_input(path);
      return effects;
    } catch (const std::exception& e) {
      throw BadData(path, e.what());
    }
  }

  std::vector<EffectEstimate> load_effects() {
    const auto path = s_.out_dir / "effects.csv";
    if (!fs::exists(path)) throw MissingInput(path, "effects (run estimate first)");
    std::ifstream file(path);
    try {
      auto effects = io::read_effects_csv(file);
      note_input(path);
      return effects;
    } catch (const std::exception& e) {
      throw BadData(path, e.what());
    }
  }

  /// The filtered panel of an earlier ingest if present, else the input panel.
  PanelDataset analysis_panel() {
    const auto filtered = s_.out_dir / "panel_filtered.csv";
    return load_panel(fs::exists(filtered) ? filtered : s_.input_panel);
  }

  void finish() {
    const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    json inputs = json::array();
    for (const auto& d : inputs_) inputs.push_back({{"path", d.source}, {"fnv1a64", d.fnv1a64}, {"bytes", d.bytes}});
    json outputs = json::array();
    for (const auto& d : outputs_) outputs.push_back({{"file", d.source}, {"fnv1a64", d.fnv1a64}, {"bytes", d.bytes}});
    json config = json::object();
    for (const auto& [k, v] : s_.config.resolved()) config[k] = v;
    json manifest{{"command", command_},
                  {"panelfx_version", kVersion},
                  {"created_utc", iso_utc(now)},
                  {"inputs", inputs},
                  {"outputs", outputs},
                  {"notes", notes_},
                  {"config", config}};
    write(command_ + ".config.resolved", s_.config.resolved_text());
    std::ofstream(s_.out_dir / (command_ + ".manifest.json"), std::ios::binary | std::ios::trunc)
        << manifest.dump(2) << "\n";
    fs::remove(s_.out_dir / "error.json");
  }

 private:
  std::string command_;
  Settings s_;
  std::vector<SourceDigest> inputs_;
  std::vector<SourceDigest> outputs_;
  std::vector<std::string> notes_;
};



// --- commands -------------------------------------------------------------------

void cmd_ingest(Run& run) {
  const auto& s = run.settings();
  const auto raw = run.load_panel(s.input_panel);
  auto [filtered, report] = apply_filters(raw, s.filter);
  // The unique-visitor floor only restricts that metric's sample; its
  // exclusions are reported, the panel keeps the instances.
  FilterReport unique_report;
  const auto unique = unique_visitor_subsample(filtered, s.pipeline.unique_floor, &unique_report);
  run.write_with("panel_filtered.csv", [&](std::ostream& o) { write_panel(o, filtered); });
  run.write("filter_report.json", io::filter_report_json(report));
  run.write("unique_floor_report.json", io::filter_report_json(unique_report));
  run.note("retained " + std::to_string(filtered.size()) + " of " + std::to_string(raw.size()) +
           " instances; unique-visitor subsample " + std::to_string(unique.size()));
}

void write_estimation(Run& run, const EstimationResult& result) {
  run.write_with("effects.csv", [&](std::ostream& o) { io::write_effects_csv(o, result.effects); });
  run.write_with("website_effects.csv",
                 [&](std::ostream& o) { io::write_website_effects_csv(o, result.website_effects); });
  run.write_with("intensity_effects.csv",
                 [&](std::ostream& o) { io::write_intensity_csv(o, result.intensity_effects); });
  run.write_with("skipped.csv", [&](std::ostream& o) { io::write_skipped_csv(o, result.skipped); });
  run.write("synth_weights.json", io::synth_fits_json(result.fits));
  if (!result.placebo.empty()) run.write("placebo.json", io::placebo_json(result.placebo));
}

void cmd_estimate(Run& run) {
  const auto& s = run.settings();
  const auto dataset = run.analysis_panel();
  const auto result = run_estimation(dataset, s.pipeline);
  write_estimation(run, result);
  run.note(std::to_string(result.effects.size()) + " instance effects, " +
           std::to_string(result.skipped.size()) + " skipped");

  // A simulated panel leaves its ground truth next to it.
  const auto truth_path = s.out_dir / "ground_truth.json";
  if (fs::exists(truth_path)) {
    std::ifstream file(truth_path);
    const auto truth = io::read_ground_truth_json(file);
    try {
      run.write("recovery.json", io::recovery_json(evaluate_recovery(result.effects, truth)));
      run.note_input(truth_path);
    } catch (const std::invalid_argument& e) {
      run.note(std::string("recovery not evaluated: ") + e.what());
    }
  }
}

void cmd_intensity(Run& run) {
  const auto websites = run.load_website_effects();
  const auto intensity = derive_intensity(websites);
  const auto tables = gain_lose_tables(websites, intensity);
  run.write_with("intensity_effects.csv", [&](std::ostream& o) { io::write_intensity_csv(o, intensity); });
  run.write_with("gain_lose.csv", [&](std::ostream& o) { io::write_gain_lose_csv(o, tables); });
  run.write("gain_lose.json", io::gain_lose_json(tables));
  run.write_with("table_intensity.csv", [&](std::ostream& o) { io::write_intensity_table_csv(o, tables); });
}

void cmd_cohorts(Run& run) {
  const auto& s = run.settings();
  const auto websites = run.load_website_effects();
  const auto dataset = run.analysis_panel();
  const auto rows = cohort_report(dataset, websites, s.cohort_keys);
  run.write_with("cohorts.csv", [&](std::ostream& o) { io::write_cohorts_csv(o, rows); });
  run.write("cohorts.json", io::cohorts_json(rows));
  run.write_with("plot_cohorts.csv", [&](std::ostream& o) { io::write_cohort_plot_csv(o, rows); });
}

void cmd_revenue(Run& run) {
  const auto& s = run.settings();
  const auto& c = s.config;
  std::optional<std::vector<WebsiteEffect>> websites;
  std::optional<PanelDataset> dataset;

  auto delta_for = [&](const std::string& prefix, MetricKind metric) {
    if (!c.get(prefix + ".delta").empty()) return c.get_double(prefix + ".delta");
    if (!websites) websites = run.load_website_effects();
    const auto industry = c.get(prefix + ".industry");
    if (!industry.empty() && !dataset) dataset = run.analysis_panel();
    std::vector<double> deltas;
    for (const auto& e : *websites) {
      if (e.metric != metric || e.window != s.revenue_window) continue;
      if (!industry.empty() && primary_instance(*dataset, e).industry != industry) continue;
      deltas.push_back(e.delta);
    }
    if (deltas.empty()) {
      throw BadData(s.out_dir / "website_effects.csv",
                    "no " + std::string(to_string(metric)) + " effects for window " +
                        std::string(to_string(s.revenue_window)) +
                        (industry.empty() ? "" : " in industry '" + industry + "'"));
    }
    run.note(prefix + ": mean of " + std::to_string(deltas.size()) + " website effects");
    return stats::mean(deltas);
  };

  RevenueModel shop = RevenueModel::reference_ecommerce();
  shop.visits_per_year = c.get_double("revenue.ecommerce.visits_per_year");
  shop.conversion_rate = c.get_double("revenue.ecommerce.conversion_rate");
  shop.revenue_per_purchase = c.get_double("revenue.ecommerce.revenue_per_purchase");
  shop.years = c.get_double("revenue.years");
  RevenueModel news = RevenueModel::reference_adbased();
  news.page_impressions_per_year = c.get_double("revenue.adbased.page_impressions_per_year");
  news.ads_per_page = c.get_double("revenue.adbased.ads_per_page");
  news.ad_price = c.get_double("revenue.adbased.ad_price");
  news.years = shop.years;

  const double shop_delta = delta_for("revenue.ecommerce", MetricKind::TotalVisits);
  const double news_delta = delta_for("revenue.adbased", MetricKind::PageImpressions);
  const auto shop_impact = ecommerce_impact(shop, shop_delta);
  const auto news_impact = ad_impact(news, news_delta);
  run.write("revenue_ecommerce.json", io::revenue_json(shop, shop_delta, shop_impact));
  run.write("revenue_adbased.json", io::revenue_json(news, news_delta, news_impact));
  run.write_with("revenue.csv", [&](std::ostream& o) {
    o << "kind,delta,years,baseline_revenue,revenue_change\n";
    o << "ecommerce," << io::format_number(shop_delta) << ',' << io::format_number(shop.years) << ','
      << shop_impact.baseline_cents.to_string() << ',' << shop_impact.change_cents.to_string() << '\n';
    o << "adbased," << io::format_number(news_delta) << ',' << io::format_number(news.years) << ','
      << news_impact.baseline_cents.to_string() << ',' << news_impact.change_cents.to_string() << '\n';
  });
}

void cmd_simulate(Run& run) {
  const auto& s = run.settings();
  const auto sim = generate_panel(s.sim, s.pipeline.threads);
  run.write_with("panel.csv", [&](std::ostream& o) { write_panel(o, sim.dataset); });
  run.write("ground_truth.json", io::ground_truth_json(sim.truth));
  run.note("seed " + std::to_string(s.sim.seed) + ", " + std::to_string(sim.dataset.size()) + " instances");
}

void cmd_robustness(Run& run) {
  const auto& s = run.settings();
  const auto& c = s.config;
  const auto raw = run.load_panel(s.input_panel);
  const auto dataset = apply_filters(raw, s.filter).first;
  json summary = json::object();

  const auto sweep = threshold_sweep(raw, s.thresholds, c.get_double("robustness.base_threshold"), s.filter);
  run.write_with("robustness_threshold_sweep.csv", [&](std::ostream& o) { io::write_sweep_csv(o, sweep); });
  run.write("robustness_threshold_sweep.json", io::sweep_json(sweep));
  summary["threshold_sweep"] = "ok";

  const auto base = run_estimation(dataset, s.pipeline);
  const auto exclusion =
      exclusion_window_rerun(dataset, s.pipeline, static_cast<int>(c.get_long("robustness.exclude_days")), &base);
  run.write_with("robustness_exclusion.csv", [&](std::ostream& o) { io::write_rerun_csv(o, exclusion); });
  run.write("robustness_exclusion.json", io::rerun_json(exclusion));
  summary["exclusion_window"] = "ok";

  try {
    const auto shares = control_shares(dataset, s.pipeline.calendar, s.robustness_window);
    const auto report = eu_share_analysis(shares);
    run.write_with("robustness_eu_share_deciles.csv",
                   [&](std::ostream& o) { io::write_eu_share_deciles_csv(o, report); });
    run.write_with("robustness_eu_share_regression.csv",
                   [&](std::ostream& o) { io::write_eu_share_regression_csv(o, report); });
    run.write("robustness_eu_share.json", io::eu_share_json(report));
    summary["eu_share"] = "ok";
  } catch (const std::exception& e) {
    summary["eu_share"] = std::string("skipped: ") + e.what();
  }

  try {
    const auto tables = crossed_did_table(dataset, s.pipeline.calendar, s.robustness_window);
    run.write_with("robustness_did.csv", [&](std::ostream& o) { io::write_did_csv(o, tables); });
    run.write("robustness_did.json", io::did_json(tables));
    summary["crossed_did"] = "ok";
  } catch (const std::exception& e) {
    summary["crossed_did"] = std::string("skipped: ") + e.what();
  }

  for (auto variant : s.donor_variants) {
    const auto report = donor_variant_rerun(dataset, s.pipeline, variant, &base);
    const std::string name(to_string(variant));
    run.write_with("robustness_donor_" + name + ".csv", [&](std::ostream& o) { io::write_rerun_csv(o, report); });
    run.write("robustness_donor_" + name + ".json", io::rerun_json(report));
    summary["donor_" + name] = "ok";
  }
  run.write("robustness_summary.json", summary.dump(2) + "\n");
}

void cmd_report(Run& run) {
  const auto effects = run.load_effects();
  const auto websites = run.load_website_effects();
  const auto overall = quantity_summary(websites);
  run.write_with("table_quantity.csv", [&](std::ostream& o) { io::write_quantity_table_csv(o, overall); });
  run.write("table_quantity.json", io::cohorts_json(overall));
  const auto intensity = derive_intensity(websites);
  const auto tables = gain_lose_tables(websites, intensity);
  run.write_with("table_intensity.csv", [&](std::ostream& o) { io::write_intensity_table_csv(o, tables); });
  run.write("table_intensity.json", io::gain_lose_json(tables));
  run.write_with("plot_effect_distribution.csv", [&](std::ostream& o) {
    io::write_effect_distribution_csv(o, websites, MetricKind::TotalVisits);
  });
  std::set<std::string> instances;
  for (const auto& e : effects) instances.insert(e.instance_id);
  std::set<std::string> sites;
  for (const auto& w : websites) sites.insert(w.website_id);
  run.write("summary.json", json{{"instances", instances.size()},
                                 {"websites", sites.size()},
                                 {"instance_effects", effects.size()},
                                 {"website_effects", websites.size()}}
                                    .dump(2) + "\n");
}

void write_error(const fs::path& out_dir, const std::string& command, int code, const std::string& kind,
                 const std::string& message, const json& extra) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) return;
  json j{{"status", "error"}, {"command", command}, {"exit_code", code}, {"kind", kind}, {"message", message}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  std::ofstream(out_dir / "error.json", std::ios::binary | std::ios::trunc) << j.dump(2) << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"panelfx: policy-impact estimation on website traffic panels", "panelfx"};
  std::string command;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> windows;
  std::optional<std::size_t> threads;
  app.add_option("command", command, "ingest | estimate | intensity | cohorts | revenue | simulate | robustness | report")
      ->required();
  app.add_option("--config", config_path, "configuration file (key = value)")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "seed (overrides run.seed)");
  app.add_option("--windows", windows, "comma-separated window labels, e.g. 3m,18m");
  app.add_option("--threads", threads, "worker threads (overrides run.threads)");
  app.set_version_flag("--version", std::string(kVersion));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (!kCommands.contains(command)) {
    err << "panelfx: unknown command '" << command << "'\n" << app.help();
    return kUsage;
  }

  fs::path error_dir;
  try {
    if (!fs::exists(config_path)) throw MissingInput(config_path, "config file");
    auto config = RunConfig::load(config_path);
    if (out_dir) config.set("output.dir", fs::absolute(*out_dir).string());
    if (seed) config.set("run.seed", std::to_string(*seed));
    if (windows) config.set("windows", *windows);
    if (threads) config.set("run.threads", std::to_string(*threads));
    error_dir = config.get("output.dir").empty() ? fs::path{} : config.get_path("output.dir");
    auto settings = resolve(std::move(config));
    error_dir = settings.out_dir;
    fs::create_directories(settings.out_dir);

    Run r(command, std::move(settings));
    if (command == "ingest") cmd_ingest(r);
    else if (command == "estimate") cmd_estimate(r);
    else if (command == "intensity") cmd_intensity(r);
    else if (command == "cohorts") cmd_cohorts(r);
    else if (command == "revenue") cmd_revenue(r);
    else if (command == "simulate") cmd_simulate(r);
    else if (command == "robustness") cmd_robustness(r);
    else if (command == "report") cmd_report(r);
    r.finish();
    out << "panelfx " << command << ": wrote " << r.out_dir().string() << "\n";
    return kOk;
  } catch (const MissingInput& e) {
    err << "panelfx: error: " << e.what() << "\n";
    write_error(error_dir, command, kMissingInput, "missing_input", e.what(), {{"path", e.path().string()}});
    return kMissingInput;
  } catch (const ConfigError& e) {
    err << "panelfx: config error: " << e.what() << "\n";
    write_error(error_dir, command, kBadConfig, "config", e.what(), {{"field", e.field()}});
    return kBadConfig;
  } catch (const BadData& e) {
    err << "panelfx: data error: " << e.what() << "\n";
    write_error(error_dir, command, kBadData, "data", e.what(), {{"path", e.path().string()}});
    return kBadData;
  } catch (const std::exception& e) {
    err << "panelfx: error: " << e.what() << "\n";
    write_error(error_dir, command, kFailure, "runtime", e.what(), json::object());
    return kFailure;
  }
}

}  // namespace panelfx::cli
