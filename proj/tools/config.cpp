#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace panelfx::cli {

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys{
      {"input.panel", "", "panel CSV; defaults to <out>/panel.csv"},
      {"output.dir", "", "output directory; defaults to $PANELFX_OUT_DIR or ./panelfx_out"},
      {"calendar.anchor", "2017-07-01", "first day of week 1"},
      {"calendar.enforcement", "2018-05-25", "enforcement date"},
      {"windows", "3m,6m,9m,12m,18m", "window labels to estimate"},
      {"metrics", "total_visits,unique_visitors,page_impressions,time_on_site_min,bouncing_visitors",
       "quantity metrics to estimate"},
      {"filter.min_avg_weekly_visits", "1000", "drop instances with a lower mean weekly visit count"},
      {"filter.drop_monthly_gaps", "true", "drop instances with a month of zeros"},
      {"filter.outlier", "true", "apply the rolling-median outlier rule"},
      {"filter.outlier_window", "9", "outlier rule window (weeks, odd)"},
      {"filter.outlier_mad_multiplier", "6", "outlier rule MAD multiplier"},
      {"filter.outlier_min_consecutive", "2", "outlier rule consecutive weeks"},
      {"filter.apply_unique_floor", "true", "restrict unique-visitor analysis to the floor subsample"},
      {"filter.unique_floor", "5000", "monthly unique-visitor floor"},
      {"donors.k", "5", "donors per synthetic control"},
      {"donors.match", "industry", "industry | none | eu_share"},
      {"donors.eu_share_tolerance", "0.1", "EU-share distance accepted by eu_share matching"},
      {"donors.min_candidates", "2", "fewer matched candidates falls back to all controls"},
      {"weights.mode", "simplex", "simplex | unconstrained"},
      {"inference.method", "hc1", "hc1 | placebo"},
      {"inference.n_placebo", "99", "placebo refits per metric"},
      {"exclusion.days", "0", "drop periods within this many days of enforcement"},
      {"run.threads", "1", "worker threads"},
      {"run.seed", "1", "seed for simulate"},
      {"simulate.n_treated", "100", ""},
      {"simulate.n_control", "100", ""},
      {"simulate.weeks", "125", ""},
      {"simulate.base_level", "10", "mean log weekly visits"},
      {"simulate.unit_sigma", "0.5", "spread of unit log levels"},
      {"simulate.seasonality_amplitude", "0.1", "log-scale amplitude"},
      {"simulate.seasonality_period", "52", "weeks; 0 disables"},
      {"simulate.noise_sigma", "0.05", "log-scale noise"},
      {"simulate.effect_shape", "constant", "constant | ramp"},
      {"simulate.effect_delta", "-0.1", "injected relative effect"},
      {"simulate.ramp_end_week", "125", "week at which a ramp reaches effect_delta"},
      {"simulate.industries", "news,shopping,technology,travel", ""},
      {"simulate.visits_per_unique", "2.5", ""},
      {"simulate.pages_per_visit", "4", ""},
      {"simulate.minutes_per_visit", "3.5", ""},
      {"simulate.bounce_rate", "0.45", ""},
      {"simulate.intensity_sigma", "0.02", ""},
      {"simulate.intensity.visits_per_unique", "0", "injected intensity effect"},
      {"simulate.intensity.page_impressions_per_visit", "0", "injected intensity effect"},
      {"simulate.intensity.time_per_visit", "0", "injected intensity effect"},
      {"simulate.intensity.bounce_rate", "0", "injected intensity effect"},
      {"simulate.dual_instance_fraction", "0", "treated websites that also get non-EU users"},
      {"simulate.control_companion_fraction", "0", "control websites that also get EU users"},
      {"cohorts.keys", "all,industry,global_rank_decile,country_rank_decile,industry_rank_decile,country", ""},
      {"revenue.window", "18m", "window whose website effects feed the revenue model"},
      {"revenue.years", "1.5", ""},
      {"revenue.ecommerce.visits_per_year", "70461862", ""},
      {"revenue.ecommerce.conversion_rate", "0.0191", ""},
      {"revenue.ecommerce.revenue_per_purchase", "105.99", ""},
      {"revenue.ecommerce.delta", "", "fixed delta; empty = mean website total_visits effect"},
      {"revenue.ecommerce.industry", "", "restrict the mean effect to one industry"},
      {"revenue.adbased.page_impressions_per_year", "358859344", ""},
      {"revenue.adbased.ads_per_page", "7.6", ""},
      {"revenue.adbased.ad_price", "0.0075", "per impression (CPM / 1000)"},
      {"revenue.adbased.delta", "", "fixed delta; empty = mean website page_impressions effect"},
      {"revenue.adbased.industry", "", "restrict the mean effect to one industry"},
      {"robustness.thresholds", "700:2000:100", "list, or lo:hi:step"},
      {"robustness.base_threshold", "1000", ""},
      {"robustness.exclude_days", "30", ""},
      {"robustness.donor_variants", "no_industry,eu_share_match,k10", ""},
      {"robustness.window", "18m", "post window for the spillover tables"},
  };
  return keys;
}

namespace {

const KeySpec* find_key(const std::string& key) {
  const auto& keys = schema();
  const auto it = std::find_if(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.name == key; });
  return it == keys.end() ? nullptr : &*it;
}

std::string trim(std::string s) {
  const auto ws = " \t\r";
  s.erase(0, s.find_first_not_of(ws));
  const auto end = s.find_last_not_of(ws);
  s.erase(end == std::string::npos ? 0 : end + 1);
  return s;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig config;
  config.base_dir_ = base_dir;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no), "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    auto key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    if (config.values_.contains(key)) throw ConfigError(key, "set twice");
    config.set(key, trim(line.substr(eq + 1)));
  }
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream file(path);
  std::ostringstream text;
  text << file.rdbuf();
  return parse(text.str(), path.parent_path());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!find_key(key)) throw ConfigError(key, "unknown key");
  values_[key] = value;
}

std::optional<std::string> RunConfig::explicit_value(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::get(const std::string& key) const {
  if (auto v = explicit_value(key)) return *v;
  const auto* spec = find_key(key);
  if (!spec) throw ConfigError(key, "unknown key");
  return spec->default_value;
}

double RunConfig::get_double(const std::string& key) const {
  const auto text = get(key);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  return v;
}

long RunConfig::get_long(const std::string& key) const {
  const auto text = get(key);
  long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  }
  return v;
}

std::size_t RunConfig::get_count(const std::string& key) const {
  const long v = get_long(key);
  if (v < 0) throw ConfigError(key, "must be >= 0");
  return static_cast<std::size_t>(v);
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const auto text = get(key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(key, "expected an unsigned integer, got '" + text + "'");
  }
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto text = get(key);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream in(get(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::filesystem::path RunConfig::get_path(const std::string& key) const {
  std::filesystem::path p(get(key));
  if (p.empty() || p.is_absolute() || base_dir_.empty()) return p;
  return base_dir_ / p;
}

std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : schema()) out.emplace_back(k.name, get(k.name));
  return out;
}

std::string RunConfig::resolved_text() const {
  std::string out;
  for (const auto& [k, v] : resolved()) out += k + " = " + v + "\n";
  return out;
}

}  // namespace panelfx::cli
