#include "panelfx/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace panelfx::io {

using json = nlohmann::ordered_json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

std::string num(double v) { return format_number(v); }

std::string opt(const std::optional<double>& v) { return v ? num(*v) : ""; }

json jnum(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json jopt(const std::optional<double>& v) { return v ? jnum(*v) : json(nullptr); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void check_field(const std::string& text, const char* what) {
  if (text.find_first_of(",;:\n") != std::string::npos) {
    throw std::invalid_argument(std::string(what) + " '" + text + "' contains a reserved character");
  }
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

double to_double(const std::string& text, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line, "bad number '" + text + "'");
  }
  return v;
}

std::size_t to_size(const std::string& text, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line, "bad count '" + text + "'");
  }
  return v;
}

// Reads a CSV with the exact expected header; calls row(fields, line).
template <typename F>
void read_csv(std::istream& in, const std::string& header, F row) {
  std::string line;
  std::size_t line_no = 0;
  const auto columns = split(header, ',').size();
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header) throw ParseError(line_no, "unexpected header, want '" + header + "'");
      seen_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != columns) {
      throw ParseError(line_no, "expected " + std::to_string(columns) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    try {
      row(fields, line_no);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!seen_header) throw ParseError(line_no, "empty file, want header '" + header + "'");
}

const std::string kEffectsHeader =
    "instance_id,metric,window,beta3,delta,std_err,p_value,significant,dof,ci_low,ci_high,"
    "inference,n_pre,n_post";
const std::string kWebsiteHeader = "website_id,metric,window,delta,p_value,n_instances,components";

std::string months_of(WindowLabel w) {
  std::string s(to_string(w));
  return s.substr(0, s.size() - 1);
}

}  // namespace

// --- estimation results ---------------------------------------------------------

void write_effects_csv(std::ostream& out, std::span<const EffectEstimate> effects) {
  out << kEffectsHeader << '\n';
  for (const auto& e : effects) {
    check_field(e.instance_id, "instance id");
    out << e.instance_id << ',' << to_string(e.metric) << ',' << to_string(e.window) << ','
        << num(e.beta3) << ',' << num(e.delta) << ',' << num(e.std_err) << ',' << num(e.p_value)
        << ',' << (e.significant_5pct ? 1 : 0) << ',' << num(e.dof) << ',' << num(e.ci_low) << ','
        << num(e.ci_high) << ',' << to_string(e.inference) << ',' << e.n_pre << ',' << e.n_post
        << '\n';
  }
}

std::vector<EffectEstimate> read_effects_csv(std::istream& in) {
  std::vector<EffectEstimate> out;
  read_csv(in, kEffectsHeader, [&](const std::vector<std::string>& f, std::size_t line) {
    EffectEstimate e;
    e.instance_id = f[0];
    e.metric = parse_metric(f[1]);
    e.window = parse_window_label(f[2]);
    e.beta3 = to_double(f[3], line);
    e.delta = to_double(f[4], line);
    e.std_err = to_double(f[5], line);
    e.p_value = to_double(f[6], line);
    if (f[7] != "0" && f[7] != "1") throw ParseError(line, "significant must be 0 or 1");
    e.significant_5pct = f[7] == "1";
    e.dof = to_double(f[8], line);
    e.ci_low = to_double(f[9], line);
    e.ci_high = to_double(f[10], line);
    e.inference = parse_inference(f[11]);
    e.n_pre = to_size(f[12], line);
    e.n_post = to_size(f[13], line);
    out.push_back(std::move(e));
  });
  return out;
}

void write_website_effects_csv(std::ostream& out, std::span<const WebsiteEffect> effects) {
  out << kWebsiteHeader << '\n';
  for (const auto& e : effects) {
    check_field(e.website_id, "website id");
    out << e.website_id << ',' << to_string(e.metric) << ',' << to_string(e.window) << ','
        << num(e.delta) << ',' << num(e.p_value) << ',' << e.components.size() << ',';
    for (std::size_t i = 0; i < e.components.size(); ++i) {
      const auto& c = e.components[i];
      check_field(c.instance_id, "instance id");
      out << (i ? ";" : "") << c.instance_id << ':' << num(c.share) << ':' << num(c.delta);
    }
    out << '\n';
  }
}

std::vector<WebsiteEffect> read_website_effects_csv(std::istream& in) {
  std::vector<WebsiteEffect> out;
  read_csv(in, kWebsiteHeader, [&](const std::vector<std::string>& f, std::size_t line) {
    WebsiteEffect e;
    e.website_id = f[0];
    e.metric = parse_metric(f[1]);
    e.window = parse_window_label(f[2]);
    e.delta = to_double(f[3], line);
    e.p_value = to_double(f[4], line);
    const auto n = to_size(f[5], line);
    for (const auto& part : split(f[6], ';')) {
      const auto bits = split(part, ':');
      if (bits.size() != 3) throw ParseError(line, "bad component '" + part + "'");
      e.components.push_back({bits[0], to_double(bits[2], line), to_double(bits[1], line)});
    }
    if (e.components.size() != n) throw ParseError(line, "component count does not match n_instances");
    out.push_back(std::move(e));
  });
  return out;
}

void write_intensity_csv(std::ostream& out, std::span<const IntensityEffect> effects) {
  out << "website_id,intensity_metric,window,delta,delta_numerator,delta_denominator\n";
  for (const auto& e : effects) {
    out << e.website_id << ',' << to_string(e.intensity_metric) << ',' << to_string(e.window) << ','
        << num(e.delta) << ',' << num(e.delta_numerator) << ',' << num(e.delta_denominator) << '\n';
  }
}

void write_skipped_csv(std::ostream& out, std::span<const SkippedUnit> skipped) {
  out << "instance_id,metric,reason\n";
  for (const auto& s : skipped) {
    std::string reason = s.reason;
    for (auto& c : reason) {
      if (c == ',' || c == '\n') c = ' ';
    }
    out << s.instance_id << ',' << to_string(s.metric) << ',' << reason << '\n';
  }
}

std::string synth_fits_json(std::span<const SynthFit> fits) {
  json arr = json::array();
  for (const auto& f : fits) {
    json donors = json::array();
    for (const auto& d : f.pool.donors) {
      donors.push_back({{"id", d.instance_id}, {"correlation", jnum(d.correlation)}, {"matched", d.matched}});
    }
    json weights = json::array();
    for (double w : f.weights.weights) weights.push_back(jnum(w));
    arr.push_back({{"treated_id", f.instance_id},
                   {"metric", to_string(f.metric)},
                   {"match", to_string(f.pool.match)},
                   {"fell_back_to_global", f.pool.fell_back_to_global},
                   {"donors", donors},
                   {"weights", weights},
                   {"pre_mse", jnum(f.weights.pre_mse)},
                   {"mode", to_string(f.weights.mode)}});
  }
  return dump(arr);
}

std::string placebo_json(std::span<const PlaceboSummary> placebo) {
  json arr = json::array();
  for (const auto& p : placebo) {
    arr.push_back({{"metric", to_string(p.metric)},
                   {"requested", p.requested},
                   {"used", p.used},
                   {"shortfall", p.shortfall}});
  }
  return dump(arr);
}

std::string filter_report_json(const FilterReport& report) {
  json rules = json::array();
  for (const auto& r : report.rules) {
    rules.push_back({{"rule", r.rule}, {"input", r.input}, {"excluded", r.excluded}, {"retained", r.retained}});
  }
  json excluded = json::array();
  for (const auto& e : report.excluded) {
    excluded.push_back({{"instance_id", e.instance_id}, {"reason", to_string(e.reason)}});
  }
  return dump({{"input_count", report.input_count},
               {"retained_count", report.retained_count},
               {"rules", rules},
               {"excluded", excluded}});
}

// --- summaries -------------------------------------------------------------------

void write_cohorts_csv(std::ostream& out, std::span<const CohortSummary> rows) {
  out << "cohort_key,cohort,metric,window,n,mean_delta,median_delta,share_negative,share_significant\n";
  for (const auto& r : rows) {
    out << r.cohort_key << ',' << r.cohort << ',' << to_string(r.metric) << ',' << to_string(r.window)
        << ',' << r.n << ',' << num(r.mean_delta) << ',' << num(r.median_delta) << ','
        << num(r.share_negative) << ',' << num(r.share_significant) << '\n';
  }
}

void write_quantity_table_csv(std::ostream& out, std::span<const CohortSummary> overall) {
  std::vector<WindowLabel> windows;
  std::vector<MetricKind> metrics;
  std::map<std::pair<MetricKind, WindowLabel>, const CohortSummary*> cell;
  for (const auto& r : overall) {
    if (r.cohort_key != "all") continue;
    cell[{r.metric, r.window}] = &r;
    if (std::find(windows.begin(), windows.end(), r.window) == windows.end()) windows.push_back(r.window);
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) metrics.push_back(r.metric);
  }
  std::sort(windows.begin(), windows.end());
  std::sort(metrics.begin(), metrics.end());
  out << "metric,statistic";
  for (auto w : windows) out << ',' << to_string(w);
  out << '\n';
  const std::pair<const char*, double CohortSummary::*> stats[] = {
      {"median", &CohortSummary::median_delta},
      {"mean", &CohortSummary::mean_delta},
      {"share_significant", &CohortSummary::share_significant},
      {"share_negative", &CohortSummary::share_negative}};
  for (auto m : metrics) {
    for (const auto& [name, field] : stats) {
      out << to_string(m) << ',' << name;
      for (auto w : windows) {
        const auto it = cell.find({m, w});
        out << ',' << (it == cell.end() ? "" : num(it->second->*field));
      }
      out << '\n';
    }
  }
}

void write_intensity_table_csv(std::ostream& out, std::span<const GainLoseTable> tables) {
  std::vector<WindowLabel> windows;
  for (const auto& t : tables) {
    if (std::find(windows.begin(), windows.end(), t.window) == windows.end()) windows.push_back(t.window);
  }
  std::sort(windows.begin(), windows.end());
  out << "intensity_metric,group";
  for (auto w : windows) out << ',' << to_string(w) << "_share," << to_string(w) << "_median," << to_string(w) << "_mean";
  out << '\n';
  for (auto m : kAllIntensityMetrics) {
    std::map<WindowLabel, const GainLoseTable*> by_window;
    for (const auto& t : tables) {
      if (t.intensity_metric == m) by_window[t.window] = &t;
    }
    if (by_window.empty()) continue;
    const std::string quantity(to_string(split_quantity_of(m)));
    const std::pair<std::string, GroupSummary GainLoseTable::*> groups[] = {
        {"all", &GainLoseTable::all},
        {"gain_" + quantity, &GainLoseTable::gain},
        {"lose_" + quantity, &GainLoseTable::lose}};
    for (const auto& [label, field] : groups) {
      out << to_string(m) << ',' << label;
      for (auto w : windows) {
        const auto it = by_window.find(w);
        if (it == by_window.end()) {
          out << ",,,";
          continue;
        }
        const auto& g = it->second->*field;
        out << ',' << num(g.share) << ',' << opt(g.median) << ',' << opt(g.mean);
      }
      out << '\n';
    }
  }
}

void write_gain_lose_csv(std::ostream& out, std::span<const GainLoseTable> tables) {
  out << "intensity_metric,quantity_metric,window,group,n,share,median,mean\n";
  for (const auto& t : tables) {
    const std::pair<const char*, const GroupSummary*> groups[] = {{"all", &t.all}, {"gain", &t.gain}, {"lose", &t.lose}};
    for (const auto& [name, g] : groups) {
      out << to_string(t.intensity_metric) << ',' << to_string(t.quantity_metric) << ','
          << to_string(t.window) << ',' << name << ',' << g->n << ',' << num(g->share) << ','
          << opt(g->median) << ',' << opt(g->mean) << '\n';
    }
  }
}

std::string cohorts_json(std::span<const CohortSummary> rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"cohort_key", r.cohort_key},
                   {"cohort", r.cohort},
                   {"metric", to_string(r.metric)},
                   {"window", to_string(r.window)},
                   {"n", r.n},
                   {"mean_delta", jnum(r.mean_delta)},
                   {"median_delta", jnum(r.median_delta)},
                   {"share_negative", jnum(r.share_negative)},
                   {"share_significant", jnum(r.share_significant)}});
  }
  return dump(arr);
}

std::string gain_lose_json(std::span<const GainLoseTable> tables) {
  auto group = [](const GroupSummary& g) {
    return json{{"n", g.n}, {"share", jnum(g.share)}, {"median", jopt(g.median)}, {"mean", jopt(g.mean)}};
  };
  json arr = json::array();
  for (const auto& t : tables) {
    arr.push_back({{"intensity_metric", to_string(t.intensity_metric)},
                   {"quantity_metric", to_string(t.quantity_metric)},
                   {"window", to_string(t.window)},
                   {"all", group(t.all)},
                   {"gain", group(t.gain)},
                   {"lose", group(t.lose)}});
  }
  return dump(arr);
}

void write_effect_distribution_csv(std::ostream& out, std::span<const WebsiteEffect> effects,
                                   MetricKind metric) {
  // Points per website plus the share-negative and share-significant lines.
  out << "figure,series,x,y\n";
  std::map<WindowLabel, std::vector<const WebsiteEffect*>> by_window;
  for (const auto& e : effects) {
    if (e.metric == metric) by_window[e.window].push_back(&e);
  }
  for (const auto& [w, members] : by_window) {
    for (const auto* e : members) {
      out << "effect_distribution,delta," << months_of(w) << ',' << num(e->delta) << '\n';
    }
  }
  for (const auto& [w, members] : by_window) {
    std::size_t negative = 0, significant = 0;
    for (const auto* e : members) {
      negative += e->delta < 0.0;
      significant += e->p_value < 0.05;
    }
    const auto n = static_cast<double>(members.size());
    out << "effect_distribution,share_negative," << months_of(w) << ',' << num(negative / n) << '\n';
    out << "effect_distribution,share_significant," << months_of(w) << ',' << num(significant / n) << '\n';
  }
}

void write_cohort_plot_csv(std::ostream& out, std::span<const CohortSummary> rows) {
  out << "figure,series,x,y\n";
  for (const auto& r : rows) {
    if (r.cohort_key == "all") continue;
    out << r.cohort_key << '_' << to_string(r.metric) << ',' << r.cohort << ',' << months_of(r.window)
        << ',' << num(r.mean_delta) << '\n';
  }
}

std::string revenue_json(const RevenueModel& model, double delta, const RevenueImpact& impact) {
  json params;
  if (model.kind == RevenueKind::Ecommerce) {
    params = {{"visits_per_year", jnum(model.visits_per_year)},
              {"conversion_rate", jnum(model.conversion_rate)},
              {"revenue_per_purchase", jnum(model.revenue_per_purchase)}};
  } else {
    params = {{"page_impressions_per_year", jnum(model.page_impressions_per_year)},
              {"ads_per_page", jnum(model.ads_per_page)},
              {"ad_price", jnum(model.ad_price)}};
  }
  params["years"] = jnum(model.years);
  return dump({{"kind", model.kind == RevenueKind::Ecommerce ? "ecommerce" : "adbased"},
               {"parameters", params},
               {"delta", jnum(delta)},
               {"baseline_revenue", jnum(impact.baseline_revenue)},
               {"revenue_change", jnum(impact.revenue_change)},
               {"baseline_dollars", impact.baseline_cents.to_string()},
               {"change_dollars", impact.change_cents.to_string()}});
}

// --- simulation --------------------------------------------------------------------

std::string ground_truth_json(const GroundTruth& truth) {
  json arr = json::array();
  for (const auto& e : truth.entries) {
    arr.push_back({{"instance_id", e.instance_id},
                   {"window", to_string(e.window)},
                   {"delta_weekly", jnum(e.delta_weekly)},
                   {"delta_monthly", jnum(e.delta_monthly)}});
  }
  return dump({{"entries", arr}});
}

GroundTruth read_ground_truth_json(std::istream& in) {
  GroundTruth truth;
  try {
    const auto j = json::parse(in);
    for (const auto& e : j.at("entries")) {
      truth.entries.push_back({e.at("instance_id").get<std::string>(),
                               parse_window_label(e.at("window").get<std::string>()),
                               e.at("delta_weekly").get<double>(), e.at("delta_monthly").get<double>()});
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("ground truth JSON: ") + e.what());
  }
  std::sort(truth.entries.begin(), truth.entries.end(), [](const auto& a, const auto& b) {
    return std::tie(a.instance_id, a.window) < std::tie(b.instance_id, b.window);
  });
  return truth;
}

std::string recovery_json(const RecoveryReport& report) {
  json windows = json::array();
  for (const auto& r : report.windows) {
    windows.push_back({{"window", to_string(r.window)},
                       {"n", r.n},
                       {"mean_estimate", jnum(r.mean_estimate)},
                       {"mean_truth", jnum(r.mean_truth)},
                       {"bias", jnum(r.bias)},
                       {"mae", jnum(r.mae)},
                       {"coverage", jnum(r.coverage)}});
  }
  return dump({{"n", report.n},
               {"bias", jnum(report.bias)},
               {"mae", jnum(report.mae)},
               {"coverage", jnum(report.coverage)},
               {"windows", windows}});
}

// --- robustness ----------------------------------------------------------------------

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  out << "threshold,eu_added,eu_removed,eu_n,eu_mean,eu_std,eu_p_value,eu_verdict,"
         "noneu_added,noneu_removed,noneu_n,noneu_mean,noneu_std,noneu_p_value,noneu_verdict\n";
  auto group = [&](const SweepGroup& g, bool base) {
    out << g.added << ',' << g.removed << ',' << g.n << ',' << num(g.mean) << ',' << num(g.std_dev) << ','
        << (base ? "-" : num(g.p_value)) << ','
        << (base ? "original_sample" : g.significant ? "significant" : "not_significant");
  };
  for (const auto& r : report.rows) {
    out << num(r.threshold) << ',';
    group(r.eu_users, r.is_base);
    out << ',';
    group(r.noneu_users, r.is_base);
    out << '\n';
  }
}

std::string sweep_json(const SweepReport& report) {
  auto group = [](const SweepGroup& g, bool base) {
    return json{{"added", g.added},      {"removed", g.removed},
                {"n", g.n},              {"mean", jnum(g.mean)},
                {"std_dev", jnum(g.std_dev)}, {"p_value", base ? json(nullptr) : jnum(g.p_value)},
                {"significant", g.significant}};
  };
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"threshold", jnum(r.threshold)},
                    {"is_base", r.is_base},
                    {"eu_users", group(r.eu_users, r.is_base)},
                    {"noneu_users", group(r.noneu_users, r.is_base)}});
  }
  return dump({{"base_threshold", jnum(report.base_threshold)}, {"rows", rows}});
}

void write_rerun_csv(std::ostream& out, const RerunReport& report) {
  out << "variant,metric,window,n_base,base_median,base_mean,n_variant,variant_median,variant_mean,"
         "t_stat,p_value,verdict\n";
  for (const auto& r : report.rows) {
    out << report.variant << ',' << to_string(r.metric) << ',' << to_string(r.window) << ',' << r.n_base
        << ',' << num(r.base_median) << ',' << num(r.base_mean) << ',' << r.n_variant << ','
        << num(r.variant_median) << ',' << num(r.variant_mean) << ',' << num(r.t_stat) << ','
        << num(r.p_value) << ',' << (r.significant ? "significant" : "not_significant") << '\n';
  }
}

std::string rerun_json(const RerunReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"metric", to_string(r.metric)},
                    {"window", to_string(r.window)},
                    {"n_base", r.n_base},
                    {"base_median", jnum(r.base_median)},
                    {"base_mean", jnum(r.base_mean)},
                    {"n_variant", r.n_variant},
                    {"variant_median", jnum(r.variant_median)},
                    {"variant_mean", jnum(r.variant_mean)},
                    {"t_stat", jnum(r.t_stat)},
                    {"p_value", jnum(r.p_value)},
                    {"significant", r.significant}});
  }
  return dump({{"variant", report.variant},
               {"config_diff", report.config_diff},
               {"skipped_base", report.base.skipped.size()},
               {"skipped_variant", report.rerun.skipped.size()},
               {"rows", rows}});
}

void write_eu_share_deciles_csv(std::ostream& out, const EuShareReport& report) {
  out << "decile,n,share_min,share_max,pre_mean,post_mean,difference\n";
  for (const auto& d : report.deciles) {
    out << d.decile << ',' << d.n << ',' << num(d.share_min) << ',' << num(d.share_max) << ','
        << num(d.pre_mean) << ',' << num(d.post_mean) << ',' << num(d.difference) << '\n';
  }
}

void write_eu_share_regression_csv(std::ostream& out, const EuShareReport& report) {
  out << "term,estimate,std_err,t_stat,p_value\n";
  for (const auto& c : report.coefficients) {
    out << c.name << ',' << num(c.estimate) << ',' << num(c.std_err) << ',' << num(c.t_stat) << ','
        << num(c.p_value) << '\n';
  }
}

std::string eu_share_json(const EuShareReport& report) {
  json deciles = json::array();
  for (const auto& d : report.deciles) {
    deciles.push_back({{"decile", d.decile},
                       {"n", d.n},
                       {"share_min", jnum(d.share_min)},
                       {"share_max", jnum(d.share_max)},
                       {"pre_mean", jnum(d.pre_mean)},
                       {"post_mean", jnum(d.post_mean)},
                       {"difference", jnum(d.difference)}});
  }
  json coefs = json::array();
  for (const auto& c : report.coefficients) {
    coefs.push_back({{"term", c.name},
                     {"estimate", jnum(c.estimate)},
                     {"std_err", jnum(c.std_err)},
                     {"t_stat", jnum(c.t_stat)},
                     {"p_value", jnum(c.p_value)}});
  }
  return dump({{"n", report.n}, {"deciles", deciles}, {"coefficients", coefs}});
}

void write_did_csv(std::ostream& out, std::span<const DidTable> tables) {
  out << "table,website_location,user_location,n,pre,post,difference,did\n";
  for (const auto& t : tables) {
    out << t.name << ',' << t.a.website_location << ',' << t.a.user_location << ',' << t.a.n << ','
        << num(t.a.pre) << ',' << num(t.a.post) << ',' << num(t.difference_a) << ',' << num(t.did) << '\n';
    out << t.name << ',' << t.b.website_location << ',' << t.b.user_location << ',' << t.b.n << ','
        << num(t.b.pre) << ',' << num(t.b.post) << ',' << num(t.difference_b) << ",\n";
  }
}

std::string did_json(std::span<const DidTable> tables) {
  auto cell = [](const DidCell& c) {
    return json{{"website_location", c.website_location},
                {"user_location", c.user_location},
                {"n", c.n},
                {"pre", jnum(c.pre)},
                {"post", jnum(c.post)}};
  };
  json arr = json::array();
  for (const auto& t : tables) {
    arr.push_back({{"table", t.name},
                   {"a", cell(t.a)},
                   {"b", cell(t.b)},
                   {"difference_a", jnum(t.difference_a)},
                   {"difference_b", jnum(t.difference_b)},
                   {"did", jnum(t.did)}});
  }
  return dump(arr);
}

}  // namespace panelfx::io
