#include "panelfx/effects.hpp"
#include "panelfx/ingest.hpp"
#include "panelfx/pipeline.hpp"
#include "panelfx/revenue.hpp"
#include "panelfx/simkit.hpp"
#include "panelfx/stats.hpp"
#include "panelfx/synthcontrol.hpp"
#include "panelfx/version.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>

namespace py = pybind11;
using namespace panelfx;

namespace {

std::vector<WindowLabel> windows_arg(const std::vector<std::string>& labels) {
  std::vector<WindowLabel> out;
  for (const auto& l : labels) out.push_back(parse_window_label(l));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "panelfx core: synthetic-control panel effects, intensity algebra, revenue impact";
  m.attr("__version__") = std::string(kVersion);

  py::enum_<MetricKind>(m, "Metric")
      .value("TOTAL_VISITS", MetricKind::TotalVisits)
      .value("UNIQUE_VISITORS", MetricKind::UniqueVisitors)
      .value("PAGE_IMPRESSIONS", MetricKind::PageImpressions)
      .value("TIME_ON_WEBSITE", MetricKind::TimeOnWebsite)
      .value("BOUNCING_VISITORS", MetricKind::BouncingVisitors);

  py::enum_<WeightMode>(m, "WeightMode")
      .value("SIMPLEX", WeightMode::Simplex)
      .value("UNCONSTRAINED", WeightMode::Unconstrained);

  py::class_<AnalysisWindow>(m, "AnalysisWindow")
      .def_property_readonly("label", [](const AnalysisWindow& w) { return std::string(to_string(w.label)); })
      .def_property_readonly("pre_first_week", [](const AnalysisWindow& w) { return w.pre_weeks.first; })
      .def_property_readonly("pre_last_week", [](const AnalysisWindow& w) { return w.pre_weeks.last; })
      .def_readonly("post_end_week", &AnalysisWindow::post_end_week)
      .def("post_end_month", [](const AnalysisWindow& w) { return w.post_end(Cadence::Monthly, Calendar{}); });
  m.def("window_bounds", [](const std::string& label) { return window_bounds(label); }, py::arg("label"),
        "Window for '3m', '6m', '9m', '12m' or '18m' on the default calendar.");

  py::class_<EffectEstimate>(m, "EffectEstimate")
      .def_readonly("instance_id", &EffectEstimate::instance_id)
      .def_property_readonly("metric", [](const EffectEstimate& e) { return std::string(to_string(e.metric)); })
      .def_property_readonly("window", [](const EffectEstimate& e) { return std::string(to_string(e.window)); })
      .def_readonly("beta3", &EffectEstimate::beta3)
      .def_readonly("delta", &EffectEstimate::delta)
      .def_readonly("std_err", &EffectEstimate::std_err)
      .def_readonly("p_value", &EffectEstimate::p_value)
      .def_readonly("significant", &EffectEstimate::significant_5pct)
      .def_readonly("ci_low", &EffectEstimate::ci_low)
      .def_readonly("ci_high", &EffectEstimate::ci_high);
  m.def("estimate_effect",
        [](const std::vector<double>& treated_log, const std::vector<double>& synth_log, std::size_t n_pre) {
          return estimate_effect(treated_log, synth_log, n_pre);
        },
        py::arg("treated_log"), py::arg("synth_log"), py::arg("n_pre"));

  py::class_<SynthWeights>(m, "SynthWeights")
      .def_readonly("donor_ids", &SynthWeights::donor_ids)
      .def_readonly("weights", &SynthWeights::weights)
      .def_readonly("pre_mse", &SynthWeights::pre_mse);
  m.def("fit_weights",
        [](const std::vector<double>& treated_pre, const Eigen::MatrixXd& donors_pre, WeightMode mode,
           std::vector<std::string> ids) { return fit_weights(treated_pre, donors_pre, mode, std::move(ids)); },
        py::arg("treated_pre"), py::arg("donors_pre"), py::arg("mode") = WeightMode::Simplex,
        py::arg("donor_ids") = std::vector<std::string>{},
        "Rows of donors_pre are pre periods, columns donors.");

  m.def("intensity_effect", py::overload_cast<double, double>(&intensity_effect), py::arg("delta_quantity"),
        py::arg("delta_total_visits"));

  py::class_<RevenueImpact>(m, "RevenueImpact")
      .def_readonly("baseline_revenue", &RevenueImpact::baseline_revenue)
      .def_readonly("revenue_change", &RevenueImpact::revenue_change)
      .def_property_readonly("baseline_cents", [](const RevenueImpact& r) { return r.baseline_cents.value; })
      .def_property_readonly("change_cents", [](const RevenueImpact& r) { return r.change_cents.value; });
  m.def("ecommerce_impact",
        [](double visits, double conversion, double basket, double delta, double years) {
          RevenueModel model = RevenueModel::reference_ecommerce();
          model.visits_per_year = visits;
          model.conversion_rate = conversion;
          model.revenue_per_purchase = basket;
          model.years = years;
          return ecommerce_impact(model, delta);
        },
        py::arg("visits_per_year"), py::arg("conversion_rate"), py::arg("revenue_per_purchase"),
        py::arg("delta"), py::arg("years") = 1.5);
  m.def("ad_impact",
        [](double impressions, double ads, double price, double delta, double years) {
          RevenueModel model = RevenueModel::reference_adbased();
          model.page_impressions_per_year = impressions;
          model.ads_per_page = ads;
          model.ad_price = price;
          model.years = years;
          return ad_impact(model, delta);
        },
        py::arg("page_impressions_per_year"), py::arg("ads_per_page"), py::arg("ad_price"), py::arg("delta"),
        py::arg("years") = 1.5);

  m.def("welch_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          const auto w = stats::welch_t_test(a, b);
          return py::make_tuple(w.t, w.dof, w.p_value);
        },
        py::arg("a"), py::arg("b"), "Returns (t, dof, p_value).");

  py::class_<PanelDataset>(m, "Panel")
      .def("__len__", &PanelDataset::size)
      .def("instance_ids", [](const PanelDataset& d) {
        std::vector<std::string> ids;
        for (const auto& inst : d.instances()) ids.push_back(inst.instance_id);
        return ids;
      })
      .def("treated_ids", [](const PanelDataset& d) {
        std::vector<std::string> ids;
        for (const auto& inst : d.instances()) {
          if (inst.treated()) ids.push_back(inst.instance_id);
        }
        return ids;
      })
      .def("to_csv", [](const PanelDataset& d, const std::filesystem::path& path) {
        std::ofstream out(path, std::ios::binary);
        write_panel(out, d);
      });
  m.def("load_panel", [](const std::filesystem::path& path) { return parse_panel(path); }, py::arg("path"));

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("n_treated", &SimConfig::n_treated)
      .def_readwrite("n_control", &SimConfig::n_control)
      .def_readwrite("weeks", &SimConfig::weeks)
      .def_readwrite("noise_sigma", &SimConfig::noise_sigma)
      .def_readwrite("seasonality_amplitude", &SimConfig::seasonality_amplitude)
      .def_readwrite("seed", &SimConfig::seed)
      .def_property(
          "delta", [](const SimConfig& c) { return c.effect.delta; },
          [](SimConfig& c, double d) { c.effect.delta = d; })
      .def_property(
          "ramp", [](const SimConfig& c) { return c.effect.shape == EffectShape::LinearRamp; },
          [](SimConfig& c, bool ramp) { c.effect.shape = ramp ? EffectShape::LinearRamp : EffectShape::Constant; });

  py::class_<GroundTruth>(m, "GroundTruth")
      .def("delta", [](const GroundTruth& t, const std::string& id, MetricKind metric, const std::string& window) {
        return t.delta(id, metric, parse_window_label(window));
      });
  m.def("generate_panel",
        [](const SimConfig& config) {
          auto sim = generate_panel(config);
          return py::make_tuple(std::move(sim.dataset), std::move(sim.truth));
        },
        py::arg("config"), "Returns (Panel, GroundTruth).");

  py::class_<RecoveryReport>(m, "RecoveryReport")
      .def_readonly("n", &RecoveryReport::n)
      .def_readonly("bias", &RecoveryReport::bias)
      .def_readonly("mae", &RecoveryReport::mae)
      .def_readonly("coverage", &RecoveryReport::coverage);

  py::class_<EstimationResult>(m, "EstimationResult")
      .def_readonly("effects", &EstimationResult::effects)
      .def("recovery", [](const EstimationResult& r, const GroundTruth& t) { return evaluate_recovery(r.effects, t); })
      .def("mean_delta", [](const EstimationResult& r, MetricKind metric, const std::string& window) {
        const auto w = parse_window_label(window);
        std::vector<double> d;
        for (const auto& e : r.effects) {
          if (e.metric == metric && e.window == w) d.push_back(e.delta);
        }
        return d.empty() ? std::numeric_limits<double>::quiet_NaN() : stats::mean(d);
      });
  m.def("run_estimation",
        [](const PanelDataset& panel, std::vector<MetricKind> metrics, const std::vector<std::string>& windows,
           std::size_t k, std::size_t threads) {
          PipelineConfig config;
          config.metrics = std::move(metrics);
          config.windows = windows_arg(windows);
          config.donors.k = k;
          config.threads = threads;
          py::gil_scoped_release release;
          return run_estimation(panel, config);
        },
        py::arg("panel"), py::arg("metrics") = std::vector<MetricKind>{MetricKind::TotalVisits},
        py::arg("windows") = std::vector<std::string>{"3m", "6m", "9m", "12m", "18m"}, py::arg("k") = 5,
        py::arg("threads") = 1);
}
