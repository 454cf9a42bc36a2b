#include "panelfx/pipeline.hpp"
#include "panelfx/simkit.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

using namespace panelfx;
using panelfx::fixture::parallel_panel;

TEST(ParallelFor, CoversEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 7, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsLowestIndex) {
  try {
    parallel_for(100, 4, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "17");
  }
}

TEST(ExcludedPeriods, BandAroundEnforcement) {
  Calendar cal;
  const auto mask = excluded_periods(cal, Cadence::Weekly, 125, 30);
  const Date lo = cal.enforcement() - std::chrono::days{30};
  const Date hi = cal.enforcement() + std::chrono::days{30};
  for (int w = 1; w <= 125; ++w) {
    const bool overlaps = !(cal.week_end(w) < lo || cal.week_start(w) > hi);
    EXPECT_EQ(mask[static_cast<std::size_t>(w - 1)], overlaps) << "week " << w;
  }
  EXPECT_TRUE(mask[46]);
  EXPECT_FALSE(mask[30]);
  const auto none = excluded_periods(cal, Cadence::Weekly, 125, 0);
  EXPECT_EQ(std::count(none.begin(), none.end(), true), 0);
}

TEST(RunEstimation, NoiselessParallelPathsRecoverEffect) {
  const double c = std::log(0.9);
  const auto d = parallel_panel(4, 8, [&](int w) { return w >= 47 ? c : 0.0; });
  PipelineConfig pc;
  pc.metrics = {MetricKind::TotalVisits};
  const auto res = run_estimation(d, pc);
  ASSERT_EQ(res.effects.size(), 4u * 5u);
  for (const auto& e : res.effects) {
    EXPECT_NEAR(e.beta3, c, 1e-10);
    EXPECT_NEAR(e.delta, -0.1, 1e-10);
  }
  ASSERT_EQ(res.website_effects.size(), 4u * 5u);
  EXPECT_TRUE(res.skipped.empty());
}

TEST(RunEstimation, OutputIndependentOfThreads) {
  SimConfig sc;
  sc.n_treated = 15;
  sc.n_control = 15;
  sc.effect.delta = -0.05;
  const auto sim = generate_panel(sc);
  PipelineConfig pc;
  pc.threads = 1;
  const auto a = run_estimation(sim.dataset, pc);
  pc.threads = 5;
  const auto b = run_estimation(sim.dataset, pc);
  ASSERT_EQ(a.effects.size(), b.effects.size());
  for (std::size_t i = 0; i < a.effects.size(); ++i) {
    EXPECT_EQ(a.effects[i].instance_id, b.effects[i].instance_id);
    EXPECT_EQ(a.effects[i].beta3, b.effects[i].beta3);
    EXPECT_EQ(a.effects[i].std_err, b.effects[i].std_err);
  }
  ASSERT_EQ(a.intensity_effects.size(), b.intensity_effects.size());
  for (std::size_t i = 0; i < a.intensity_effects.size(); ++i) {
    EXPECT_EQ(a.intensity_effects[i].delta, b.intensity_effects[i].delta);
  }
}

TEST(RunEstimation, RowsPerInstanceMetricWindow) {
  SimConfig sc;
  sc.n_treated = 6;
  sc.n_control = 12;
  const auto sim = generate_panel(sc);
  PipelineConfig pc;
  pc.windows = {WindowLabel::M3, WindowLabel::M18};
  const auto res = run_estimation(sim.dataset, pc);
  EXPECT_EQ(res.effects.size() + res.skipped.size() * 2, 6u * 5u * 2u);
  EXPECT_EQ(res.fits.size() + res.skipped.size(), 6u * 5u);
  for (std::size_t i = 1; i < res.effects.size(); ++i) {
    const auto& p = res.effects[i - 1];
    const auto& q = res.effects[i];
    EXPECT_LE(std::tie(p.instance_id, p.metric, p.window), std::tie(q.instance_id, q.metric, q.window));
  }
}

TEST(RunEstimation, PlaceboPValuesOnGrid) {
  const auto d = parallel_panel(3, 12, [](int w) { return w >= 47 ? -0.05 : 0.0; }, 0.03, 3);
  PipelineConfig pc;
  pc.metrics = {MetricKind::TotalVisits};
  pc.windows = {WindowLabel::M18};
  pc.inference = Inference::Placebo;
  pc.n_placebo = 20;
  const auto res = run_estimation(d, pc);
  ASSERT_EQ(res.placebo.size(), 1u);
  EXPECT_EQ(res.placebo[0].requested, 20u);
  EXPECT_EQ(res.placebo[0].used + res.placebo[0].shortfall, 20u);
  const double n = static_cast<double>(res.placebo[0].used);
  for (const auto& e : res.effects) {
    EXPECT_EQ(e.inference, Inference::Placebo);
    const double k = e.p_value * (n + 1.0);
    EXPECT_NEAR(k, std::round(k), 1e-9);
    EXPECT_GE(e.p_value, 1.0 / (n + 1.0));
  }
}

TEST(ConfigDiff, ListsChangedKeys) {
  PipelineConfig a, b;
  EXPECT_TRUE(config_diff(a, b).empty());
  b.donors.k = 10;
  b.threads = 8;
  const auto diff = config_diff(a, b);
  ASSERT_EQ(diff.size(), 1u);
  EXPECT_NE(diff[0].find("donors.k"), std::string::npos);
}
