#include "panelfx/effects.hpp"
#include "panelfx/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace panelfx;

namespace {

double mean_of(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  double s = 0;
  for (std::size_t i = lo; i < hi; ++i) s += v[i];
  return s / static_cast<double>(hi - lo);
}

}  // namespace

TEST(EstimateEffect, SaturatedClosedForm) {
  std::vector<double> treated(10, 10.0), synth(10, 10.0);
  for (std::size_t i = 5; i < 10; ++i) treated[i] = 9.9;
  // HC1 is undefined with zero residuals; perturb symmetrically so means stay put
  treated[0] += 0.01, treated[1] -= 0.01, treated[5] += 0.01, treated[6] -= 0.01;
  const auto e = estimate_effect(treated, synth, 5);
  EXPECT_NEAR(e.beta3, -0.10, 1e-12);
  EXPECT_NEAR(e.delta, std::exp(-0.10) - 1.0, 1e-12);
  EXPECT_NEAR(e.delta, -0.09516, 1e-5);
  EXPECT_EQ(e.n_pre, 5u);
  EXPECT_EQ(e.n_post, 5u);
}

TEST(EstimateEffect, IdenticalSeriesGiveZero) {
  std::vector<double> y{1.0, 1.3, 0.9, 1.2, 1.1, 1.4, 1.0, 0.8};
  const auto e = estimate_effect(y, y, 4);
  EXPECT_NEAR(e.beta3, 0.0, 1e-14);
  EXPECT_NEAR(e.delta, 0.0, 1e-14);
}

TEST(EstimateEffect, MatchesDidOfMeansOnRandomPanels) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::uniform_int_distribution<int> len(4, 130);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::uniform_int_distribution<std::size_t> cut(2, n - 2);
    const auto n_pre = cut(rng);
    std::vector<double> t(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = 10.0 + noise(rng) + (i >= n_pre ? -0.1 : 0.0);
      s[i] = 9.0 + noise(rng);
    }
    const double did = (mean_of(t, n_pre, n) - mean_of(t, 0, n_pre)) -
                       (mean_of(s, n_pre, n) - mean_of(s, 0, n_pre));
    const auto e = estimate_effect(t, s, n_pre);
    worst = std::max(worst, std::fabs(e.beta3 - did));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(EstimateEffect, Hc1MatchesSandwich) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.2);
  const std::size_t n = 30, n_pre = 12;
  std::vector<double> t(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = 5 + noise(rng) * (i >= n_pre ? 2.0 : 1.0);
    s[i] = 5 + noise(rng);
  }
  Eigen::MatrixXd X(2 * n, 4);
  Eigen::VectorXd y(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double post = i >= n_pre ? 1.0 : 0.0;
    const auto r = static_cast<Eigen::Index>(i);
    X.row(r) << 1, 1, post, post;
    y(r) = t[i];
    X.row(r + static_cast<Eigen::Index>(n)) << 1, 0, post, 0;
    y(r + static_cast<Eigen::Index>(n)) = s[i];
  }
  const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
  const Eigen::VectorXd b = xtx_inv * X.transpose() * y;
  const Eigen::VectorXd u = y - X * b;
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(4, 4);
  for (Eigen::Index i = 0; i < X.rows(); ++i) meat += u(i) * u(i) * X.row(i).transpose() * X.row(i);
  const double scale = static_cast<double>(X.rows()) / static_cast<double>(X.rows() - 4);
  const Eigen::MatrixXd V = scale * xtx_inv * meat * xtx_inv;
  const auto e = estimate_effect(t, s, n_pre);
  EXPECT_NEAR(e.beta3, b(3), 1e-12);
  EXPECT_NEAR(e.std_err, std::sqrt(V(3, 3)), 1e-12);
  EXPECT_LE(e.ci_low, e.delta);
  EXPECT_GE(e.ci_high, e.delta);
}

TEST(EstimateEffect, RejectsShortPeriods) {
  std::vector<double> y{1, 2, 3, 4};
  EXPECT_THROW(estimate_effect(y, y, 1), std::invalid_argument);
  EXPECT_THROW(estimate_effect(y, y, 3), std::invalid_argument);
  std::vector<double> z{1, 2, 3};
  EXPECT_THROW(estimate_effect(y, z, 2), std::invalid_argument);
}

TEST(EstimateEffect, PostMaskSkipsNothingButMarks) {
  std::vector<double> t{1, 1.1, 0.9, 1, 0.7, 0.8, 0.75}, s{1, 1, 1, 1, 1, 1, 1};
  std::vector<std::uint8_t> post{0, 0, 0, 0, 1, 1, 1};
  const auto a = estimate_effect(t, s, post);
  const auto b = estimate_effect(t, s, 4);
  EXPECT_EQ(a.beta3, b.beta3);
  EXPECT_EQ(a.std_err, b.std_err);
}

TEST(PlaceboPValue, RankFormula) {
  std::vector<double> placebo(99, 0.01);
  const auto p = placebo_p_value(0.5, placebo, 99);
  EXPECT_DOUBLE_EQ(p.p_value, 0.01);
  EXPECT_EQ(p.n_used, 99u);
  EXPECT_EQ(p.shortfall, 0u);
}

TEST(PlaceboPValue, NeverZeroWhenTreatedAmongPlacebos) {
  std::vector<double> placebo{0.3, -0.2, 0.1, 0.05};
  for (double b : placebo) {
    const auto p = placebo_p_value(b, placebo, 4);
    EXPECT_GT(p.p_value, 0.0);
    EXPECT_GE(p.p_value, 2.0 / 5.0 - 1e-15);  // itself plus the one
  }
}

TEST(PlaceboPValue, ShortfallReported) {
  std::vector<double> placebo{0.1, 0.2};
  const auto p = placebo_p_value(0.15, placebo, 10);
  EXPECT_EQ(p.n_used, 2u);
  EXPECT_EQ(p.shortfall, 8u);
  EXPECT_DOUBLE_EQ(p.p_value, 2.0 / 3.0);
}

TEST(PlaceboPValue, UniformOnExchangeableNull) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> z(0.0, 1.0);
  int hits = 0;
  const int runs = 500;
  for (int r = 0; r < runs; ++r) {
    std::vector<double> placebo(99);
    for (auto& x : placebo) x = z(rng);
    if (placebo_p_value(z(rng), placebo, 99).p_value < 0.05) ++hits;
  }
  const double share = static_cast<double>(hits) / runs;
  EXPECT_GE(share, 0.02);
  EXPECT_LE(share, 0.08);
}

TEST(SetPValue, UpdatesFlag) {
  EffectEstimate e;
  e.p_value = 0.5;
  set_p_value(e, 0.01, Inference::Placebo);
  EXPECT_TRUE(e.significant_5pct);
  EXPECT_EQ(e.inference, Inference::Placebo);
}

TEST(MergeWebsite, PaperShares) {
  InstanceShares shares{"W", {{"eu", Base::EU, 0.9894}, {"non", Base::NonEU, 0.0106}}};
  std::vector<InstanceDelta> d{{"eu", -0.10, 0.01}, {"non", 0.05, 0.4}};
  const auto w = merge_website(d, shares);
  EXPECT_NEAR(w.delta, 0.9894 * -0.10 + 0.0106 * 0.05, 1e-12);
  EXPECT_NEAR(w.delta, -0.098410, 1e-6);
  EXPECT_EQ(w.p_value, 0.01);
  EXPECT_EQ(w.components.size(), 2u);
}

TEST(MergeWebsite, SingleAndSymmetric) {
  InstanceShares one{"W", {{"a", Base::EU, 1.0}}};
  std::vector<InstanceDelta> d1{{"a", -0.037, 0.2}};
  EXPECT_EQ(merge_website(d1, one).delta, -0.037);
  InstanceShares two{"W", {{"a", Base::EU, 0.5}, {"b", Base::NonEU, 0.5}}};
  std::vector<InstanceDelta> d2{{"a", -0.10, 0.2}, {"b", 0.10, 0.2}};
  EXPECT_NEAR(merge_website(d2, two).delta, 0.0, 1e-17);
}

TEST(MergeWebsite, MissingPieceThrows) {
  InstanceShares two{"W", {{"a", Base::EU, 0.5}, {"b", Base::NonEU, 0.5}}};
  std::vector<InstanceDelta> d{{"a", -0.10, 0.2}};
  EXPECT_THROW(merge_website(d, two), std::invalid_argument);
  std::vector<InstanceDelta> extra{{"a", -0.1, 0.2}, {"b", 0.1, 0.2}, {"c", 0.0, 1.0}};
  EXPECT_THROW(merge_website(extra, two), std::invalid_argument);
}

TEST(IntensityEffect, TrivialCases) {
  EXPECT_EQ(intensity_effect(0.0, 0.0), 0.0);
  EXPECT_EQ(intensity_effect(0.10, 0.10), 0.0);
  EXPECT_NEAR(intensity_effect(-0.0077, -0.0488), 0.9923 / 0.9512 - 1.0, 1e-12);
  EXPECT_THROW(intensity_effect(0.1, -1.0), std::domain_error);
}

TEST(IntensityEffect, VisitsPerUniqueUsesVisitsOverUniques) {
  EXPECT_NEAR(intensity_effect(IntensityMetric::VisitsPerUnique, -0.0488, -0.0077),
              0.9512 / 0.9923 - 1.0, 1e-12);
  EXPECT_NEAR(intensity_effect(IntensityMetric::VisitsPerUnique, -0.0488, -0.0077), -0.04142, 1e-5);
}

TEST(IntensityEffect, RoundTripIdentity) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-0.9, 2.0);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const double dq = u(rng), dv = u(rng);
    const double di = intensity_effect(dq, dv);
    worst = std::max(worst, std::fabs((1 + di) * (1 + dv) - 1 - dq));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(DeriveIntensity, FromWebsiteEffects) {
  std::vector<WebsiteEffect> w{
      {"A", MetricKind::TotalVisits, WindowLabel::M3, -0.1, 0.1, {}},
      {"A", MetricKind::PageImpressions, WindowLabel::M3, -0.2, 0.1, {}},
      {"A", MetricKind::UniqueVisitors, WindowLabel::M3, -0.05, 0.1, {}},
      {"B", MetricKind::PageImpressions, WindowLabel::M3, -0.2, 0.1, {}},
  };
  const auto out = derive_intensity(w);
  ASSERT_EQ(out.size(), 2u);
  for (const auto& e : out) {
    EXPECT_EQ(e.website_id, "A");
    if (e.intensity_metric == IntensityMetric::PageImpressionsPerVisit) {
      EXPECT_NEAR(e.delta, 0.8 / 0.9 - 1, 1e-12);
    } else {
      EXPECT_EQ(e.intensity_metric, IntensityMetric::VisitsPerUnique);
      EXPECT_NEAR(e.delta, 0.9 / 0.95 - 1, 1e-12);
    }
  }
}

TEST(GainLose, Shares) {
  std::vector<GainLoseInput> in{{"a", -0.1, 0.01}, {"b", 0.2, 0.02}, {"c", -0.3, 0.03}};
  const auto t = gain_lose_split(in, IntensityMetric::TimePerVisit, WindowLabel::M6);
  EXPECT_NEAR(t.lose.share, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(t.gain.share, 1.0 / 3.0, 1e-12);
  EXPECT_EQ(t.all.n, 3u);
  EXPECT_EQ(t.quantity_metric, MetricKind::TotalVisits);
}

TEST(GainLose, EmptyGroupHasNoSummary) {
  std::vector<GainLoseInput> in{{"a", 0.1, 0.01}, {"b", 0.0, 0.02}};
  const auto t = gain_lose_split(in, IntensityMetric::BounceRate, WindowLabel::M3);
  EXPECT_EQ(t.gain.share, 1.0);
  EXPECT_EQ(t.lose.n, 0u);
  EXPECT_FALSE(t.lose.mean.has_value());
  EXPECT_FALSE(t.lose.median.has_value());
}

TEST(GainLose, TenWebsitesHandComputed) {
  const double q[] = {-0.05, 0.02, -0.01, 0.03, -0.07, 0.00, 0.04, -0.02, -0.03, 0.01};
  const double i[] = {0.10, -0.02, 0.04, -0.01, 0.08, 0.00, -0.05, 0.03, 0.02, -0.03};
  std::vector<GainLoseInput> in;
  for (int k = 0; k < 10; ++k) in.push_back({"w" + std::to_string(k), q[k], i[k]});
  const auto t = gain_lose_split(in, IntensityMetric::VisitsPerUnique, WindowLabel::M18);
  // lose: 0.10, 0.04, 0.08, 0.03, 0.02 ; gain: -0.02, -0.01, 0.00, -0.05, -0.03
  EXPECT_EQ(t.lose.n, 5u);
  EXPECT_NEAR(*t.lose.mean, 0.054, 1e-12);
  EXPECT_NEAR(*t.lose.median, 0.04, 1e-12);
  EXPECT_NEAR(*t.gain.mean, -0.022, 1e-12);
  EXPECT_NEAR(*t.gain.median, -0.02, 1e-12);
  EXPECT_NEAR(*t.all.mean, 0.016, 1e-12);
  EXPECT_NEAR(*t.all.median, 0.01, 1e-12);
}
