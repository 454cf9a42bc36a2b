#include "panelfx/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace panelfx;

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(io::format_number(0.1), "0.1");
  EXPECT_EQ(io::format_number(-2.0), "-2");
  EXPECT_EQ(io::format_number(NAN), "nan");
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = z(rng);
    EXPECT_EQ(std::stod(io::format_number(v)), v);
  }
}

TEST(EffectsCsv, RoundTrip) {
  std::vector<EffectEstimate> in(2);
  in[0] = {"T1", MetricKind::PageImpressions, WindowLabel::M12, -0.0512345678901, std::expm1(-0.0512345678901),
           0.0123, 0.0004, true, 240, -0.07, -0.03, Inference::HC1, 46, 53};
  in[1] = {"T2", MetricKind::UniqueVisitors, WindowLabel::M3, 0.02, std::expm1(0.02), 0.1, 0.81, false, 30,
           -0.2, 0.3, Inference::Placebo, 10, 3};
  std::stringstream s;
  io::write_effects_csv(s, in);
  const auto text = s.str();
  const auto back = io::read_effects_csv(s);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].instance_id, in[i].instance_id);
    EXPECT_EQ(back[i].metric, in[i].metric);
    EXPECT_EQ(back[i].window, in[i].window);
    EXPECT_EQ(back[i].beta3, in[i].beta3);
    EXPECT_EQ(back[i].p_value, in[i].p_value);
    EXPECT_EQ(back[i].inference, in[i].inference);
    EXPECT_EQ(back[i].n_post, in[i].n_post);
  }
  std::stringstream again;
  io::write_effects_csv(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(WebsiteEffectsCsv, RoundTripWithComponents) {
  std::vector<WebsiteEffect> in{{"W1", MetricKind::TotalVisits, WindowLabel::M18, -0.09841, 0.01,
                                 {{"eu", -0.1, 0.9894}, {"non", 0.05, 0.0106}}}};
  std::stringstream s;
  io::write_website_effects_csv(s, in);
  const auto back = io::read_website_effects_csv(s);
  ASSERT_EQ(back.size(), 1u);
  ASSERT_EQ(back[0].components.size(), 2u);
  EXPECT_EQ(back[0].components[1].instance_id, "non");
  EXPECT_EQ(back[0].components[1].share, 0.0106);
  EXPECT_EQ(back[0].delta, -0.09841);
}

TEST(EffectsCsv, MalformedRowThrows) {
  std::stringstream s;
  io::write_effects_csv(s, std::vector<EffectEstimate>{});
  s << "T1,total_visits,3m,notanumber\n";
  EXPECT_THROW(io::read_effects_csv(s), ParseError);
}

TEST(GroundTruthJson, RoundTrip) {
  GroundTruth t;
  t.entries.push_back({"T0001", WindowLabel::M3, -0.1, -0.0999});
  t.entries.push_back({"T0001", WindowLabel::M18, -0.05, -0.049});
  std::istringstream in(io::ground_truth_json(t));
  const auto back = io::read_ground_truth_json(in);
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.delta("T0001", MetricKind::UniqueVisitors, WindowLabel::M18), -0.049);
  EXPECT_EQ(back.delta("T0001", MetricKind::TotalVisits, WindowLabel::M3), -0.1);
}
