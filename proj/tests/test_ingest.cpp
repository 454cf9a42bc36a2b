#include "panelfx/ingest.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

using namespace panelfx;
using panelfx::fixture::instance;
using panelfx::fixture::monthly;
using panelfx::fixture::weekly;

namespace {

const char* kHeader =
    "instance_id,website_id,user_base,website_base,user_country,industry,global_rank,country_rank,"
    "industry_rank,date,metric,value\n";

std::string to_csv(const PanelDataset& d) {
  std::ostringstream out;
  write_panel(out, d);
  return out.str();
}

PanelDataset from_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_panel(in, "fixture.csv");
}

std::optional<ExclusionReason> reason_for(const FilterReport& r, const std::string& id) {
  for (const auto& e : r.excluded) {
    if (e.instance_id == id) return e.reason;
  }
  return std::nullopt;
}

}  // namespace

TEST(ParsePanel, EmptyFileGivesEmptyDataset) {
  EXPECT_TRUE(from_csv("").empty());
  EXPECT_TRUE(from_csv(kHeader).empty());
}

TEST(ParsePanel, OneInstanceFiveMetrics) {
  // rows built by hand, counted independently of the parser
  std::ostringstream csv;
  csv << kHeader;
  Calendar cal;
  const char* weekly_metrics[] = {"total_visits", "page_impressions", "time_on_site_min", "bouncing_visitors"};
  std::size_t rows = 0;
  for (const char* m : weekly_metrics) {
    for (int w = 1; w <= 125; ++w) {
      csv << "I1,W1,EU,EU,DE,news,10,3,2," << format_date(cal.week_start(w)) << ',' << m << ',' << 1000 + w << '\n';
      ++rows;
    }
  }
  for (int m = 1; m <= 28; ++m) {
    csv << "I1,W1,EU,EU,DE,news,10,3,2," << format_date(cal.month_start(m)) << ",unique_visitors,5000\n";
    ++rows;
  }
  ASSERT_EQ(rows, 4u * 125 + 28);
  const auto d = from_csv(csv.str());
  ASSERT_EQ(d.size(), 1u);
  const auto& inst = d.instances()[0];
  EXPECT_EQ(inst.series.size(), 5u);
  for (const char* m : weekly_metrics) EXPECT_EQ(inst.find(parse_metric(m))->size(), 125u);
  EXPECT_EQ(inst.find(MetricKind::UniqueVisitors)->size(), 28u);
  EXPECT_EQ((*inst.find(MetricKind::TotalVisits))[124], 1125.0);
  EXPECT_EQ(inst.global_rank, 10);
  EXPECT_EQ(inst.treatment(), Treatment::Treated);
}

TEST(ParsePanel, WebsiteListedInManyCountriesAppearsOnce) {
  std::ostringstream csv;
  csv << kHeader;
  const char* countries[] = {"DE", "FR", "IT", "ES", "NL", "BE", "AT", "PL", "SE", "DK", "IE", "PT", "FI"};
  for (int c = 0; c < 13; ++c) {
    csv << "google-" << countries[c] << ",google.com,EU,NONEU," << countries[c]
        << ",search,1,1,1,2017-07-01,total_visits,100\n";
  }
  const auto d = from_csv(csv.str());
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(d.websites().size(), 1u);
  EXPECT_EQ(d.collapsed().size(), 12u);
}

TEST(ParsePanel, RoundTripsThroughWriter) {
  std::vector<WebsiteInstance> insts;
  insts.push_back(instance("A", "WA", Base::EU, Base::EU, {1.5, 2.25, 3}));
  insts.push_back(instance("B", "WB", Base::NonEU, Base::NonEU, {10, 0, 7}));
  insts.back().series.emplace(MetricKind::UniqueVisitors, monthly(MetricKind::UniqueVisitors, {4, 5}));
  PanelDataset d(std::move(insts));
  const auto text = to_csv(d);
  const auto back = from_csv(text);
  EXPECT_EQ(to_csv(back), text);
  EXPECT_EQ(back.provenance().size(), 1u);
  EXPECT_EQ(back.provenance()[0].fnv1a64, fnv1a64_hex(text));
}

TEST(ParsePanel, ErrorsNameTheLine) {
  try {
    from_csv(std::string(kHeader) + "I1,W1,EU,EU,DE,news,1,1,1,2017-07-01,total_visits,-4\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(from_csv("instance_id,value\nx,1\n"), ParseError);
  EXPECT_THROW(from_csv(std::string(kHeader) + "I1,W1,XX,EU,DE,news,1,1,1,2017-07-01,total_visits,1\n"),
               ParseError);
  EXPECT_THROW(from_csv(std::string(kHeader) +
                        "I1,W1,EU,EU,DE,news,1,1,1,2017-07-01,total_visits,1\n"
                        "I1,W1,EU,EU,DE,news,1,1,1,2017-07-01,total_visits,2\n"),
               ParseError);
}

TEST(ParsePanel, MissingFileThrows) {
  EXPECT_THROW(parse_panel("/nonexistent/panel.csv"), std::runtime_error);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a64_hex("a"), "af63dc4c8601ec8c");
}

TEST(ApplyFilters, ThresholdIsStrict) {
  FilterOptions opt;
  opt.outlier.enabled = false;
  std::vector<WebsiteInstance> insts;
  insts.push_back(instance("low", "W1", Base::EU, Base::EU, std::vector<double>(125, 999.0)));
  insts.push_back(instance("edge", "W2", Base::EU, Base::EU, std::vector<double>(125, 1000.0)));
  auto [kept, report] = apply_filters(PanelDataset(std::move(insts)), opt);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept.instances()[0].instance_id, "edge");
  EXPECT_EQ(reason_for(report, "low"), ExclusionReason::BelowThreshold);
  EXPECT_EQ(report.input_count, 2u);
  EXPECT_EQ(report.retained_count, 1u);
}

TEST(ApplyFilters, MonthlyGapInMarch) {
  Calendar cal;
  std::vector<double> v(125, 5000.0);
  // weeks touching March 2018
  for (int w = cal.week_of(make_date(2018, 2, 26)); w <= cal.week_of(make_date(2018, 4, 2)); ++w) {
    v[static_cast<std::size_t>(w - 1)] = 0.0;
  }
  std::vector<double> partial(125, 5000.0);
  // two zero weeks never cover a whole month
  partial[40] = partial[41] = 0.0;
  std::vector<WebsiteInstance> insts;
  insts.push_back(instance("gap", "W1", Base::EU, Base::EU, v));
  insts.push_back(instance("ok", "W2", Base::EU, Base::EU, partial));
  FilterOptions opt;
  opt.outlier.enabled = false;
  auto [kept, report] = apply_filters(PanelDataset(std::move(insts)), opt);
  EXPECT_EQ(reason_for(report, "gap"), ExclusionReason::MonthlyGap);
  EXPECT_FALSE(reason_for(report, "ok").has_value());
  EXPECT_EQ(kept.size(), 1u);
}

TEST(ApplyFilters, OutlierRule) {
  std::vector<double> v(125, 20000.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += (i % 3) * 100.0;
  auto spiky = v;
  spiky[60] = spiky[61] = spiky[62] = 2e6;
  auto single = v;
  single[60] = 2e6;
  std::vector<WebsiteInstance> insts;
  insts.push_back(instance("smooth", "W1", Base::EU, Base::EU, v));
  insts.push_back(instance("spiky", "W2", Base::EU, Base::EU, spiky));
  insts.push_back(instance("single", "W3", Base::EU, Base::EU, single));
  auto [kept, report] = apply_filters(PanelDataset(std::move(insts)));
  EXPECT_EQ(reason_for(report, "spiky"), ExclusionReason::Outlier);
  EXPECT_FALSE(reason_for(report, "smooth").has_value());
  EXPECT_FALSE(reason_for(report, "single").has_value());
}

TEST(ApplyFilters, RuleCountsChain) {
  std::vector<WebsiteInstance> insts;
  for (int i = 0; i < 10; ++i) {
    insts.push_back(instance("I" + std::to_string(i), "W" + std::to_string(i), Base::EU, Base::EU,
                             std::vector<double>(125, i < 3 ? 10.0 : 5000.0)));
  }
  auto [kept, report] = apply_filters(PanelDataset(std::move(insts)));
  ASSERT_FALSE(report.rules.empty());
  EXPECT_EQ(report.rules[0].excluded, 3u);
  for (std::size_t r = 1; r < report.rules.size(); ++r) {
    EXPECT_EQ(report.rules[r].input, report.rules[r - 1].retained);
  }
  EXPECT_EQ(kept.size(), report.rules.back().retained);
}

TEST(UniqueSubsample, FloorIsStrict) {
  auto with_uniques = [](std::string id, std::vector<double> u) {
    auto inst = instance(id, "W" + id, Base::EU, Base::EU, std::vector<double>(125, 1e5));
    inst.series.emplace(MetricKind::UniqueVisitors, monthly(MetricKind::UniqueVisitors, std::move(u)));
    return inst;
  };
  std::vector<WebsiteInstance> insts;
  insts.push_back(with_uniques("edge", std::vector<double>(28, 5000.0)));
  auto dip = std::vector<double>(28, 9000.0);
  dip[5] = 4999.0;
  insts.push_back(with_uniques("dip", dip));
  FilterReport report;
  const auto kept = unique_visitor_subsample(PanelDataset(std::move(insts)), 5000.0, &report);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept.instances()[0].instance_id, "edge");
  EXPECT_EQ(reason_for(report, "dip"), ExclusionReason::BelowUniqueFloor);
}

TEST(UniqueSubsample, AllBelowFloorIsEmpty) {
  std::vector<WebsiteInstance> insts;
  auto inst = instance("a", "Wa", Base::EU, Base::EU, std::vector<double>(125, 1e5));
  inst.series.emplace(MetricKind::UniqueVisitors, monthly(MetricKind::UniqueVisitors, std::vector<double>(28, 10)));
  insts.push_back(inst);
  EXPECT_TRUE(unique_visitor_subsample(PanelDataset(std::move(insts))).empty());
}

TEST(Shares, SingleInstanceWebsite) {
  std::vector<WebsiteInstance> insts;
  insts.push_back(instance("a", "W", Base::EU, Base::EU, std::vector<double>(125, 3.0)));
  PanelDataset d(std::move(insts));
  const auto s = pre_treatment_shares(d, "W");
  ASSERT_EQ(s.shares.size(), 1u);
  EXPECT_EQ(s.shares[0].share, 1.0);
}

TEST(Shares, PaperSplit) {
  std::vector<WebsiteInstance> insts;
  insts.push_back(instance("eu", "W", Base::EU, Base::EU, fixture::step_path(9894, 1)));
  insts.push_back(instance("non", "W", Base::NonEU, Base::EU, fixture::step_path(106, 1e6)));
  PanelDataset d(std::move(insts));
  const auto s = pre_treatment_shares(d, "W");
  EXPECT_NEAR(s.share_of("eu"), 0.9894, 1e-12);
  EXPECT_NEAR(s.share_of("non"), 0.0106, 1e-12);
  EXPECT_NEAR(s.share_eu() + s.share_noneu(), 1.0, 1e-15);
  EXPECT_THROW(s.share_of("zzz"), std::out_of_range);
}

TEST(Shares, EqualMeansSplitEvenly) {
  std::vector<WebsiteInstance> insts;
  insts.push_back(instance("eu", "W", Base::EU, Base::EU, std::vector<double>(125, 7.0)));
  insts.push_back(instance("non", "W", Base::NonEU, Base::EU, std::vector<double>(125, 7.0)));
  PanelDataset d(std::move(insts));
  const auto s = pre_treatment_shares(d, "W");
  EXPECT_EQ(s.share_of("eu"), 0.5);
  EXPECT_EQ(s.share_of("non"), 0.5);
}

TEST(Shares, AllZeroThrows) {
  std::vector<WebsiteInstance> insts;
  insts.push_back(instance("eu", "W", Base::EU, Base::EU, std::vector<double>(125, 0.0)));
  PanelDataset d(std::move(insts));
  EXPECT_THROW(pre_treatment_shares(d, "W"), std::domain_error);
}

TEST(PanelDataset, RejectsDuplicatesAndSharedBase) {
  std::vector<WebsiteInstance> dup;
  dup.push_back(instance("a", "W", Base::EU, Base::EU, {1}));
  dup.push_back(instance("a", "V", Base::EU, Base::EU, {1}));
  EXPECT_THROW(PanelDataset(std::move(dup)), std::invalid_argument);
  std::vector<WebsiteInstance> same;
  same.push_back(instance("a", "W", Base::EU, Base::EU, {1}));
  same.push_back(instance("b", "W", Base::EU, Base::EU, {1}));
  EXPECT_THROW(PanelDataset(std::move(same)), std::invalid_argument);
}
