// Revenue translation of relative traffic effects for e-commerce (visits x
// conversion x basket) and ad-funded (impressions x ads x price) websites.
#pragma once

#include <cstdint>
#include <string>

namespace panelfx {

/// Whole cents, rounded half away from zero.
struct Cents {
  std::int64_t value = 0;

  static Cents from_dollars(double dollars);
  double dollars() const { return static_cast<double>(value) / 100.0; }
  /// "-1234.56"
  std::string to_string() const;
  bool operator==(const Cents&) const = default;
};

enum class RevenueKind { Ecommerce, AdBased };

struct RevenueModel {
  RevenueKind kind = RevenueKind::Ecommerce;
  // e-commerce
  double visits_per_year = 0.0;
  double conversion_rate = 0.0;
  double revenue_per_purchase = 0.0;
  // ad-based
  double page_impressions_per_year = 0.0;
  double ads_per_page = 0.0;
  double ad_price = 0.0;  // per impression, i.e. CPM / 1000
  double years = 1.5;

  /// Average e-commerce site of the reference study: 70,461,862 visits,
  /// 1.91% conversion, $105.99 per purchase.
  static RevenueModel reference_ecommerce();
  /// Average news site: 358,859,344 impressions, 7.6 ads, $7.50 CPM.
  static RevenueModel reference_adbased();
};

struct RevenueImpact {
  double baseline_revenue = 0.0;  // per year
  double revenue_change = 0.0;    // over model.years
  Cents baseline_cents;
  Cents change_cents;
};

/// Throws std::invalid_argument unless kind is Ecommerce and every
/// parameter is positive.
RevenueImpact ecommerce_impact(const RevenueModel& model, double delta_total_visits);
/// Throws std::invalid_argument unless kind is AdBased and every parameter
/// is positive.
RevenueImpact ad_impact(const RevenueModel& model, double delta_page_impressions);

}  // namespace panelfx
