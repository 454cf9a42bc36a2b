#include "panelfx/revenue.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace panelfx {

Cents Cents::from_dollars(double dollars) {
  if (!std::isfinite(dollars)) throw std::invalid_argument("non-finite currency amount");
  return Cents{std::llround(static_cast<long double>(dollars) * 100.0L)};
}

std::string Cents::to_string() const {
  const auto magnitude = static_cast<unsigned long long>(std::llabs(value));
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%llu.%02llu", value < 0 ? "-" : "", magnitude / 100,
                magnitude % 100);
  return buf;
}

RevenueModel RevenueModel::reference_ecommerce() {
  RevenueModel m;
  m.kind = RevenueKind::Ecommerce;
  m.visits_per_year = 70'461'862.0;
  m.conversion_rate = 0.0191;
  m.revenue_per_purchase = 105.99;
  m.years = 1.5;
  return m;
}

RevenueModel RevenueModel::reference_adbased() {
  RevenueModel m;
  m.kind = RevenueKind::AdBased;
  m.page_impressions_per_year = 358'859'344.0;
  m.ads_per_page = 7.6;
  m.ad_price = 0.0075;
  m.years = 1.5;
  return m;
}

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("revenue model: ") + name + " must be positive");
  }
}

RevenueImpact finish(double baseline, double delta, double years) {
  if (!std::isfinite(delta)) throw std::invalid_argument("revenue model: delta must be finite");
  RevenueImpact out;
  out.baseline_revenue = baseline;
  out.revenue_change = delta * baseline * years;
  out.baseline_cents = Cents::from_dollars(out.baseline_revenue);
  out.change_cents = Cents::from_dollars(out.revenue_change);
  return out;
}

}  // namespace

RevenueImpact ecommerce_impact(const RevenueModel& model, double delta_total_visits) {
  if (model.kind != RevenueKind::Ecommerce) {
    throw std::invalid_argument("ecommerce_impact: model is not an e-commerce model");
  }
  require_positive(model.visits_per_year, "visits_per_year");
  require_positive(model.conversion_rate, "conversion_rate");
  require_positive(model.revenue_per_purchase, "revenue_per_purchase");
  require_positive(model.years, "years");
  const double baseline = model.visits_per_year * model.conversion_rate * model.revenue_per_purchase;
  return finish(baseline, delta_total_visits, model.years);
}

RevenueImpact ad_impact(const RevenueModel& model, double delta_page_impressions) {
  if (model.kind != RevenueKind::AdBased) {
    throw std::invalid_argument("ad_impact: model is not an ad-based model");
  }
  require_positive(model.page_impressions_per_year, "page_impressions_per_year");
  require_positive(model.ads_per_page, "ads_per_page");
  require_positive(model.ad_price, "ad_price");
  require_positive(model.years, "years");
  const double baseline = model.page_impressions_per_year * model.ads_per_page * model.ad_price;
  return finish(baseline, delta_page_impressions, model.years);
}

}  // namespace panelfx
