// Synthetic control construction: donor selection, weight fitting and
// counterfactual synthesis on log-scale series.
#pragma once

#include "panelfx/panel_model.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace panelfx {

class PanelDataset;

enum class DonorMatch { Industry, None, EuShare };
enum class WeightMode { Simplex, Unconstrained };

std::string_view to_string(DonorMatch match);
std::string_view to_string(WeightMode mode);
DonorMatch parse_donor_match(std::string_view name);
WeightMode parse_weight_mode(std::string_view name);

struct DonorSelection {
  std::size_t k = 5;
  DonorMatch match = DonorMatch::Industry;
  /// Absolute EU-share difference accepted under DonorMatch::EuShare.
  double eu_share_tolerance = 0.10;
  /// Fewer matched candidates than this falls back to the whole pool.
  std::size_t min_candidates = 2;
};

/// A unit offered for matching: its log pre-period path and match keys.
struct DonorCandidate {
  std::string instance_id;
  std::string industry;
  double eu_share = 0.0;
  std::span<const double> log_pre;
};

struct DonorInfo {
  std::string instance_id;
  double correlation = 0.0;
  bool matched = false;  // passed the industry / EU-share restriction
};

struct DonorPool {
  std::string treated_instance_id;
  DonorMatch match = DonorMatch::Industry;
  bool fell_back_to_global = false;
  /// Sorted by correlation descending, ties by ascending instance id.
  std::vector<DonorInfo> donors;

  std::vector<std::string> donor_ids() const;
};

/// Picks up to `k` donors with the highest Pearson correlation of log
/// pre-period paths. Candidates with the treated id or a constant path are
/// skipped. Throws std::invalid_argument on an empty pool and
/// std::domain_error if the treated path is constant.
DonorPool select_donors(const DonorCandidate& treated, std::span<const DonorCandidate> pool,
                        const DonorSelection& selection);

/// Same, from instances. `pool` must hold control instances only; EU-share
/// matching needs `dataset` to look up each website's EU-traffic share.
DonorPool select_donors(const WebsiteInstance& treated, std::span<const WebsiteInstance* const> pool,
                        MetricKind metric, const DonorSelection& selection,
                        const Calendar& calendar = Calendar{},
                        const PanelDataset* dataset = nullptr);

struct SynthWeights {
  std::vector<std::string> donor_ids;
  std::vector<double> weights;
  WeightMode mode = WeightMode::Simplex;
  double pre_mse = 0.0;
};

/// Mean squared gap between `treated_pre` and donors_pre * weights.
double pre_mse(std::span<const double> treated_pre, const Eigen::MatrixXd& donors_pre,
               std::span<const double> weights);

/// Minimises the pre-period MSE. Columns of `donors_pre` are donors, rows
/// are periods. Simplex mode constrains weights to be non-negative and sum
/// to one; unconstrained mode is least squares without intercept and throws
/// std::domain_error when the donor matrix is rank deficient.
SynthWeights fit_weights(std::span<const double> treated_pre, const Eigen::MatrixXd& donors_pre,
                         WeightMode mode, std::vector<std::string> donor_ids = {});

/// Weighted sum of donor paths over every row of `donors_full`.
std::vector<double> synthesize(const SynthWeights& weights, const Eigen::MatrixXd& donors_full);

}  // namespace panelfx
