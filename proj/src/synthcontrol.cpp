#include "panelfx/synthcontrol.hpp"

#include "panelfx/ingest.hpp"
#include "panelfx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace panelfx {

std::string_view to_string(DonorMatch match) {
  switch (match) {
    case DonorMatch::Industry: return "industry";
    case DonorMatch::None: return "none";
    case DonorMatch::EuShare: return "eu_share";
  }
  return "?";
}

std::string_view to_string(WeightMode mode) {
  return mode == WeightMode::Simplex ? "simplex" : "unconstrained";
}

DonorMatch parse_donor_match(std::string_view name) {
  if (name == "industry") return DonorMatch::Industry;
  if (name == "none") return DonorMatch::None;
  if (name == "eu_share") return DonorMatch::EuShare;
  throw std::invalid_argument("unknown donor match '" + std::string(name) +
                              "' (expected industry, none or eu_share)");
}

WeightMode parse_weight_mode(std::string_view name) {
  if (name == "simplex") return WeightMode::Simplex;
  if (name == "unconstrained") return WeightMode::Unconstrained;
  throw std::invalid_argument("unknown weight mode '" + std::string(name) +
                              "' (expected simplex or unconstrained)");
}

std::vector<std::string> DonorPool::donor_ids() const {
  std::vector<std::string> ids;
  ids.reserve(donors.size());
  for (const auto& d : donors) ids.push_back(d.instance_id);
  return ids;
}

// --- Donor selection ----------------------------------------------------------

DonorPool select_donors(const DonorCandidate& treated, std::span<const DonorCandidate> pool,
                        const DonorSelection& selection) {
  if (pool.empty()) throw std::invalid_argument("select_donors: donor pool is empty");
  if (selection.k == 0) throw std::invalid_argument("select_donors: k must be positive");
  if (treated.log_pre.size() < 2) {
    throw std::invalid_argument("select_donors: treated pre-period needs at least two points");
  }
  const double spread = stats::variance(treated.log_pre);
  if (!(spread > 0.0)) {
    throw std::domain_error("select_donors: treated pre-period series for '" +
                            treated.instance_id + "' is constant; correlation undefined");
  }

  std::vector<DonorInfo> scored;
  scored.reserve(pool.size());
  for (const auto& cand : pool) {
    if (cand.instance_id == treated.instance_id) continue;
    if (cand.log_pre.size() != treated.log_pre.size()) {
      throw std::invalid_argument("select_donors: candidate '" + cand.instance_id +
                                  "' has a pre-period of different length");
    }
    const double r = stats::pearson(treated.log_pre, cand.log_pre);
    if (std::isnan(r)) continue;
    bool matched = true;
    switch (selection.match) {
      case DonorMatch::Industry: matched = cand.industry == treated.industry; break;
      case DonorMatch::EuShare:
        matched = std::fabs(cand.eu_share - treated.eu_share) <= selection.eu_share_tolerance;
        break;
      case DonorMatch::None: break;
    }
    scored.push_back({cand.instance_id, r, matched});
  }

  DonorPool out;
  out.treated_instance_id = treated.instance_id;
  out.match = selection.match;
  const auto n_matched = static_cast<std::size_t>(
      std::count_if(scored.begin(), scored.end(), [](const DonorInfo& d) { return d.matched; }));
  if (selection.match != DonorMatch::None && n_matched < selection.min_candidates) {
    out.fell_back_to_global = true;
  } else if (selection.match != DonorMatch::None) {
    std::erase_if(scored, [](const DonorInfo& d) { return !d.matched; });
  }
  if (scored.empty()) {
    throw std::invalid_argument("select_donors: no usable donor for '" + treated.instance_id + "'");
  }
  std::sort(scored.begin(), scored.end(), [](const DonorInfo& a, const DonorInfo& b) {
    if (a.correlation != b.correlation) return a.correlation > b.correlation;
    return a.instance_id < b.instance_id;
  });
  if (scored.size() > selection.k) scored.resize(selection.k);
  out.donors = std::move(scored);
  return out;
}

DonorPool select_donors(const WebsiteInstance& treated, std::span<const WebsiteInstance* const> pool,
                        MetricKind metric, const DonorSelection& selection,
                        const Calendar& calendar, const PanelDataset* dataset) {
  if (selection.match == DonorMatch::EuShare && dataset == nullptr) {
    throw std::invalid_argument("select_donors: EU-share matching needs the dataset");
  }
  const auto pre = calendar.pre_periods(cadence_of(metric));
  auto log_pre = [&](const WebsiteInstance& inst) {
    const auto* series = inst.find(metric);
    if (!series) {
      throw std::invalid_argument("instance '" + inst.instance_id + "' has no " +
                                  std::string(to_string(metric)) + " series");
    }
    return log1p_values(series->slice(calendar, pre));
  };
  auto share = [&](const WebsiteInstance& inst) {
    return dataset ? eu_traffic_share(*dataset, inst, calendar) : 0.0;
  };

  const auto treated_path = log_pre(treated);
  std::vector<std::vector<double>> paths;
  paths.reserve(pool.size());
  std::vector<DonorCandidate> candidates;
  candidates.reserve(pool.size());
  for (const auto* inst : pool) {
    if (inst->treatment() != Treatment::Control) {
      throw std::invalid_argument("select_donors: '" + inst->instance_id + "' is not a control");
    }
    paths.push_back(log_pre(*inst));
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    candidates.push_back({pool[i]->instance_id, pool[i]->industry, share(*pool[i]), paths[i]});
  }
  const DonorCandidate t{treated.instance_id, treated.industry, share(treated), treated_path};
  return select_donors(t, candidates, selection);
}

// --- Weight fitting -------------------------------------------------------------

namespace {

void check_inputs(std::span<const double> y, const Eigen::MatrixXd& D) {
  if (static_cast<Eigen::Index>(y.size()) != D.rows()) {
    throw std::invalid_argument("fit_weights: treated and donor pre-periods differ in length");
  }
  if (D.cols() == 0) throw std::invalid_argument("fit_weights: no donors");
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("fit_weights: non-finite treated value");
  }
  if (!D.allFinite()) throw std::invalid_argument("fit_weights: non-finite donor value");
}

// Primal active-set method for min 0.5 w'Qw - c'w subject to sum(w) = 1,
// w >= 0. Starts from the best single donor, so every iterate is at least
// as good as that vertex.
Eigen::VectorXd solve_simplex_qp(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c,
                                 Eigen::Index start) {
  const auto n = Q.rows();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  w(start) = 1.0;
  std::vector<bool> free(static_cast<std::size_t>(n), false);
  free[static_cast<std::size_t>(start)] = true;

  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  const double mu_tol = 1e-12 * scale;
  const int max_iter = 100 * static_cast<int>(n) + 100;

  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (free[static_cast<std::size_t>(i)]) idx.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
    Eigen::VectorXd rhs(m + 1);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) kkt(a, b) = Q(idx[a], idx[b]);
      kkt(a, m) = 1.0;
      kkt(m, a) = 1.0;
      rhs(a) = c(idx[a]);
    }
    rhs(m) = 1.0;
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);

    Eigen::VectorXd step(m);
    for (Eigen::Index a = 0; a < m; ++a) step(a) = sol(a) - w(idx[a]);

    if (step.lpNorm<Eigen::Infinity>() <= 1e-13) {
      const Eigen::VectorXd g = Q * w - c;
      double lambda = 0.0;
      for (auto i : idx) lambda -= g(i);
      lambda /= static_cast<double>(m);
      Eigen::Index enter = -1;
      double worst = -mu_tol;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (free[static_cast<std::size_t>(i)]) continue;
        const double mu = g(i) + lambda;
        if (mu < worst) {
          worst = mu;
          enter = i;
        }
      }
      if (enter < 0) break;
      free[static_cast<std::size_t>(enter)] = true;
      continue;
    }

    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index a = 0; a < m; ++a) {
      if (step(a) < 0.0) {
        const double ratio = -w(idx[a]) / step(a);
        if (ratio < alpha) {
          alpha = ratio;
          blocking = idx[a];
        }
      }
    }
    for (Eigen::Index a = 0; a < m; ++a) w(idx[a]) += alpha * step(a);
    if (blocking >= 0) {
      w(blocking) = 0.0;
      free[static_cast<std::size_t>(blocking)] = false;
    }
  }

  w = w.cwiseMax(0.0);
  return w / w.sum();
}

}  // namespace

double pre_mse(std::span<const double> treated_pre, const Eigen::MatrixXd& donors_pre,
               std::span<const double> weights) {
  if (static_cast<Eigen::Index>(weights.size()) != donors_pre.cols() ||
      static_cast<Eigen::Index>(treated_pre.size()) != donors_pre.rows()) {
    throw std::invalid_argument("pre_mse: dimension mismatch");
  }
  double ss = 0.0;
  for (Eigen::Index t = 0; t < donors_pre.rows(); ++t) {
    double fitted = 0.0;
    for (Eigen::Index j = 0; j < donors_pre.cols(); ++j) {
      fitted += weights[static_cast<std::size_t>(j)] * donors_pre(t, j);
    }
    const double gap = treated_pre[static_cast<std::size_t>(t)] - fitted;
    ss += gap * gap;
  }
  return ss / static_cast<double>(donors_pre.rows());
}

SynthWeights fit_weights(std::span<const double> treated_pre, const Eigen::MatrixXd& donors_pre,
                         WeightMode mode, std::vector<std::string> donor_ids) {
  check_inputs(treated_pre, donors_pre);
  const auto T = donors_pre.rows();
  const auto k = donors_pre.cols();
  if (!donor_ids.empty() && static_cast<Eigen::Index>(donor_ids.size()) != k) {
    throw std::invalid_argument("fit_weights: donor ids do not match donor columns");
  }
  const Eigen::Map<const Eigen::VectorXd> y(treated_pre.data(), T);

  SynthWeights out;
  out.mode = mode;
  out.donor_ids = std::move(donor_ids);
  Eigen::VectorXd w;

  if (mode == WeightMode::Unconstrained) {
    if (T < k + 1) {
      throw std::invalid_argument("fit_weights: unconstrained mode needs at least " +
                                  std::to_string(k + 1) + " pre-period points");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(donors_pre);
    if (qr.rank() < k) {
      throw std::domain_error(
          "fit_weights: donor matrix is rank deficient; use simplex mode instead");
    }
    w = qr.solve(y);
  } else {
    if (T < 2) throw std::invalid_argument("fit_weights: simplex mode needs at least 2 points");
    Eigen::Index best = 0;
    double best_ss = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k; ++j) {
      const double ss = (y - donors_pre.col(j)).squaredNorm();
      if (ss < best_ss) {
        best_ss = ss;
        best = j;
      }
    }
    if (k == 1) {
      w = Eigen::VectorXd::Ones(1);
    } else {
      const Eigen::MatrixXd Q = donors_pre.transpose() * donors_pre;
      const Eigen::VectorXd c = donors_pre.transpose() * y;
      w = solve_simplex_qp(Q, c, best);
      if ((y - donors_pre * w).squaredNorm() > best_ss) {
        w = Eigen::VectorXd::Unit(k, best);
      }
    }
  }

  out.weights.assign(w.data(), w.data() + w.size());
  out.pre_mse = pre_mse(treated_pre, donors_pre, out.weights);
  return out;
}

std::vector<double> synthesize(const SynthWeights& weights, const Eigen::MatrixXd& donors_full) {
  if (static_cast<Eigen::Index>(weights.weights.size()) != donors_full.cols()) {
    throw std::invalid_argument("synthesize: " + std::to_string(weights.weights.size()) +
                                " weights for " + std::to_string(donors_full.cols()) + " donors");
  }
  std::vector<double> out(static_cast<std::size_t>(donors_full.rows()), 0.0);
  for (Eigen::Index t = 0; t < donors_full.rows(); ++t) {
    double v = 0.0;
    for (Eigen::Index j = 0; j < donors_full.cols(); ++j) {
      v += weights.weights[static_cast<std::size_t>(j)] * donors_full(t, j);
    }
    out[static_cast<std::size_t>(t)] = v;
  }
  return out;
}

}  // namespace panelfx
