#include "panelfx/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace panelfx::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double stddev(std::span<const double> xs) { return std::sqrt(variance(xs)); }

double median(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("pearson: samples must have equal length >= 2");
  }
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

double t_two_sided_p(double t, double dof) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(dof);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

double t_quantile_upper(double alpha, double dof) {
  const boost::math::students_t dist(dof);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

double normal_two_sided_p(double z) {
  if (std::isinf(z)) return 0.0;
  const boost::math::normal dist;
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(z))));
}

OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Covariance covariance) {
  const auto n = X.rows();
  const auto k = X.cols();
  if (y.size() != n) throw std::invalid_argument("ols: X and y row counts differ");
  if (n <= k) throw std::domain_error("ols: no residual degrees of freedom");
  if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("ols: non-finite input");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < k) throw std::domain_error("ols: design matrix is rank deficient");

  OlsFit fit;
  fit.coef = qr.solve(y);
  fit.residuals = y - X * fit.coef;
  fit.dof = static_cast<double>(n - k);
  fit.sigma2 = fit.residuals.squaredNorm() / fit.dof;

  const Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd cov;
  if (covariance == Covariance::Classical) {
    cov = fit.sigma2 * xtx_inv;
  } else {
    const Eigen::MatrixXd meat =
        X.transpose() * fit.residuals.array().square().matrix().asDiagonal() * X;
    cov = xtx_inv * meat * xtx_inv * (static_cast<double>(n) / fit.dof);
  }

  fit.std_err = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.t_stat.resize(k);
  fit.p_value.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double se = fit.std_err(j);
    double t = 0.0;
    if (se > 0.0) {
      t = fit.coef(j) / se;
    } else if (fit.coef(j) != 0.0) {
      t = std::copysign(std::numeric_limits<double>::infinity(), fit.coef(j));
    }
    fit.t_stat(j) = t;
    fit.p_value(j) = t_two_sided_p(t, fit.dof);
  }
  return fit;
}

WelchTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("welch_t_test: each sample needs at least two observations");
  }
  WelchTest out;
  out.mean_a = mean(a);
  out.mean_b = mean(b);
  const double va = variance(a) / static_cast<double>(a.size());
  const double vb = variance(b) / static_cast<double>(b.size());
  const double diff = out.mean_a - out.mean_b;
  const double se2 = va + vb;
  if (diff == 0.0) {
    out.t = 0.0;
    out.dof = se2 > 0.0 ? se2 * se2 /
                              (va * va / static_cast<double>(a.size() - 1) +
                               vb * vb / static_cast<double>(b.size() - 1))
                        : static_cast<double>(a.size() + b.size() - 2);
    out.p_value = 1.0;
    return out;
  }
  if (se2 <= 0.0) {
    out.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
    out.dof = static_cast<double>(a.size() + b.size() - 2);
    out.p_value = 0.0;
    return out;
  }
  out.t = diff / std::sqrt(se2);
  out.dof = se2 * se2 /
            (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  out.p_value = t_two_sided_p(out.t, out.dof);
  return out;
}

}  // namespace panelfx::stats
