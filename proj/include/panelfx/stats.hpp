// Small statistics toolbox: descriptive statistics, OLS with classical or
// HC1 covariance, Welch's t-test.
#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace panelfx::stats {

double mean(std::span<const double> xs);
/// Sample variance (n - 1 denominator); 0 for fewer than two values.
double variance(std::span<const double> xs);
double stddev(std::span<const double> xs);
/// Midpoint of the two central values for even n. Throws on empty input.
double median(std::span<const double> xs);
/// NaN when either side has zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Two-sided p-value of a t statistic with `dof` degrees of freedom.
double t_two_sided_p(double t, double dof);
/// Upper quantile: P(T > q) = alpha.
double t_quantile_upper(double alpha, double dof);
double normal_two_sided_p(double z);

enum class Covariance { Classical, HC1 };

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd std_err;
  Eigen::VectorXd t_stat;
  Eigen::VectorXd p_value;
  Eigen::VectorXd residuals;
  double dof = 0.0;
  double sigma2 = 0.0;
};

/// Least squares y ~ X. Throws std::domain_error if X is rank deficient or
/// has no residual degrees of freedom.
OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Covariance covariance);

struct WelchTest {
  double t = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

/// Unequal-variance two-sample t-test. Identical means give t = 0, p = 1.
/// Needs at least two observations per sample.
WelchTest welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace panelfx::stats
