#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lightwaves {

/// Column means and population standard deviations.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;

  /// (x - mean) / std per column; columns with std == 0 map to 0.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  void apply_row(std::span<const double> row, std::span<double> out) const;
};

Standardizer fit_standardizer(const Eigen::MatrixXd& x);

/// Ten log-spaced penalties from 1e-3 to 1e3.
std::vector<double> default_alpha_grid();

/// n x K matrix of -1 with +1 at (i, labels[i]).
Eigen::MatrixXd one_vs_rest_targets(std::span<const std::uint32_t> labels, std::size_t classes);

/// Singular value decomposition of a design matrix, reused across penalties.
class RidgeSolver {
 public:
  explicit RidgeSolver(const Eigen::MatrixXd& x);

  /// Solution of (X^T X + alpha I) W = X^T Y.
  Eigen::MatrixXd weights(const Eigen::MatrixXd& y, double alpha) const;
  /// Diagonal of the hat matrix X (X^T X + alpha I)^-1 X^T.
  Eigen::VectorXd leverage(double alpha) const;
  /// Leave-one-out residuals (y_i - yhat_i) / (1 - h_ii), n x K.
  Eigen::MatrixXd loo_residuals(const Eigen::MatrixXd& y, double alpha) const;

 private:
  Eigen::MatrixXd u_;
  Eigen::VectorXd s_;
  Eigen::MatrixXd v_;
};

struct RidgeModel {
  Eigen::MatrixXd weights;  // F x K
  double alpha = 0.0;
  std::vector<double> loo_errors;  // one per grid entry
};

/// One-vs-rest ridge regression on +-1 targets. The penalty with the lowest
/// leave-one-out squared residual sum wins; ties go to the earliest grid entry.
RidgeModel ridge_fit(const Eigen::MatrixXd& x, std::span<const std::uint32_t> labels,
                     std::size_t classes, std::span<const double> alpha_grid);

/// Index of the largest score, lowest index on ties.
std::size_t argmax_class(std::span<const double> scores);

/// Class index per row of raw (unstandardized) features.
std::vector<std::size_t> predict(const RidgeModel& model, const Standardizer& standardizer,
                                 const Eigen::MatrixXd& rows);

}  // namespace lightwaves
