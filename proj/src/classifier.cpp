#include "lightwaves/classifier.hpp"

#include <cmath>
#include <limits>

#include "lightwaves/error.hpp"

namespace lightwaves {

Standardizer fit_standardizer(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw DataError("standardizer needs at least two rows");
  Standardizer s;
  const auto n = static_cast<double>(x.rows());
  s.means.resize(static_cast<std::size_t>(x.cols()));
  s.stds.resize(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) mean += x(i, j);
    mean /= n;
    double var = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    s.means[static_cast<std::size_t>(j)] = mean;
    s.stds[static_cast<std::size_t>(j)] = std::sqrt(var / n);
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != means.size()) {
    throw DataError("standardizer: expected " + std::to_string(means.size()) + " columns, got " +
                    std::to_string(x.cols()));
  }
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const auto sj = static_cast<std::size_t>(j);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      out(i, j) = stds[sj] > 0.0 ? (x(i, j) - means[sj]) / stds[sj] : 0.0;
    }
  }
  return out;
}

void Standardizer::apply_row(std::span<const double> row, std::span<double> out) const {
  if (row.size() != means.size() || out.size() != means.size()) {
    throw DataError("standardizer: row width mismatch");
  }
  for (std::size_t j = 0; j < row.size(); ++j) {
    out[j] = stds[j] > 0.0 ? (row[j] - means[j]) / stds[j] : 0.0;
  }
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(std::pow(10.0, -3.0 + 6.0 * i / 9.0));
  return grid;
}

Eigen::MatrixXd one_vs_rest_targets(std::span<const std::uint32_t> labels, std::size_t classes) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(labels.size()),
                                                static_cast<Eigen::Index>(classes), -1.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) throw DataError("label out of range");
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

RidgeSolver::RidgeSolver(const Eigen::MatrixXd& x) {
  if (!x.allFinite()) throw DataError("ridge: non-finite feature values");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  u_ = svd.matrixU();
  s_ = svd.singularValues();
  v_ = svd.matrixV();
}

Eigen::MatrixXd RidgeSolver::weights(const Eigen::MatrixXd& y, double alpha) const {
  const Eigen::VectorXd shrink = s_.array() / (s_.array().square() + alpha);
  return v_ * shrink.asDiagonal() * (u_.transpose() * y);
}

Eigen::VectorXd RidgeSolver::leverage(double alpha) const {
  const Eigen::VectorXd filt = s_.array().square() / (s_.array().square() + alpha);
  return u_.array().square().matrix() * filt;
}

Eigen::MatrixXd RidgeSolver::loo_residuals(const Eigen::MatrixXd& y, double alpha) const {
  const Eigen::VectorXd filt = s_.array().square() / (s_.array().square() + alpha);
  const Eigen::MatrixXd fitted = u_ * filt.asDiagonal() * (u_.transpose() * y);
  const Eigen::VectorXd h = leverage(alpha);
  Eigen::MatrixXd res = y - fitted;
  for (Eigen::Index i = 0; i < res.rows(); ++i) res.row(i) /= (1.0 - h(i));
  return res;
}

RidgeModel ridge_fit(const Eigen::MatrixXd& x, std::span<const std::uint32_t> labels,
                     std::size_t classes, std::span<const double> alpha_grid) {
  if (x.rows() < 2) throw DataError("ridge: need at least two samples");
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw DataError("ridge: label count does not match rows");
  }
  if (alpha_grid.empty()) throw DataError("ridge: empty alpha grid");
  for (double a : alpha_grid) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DataError("ridge: alphas must be positive");
  }
  std::vector<std::size_t> counts(classes, 0);
  for (auto l : labels) {
    if (l >= classes) throw DataError("ridge: label out of range");
    ++counts[l];
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] == 0) throw DataError("ridge: class " + std::to_string(c) + " absent");
  }

  const RidgeSolver solver(x);
  const Eigen::MatrixXd y = one_vs_rest_targets(labels, classes);
  RidgeModel model;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
    double err = solver.loo_residuals(y, alpha_grid[a]).squaredNorm();
    if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
    model.loo_errors.push_back(err);
    if (err < best) {
      best = err;
      best_index = a;
    }
  }
  model.alpha = alpha_grid[best_index];
  model.weights = solver.weights(y, model.alpha);
  return model;
}

std::size_t argmax_class(std::span<const double> scores) {
  if (scores.empty()) throw DataError("argmax over empty scores");
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return best;
}

std::vector<std::size_t> predict(const RidgeModel& model, const Standardizer& standardizer,
                                 const Eigen::MatrixXd& rows) {
  if (rows.cols() != model.weights.rows()) {
    throw DataError("predict: feature width " + std::to_string(rows.cols()) +
                    " does not match model width " + std::to_string(model.weights.rows()));
  }
  const Eigen::MatrixXd scores = standardizer.apply(rows) * model.weights;
  std::vector<std::size_t> out(static_cast<std::size_t>(rows.rows()));
  std::vector<double> row(static_cast<std::size_t>(scores.cols()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index k = 0; k < scores.cols(); ++k) row[static_cast<std::size_t>(k)] = scores(i, k);
    out[static_cast<std::size_t>(i)] = argmax_class(row);
  }
  return out;
}

}  // namespace lightwaves
