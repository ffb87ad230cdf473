#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lightwaves/classifier.hpp"
#include "lightwaves/dataset.hpp"
#include "lightwaves/model.hpp"
#include "lightwaves/scattering.hpp"

namespace lightwaves {

/// Inference path for a trained model: selective transform, standardize,
/// score, argmax. Holds the precomputed path grouping.
class Predictor {
 public:
  explicit Predictor(ModelArtifact model);

  const ModelArtifact& model() const noexcept { return model_; }

  /// Throws DataError when `data` has a different channel count.
  void check_compatible(const TimeSeriesDataset& data) const;

  /// Raw (unstandardized) features for one C x L sample.
  std::vector<double> features(std::span<const double> sample, std::size_t threads = 1,
                               TransformStats* stats = nullptr) const;
  std::vector<double> scores(std::span<const double> sample, std::size_t threads = 1) const;
  std::size_t predict(std::span<const double> sample, std::size_t threads = 1) const;

  /// One class index per sample; parallel over samples.
  std::vector<std::size_t> predict(const TimeSeriesDataset& data, std::size_t threads = 1) const;

 private:
  ModelArtifact model_;
  Standardizer standardizer_;
  SelectivePlan plan_;
};

/// Fraction of predictions equal to the dataset labels.
double accuracy(std::span<const std::size_t> predicted, const TimeSeriesDataset& data);

}  // namespace lightwaves
