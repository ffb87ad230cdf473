#include "lightwaves/inference.hpp"

#include <cmath>

#include "lightwaves/error.hpp"
#include "lightwaves/parallel.hpp"

namespace lightwaves {

Predictor::Predictor(ModelArtifact model)
    : model_(std::move(model)),
      standardizer_{model_.feature_means, model_.feature_stds},
      plan_(model_.descriptors) {
  model_.validate();
}

void Predictor::check_compatible(const TimeSeriesDataset& data) const {
  if (data.channels != model_.input_channels) {
    throw DataError("channel mismatch: model expects " + std::to_string(model_.input_channels) +
                    " channels, data has " + std::to_string(data.channels));
  }
}

std::vector<double> Predictor::features(std::span<const double> sample, std::size_t threads,
                                        TransformStats* stats) const {
  const std::size_t channels = model_.input_channels;
  if (channels == 0 || sample.size() % channels != 0) throw DataError("sample size does not match model channels");
  std::vector<double> out(plan_.feature_count());
  if (!model_.normalize) {
    plan_.run(sample, channels, default_kernel_bank(), out, threads, stats);
    return out;
  }
  TimeSeriesDataset one;
  one.n = 1;
  one.channels = channels;
  one.length = sample.size() / channels;
  one.values.assign(sample.begin(), sample.end());
  z_normalize(one);
  plan_.run(one.values, channels, default_kernel_bank(), out, threads, stats);
  return out;
}

std::vector<double> Predictor::scores(std::span<const double> sample, std::size_t threads) const {
  const auto raw = features(sample, threads);
  std::vector<double> z(raw.size());
  standardizer_.apply_row(raw, z);
  const auto k = static_cast<std::size_t>(model_.weights.cols());
  std::vector<double> s(k, 0.0);
  for (std::size_t j = 0; j < z.size(); ++j) {
    for (std::size_t c = 0; c < k; ++c) s[c] += z[j] * model_.weights(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
  }
  return s;
}

std::size_t Predictor::predict(std::span<const double> sample, std::size_t threads) const {
  return argmax_class(scores(sample, threads));
}

std::vector<std::size_t> Predictor::predict(const TimeSeriesDataset& data, std::size_t threads) const {
  check_compatible(data);
  std::vector<std::size_t> out(data.n);
  parallel_for(data.n, threads, [&](std::size_t i) { out[i] = predict(data.sample(i), 1); });
  return out;
}

double accuracy(std::span<const std::size_t> predicted, const TimeSeriesDataset& data) {
  if (!data.labeled()) throw DataError("labels required");
  if (predicted.size() != data.n) throw DataError("prediction count does not match samples");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.n; ++i) correct += predicted[i] == data.labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.n);
}

}  // namespace lightwaves
