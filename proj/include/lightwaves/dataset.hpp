#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lightwaves {

/// Equal-length multivariate series: n samples x C channels x L steps,
/// stored sample-major, channel-major, time-minor.
///
/// An unlabeled dataset has empty `labels` and `class_names`.
struct TimeSeriesDataset {
  std::string name;
  std::size_t n = 0;
  std::size_t channels = 0;
  std::size_t length = 0;
  std::vector<double> values;
  std::vector<std::uint32_t> labels;
  std::vector<std::string> class_names;

  bool labeled() const noexcept { return !class_names.empty(); }

  std::span<const double> sample(std::size_t i) const {
    return {values.data() + i * channels * length, channels * length};
  }
  std::span<double> sample(std::size_t i) {
    return {values.data() + i * channels * length, channels * length};
  }
  std::span<const double> series(std::size_t i, std::size_t c) const {
    return {values.data() + (i * channels + c) * length, length};
  }
  std::span<double> series(std::size_t i, std::size_t c) {
    return {values.data() + (i * channels + c) * length, length};
  }

  /// Throws DataError when a structural invariant is broken.
  void validate() const;

  /// Copy of the given rows restricted to channels [channel_begin, channel_end).
  TimeSeriesDataset slice(std::span<const std::size_t> rows, std::size_t channel_begin,
                          std::size_t channel_end) const;
};

/// Per-sample, per-channel z-normalization in place; constant series become zeros.
void z_normalize(TimeSeriesDataset& data);

}  // namespace lightwaves
