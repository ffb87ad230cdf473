#pragma once

#include <cstddef>
#include <cstdint>

#include "lightwaves/dataset.hpp"

namespace lightwaves {

/// Labeled sinusoid benchmark: the first `informative` channels carry a
/// sine whose frequency depends on the class (plus noise); the remaining
/// channels are white noise. Samples cycle through the classes.
struct SyntheticSpec {
  std::size_t n = 200;
  std::size_t channels = 20;
  std::size_t length = 200;
  std::size_t informative = 3;
  std::size_t classes = 2;
  double noise = 0.5;
  std::uint64_t seed = 1;
};

TimeSeriesDataset make_sinusoid_dataset(const SyntheticSpec& spec);

}  // namespace lightwaves
