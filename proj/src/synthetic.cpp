#include "lightwaves/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "lightwaves/distrib.hpp"
#include "lightwaves/error.hpp"

namespace lightwaves {

namespace {

// Box-Muller over splitmix64 keeps generated data identical across platforms.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return (static_cast<double>(rng_.next() >> 11) + 0.5) * 0x1.0p-53; }

  double next() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  SplitMix64 rng_;
};

}  // namespace

TimeSeriesDataset make_sinusoid_dataset(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.channels < 1 || spec.length < 2 || spec.classes < 2) {
    throw UsageError("synthetic dataset needs n >= 1, channels >= 1, length >= 2, classes >= 2");
  }
  if (spec.informative > spec.channels) throw UsageError("more informative channels than channels");

  TimeSeriesDataset data;
  data.name = "sinusoid";
  data.n = spec.n;
  data.channels = spec.channels;
  data.length = spec.length;
  data.values.resize(spec.n * spec.channels * spec.length);
  for (std::size_t c = 0; c < spec.classes; ++c) data.class_names.push_back("class" + std::to_string(c));

  Gaussian g(spec.seed);
  const double len = static_cast<double>(spec.length);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const auto label = static_cast<std::uint32_t>(i % spec.classes);
    data.labels.push_back(label);
    for (std::size_t ch = 0; ch < spec.channels; ++ch) {
      auto s = data.series(i, ch);
      if (ch < spec.informative) {
        const double cycles = 3.0 + 4.0 * static_cast<double>(label) + static_cast<double>(ch);
        const double phase = 2.0 * std::numbers::pi * g.uniform();
        for (std::size_t t = 0; t < spec.length; ++t) {
          s[t] = std::sin(2.0 * std::numbers::pi * cycles * static_cast<double>(t) / len + phase) +
                 spec.noise * g.next();
        }
      } else {
        for (auto& v : s) v = g.next();
      }
    }
  }
  return data;
}

}  // namespace lightwaves
