#include "lightwaves/dataset.hpp"

#include <cmath>
#include <set>

#include "lightwaves/error.hpp"

namespace lightwaves {

void TimeSeriesDataset::validate() const {
  if (n < 1) throw DataError("empty dataset");
  if (channels < 1) throw DataError("dataset has no channels");
  if (length < 2) throw DataError("series length must be at least 2");
  if (values.size() != n * channels * length) {
    throw DataError("value buffer does not match n x C x L");
  }
  if (!labeled()) {
    if (!labels.empty()) throw DataError("labels present without class names");
    return;
  }
  if (labels.size() != n) throw DataError("label count does not match sample count");
  std::set<std::string> seen;
  for (const auto& c : class_names) {
    if (!seen.insert(c).second) throw DataError("duplicate class name '" + c + "'");
  }
  for (auto l : labels) {
    if (l >= class_names.size()) throw DataError("label index out of range");
  }
}

TimeSeriesDataset TimeSeriesDataset::slice(std::span<const std::size_t> rows,
                                           std::size_t channel_begin,
                                           std::size_t channel_end) const {
  if (channel_begin > channel_end || channel_end > channels) {
    throw DataError("channel range out of bounds");
  }
  TimeSeriesDataset out;
  out.name = name;
  out.n = rows.size();
  out.channels = channel_end - channel_begin;
  out.length = length;
  out.class_names = class_names;
  out.values.reserve(out.n * out.channels * length);
  for (auto r : rows) {
    if (r >= n) throw DataError("row index out of range");
    for (std::size_t c = channel_begin; c < channel_end; ++c) {
      auto s = series(r, c);
      out.values.insert(out.values.end(), s.begin(), s.end());
    }
    if (labeled()) out.labels.push_back(labels[r]);
  }
  return out;
}

void z_normalize(TimeSeriesDataset& data) {
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t c = 0; c < data.channels; ++c) {
      auto s = data.series(i, c);
      double mean = 0.0;
      for (double v : s) mean += v;
      mean /= static_cast<double>(s.size());
      double var = 0.0;
      for (double v : s) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(s.size()));
      for (double& v : s) v = sd > 0.0 ? (v - mean) / sd : 0.0;
    }
  }
}

}  // namespace lightwaves
