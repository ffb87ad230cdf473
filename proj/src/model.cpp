#include "lightwaves/model.hpp"

#include <cmath>
#include <set>

#include "lightwaves/error.hpp"

namespace lightwaves {

std::vector<std::uint32_t> channels_of(const std::vector<FeatureDescriptor>& descriptors) {
  std::set<std::uint32_t> s;
  for (const auto& d : descriptors) s.insert(d.channel);
  return {s.begin(), s.end()};
}

void ModelArtifact::validate() const {
  const auto f = descriptors.size();
  if (static_cast<std::size_t>(weights.rows()) != f || feature_means.size() != f ||
      feature_stds.size() != f) {
    throw DataError("shape mismatch: " + std::to_string(f) + " descriptors, " +
                    std::to_string(weights.rows()) + " weight rows, " +
                    std::to_string(feature_means.size()) + " means, " +
                    std::to_string(feature_stds.size()) + " stds");
  }
  if (static_cast<std::size_t>(weights.cols()) != class_names.size()) {
    throw DataError("shape mismatch: weight columns do not match class count");
  }
  if (class_names.size() < 2) throw DataError("model needs at least two classes");
  if (f == 0) throw DataError("model has no features");
  for (double s : feature_stds) {
    if (!(s >= 0.0)) throw DataError("negative feature std");
  }
  if (!(alpha >= 0.0)) throw DataError("negative alpha");
  if (channels_used != channels_of(descriptors)) {
    throw DataError("channels_used does not match descriptor channels");
  }
  if (!channels_used.empty() && channels_used.back() >= input_channels) {
    throw DataError("descriptor channel exceeds input channel count");
  }
  for (const auto& d : descriptors) {
    if (d.kernel >= kKernelCount || d.dilation_exp >= kDilationCount || (d.level != 1 && d.level != 2)) {
      throw DataError("invalid descriptor " + to_string(d));
    }
    if ((variant == Variant::kL1 && d.level != 1) || (variant == Variant::kL2 && d.level != 2)) {
      throw DataError("descriptor level inconsistent with variant");
    }
  }
  std::set<FeatureDescriptor> unique(descriptors.begin(), descriptors.end());
  if (unique.size() != f) throw DataError("duplicate descriptors");
}

}  // namespace lightwaves
