#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lightwaves/scattering.hpp"

namespace lightwaves {

inline constexpr int kModelFormatVersion = 1;

/// Everything needed for inference: which features to compute, how to
/// standardize them, and the ridge weights.
struct ModelArtifact {
  int format_version = kModelFormatVersion;
  Variant variant = Variant::kL1L2;
  std::vector<FeatureDescriptor> descriptors;
  std::vector<double> feature_means;
  std::vector<double> feature_stds;
  Eigen::MatrixXd weights;  // F x K
  double alpha = 0.0;
  std::vector<std::string> class_names;
  std::vector<std::uint32_t> channels_used;
  std::size_t input_channels = 0;
  std::size_t series_length = 0;
  bool normalize = false;
  std::map<std::string, std::string> metadata;

  /// Throws DataError("shape mismatch: ...") or similar on violation.
  void validate() const;
};

/// Sorted distinct channels referenced by `descriptors`.
std::vector<std::uint32_t> channels_of(const std::vector<FeatureDescriptor>& descriptors);

}  // namespace lightwaves
