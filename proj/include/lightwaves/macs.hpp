#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "lightwaves/scattering.hpp"

namespace lightwaves {

/// Convolution-based reference model the MAC count is compared against.
/// No default for channels_per_kernel: it depends on the baseline's
/// channel-combination scheme and must be supplied.
struct BaselineParams {
  std::uint64_t kernel_count = 10000;
  double kernel_length = 9.0;
  double channels_per_kernel = 0.0;
};

struct MacReport {
  std::uint64_t lightwaves_macs = 0;
  std::uint64_t baseline_macs = 0;
  double ratio = 0.0;
  std::map<std::string, std::string> assumptions;
};

/// Per inference sample: every distinct (channel, kernel, dilation) path
/// costs 9 L for level 1 plus 9 ceil(L/2) when any of its features is level 2.
/// Baseline: kernel_count * L * kernel_length * channels_per_kernel, rounded.
MacReport estimate_macs(std::span<const FeatureDescriptor> descriptors, std::size_t length,
                        const BaselineParams& baseline);

}  // namespace lightwaves
