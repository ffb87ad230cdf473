#include "lightwaves/macs.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "lightwaves/error.hpp"

namespace lightwaves {

namespace {

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

MacReport estimate_macs(std::span<const FeatureDescriptor> descriptors, std::size_t length,
                        const BaselineParams& baseline) {
  if (length < 1) throw UsageError("series length must be >= 1");
  if (descriptors.empty()) throw DataError("no descriptors to cost");
  if (baseline.kernel_count < 1 || !(baseline.kernel_length > 0.0) || !(baseline.channels_per_kernel > 0.0)) {
    throw UsageError("baseline parameters must be positive");
  }

  std::map<std::tuple<std::uint32_t, std::uint8_t, std::uint8_t>, bool> groups;
  for (const auto& d : descriptors) {
    auto& needs_level2 = groups[{d.channel, d.kernel, d.dilation_exp}];
    needs_level2 = needs_level2 || d.level == 2;
  }
  const std::uint64_t level1 = kKernelLength * length;
  const std::uint64_t level2 = kKernelLength * ((length + 1) / 2);

  MacReport r;
  for (const auto& [key, needs_level2] : groups) r.lightwaves_macs += level1 + (needs_level2 ? level2 : 0);
  r.baseline_macs = static_cast<std::uint64_t>(std::llround(static_cast<double>(baseline.kernel_count) *
                                                           static_cast<double>(length) * baseline.kernel_length *
                                                           baseline.channels_per_kernel));
  if (r.baseline_macs == 0) throw UsageError("baseline MAC count rounds to zero");
  r.ratio = static_cast<double>(r.baseline_macs) / static_cast<double>(r.lightwaves_macs);
  r.assumptions = {
      {"baseline_kernel_count", std::to_string(baseline.kernel_count)},
      {"baseline_kernel_length", format_real(baseline.kernel_length)},
      {"baseline_channels_per_kernel", format_real(baseline.channels_per_kernel)},
      {"series_length", std::to_string(length)},
      {"paths", std::to_string(groups.size())},
  };
  return r;
}

}  // namespace lightwaves
