#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace lightwaves {

inline constexpr std::size_t kKernelCount = 84;
inline constexpr std::size_t kKernelLength = 9;
inline constexpr std::size_t kDilationCount = 6;

using Kernel = std::array<double, kKernelLength>;

/// The 84 length-9 kernels with three taps of 2 and six of -1, and the
/// dilations 1, 2, 4, ..., 32. Kernel k places the 2s at the k-th
/// 3-combination of {0..8} in lexicographic order.
struct KernelBank {
  std::array<Kernel, kKernelCount> weights{};
  std::array<std::size_t, kDilationCount> dilations{};

  const Kernel& kernel(std::size_t k) const { return weights.at(k); }
  std::size_t dilation(std::size_t exponent) const { return dilations.at(exponent); }
};

KernelBank generate_kernel_bank();

/// Shared immutable instance.
const KernelBank& default_kernel_bank();

/// Centered, zero-padded dilated cross-correlation with zero bias:
///   out[i] = sum_j w[j] * x[i + d * (j - (l - 1) / 2)]
/// Output has the same length as x. Taps are accumulated in index order.
void dilated_xcorr(std::span<const double> x, std::span<const double> w, std::size_t dilation,
                   std::span<double> out);
std::vector<double> dilated_xcorr(std::span<const double> x, std::span<const double> w,
                                  std::size_t dilation);

/// Keeps even indices: out[i] = x[2i], length ceil(L/2).
void downsample2(std::span<const double> x, std::span<double> out);
std::vector<double> downsample2(std::span<const double> x);

}  // namespace lightwaves
