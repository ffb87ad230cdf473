#include "lightwaves/kernels.hpp"

#include <cstdint>

#include "lightwaves/error.hpp"

namespace lightwaves {

KernelBank generate_kernel_bank() {
  KernelBank bank;
  std::size_t k = 0;
  for (std::size_t a = 0; a < kKernelLength; ++a) {
    for (std::size_t b = a + 1; b < kKernelLength; ++b) {
      for (std::size_t c = b + 1; c < kKernelLength; ++c) {
        Kernel& w = bank.weights[k++];
        w.fill(-1.0);
        w[a] = w[b] = w[c] = 2.0;
      }
    }
  }
  for (std::size_t e = 0; e < kDilationCount; ++e) bank.dilations[e] = std::size_t{1} << e;
  return bank;
}

const KernelBank& default_kernel_bank() {
  static const KernelBank bank = generate_kernel_bank();
  return bank;
}

void dilated_xcorr(std::span<const double> x, std::span<const double> w, std::size_t dilation,
                   std::span<double> out) {
  if (x.empty()) throw DataError("dilated_xcorr: empty input series");
  if (w.empty() || w.size() % 2 == 0) throw DataError("dilated_xcorr: kernel length must be odd");
  if (dilation < 1) throw DataError("dilated_xcorr: dilation must be >= 1");
  if (out.size() != x.size()) throw DataError("dilated_xcorr: output length mismatch");

  const auto len = static_cast<std::int64_t>(x.size());
  const auto half = static_cast<std::int64_t>(w.size() / 2);
  const auto d = static_cast<std::int64_t>(dilation);
  for (auto& v : out) v = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const std::int64_t offset = d * (static_cast<std::int64_t>(j) - half);
    const std::int64_t begin = offset < 0 ? -offset : 0;
    const std::int64_t end = offset > 0 ? len - offset : len;
    const double wj = w[j];
    const double* src = x.data();
    double* dst = out.data();
    for (std::int64_t i = begin; i < end; ++i) dst[i] += wj * src[i + offset];
  }
}

std::vector<double> dilated_xcorr(std::span<const double> x, std::span<const double> w,
                                  std::size_t dilation) {
  std::vector<double> out(x.size());
  dilated_xcorr(x, w, dilation, out);
  return out;
}

void downsample2(std::span<const double> x, std::span<double> out) {
  if (x.empty()) throw DataError("downsample2: empty input series");
  if (out.size() != (x.size() + 1) / 2) throw DataError("downsample2: output length mismatch");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[2 * i];
}

std::vector<double> downsample2(std::span<const double> x) {
  std::vector<double> out((x.size() + 1) / 2);
  downsample2(x, out);
  return out;
}

}  // namespace lightwaves
