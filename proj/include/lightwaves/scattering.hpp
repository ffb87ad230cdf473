#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lightwaves/dataset.hpp"
#include "lightwaves/kernels.hpp"

namespace lightwaves {

enum class Stat : std::uint8_t { kMax = 0, kMin = 1, kPpv = 2, kLs = 3 };

enum class Variant : std::uint8_t { kL1 = 0, kL2 = 1, kL1L2 = 2 };

std::string_view to_string(Stat s);
std::string_view to_string(Variant v);
std::optional<Stat> parse_stat(std::string_view s);
/// Accepts "L1", "L2", "L1L2" in any case.
std::optional<Variant> parse_variant(std::string_view s);

inline constexpr std::size_t kStatsPerLevel = 4;

/// Levels contributing features under a variant (1 or 2).
inline std::size_t level_count(Variant v) { return v == Variant::kL1L2 ? 2 : 1; }

/// Names one scalar feature. Ordering is lexicographic over
/// (channel, kernel, dilation_exp, level, stat) and drives every tie-break.
struct FeatureDescriptor {
  std::uint32_t channel = 0;
  std::uint8_t kernel = 0;
  std::uint8_t dilation_exp = 0;
  std::uint8_t level = 1;
  Stat stat = Stat::kMax;

  auto operator<=>(const FeatureDescriptor&) const = default;
  bool operator==(const FeatureDescriptor&) const = default;
};

std::string to_string(const FeatureDescriptor& d);

/// The eight statistics of one scattering path. max/min are taken over the
/// moduli U, ppv/ls over the signed convolution outputs.
struct PathFeatures {
  double max1 = 0, min1 = 0, ppv1 = 0, ls1 = 0;
  double max2 = 0, min2 = 0, ppv2 = 0, ls2 = 0;

  double get(std::uint8_t level, Stat stat) const;
};

/// Fraction of entries strictly greater than zero.
double ppv(std::span<const double> y);
/// Longest run of consecutive strictly positive entries over length(y).
double lspv(std::span<const double> y);

/// Convolution counts observed by transform_selected.
struct TransformStats {
  std::size_t level1_convolutions = 0;
  std::size_t level2_convolutions = 0;
};

/// x -> |x * w| -> downsample -> |. * w| with the same kernel and dilation.
/// When `with_level2` is false the second convolution is skipped and its
/// fields stay zero.
PathFeatures scatter_path(std::span<const double> x, std::span<const double> w,
                          std::size_t dilation, bool with_level2 = true);

/// Column-major n x F feature matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> column(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }
  std::span<double> column(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct FullTransform {
  FeatureMatrix features;
  std::vector<FeatureDescriptor> descriptors;  // one per column, ascending
};

/// Number of columns transform_full produces for `channels` channels.
std::size_t full_feature_count(std::size_t channels, Variant variant);

/// Every (channel, kernel, dilation) path for every sample. Descriptor
/// channels are local to `data` (0-based).
FullTransform transform_full(const TimeSeriesDataset& data, const KernelBank& bank, Variant variant,
                             std::size_t threads = 1);

/// Features for one sample (C x L, channel-major) restricted to
/// `descriptors`, returned in the given order. Each distinct
/// (channel, kernel, dilation) path is evaluated once; level 2 runs only
/// for paths that need it. Results do not depend on `threads`.
std::vector<double> transform_selected(std::span<const double> sample, std::size_t channels,
                                       const KernelBank& bank,
                                       std::span<const FeatureDescriptor> descriptors,
                                       std::size_t threads = 1, TransformStats* stats = nullptr);

/// Precomputed grouping of a descriptor list, reusable across samples.
class SelectivePlan {
 public:
  SelectivePlan(std::span<const FeatureDescriptor> descriptors);

  std::size_t feature_count() const noexcept { return feature_count_; }
  std::size_t group_count() const noexcept { return groups_.size(); }
  std::size_t max_channel() const noexcept { return max_channel_; }

  void run(std::span<const double> sample, std::size_t channels, const KernelBank& bank,
           std::span<double> out, std::size_t threads = 1, TransformStats* stats = nullptr) const;

 private:
  struct Slot {
    std::uint8_t level;
    Stat stat;
    std::size_t output_index;
  };
  struct Group {
    std::uint32_t channel;
    std::uint8_t kernel;
    std::uint8_t dilation_exp;
    bool needs_level2;
    std::vector<Slot> slots;
  };
  std::vector<Group> groups_;
  std::size_t feature_count_ = 0;
  std::size_t max_channel_ = 0;
};

}  // namespace lightwaves
