#include "lightwaves/scattering.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "lightwaves/error.hpp"
#include "lightwaves/parallel.hpp"

namespace lightwaves {

std::string_view to_string(Stat s) {
  switch (s) {
    case Stat::kMax: return "MAX";
    case Stat::kMin: return "MIN";
    case Stat::kPpv: return "PPV";
    case Stat::kLs: return "LS";
  }
  return "?";
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kL1: return "L1";
    case Variant::kL2: return "L2";
    case Variant::kL1L2: return "L1L2";
  }
  return "?";
}

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

struct SeriesSummary {
  double max_abs;
  double min_abs;
  double ppv;
  double ls;
};

SeriesSummary summarize(std::span<const double> y) {
  double max_abs = 0.0;
  double min_abs = std::numeric_limits<double>::infinity();
  std::size_t positive = 0;
  std::size_t run = 0;
  std::size_t longest = 0;
  for (double v : y) {
    const double a = std::abs(v);
    max_abs = std::max(max_abs, a);
    min_abs = std::min(min_abs, a);
    if (v > 0.0) {
      ++positive;
      longest = std::max(longest, ++run);
    } else {
      run = 0;
    }
  }
  const auto len = static_cast<double>(y.size());
  return {max_abs, min_abs, static_cast<double>(positive) / len, static_cast<double>(longest) / len};
}

// Reusable buffers for one path evaluation.
struct PathWorkspace {
  std::vector<double> y1;
  std::vector<double> v;
  std::vector<double> y2;
  std::size_t level1_calls = 0;
  std::size_t level2_calls = 0;

  void resize(std::size_t length) {
    y1.resize(length);
    v.resize((length + 1) / 2);
    y2.resize(v.size());
  }
};

PathFeatures scatter_path_into(std::span<const double> x, std::span<const double> w,
                               std::size_t dilation, bool with_level2, PathWorkspace& ws) {
  ws.resize(x.size());
  dilated_xcorr(x, w, dilation, ws.y1);
  ++ws.level1_calls;
  PathFeatures f;
  const auto s1 = summarize(ws.y1);
  f.max1 = s1.max_abs;
  f.min1 = s1.min_abs;
  f.ppv1 = s1.ppv;
  f.ls1 = s1.ls;
  if (!with_level2) return f;
  for (std::size_t i = 0; i < ws.v.size(); ++i) ws.v[i] = std::abs(ws.y1[2 * i]);
  dilated_xcorr(ws.v, w, dilation, ws.y2);
  ++ws.level2_calls;
  const auto s2 = summarize(ws.y2);
  f.max2 = s2.max_abs;
  f.min2 = s2.min_abs;
  f.ppv2 = s2.ppv;
  f.ls2 = s2.ls;
  return f;
}

}  // namespace

std::optional<Stat> parse_stat(std::string_view s) {
  const auto u = upper(s);
  if (u == "MAX") return Stat::kMax;
  if (u == "MIN") return Stat::kMin;
  if (u == "PPV") return Stat::kPpv;
  if (u == "LS") return Stat::kLs;
  return std::nullopt;
}

std::optional<Variant> parse_variant(std::string_view s) {
  const auto u = upper(s);
  if (u == "L1") return Variant::kL1;
  if (u == "L2") return Variant::kL2;
  if (u == "L1L2") return Variant::kL1L2;
  return std::nullopt;
}

std::string to_string(const FeatureDescriptor& d) {
  return "c" + std::to_string(d.channel) + "/k" + std::to_string(d.kernel) + "/d" +
         std::to_string(1u << d.dilation_exp) + "/L" + std::to_string(d.level) + "/" +
         std::string(to_string(d.stat));
}

double PathFeatures::get(std::uint8_t level, Stat stat) const {
  const bool first = level == 1;
  switch (stat) {
    case Stat::kMax: return first ? max1 : max2;
    case Stat::kMin: return first ? min1 : min2;
    case Stat::kPpv: return first ? ppv1 : ppv2;
    case Stat::kLs: return first ? ls1 : ls2;
  }
  return 0.0;
}

double ppv(std::span<const double> y) {
  if (y.empty()) throw DataError("ppv: empty series");
  return summarize(y).ppv;
}

double lspv(std::span<const double> y) {
  if (y.empty()) throw DataError("lspv: empty series");
  return summarize(y).ls;
}

PathFeatures scatter_path(std::span<const double> x, std::span<const double> w,
                          std::size_t dilation, bool with_level2) {
  PathWorkspace ws;
  return scatter_path_into(x, w, dilation, with_level2, ws);
}

std::size_t full_feature_count(std::size_t channels, Variant variant) {
  return channels * kKernelCount * kDilationCount * level_count(variant) * kStatsPerLevel;
}

FullTransform transform_full(const TimeSeriesDataset& data, const KernelBank& bank, Variant variant,
                             std::size_t threads) {
  if (data.n == 0) throw DataError("empty dataset");
  if (data.length == 0) throw DataError("empty series");

  const bool want_l1 = variant != Variant::kL2;
  const bool want_l2 = variant != Variant::kL1;
  const std::size_t per_path = level_count(variant) * kStatsPerLevel;
  const std::size_t paths = data.channels * kKernelCount * kDilationCount;

  FullTransform out;
  out.features = FeatureMatrix(data.n, paths * per_path);
  out.descriptors.reserve(paths * per_path);
  for (std::uint32_t c = 0; c < data.channels; ++c) {
    for (std::size_t k = 0; k < kKernelCount; ++k) {
      for (std::size_t e = 0; e < kDilationCount; ++e) {
        for (std::uint8_t level = 1; level <= 2; ++level) {
          if ((level == 1 && !want_l1) || (level == 2 && !want_l2)) continue;
          for (auto stat : {Stat::kMax, Stat::kMin, Stat::kPpv, Stat::kLs}) {
            out.descriptors.push_back({c, static_cast<std::uint8_t>(k),
                                       static_cast<std::uint8_t>(e), level, stat});
          }
        }
      }
    }
  }

  // One task per (channel, kernel): all dilations for all samples.
  const std::size_t tasks = data.channels * kKernelCount;
  parallel_for(tasks, threads, [&](std::size_t task) {
    const std::size_t c = task / kKernelCount;
    const std::size_t k = task % kKernelCount;
    PathWorkspace ws;
    for (std::size_t e = 0; e < kDilationCount; ++e) {
      const std::size_t base = (task * kDilationCount + e) * per_path;
      for (std::size_t i = 0; i < data.n; ++i) {
        const auto f = scatter_path_into(data.series(i, c), bank.kernel(k), bank.dilation(e),
                                         want_l2, ws);
        std::size_t col = base;
        if (want_l1) {
          out.features(i, col++) = f.max1;
          out.features(i, col++) = f.min1;
          out.features(i, col++) = f.ppv1;
          out.features(i, col++) = f.ls1;
        }
        if (want_l2) {
          out.features(i, col++) = f.max2;
          out.features(i, col++) = f.min2;
          out.features(i, col++) = f.ppv2;
          out.features(i, col++) = f.ls2;
        }
      }
    }
  });
  return out;
}

SelectivePlan::SelectivePlan(std::span<const FeatureDescriptor> descriptors)
    : feature_count_(descriptors.size()) {
  std::map<std::tuple<std::uint32_t, std::uint8_t, std::uint8_t>, std::size_t> index;
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    const auto& d = descriptors[i];
    if (d.kernel >= kKernelCount) throw DataError("descriptor kernel out of range");
    if (d.dilation_exp >= kDilationCount) throw DataError("descriptor dilation out of range");
    if (d.level != 1 && d.level != 2) throw DataError("descriptor level must be 1 or 2");
    const auto key = std::make_tuple(d.channel, d.kernel, d.dilation_exp);
    auto [it, inserted] = index.try_emplace(key, groups_.size());
    if (inserted) groups_.push_back({d.channel, d.kernel, d.dilation_exp, false, {}});
    auto& g = groups_[it->second];
    g.needs_level2 = g.needs_level2 || d.level == 2;
    g.slots.push_back({d.level, d.stat, i});
    max_channel_ = std::max<std::size_t>(max_channel_, d.channel);
  }
}

void SelectivePlan::run(std::span<const double> sample, std::size_t channels,
                        const KernelBank& bank, std::span<double> out, std::size_t threads,
                        TransformStats* stats) const {
  if (groups_.empty()) throw DataError("transform_selected: no descriptors");
  if (channels == 0 || sample.size() % channels != 0) {
    throw DataError("transform_selected: sample size is not a multiple of the channel count");
  }
  if (max_channel_ >= channels) {
    throw DataError("descriptor channel " + std::to_string(max_channel_) +
                    " out of range for " + std::to_string(channels) + " channels");
  }
  if (out.size() != feature_count_) throw DataError("transform_selected: output size mismatch");
  const std::size_t length = sample.size() / channels;

  std::atomic<std::size_t> level1{0};
  std::atomic<std::size_t> level2{0};
  auto eval = [&](std::size_t gi, PathWorkspace& ws) {
    const auto& g = groups_[gi];
    const auto x = sample.subspan(g.channel * length, length);
    const std::size_t l1_before = ws.level1_calls;
    const std::size_t l2_before = ws.level2_calls;
    const auto f = scatter_path_into(x, bank.kernel(g.kernel), bank.dilation(g.dilation_exp),
                                     g.needs_level2, ws);
    level1.fetch_add(ws.level1_calls - l1_before, std::memory_order_relaxed);
    level2.fetch_add(ws.level2_calls - l2_before, std::memory_order_relaxed);
    for (const auto& s : g.slots) out[s.output_index] = f.get(s.level, s.stat);
  };

  if (threads <= 1) {
    PathWorkspace ws;
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) eval(gi, ws);
  } else {
    parallel_for(groups_.size(), threads, [&](std::size_t gi) {
      thread_local PathWorkspace ws;
      eval(gi, ws);
    });
  }

  if (stats != nullptr) {
    stats->level1_convolutions += level1.load();
    stats->level2_convolutions += level2.load();
  }
}

std::vector<double> transform_selected(std::span<const double> sample, std::size_t channels,
                                       const KernelBank& bank,
                                       std::span<const FeatureDescriptor> descriptors,
                                       std::size_t threads, TransformStats* stats) {
  if (descriptors.empty()) throw DataError("transform_selected: no descriptors");
  SelectivePlan plan(descriptors);
  std::vector<double> out(descriptors.size());
  plan.run(sample, channels, bank, out, threads, stats);
  return out;
}

}  // namespace lightwaves
