#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lightwaves/scattering.hpp"

namespace lightwaves {

/// Score returned for perfectly separated features (zero within-class scatter).
inline constexpr double kMaxFScore = 1e12;
/// Lower bound on the mean absolute correlation used as mRMR denominator.
inline constexpr double kRedundancyFloor = 1e-6;

struct ScoredFeature {
  FeatureDescriptor descriptor;
  double f_score = 0.0;
  std::vector<double> values;
};

/// One-way ANOVA F statistic (SSB / (K-1)) / (SSW / (m-K)).
/// Returns kMaxFScore when SSW == 0 < SSB and 0 when SSB == 0.
double anova_f(std::span<const double> values, std::span<const std::uint32_t> labels,
               std::size_t classes);

/// Sample Pearson correlation, clamped to [-1, 1]; 0 if either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// True when every entry equals the first.
bool is_constant(std::span<const double> values);

/// Ranking used for pools: higher f_score first, then ascending descriptor.
bool score_order(const ScoredFeature& a, const ScoredFeature& b);

/// Per-worker filter: ANOVA-scores each non-constant column and keeps the
/// best min(k, remaining), sorted by score_order.
std::vector<ScoredFeature> local_topk(const FeatureMatrix& features,
                                      std::span<const FeatureDescriptor> descriptors,
                                      std::span<const std::uint32_t> labels, std::size_t classes,
                                      std::size_t k, std::size_t threads = 1);

/// Greedy minimum-redundancy maximum-relevance selection. The first pick
/// is the best F score; each later pick maximizes
///   f_j / max(kRedundancyFloor, mean_{s in selected} |pearson(j, s)|)
/// with ties going to the smaller descriptor. Returns descriptors in pick order.
std::vector<FeatureDescriptor> mrmr_select(std::span<const ScoredFeature> pool, std::size_t k,
                                           std::size_t threads = 1);

}  // namespace lightwaves
