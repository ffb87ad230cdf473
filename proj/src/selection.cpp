#include "lightwaves/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lightwaves/error.hpp"
#include "lightwaves/parallel.hpp"

namespace lightwaves {

namespace {

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Centered copy and its root sum of squares; pearson() and mrmr_select()
// share this so their correlations agree bit for bit.
struct Centered {
  std::vector<double> values;
  double norm = 0.0;
};

Centered center(std::span<const double> x) {
  Centered c;
  const double m = mean_of(x);
  c.values.resize(x.size());
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    c.values[i] = x[i] - m;
    ss += c.values[i] * c.values[i];
  }
  c.norm = std::sqrt(ss);
  return c;
}

double correlate(const Centered& a, const Centered& b) {
  if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) sxy += a.values[i] * b.values[i];
  return std::clamp(sxy / (a.norm * b.norm), -1.0, 1.0);
}

}  // namespace

double anova_f(std::span<const double> values, std::span<const std::uint32_t> labels,
               std::size_t classes) {
  const std::size_t m = values.size();
  if (labels.size() != m) throw DataError("anova_f: values/labels length mismatch");
  if (classes < 2) throw DataError("anova_f: need at least two classes");
  if (m < 2) throw DataError("anova_f: need at least two samples");

  std::vector<double> sums(classes, 0.0);
  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i] >= classes) throw DataError("anova_f: label out of range");
    sums[labels[i]] += values[i];
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] == 0) throw DataError("anova_f: class " + std::to_string(c) + " absent");
  }
  const double grand = mean_of(values);
  std::vector<double> means(classes);
  double ssb = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    means[c] = sums[c] / static_cast<double>(counts[c]);
    const double diff = means[c] - grand;
    ssb += static_cast<double>(counts[c]) * diff * diff;
  }
  double ssw = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double diff = values[i] - means[labels[i]];
    ssw += diff * diff;
  }
  if (ssb == 0.0) return 0.0;
  if (ssw == 0.0) return kMaxFScore;
  if (m <= classes) throw DataError("anova_f: no within-group degrees of freedom");
  const double f = (ssb / static_cast<double>(classes - 1)) / (ssw / static_cast<double>(m - classes));
  return std::min(f, kMaxFScore);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson: length mismatch");
  if (x.size() < 2) throw DataError("pearson: need at least two samples");
  return correlate(center(x), center(y));
}

bool is_constant(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [&](double v) { return v == values.front(); });
}

bool score_order(const ScoredFeature& a, const ScoredFeature& b) {
  if (a.f_score != b.f_score) return a.f_score > b.f_score;
  return a.descriptor < b.descriptor;
}

std::vector<ScoredFeature> local_topk(const FeatureMatrix& features,
                                      std::span<const FeatureDescriptor> descriptors,
                                      std::span<const std::uint32_t> labels, std::size_t classes,
                                      std::size_t k, std::size_t threads) {
  if (k < 1) throw DataError("local_topk: k must be >= 1");
  if (descriptors.size() != features.cols()) {
    throw DataError("local_topk: descriptor count does not match columns");
  }
  if (labels.size() != features.rows()) throw DataError("local_topk: label count mismatch");

  std::vector<double> scores(features.cols(), -1.0);
  parallel_for(features.cols(), threads, [&](std::size_t j) {
    const auto col = features.column(j);
    if (!is_constant(col)) scores[j] = anova_f(col, labels, classes);
  });

  struct Candidate {
    double score;
    std::size_t column;
  };
  std::vector<Candidate> kept;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] >= 0.0) kept.push_back({scores[j], j});
  }
  auto better = [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return descriptors[a.column] < descriptors[b.column];
  };
  const std::size_t take = std::min(k, kept.size());
  std::partial_sort(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(take), kept.end(), better);

  std::vector<ScoredFeature> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const auto col = features.column(kept[i].column);
    out.push_back({descriptors[kept[i].column], kept[i].score, {col.begin(), col.end()}});
  }
  return out;
}

std::vector<FeatureDescriptor> mrmr_select(std::span<const ScoredFeature> pool, std::size_t k,
                                           std::size_t threads) {
  if (pool.empty()) throw DataError("mrmr_select: empty pool");
  if (k < 1) throw DataError("mrmr_select: k must be >= 1");

  // Drop repeated descriptors, keeping the first occurrence.
  std::vector<std::size_t> members;
  {
    std::set<FeatureDescriptor> seen;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (seen.insert(pool[i].descriptor).second) members.push_back(i);
    }
  }
  const std::size_t m = pool[members.front()].values.size();
  for (auto i : members) {
    if (pool[i].values.size() != m) throw DataError("mrmr_select: value columns differ in length");
  }

  std::vector<Centered> centered(members.size());
  parallel_for(members.size(), threads,
               [&](std::size_t i) { centered[i] = center(pool[members[i]].values); });

  auto ranks_before = [&](std::size_t a, double score_a, std::size_t b, double score_b) {
    if (score_a != score_b) return score_a > score_b;
    return pool[members[a]].descriptor < pool[members[b]].descriptor;
  };

  std::vector<std::size_t> remaining(members.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
  std::vector<double> redundancy(members.size(), 0.0);
  std::vector<double> round_score(members.size(), 0.0);

  std::vector<FeatureDescriptor> selected;
  const std::size_t target = std::min(k, members.size());
  selected.reserve(target);

  std::size_t last = remaining.front();
  for (auto i : remaining) {
    if (ranks_before(i, pool[members[i]].f_score, last, pool[members[last]].f_score)) last = i;
  }
  selected.push_back(pool[members[last]].descriptor);
  std::erase(remaining, last);

  while (selected.size() < target) {
    const double picked = static_cast<double>(selected.size());
    parallel_for(remaining.size(), threads, [&](std::size_t r) {
      const std::size_t j = remaining[r];
      redundancy[j] += std::abs(correlate(centered[j], centered[last]));
      round_score[j] = pool[members[j]].f_score / std::max(kRedundancyFloor, redundancy[j] / picked);
    });
    std::size_t best = remaining.front();
    for (auto j : remaining) {
      if (ranks_before(j, round_score[j], best, round_score[best])) best = j;
    }
    selected.push_back(pool[members[best]].descriptor);
    std::erase(remaining, best);
    last = best;
  }
  return selected;
}

}  // namespace lightwaves
