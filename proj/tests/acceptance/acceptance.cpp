// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 0 only
// when every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lightwaves/classifier.hpp"
#include "lightwaves/distrib.hpp"
#include "lightwaves/error.hpp"
#include "lightwaves/inference.hpp"
#include "lightwaves/io.hpp"
#include "lightwaves/kernels.hpp"
#include "lightwaves/macs.hpp"
#include "lightwaves/scattering.hpp"
#include "lightwaves/selection.hpp"
#include "lightwaves/synthetic.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace lightwaves;

namespace {

// Tolerances and budgets.
constexpr double kXcorrRelTol = 1e-9;
constexpr double kAnovaRelTol = 1e-9;
constexpr double kNormalEqTol = 1e-8;
constexpr double kLooTol = 1e-8;
constexpr double kScaleRelTol = 1e-9;
constexpr double kSyntheticMinAccuracy = 0.95;
constexpr std::size_t kSyntheticMaxChannels = 10;
constexpr double kBasicMotionsMinAccuracy = 0.90;
constexpr std::size_t kBasicMotionsMaxChannels = 6;
constexpr double kMinMacRatio = 10.0;
constexpr double kMaxChannelScaling = 5.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "lightwaves_acceptance";
  fs::create_directories(dir);
  return dir;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

Outcome kernel_bank() {
  const auto bank = generate_kernel_bank();
  std::set<std::vector<double>> distinct;
  for (const auto& w : bank.weights) {
    if (w.size() != 9) return {false, "kernel length != 9"};
    if (std::accumulate(w.begin(), w.end(), 0.0) != 0.0) return {false, "kernel does not sum to 0"};
    if (std::count(w.begin(), w.end(), 2.0) != 3 || std::count(w.begin(), w.end(), -1.0) != 6)
      return {false, "kernel is not three 2s and six -1s"};
    distinct.insert({w.begin(), w.end()});
  }
  if (bank.weights.size() != 84 || distinct.size() != 84) return {false, "expected 84 distinct kernels"};
  return {true, "84 distinct zero-sum kernels"};
}

Outcome convolution_oracle() {
  std::mt19937_64 rng(2024);
  const auto bank = default_kernel_bank();
  double worst = 0;
  std::size_t exact_cases = 0;
  for (int t = 0; t < 1000; ++t) {
    const bool integer = t % 2 == 0;
    const std::size_t len = 1 + rng() % 300;
    std::vector<double> x(len);
    std::vector<double> w(9);
    if (integer) {
      for (auto& v : x) v = static_cast<double>(static_cast<int>(rng() % 201) - 100);
      const auto& k = bank.kernel(rng() % 84);
      w.assign(k.begin(), k.end());
    } else {
      x = oracle::random_series(rng, len, 10.0);
      w = oracle::random_series(rng, 9);
    }
    const std::size_t d = std::size_t{1} << (rng() % 6);
    const auto got = dilated_xcorr(x, w, d);
    const auto want = oracle::naive_xcorr(x, w, d);
    for (std::size_t i = 0; i < len; ++i) {
      if (integer) {
        if (got[i] != want[i]) return {false, "integer case differs at index " + std::to_string(i)};
      } else {
        worst = std::max(worst, rel_err(got[i], want[i]));
      }
    }
    exact_cases += integer;
  }
  if (worst > kXcorrRelTol) return {false, "max rel err " + fmt("%.3g", worst)};
  return {true, std::to_string(exact_cases) + " integer cases exact, real max rel err " + fmt("%.3g", worst)};
}

Outcome feature_counts() {
  TimeSeriesDataset d;
  d.name = "one";
  d.n = 2;
  d.channels = 1;
  d.length = 50;
  std::mt19937_64 rng(1);
  d.values = oracle::random_series(rng, 100);
  const auto both = transform_full(d, default_kernel_bank(), Variant::kL1L2).features.cols();
  const auto l1 = transform_full(d, default_kernel_bank(), Variant::kL1).features.cols();
  const bool ok = both == 4032 && l1 == 2016;
  return {ok, "L1L2 " + std::to_string(both) + ", L1 " + std::to_string(l1)};
}

Outcome selection_oracles() {
  std::mt19937_64 rng(77);
  int mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t size = 1 + rng() % 12;
    const std::size_t k = 1 + rng() % 4;
    const std::size_t m = 3 + rng() % 20;
    std::vector<ScoredFeature> pool;
    const auto base = oracle::random_series(rng, m);
    for (std::size_t j = 0; j < size; ++j) {
      ScoredFeature s;
      s.descriptor = {static_cast<std::uint32_t>(j), static_cast<std::uint8_t>(rng() % 84), 0, 1, Stat::kMax};
      const auto noise = oracle::random_series(rng, m);
      const double mix = std::uniform_real_distribution<double>(0, 1)(rng);
      for (std::size_t i = 0; i < m; ++i) s.values.push_back(mix * base[i] + (1 - mix) * noise[i]);
      s.f_score = rng() % 3 == 0 ? 5.0 : std::uniform_real_distribution<double>(0.1, 20)(rng);
      pool.push_back(std::move(s));
    }
    if (mrmr_select(pool, k) != oracle::brute_force_mrmr(pool, k)) ++mismatches;
  }
  if (mismatches) return {false, std::to_string(mismatches) + " of 200 mRMR pools differ"};

  const std::vector<std::uint32_t> l4{0, 0, 1, 1};
  const std::vector<double> v4{0, 1, 2, 3};
  const double f8 = anova_f(v4, l4, 2);
  if (rel_err(f8, 8.0) > kAnovaRelTol) return {false, "F([0,1,2,3]) = " + fmt("%.17g", f8)};
  double worst = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t k = 2 + rng() % 4;
    const std::size_t m = k + 1 + rng() % 50;
    std::vector<std::uint32_t> labels(m);
    for (std::size_t i = 0; i < m; ++i) labels[i] = static_cast<std::uint32_t>(i < k ? i : rng() % k);
    const auto v = oracle::random_series(rng, m, 3.0);
    const double want = oracle::textbook_anova(v, labels, k);
    worst = std::max(worst, std::abs(anova_f(v, labels, k) - want) / std::abs(want));
  }
  if (worst > kAnovaRelTol) return {false, "anova max rel err " + fmt("%.3g", worst)};
  return {true, "200 pools match, F=8 case exact, anova max rel err " + fmt("%.3g", worst)};
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXd m(r, c);
  std::normal_distribution<double> n(0, 1);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

Outcome ridge() {
  std::mt19937_64 rng(5);
  double worst_ne = 0, worst_loo = 0;
  for (int t = 0; t < 200; ++t) {
    const auto x = random_matrix(rng, 10, 4);
    std::vector<std::uint32_t> labels(10);
    for (std::size_t i = 0; i < 10; ++i) labels[i] = static_cast<std::uint32_t>(i % 2);
    const auto y = one_vs_rest_targets(labels, 2);
    const RidgeSolver solver(x);
    for (double alpha : default_alpha_grid()) {
      const auto w = solver.weights(y, alpha);
      Eigen::MatrixXd a = x.transpose() * x;
      a.diagonal().array() += alpha;
      const Eigen::MatrixXd rhs = x.transpose() * y;
      worst_ne = std::max(worst_ne, (a * w - rhs).norm() / rhs.norm());
      worst_loo = std::max(worst_loo,
                           (solver.loo_residuals(y, alpha) - oracle::explicit_loo(x, y, alpha)).cwiseAbs().maxCoeff());
    }
  }
  const bool ok = worst_ne <= kNormalEqTol && worst_loo <= kLooTol;
  return {ok, "normal-eq residual " + fmt("%.3g", worst_ne) + ", LOO max diff " + fmt("%.3g", worst_loo)};
}

Outcome cli_determinism() {
  const auto dir = scratch_dir();
  SyntheticSpec spec;
  spec.n = 60;
  spec.channels = 4;
  spec.length = 64;
  spec.seed = 11;
  const auto data = dir / "determinism.lwds";
  write_binary_dataset_file(make_sinusoid_dataset(spec), data);
  const std::string cli = LIGHTWAVES_CLI_PATH;
  std::vector<fs::path> outs{dir / "det_a.json", dir / "det_b.json"};
  for (const auto& out : outs) {
    fs::remove(out);
    const std::string cmd = "\"" + cli + "\" train --data \"" + data.string() + "\" --seed 7 --out \"" + out.string() +
                            "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "train command failed"};
  }
  const auto a = read_file(outs[0]);
  const auto b = read_file(outs[1]);
  if (a.empty()) return {false, "empty model file"};
  return {a == b, std::to_string(a.size()) + "-byte models " + (a == b ? "identical" : "differ")};
}

Outcome distribution_equivalence() {
  SyntheticSpec spec;
  spec.n = 60;
  spec.channels = 6;
  spec.length = 64;
  spec.informative = 2;
  spec.seed = 3;
  const auto data = scratch_dir() / "equivalence.lwds";
  write_binary_dataset_file(make_sinusoid_dataset(spec), data);
  TrainConfig c;
  c.dataset_path = data.string();
  c.pool_size = full_feature_count(6, Variant::kL1L2);
  c.seed = 1;
  c.worker_count = 1;
  const auto one = train_in_process(c);
  c.worker_count = 4;
  const auto four = train_in_process(c);
  const bool same = one.descriptors == four.descriptors && one.weights == four.weights;
  return {same, std::to_string(one.descriptors.size()) + " descriptors from a pool of " +
                    std::to_string(c.pool_size) + (same ? ", identical" : ", differ")};
}

struct TrainedRun {
  ModelArtifact model;
  double accuracy = 0;
  double seconds = 0;
};

TrainedRun train_and_score(const fs::path& train, const TimeSeriesDataset& test) {
  TrainConfig c;
  c.dataset_path = train.string();
  c.seed = 0;
  const auto t0 = std::chrono::steady_clock::now();
  TrainedRun r;
  r.model = train_in_process(c);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Predictor p(r.model);
  r.accuracy = accuracy(p.predict(test), test);
  return r;
}

std::vector<ModelArtifact> trained_models;

Outcome synthetic_end_to_end() {
  SyntheticSpec spec;  // 2 classes, 20 channels, L=200, n=200, 3 informative
  spec.seed = 1;
  const auto train = scratch_dir() / "synthetic_train.lwds";
  write_binary_dataset_file(make_sinusoid_dataset(spec), train);
  spec.seed = 2;
  const auto test = make_sinusoid_dataset(spec);
  const auto r = train_and_score(train, test);
  trained_models.push_back(r.model);
  const auto used = r.model.channels_used.size();
  const bool ok = r.accuracy >= kSyntheticMinAccuracy && used <= kSyntheticMaxChannels;
  return {ok, "accuracy " + fmt("%.3f", r.accuracy) + ", " + std::to_string(used) + " of 20 channels, " +
                  std::to_string(r.model.descriptors.size()) + " features"};
}

Outcome basicmotions() {
  const char* env = std::getenv("LIGHTWAVES_BASICMOTIONS_DIR");
  const fs::path dir = env != nullptr ? fs::path(env) : fs::path(LIGHTWAVES_BASICMOTIONS_DIR);
  const auto train = dir / "BasicMotions_TRAIN.ts";
  const auto test = dir / "BasicMotions_TEST.ts";
  if (!fs::exists(train) || !fs::exists(test))
    return {false, "BasicMotions not found in " + dir.string() + " (run scripts/fetch_basicmotions.py)"};
  const auto r = train_and_score(train, load_dataset(test));
  trained_models.push_back(r.model);
  const auto used = r.model.channels_used.size();
  const bool ok = r.accuracy >= kBasicMotionsMinAccuracy && used <= kBasicMotionsMaxChannels;
  return {ok, "accuracy " + fmt("%.3f", r.accuracy) + ", " + std::to_string(used) + " of " +
                  std::to_string(r.model.input_channels) + " channels"};
}

Outcome mac_efficiency() {
  BaselineParams b;
  b.channels_per_kernel = 1.0;
  if (trained_models.empty()) synthetic_end_to_end();
  double lowest = 1e300;
  std::string detail;
  for (const auto& m : trained_models) {
    std::size_t len = m.series_length + (m.series_length % 2);
    const auto r = estimate_macs(m.descriptors, len, b);
    lowest = std::min(lowest, r.ratio);
    detail += m.metadata.at("dataset") + " L=" + std::to_string(len) + " ratio " + fmt("%.2f", r.ratio) + "; ";
  }
  // Worst case for a 500-feature model: 500 distinct two-level paths.
  std::vector<FeatureDescriptor> worst;
  for (std::uint32_t g = 0; g < 500; ++g)
    worst.push_back({g / 84, static_cast<std::uint8_t>(g % 84), static_cast<std::uint8_t>(g % 6), 2, Stat::kMax});
  for (std::size_t len = 2; len <= 4096; len *= 2) lowest = std::min(lowest, estimate_macs(worst, len, b).ratio);
  detail += "worst-case ratio floor " + fmt("%.2f", lowest);
  return {lowest >= kMinMacRatio && !trained_models.empty(), detail};
}

double time_transform(std::size_t channels) {
  SyntheticSpec spec;
  spec.n = 4;
  spec.channels = channels;
  spec.length = 64;
  spec.informative = 0;
  const auto data = make_sinusoid_dataset(spec);
  double best = 1e300;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto t = transform_full(data, default_kernel_bank(), Variant::kL1L2, 1);
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (t.features.cols() != full_feature_count(channels, Variant::kL1L2)) return -1;
  }
  return best;
}

Outcome channel_scaling() {
  const double t100 = time_transform(100);
  const double t400 = time_transform(400);
  if (t100 <= 0 || t400 <= 0) return {false, "unexpected column count"};
  const double ratio = t400 / t100;
  return {ratio <= kMaxChannelScaling,
          "C=100 " + fmt("%.3fs", t100) + ", C=400 " + fmt("%.3fs", t400) + ", ratio " + fmt("%.2f", ratio)};
}

Outcome invariance_suite() {
  std::mt19937_64 rng(99);
  const auto bank = default_kernel_bank();
  std::uniform_real_distribution<double> scale(0.01, 100.0), level(-50.0, 50.0);
  const int cases = 1000;
  int scaling_bad = 0, constant_bad = 0, range_bad = 0, projection_bad = 0;
  std::string constant_example;
  for (int t = 0; t < cases; ++t) {
    const std::size_t len = 2 + rng() % 150;
    const auto& w = bank.kernel(rng() % 84);
    const std::size_t d = bank.dilation(rng() % 6);
    const auto x = oracle::random_series(rng, len, 2.0);

    // Positive scaling.
    const double c = scale(rng);
    std::vector<double> cx(x);
    for (auto& v : cx) v *= c;
    const auto p = scatter_path(x, w, d);
    const auto q = scatter_path(cx, w, d);
    const bool scaled = rel_err(q.max1, c * p.max1) <= kScaleRelTol && rel_err(q.min1, c * p.min1) <= kScaleRelTol &&
                        rel_err(q.max2, c * p.max2) <= kScaleRelTol && rel_err(q.min2, c * p.min2) <= kScaleRelTol &&
                        q.ppv1 == p.ppv1 && q.ls1 == p.ls1 && q.ppv2 == p.ppv2 && q.ls2 == p.ls2;
    scaling_bad += !scaled;

    // Constant input.
    const double k = level(rng);
    const std::vector<double> flat(len, k);
    const auto z = scatter_path(flat, w, d);
    const bool zero = z.max1 == 0 && z.min1 == 0 && z.ppv1 == 0 && z.ls1 == 0 && z.max2 == 0 && z.min2 == 0 &&
                      z.ppv2 == 0 && z.ls2 == 0;
    if (!zero && constant_example.empty())
      constant_example = " (e.g. c=" + fmt("%.3g", k) + ", L=" + std::to_string(len) + ": max1=" + fmt("%.3g", z.max1) +
                         ")";
    constant_bad += !zero;

    // Ranges.
    const bool ranged = p.max1 >= p.min1 && p.min1 >= 0 && p.max2 >= p.min2 && p.min2 >= 0 && p.ppv1 >= 0 &&
                        p.ppv1 <= 1 && p.ls1 >= 0 && p.ls1 <= p.ppv1 && p.ppv2 >= 0 && p.ppv2 <= 1 && p.ls2 >= 0 &&
                        p.ls2 <= p.ppv2 &&
                        std::abs(p.ls1 * static_cast<double>(len) - std::round(p.ls1 * static_cast<double>(len))) < 1e-9;
    range_bad += !ranged;
  }

  // Projection equality on random descriptor subsets.
  for (int t = 0; t < cases; t += 50) {
    TimeSeriesDataset data;
    data.n = 2;
    data.channels = 1 + rng() % 3;
    data.length = 8 + rng() % 60;
    data.values = oracle::random_series(rng, data.n * data.channels * data.length);
    const auto full = transform_full(data, bank, Variant::kL1L2);
    for (int s = 0; s < 50; ++s) {
      std::vector<std::size_t> cols;
      std::vector<FeatureDescriptor> ds;
      for (std::size_t q = 0, count = 1 + rng() % 40; q < count; ++q) {
        cols.push_back(rng() % full.descriptors.size());
        ds.push_back(full.descriptors[cols.back()]);
      }
      const std::size_t i = rng() % data.n;
      const auto got = transform_selected(data.sample(i), data.channels, bank, ds);
      for (std::size_t q = 0; q < ds.size(); ++q) projection_bad += got[q] != full.features(i, cols[q]);
    }
  }

  const bool ok = scaling_bad + constant_bad + range_bad + projection_bad == 0;
  std::string detail = std::to_string(cases) + " cases each: scaling " + std::to_string(scaling_bad) +
                       " bad, constant " + std::to_string(constant_bad) + " bad" + constant_example + ", ranges " +
                       std::to_string(range_bad) + " bad, projection " + std::to_string(projection_bad) + " bad";
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<Criterion> criteria{
      {1, "kernel bank", 1, kernel_bank},
      {2, "convolution oracle", 5, convolution_oracle},
      {3, "feature-count arithmetic", 5, feature_counts},
      {4, "selection oracles", 10, selection_oracles},
      {5, "ridge normal equations and LOO", 10, ridge},
      {6, "train determinism", 60, cli_determinism},
      {7, "distribution equivalence", 30, distribution_equivalence},
      {8, "synthetic end-to-end", 60, synthetic_end_to_end},
      {9, "BasicMotions smoke test", 60, basicmotions},
      {10, "MAC efficiency", 1, mac_efficiency},
      {11, "channel scaling", 120, channel_scaling},
      {12, "invariance suite", 60, invariance_suite},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0fs", c.budget_seconds) + " budget";
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " " << c.name << ": " << o.detail << " ["
              << fmt("%.2fs", secs) << "]" << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
