#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "lightwaves/error.hpp"
#include "lightwaves/kernels.hpp"
#include "support/oracles.hpp"

using namespace lightwaves;

TEST_SUITE("kernels") {
  TEST_CASE("bank has 84 zero-sum kernels with three taps of 2") {
    const auto bank = generate_kernel_bank();
    CHECK(bank.weights.size() == 84);
    std::set<std::vector<double>> distinct;
    for (const auto& w : bank.weights) {
      CHECK(std::accumulate(w.begin(), w.end(), 0.0) == 0.0);
      CHECK(std::count(w.begin(), w.end(), 2.0) == 3);
      CHECK(std::count(w.begin(), w.end(), -1.0) == 6);
      distinct.insert({w.begin(), w.end()});
    }
    CHECK(distinct.size() == 84);
    CHECK(bank.dilations == std::array<std::size_t, 6>{1, 2, 4, 8, 16, 32});
  }

  TEST_CASE("kernel order is lexicographic over 3-combinations") {
    const auto bank = generate_kernel_bank();
    CHECK(bank.kernel(0) == Kernel{2, 2, 2, -1, -1, -1, -1, -1, -1});
    CHECK(bank.kernel(1) == Kernel{2, 2, -1, 2, -1, -1, -1, -1, -1});
    CHECK(bank.kernel(83) == Kernel{-1, -1, -1, -1, -1, -1, 2, 2, 2});
    // positions of the 2s strictly increase in lexicographic order
    std::vector<std::array<int, 3>> combos;
    for (const auto& w : bank.weights) {
      std::array<int, 3> c{};
      int k = 0;
      for (int j = 0; j < 9; ++j) {
        if (w[static_cast<std::size_t>(j)] == 2.0) c[static_cast<std::size_t>(k++)] = j;
      }
      combos.push_back(c);
    }
    CHECK(std::is_sorted(combos.begin(), combos.end()));
    CHECK(generate_kernel_bank().weights == bank.weights);
  }

  TEST_CASE("identity kernel reproduces the input") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> delta(9, 0.0);
    delta[4] = 1.0;
    CHECK(dilated_xcorr(x, delta, 1) == x);
    CHECK(dilated_xcorr(x, delta, 8) == x);
  }

  TEST_CASE("centered difference kernel with zero padding") {
    std::vector<double> w(9, 0.0);
    w[3] = 1.0;
    w[5] = -1.0;
    CHECK(dilated_xcorr(std::vector<double>{1, 2, 3}, w, 1) == std::vector<double>{-2, -2, 2});
    CHECK(dilated_xcorr(std::vector<double>{1, 2, 3, 4, 5}, w, 2) == std::vector<double>{-3, -4, -4, 2, 3});
  }

  TEST_CASE("dilation wider than the series leaves only the center tap") {
    const auto bank = generate_kernel_bank();
    const std::vector<double> x{3, -1, 4};
    const auto y = dilated_xcorr(x, bank.kernel(0), 32);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == bank.kernel(0)[4] * x[i]);
  }

  TEST_CASE("matches the naive oracle on random cases") {
    std::mt19937_64 rng(7);
    const auto bank = generate_kernel_bank();
    std::uniform_int_distribution<int> len(1, 80), k(0, 83), e(0, 5), ival(-20, 20);
    for (int trial = 0; trial < 300; ++trial) {
      const auto n = static_cast<std::size_t>(len(rng));
      const auto& w = bank.kernel(static_cast<std::size_t>(k(rng)));
      const std::size_t d = std::size_t{1} << e(rng);
      std::vector<double> xi(n);
      for (auto& v : xi) v = ival(rng);
      CHECK(dilated_xcorr(xi, w, d) == oracle::naive_xcorr(xi, w, d));
      const auto xr = oracle::random_series(rng, n);
      const auto got = dilated_xcorr(xr, w, d);
      const auto want = oracle::naive_xcorr(xr, w, d);
      for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));
    }
  }

  TEST_CASE("linearity and constant rejection") {
    std::mt19937_64 rng(11);
    const auto bank = generate_kernel_bank();
    for (int trial = 0; trial < 50; ++trial) {
      const auto x = oracle::random_series(rng, 40);
      const auto y = oracle::random_series(rng, 40);
      const double a = 1.7, b = -0.3;
      std::vector<double> mix(40);
      for (std::size_t i = 0; i < 40; ++i) mix[i] = a * x[i] + b * y[i];
      const auto& w = bank.kernel(static_cast<std::size_t>(trial) % 84);
      const auto lhs = dilated_xcorr(mix, w, 2);
      const auto fx = dilated_xcorr(x, w, 2);
      const auto fy = dilated_xcorr(y, w, 2);
      for (std::size_t i = 0; i < 40; ++i) {
        CHECK(lhs[i] == doctest::Approx(a * fx[i] + b * fy[i]).epsilon(1e-9).scale(1.0));
      }
    }
    // interior outputs vanish exactly on constants; the borders see padding
    const std::vector<double> c(20, 3.5);
    const auto out = dilated_xcorr(c, bank.kernel(5), 1);
    for (std::size_t i = 4; i < 16; ++i) CHECK(out[i] == 0.0);
  }

  TEST_CASE("downsample keeps even indices") {
    CHECK(downsample2(std::vector<double>{1, 2, 3, 4, 5}) == std::vector<double>{1, 3, 5});
    CHECK(downsample2(std::vector<double>{7}) == std::vector<double>{7});
    CHECK(downsample2(std::vector<double>{1, 2, 3, 4}) == std::vector<double>{1, 3});
  }

  TEST_CASE("rejects empty input and even kernels") {
    std::vector<double> w(9, 1.0);
    CHECK_THROWS_AS(dilated_xcorr(std::vector<double>{}, w, 1), DataError);
    CHECK_THROWS_AS(dilated_xcorr(std::vector<double>{1, 2}, std::vector<double>(8, 1.0), 1), DataError);
    CHECK_THROWS_AS(downsample2(std::vector<double>{}), DataError);
  }
}
