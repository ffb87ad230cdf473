#include "doctest.h"
#include "lightwaves/macs.hpp"

using namespace lightwaves;

namespace {

BaselineParams one_channel() {
  BaselineParams b;
  b.channels_per_kernel = 1.0;
  return b;
}

}  // namespace

TEST_SUITE("macs") {
  TEST_CASE("one two-level group") {
    const std::vector<FeatureDescriptor> ds{{0, 3, 2, 1, Stat::kMax}, {0, 3, 2, 2, Stat::kLs}};
    const auto r = estimate_macs(ds, 1000, one_channel());
    CHECK(r.lightwaves_macs == 13500);
    CHECK(r.baseline_macs == 10000ULL * 1000 * 9);
    CHECK(r.ratio == doctest::Approx(90000000.0 / 13500.0));
  }

  TEST_CASE("level-1-only group costs one convolution") {
    const std::vector<FeatureDescriptor> ds{{0, 3, 2, 1, Stat::kMax}, {0, 3, 2, 1, Stat::kPpv}};
    CHECK(estimate_macs(ds, 1000, one_channel()).lightwaves_macs == 9000);
    // Odd length rounds the downsampled level up.
    const std::vector<FeatureDescriptor> two{{1, 0, 0, 2, Stat::kMin}};
    CHECK(estimate_macs(two, 7, one_channel()).lightwaves_macs == 9 * 7 + 9 * 4);
  }

  TEST_CASE("groups are counted once") {
    std::vector<FeatureDescriptor> ds;
    for (int rep = 0; rep < 3; ++rep)
      for (std::uint8_t k = 0; k < 4; ++k) ds.push_back({0, k, 0, 1, Stat::kMax});
    CHECK(estimate_macs(ds, 10, one_channel()).lightwaves_macs == 4 * 90);
  }

  TEST_CASE("500 distinct two-level groups stay above 13.3") {
    std::vector<FeatureDescriptor> ds;
    for (std::uint32_t g = 0; g < 500; ++g)
      ds.push_back({g / 84, static_cast<std::uint8_t>(g % 84), static_cast<std::uint8_t>(g % 6), 2, Stat::kMax});
    for (std::size_t len : {2, 10, 100, 1000, 4096}) {
      const auto r = estimate_macs(ds, len, one_channel());
      CHECK(r.lightwaves_macs == 500 * (9 * len + 9 * ((len + 1) / 2)));
      CHECK(r.ratio >= 13.3);
    }
  }

  TEST_CASE("assumptions are reported") {
    BaselineParams b;
    b.kernel_count = 84;
    b.kernel_length = 9;
    b.channels_per_kernel = 2.5;
    const std::vector<FeatureDescriptor> ds{{0, 0, 0, 1, Stat::kMax}};
    const auto r = estimate_macs(ds, 8, b);
    CHECK(r.baseline_macs == 84 * 8 * 9 * 5 / 2);
    CHECK(r.assumptions.at("baseline_channels_per_kernel") == "2.5");
    CHECK(r.assumptions.count("baseline_kernel_count") == 1);
  }
}
