#include <doctest.h>

#include <vector>

#include "cutpinn/rng.hpp"

using cutpinn::Rng;

TEST_CASE("same seed reproduces the sequence") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("tags and indices derive distinct streams") {
  Rng a(7, "interior-rejection"), b(7, "boundary-iid");
  Rng c(7, "interior-rejection", 0), d(7, "interior-rejection", 1);
  int diff_tag = 0, diff_idx = 0;
  for (int i = 0; i < 64; ++i) {
    diff_tag += a.next() != b.next();
    diff_idx += c.next() != d.next();
  }
  CHECK(diff_tag > 60);
  CHECK(diff_idx > 60);
}

TEST_CASE("uniform stays in range") {
  Rng r(0);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform(-3.0, 5.0);
    CHECK(u >= -3.0);
    CHECK(u < 5.0);
  }
}

TEST_CASE("chi-square uniformity over 20 bins") {
  // 100k draws, 19 dof; the 0.001 quantile is 43.82
  constexpr int kBins = 20, kN = 100000;
  std::vector<int> count(kBins, 0);
  Rng r(123, "uniformity-test");
  for (int i = 0; i < kN; ++i) {
    ++count[static_cast<int>(r.uniform() * kBins)];
  }
  const double expect = static_cast<double>(kN) / kBins;
  double chi2 = 0.0;
  for (int c : count) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 43.82);
}
