#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cutpinn/manufactured.hpp"
#include "cutpinn/norms.hpp"
#include "cutpinn/rng.hpp"

using namespace cutpinn;
using norms::BoundaryResidual;
using geom::Vec2;

namespace {

constexpr double kPi = std::numbers::pi;

BoundaryResidual circle_residual(int m, const std::vector<double>& r) {
  BoundaryResidual res;
  res.r = r;
  for (int j = 0; j < m; ++j) {
    const double a = 2.0 * kPi * j / m;
    res.z.emplace_back(std::cos(a), std::sin(a));
  }
  return res;
}

}  // namespace

TEST_CASE("discrete boundary L2") {
  CHECK(norms::discrete_l2_boundary(circle_residual(2, {1.0, 0.0})) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(norms::discrete_l2_boundary(circle_residual(2, {3.0, 4.0})) ==
        doctest::Approx(12.5).epsilon(1e-15));
  for (int m : {3, 7, 20}) {
    CHECK(norms::discrete_l2_boundary(circle_residual(m, std::vector<double>(m, 2.5))) ==
          doctest::Approx(2.5 * 2.5).epsilon(1e-14));
  }
}

TEST_CASE("discrete H(1/2) seminorm closed forms") {
  // m = 2 antipodes, r = (1,0): one pair, |z1-z2|^2 = 4,
  // sum over ordered pairs = 2 * (1/4); divided by m^2 = 4 gives 1/8
  CHECK(norms::discrete_h12_semi(circle_residual(2, {1.0, 0.0})) ==
        doctest::Approx(0.125).epsilon(1e-15));
  // m = 3 equilateral, r = (1,0,0): |z_i-z_j|^2 = 3 for all pairs;
  // ordered sum = 4 * (1/3); divided by 9 gives 4/27
  CHECK(norms::discrete_h12_semi(circle_residual(3, {1.0, 0.0, 0.0})) ==
        doctest::Approx(4.0 / 27.0).epsilon(1e-14));
  // constants have zero seminorm
  CHECK(norms::discrete_h12_semi(circle_residual(5, std::vector<double>(5, 3.3))) ==
        0.0);
}

TEST_CASE("discrete H(1/2) full norm and scaling") {
  const auto res = circle_residual(2, {1.0, 0.0});
  CHECK(norms::discrete_h12_full(res) == doctest::Approx(0.625).epsilon(1e-15));
  // quadratic homogeneity: doubling the residual multiplies all by 4
  auto res2 = res;
  for (double& v : res2.r) v *= 2.0;
  CHECK(norms::discrete_h12_full(res2) ==
        doctest::Approx(4.0 * norms::discrete_h12_full(res)).epsilon(1e-14));
  CHECK(norms::discrete_l2_boundary(res2) ==
        doctest::Approx(4.0 * norms::discrete_l2_boundary(res)).epsilon(1e-14));
  CHECK(norms::discrete_h12_semi(res2) ==
        doctest::Approx(4.0 * norms::discrete_h12_semi(res)).epsilon(1e-14));
}

TEST_CASE("seminorm is permutation invariant and symmetric in sign") {
  Rng rng(21, "norms-perm");
  const int m = 23;
  std::vector<double> r(m);
  for (double& v : r) v = rng.uniform(-1.0, 1.0);
  auto res = circle_residual(m, r);
  const double semi = norms::discrete_h12_semi(res);
  const double full = norms::discrete_h12_full(res);

  // permute sites and residuals together
  std::vector<int> perm(m);
  for (int i = 0; i < m; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), std::mt19937(99));
  BoundaryResidual shuffled;
  for (int i : perm) {
    shuffled.r.push_back(res.r[i]);
    shuffled.z.push_back(res.z[i]);
  }
  CHECK(norms::discrete_h12_semi(shuffled) == doctest::Approx(semi).epsilon(1e-12));
  CHECK(norms::discrete_h12_full(shuffled) == doctest::Approx(full).epsilon(1e-12));

  // flipping every sign leaves the quadratic forms unchanged
  auto neg = res;
  for (double& v : neg.r) v = -v;
  CHECK(norms::discrete_h12_semi(neg) == doctest::Approx(semi).epsilon(1e-14));

  // triangle-type bound for the square root of the full norm
  for (int k = 0; k < 10; ++k) {
    std::vector<double> a(m), b(m), s(m);
    for (int i = 0; i < m; ++i) {
      a[i] = rng.uniform(-1.0, 1.0);
      b[i] = rng.uniform(-1.0, 1.0);
      s[i] = a[i] + b[i];
    }
    const double na = std::sqrt(norms::discrete_h12_full(circle_residual(m, a)));
    const double nb = std::sqrt(norms::discrete_h12_full(circle_residual(m, b)));
    const double ns = std::sqrt(norms::discrete_h12_full(circle_residual(m, s)));
    CHECK(ns <= na + nb + 1e-12);
  }
}

TEST_CASE("seminorm evaluation is bit stable") {
  Rng rng(22, "norms-repeat");
  const int m = 40;
  std::vector<double> r(m);
  for (double& v : r) v = rng.uniform(-1.0, 1.0);
  const auto res = circle_residual(m, r);
  const double first = norms::discrete_h12_semi(res);
  for (int k = 0; k < 5; ++k) CHECK(norms::discrete_h12_semi(res) == first);
}

TEST_CASE("degenerate and invalid inputs") {
  BoundaryResidual dup;
  dup.r = {1.0, 2.0, 3.0};
  dup.z = {Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 0.0)};
  CHECK_THROWS_AS(norms::discrete_h12_semi(dup), norms::DegenerateKernelError);
  CHECK_THROWS_AS(norms::discrete_h12_full(dup), norms::DegenerateKernelError);

  BoundaryResidual single;
  single.r = {1.0};
  single.z = {Vec2(0.0, 0.0)};
  CHECK_THROWS_AS(norms::discrete_h12_semi(single), std::invalid_argument);

  BoundaryResidual mismatch;
  mismatch.r = {1.0, 2.0};
  mismatch.z = {Vec2(0.0, 0.0)};
  CHECK_THROWS_AS(norms::discrete_h12_semi(mismatch), std::invalid_argument);
  CHECK_THROWS_AS(norms::discrete_l2_boundary(BoundaryResidual{}),
                  std::invalid_argument);
}

TEST_CASE("discrete interior L2") {
  const double one[] = {2.0};
  CHECK(norms::discrete_l2_interior(one, 1.0) == doctest::Approx(4.0).epsilon(1e-15));
  const std::vector<double> ones(50, 1.0);
  CHECK(norms::discrete_l2_interior(ones, 0.7) ==
        doctest::Approx(0.7).epsilon(1e-14));
  CHECK_THROWS_AS(norms::discrete_l2_interior(std::span<const double>{}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(norms::discrete_l2_interior(ones, 0.0), std::invalid_argument);
}

TEST_CASE("continuous quadrature oracle on the unit circle") {
  const auto d = geom::make_disk({0.0, 0.0}, 1.0);
  // g = cos(theta) = x on the unit circle: Gagliardo double integral 2 pi^2
  const auto g = [](const Vec2& p) { return p.x(); };
  const double q2048 = norms::continuous_h12_quadrature(g, d.boundary, 2048);
  CHECK(std::abs(q2048 - 2.0 * kPi * kPi) < 1e-3 * 2.0 * kPi * kPi);
  // constants integrate to zero
  const auto c = [](const Vec2&) { return 0.7; };
  CHECK(norms::continuous_h12_quadrature(c, d.boundary, 512) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // boundary L2 of a constant is c^2 * L
  CHECK(norms::continuous_l2_boundary_quadrature(c, d.boundary, 512) ==
        doctest::Approx(0.49 * 2.0 * kPi).epsilon(1e-10));
}

TEST_CASE("continuous quadrature self-converges on the embedded disk") {
  const auto d = geom::make_disk({0.5, 0.5}, 0.4);
  const auto g = [](const Vec2& p) { return manufactured::g(p); };
  const double q2048 = norms::continuous_h12_quadrature(g, d.boundary, 2048);
  const double q4096 = norms::continuous_h12_quadrature(g, d.boundary, 4096);
  CHECK(std::abs(q4096 - q2048) < 1e-4 * std::abs(q4096));
}
