#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cutpinn/geometry.hpp"

namespace cutpinn::norms {

using geom::Vec2;

// Signals coincident boundary points in the pairwise kernel, typically a
// cut-cell near-graze. Callers that treat divergence as data catch this.
struct DegenerateKernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Boundary residual r_j at sites z_j. All norms below return squares.
struct BoundaryResidual {
  std::vector<double> r;
  std::vector<Vec2> z;
};

// (1/m) sum r_j^2
double discrete_l2_boundary(const BoundaryResidual& res);

// (1/m^2) sum_{i != j} (r_i - r_j)^2 / |z_i - z_j|^2
// Row-major evaluation order with compensated accumulation, so the result
// is bit-stable across runs.
double discrete_h12_semi(const BoundaryResidual& res);

double discrete_h12_full(const BoundaryResidual& res);

// (area / m) sum values_i^2
double discrete_l2_interior(std::span<const double> values, double area);

// Tensor trapezoid approximation of the Gagliardo double integral
//   int int (g(z)-g(z'))^2 / |z-z'|^2 dsigma dsigma'
// in arc-length parametrisation; diagonal entries replaced by the limit
// (dg/ds)^2 from one-sided differences. Verification oracle only.
double continuous_h12_quadrature(const std::function<double(const Vec2&)>& gfun,
                                 const geom::BoundaryCurve& curve, int panels);

// Boundary L2 quadrature int g^2 dsigma by the same panel rule; companion
// oracle for the full-norm comparisons.
double continuous_l2_boundary_quadrature(
    const std::function<double(const Vec2&)>& gfun,
    const geom::BoundaryCurve& curve, int panels);

}  // namespace cutpinn::norms
