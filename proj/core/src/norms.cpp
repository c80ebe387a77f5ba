#include "cutpinn/norms.hpp"

#include <cmath>

namespace cutpinn::norms {

namespace {

struct KahanSum {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

double discrete_l2_boundary(const BoundaryResidual& res) {
  if (res.r.empty()) {
    throw std::invalid_argument("discrete_l2_boundary: empty residual");
  }
  KahanSum s;
  for (double v : res.r) s.add(v * v);
  return s.sum / static_cast<double>(res.r.size());
}

double discrete_h12_semi(const BoundaryResidual& res) {
  const std::size_t m = res.r.size();
  if (m < 2) {
    throw std::invalid_argument("discrete_h12_semi: need at least 2 points");
  }
  if (res.z.size() != m) {
    throw std::invalid_argument("discrete_h12_semi: residual/point length mismatch");
  }
  KahanSum s;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const double d2 = (res.z[i] - res.z[j]).squaredNorm();
      if (d2 <= 1e-24) {
        throw DegenerateKernelError("discrete_h12_semi: coincident boundary points");
      }
      const double dr = res.r[i] - res.r[j];
      s.add(dr * dr / d2);
    }
  }
  return s.sum / (static_cast<double>(m) * static_cast<double>(m));
}

double discrete_h12_full(const BoundaryResidual& res) {
  return discrete_l2_boundary(res) + discrete_h12_semi(res);
}

double discrete_l2_interior(std::span<const double> values, double area) {
  if (values.empty()) {
    throw std::invalid_argument("discrete_l2_interior: empty values");
  }
  if (!(area > 0.0)) {
    throw std::invalid_argument("discrete_l2_interior: area must be positive");
  }
  KahanSum s;
  for (double v : values) s.add(v * v);
  return area * s.sum / static_cast<double>(values.size());
}

double continuous_h12_quadrature(const std::function<double(const Vec2&)>& gfun,
                                 const geom::BoundaryCurve& curve, int panels) {
  if (panels < 256) {
    throw std::invalid_argument("continuous_h12_quadrature: panels must be >= 256");
  }
  const double L = curve.total_length();
  const double h = L / panels;
  std::vector<Vec2> z(panels);
  std::vector<double> g(panels);
  for (int i = 0; i < panels; ++i) {
    z[i] = curve.point_at_arclength(i * h);
    g[i] = gfun(z[i]);
  }
  KahanSum s;
  for (int i = 0; i < panels; ++i) {
    for (int j = 0; j < panels; ++j) {
      if (i == j) {
        // analytic diagonal limit (dg/ds)^2, one-sided difference
        const double dgds = (g[(i + 1) % panels] - g[i]) / h;
        s.add(dgds * dgds);
        continue;
      }
      const double dg = g[i] - g[j];
      s.add(dg * dg / (z[i] - z[j]).squaredNorm());
    }
  }
  return s.sum * h * h;
}

double continuous_l2_boundary_quadrature(
    const std::function<double(const Vec2&)>& gfun,
    const geom::BoundaryCurve& curve, int panels) {
  if (panels < 2) {
    throw std::invalid_argument("continuous_l2_boundary_quadrature: panels >= 2");
  }
  const double L = curve.total_length();
  const double h = L / panels;
  KahanSum s;
  for (int i = 0; i < panels; ++i) {
    const double g = gfun(curve.point_at_arclength(i * h));
    s.add(g * g);
  }
  return s.sum * h;
}

}  // namespace cutpinn::norms
