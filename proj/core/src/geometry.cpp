#include "cutpinn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cutpinn/csv.hpp"
#include "cutpinn/rng.hpp"

namespace cutpinn::geom {

namespace {

constexpr double kPi = std::numbers::pi;

// 4-point Gauss-Legendre on [0,1]
constexpr double kGaussX[4] = {0.069431844202973712, 0.33000947820757187,
                               0.66999052179242813, 0.93056815579702629};
constexpr double kGaussW[4] = {0.17392742256872693, 0.32607257743127307,
                               0.32607257743127307, 0.17392742256872693};

}  // namespace

BoundaryCurve::BoundaryCurve(ParamFn pos, ParamFn d1, ParamFn d2)
    : pos_(std::move(pos)), d1_(std::move(d1)), d2_(std::move(d2)) {
  // Cumulative arc length over kTableSize intervals, each integrated with
  // 4-point Gauss so the table is accurate well past the 1e-8 relative
  // requirement for smooth curves.
  cum_s_.resize(kTableSize + 1);
  cum_s_[0] = 0.0;
  const double h = 1.0 / kTableSize;
  for (int k = 0; k < kTableSize; ++k) {
    double seg = 0.0;
    for (int q = 0; q < 4; ++q) {
      seg += kGaussW[q] * d1_((k + kGaussX[q]) * h).norm();
    }
    cum_s_[k + 1] = cum_s_[k] + seg * h;
  }
  length_ = cum_s_[kTableSize];

  kappa_max_ = 0.0;
  for (int k = 0; k < kTableSize; ++k) {
    kappa_max_ = std::max(kappa_max_, std::abs(curvature(k * h)));
  }
}

double BoundaryCurve::curvature(double t) const {
  const Vec2 v = d1_(wrap(t));
  const Vec2 a = d2_(wrap(t));
  const double cross = v.x() * a.y() - v.y() * a.x();
  const double sp2 = v.squaredNorm();
  return cross / (sp2 * std::sqrt(sp2));
}

double BoundaryCurve::arclength(double t) const {
  // documented on [0,1] with s(1) = L, so clamp instead of wrapping
  t = std::clamp(t, 0.0, 1.0);
  if (t == 1.0) return length_;
  const double u = t * kTableSize;
  const int k = std::min(static_cast<int>(u), kTableSize - 1);
  const double h = 1.0 / kTableSize;
  // integrate the tail [k*h, t] with Gauss on the partial interval
  const double dt = t - k * h;
  double seg = 0.0;
  for (int q = 0; q < 4; ++q) {
    seg += kGaussW[q] * d1_(k * h + kGaussX[q] * dt).norm();
  }
  return cum_s_[k] + seg * dt;
}

double BoundaryCurve::param_at_arclength(double s) const {
  s -= length_ * std::floor(s / length_);
  // bisection on the table
  const auto it = std::upper_bound(cum_s_.begin(), cum_s_.end(), s);
  int k = std::max(0, static_cast<int>(it - cum_s_.begin()) - 1);
  k = std::min(k, kTableSize - 1);
  const double h = 1.0 / kTableSize;
  double t = k * h;
  double lo = k * h, hi = (k + 1) * h;
  if (cum_s_[k + 1] > cum_s_[k]) {
    t = lo + h * (s - cum_s_[k]) / (cum_s_[k + 1] - cum_s_[k]);
  }
  // Newton refinement against the analytic speed, bisection fallback
  for (int it2 = 0; it2 < 30; ++it2) {
    const double g = arclength(t) - s;
    if (std::abs(g) < 1e-13 * std::max(length_, 1.0)) break;
    if (g > 0.0) hi = t; else lo = t;
    const double sp = speed(t);
    double tn = t - g / sp;
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    t = tn;
  }
  return wrap(t);
}

double BoundaryCurve::arc_distance(double s, double u) const {
  double d = std::abs(s - u);
  d = std::min(d, length_ - d);
  return d;
}

LevelSetDomain make_disk(const Vec2& center, double radius) {
  if (radius <= 0.0) {
    throw std::invalid_argument("make_disk: radius must be positive");
  }
  LevelSetDomain dom;
  const Vec2 c = center;
  const double r = radius;
  dom.phi = [c, r](const Vec2& p) { return (p - c).norm() - r; };
  dom.grad_phi = [c](const Vec2& p) {
    const Vec2 d = p - c;
    const double n = d.norm();
    return n > 0.0 ? Vec2(d / n) : Vec2(0.0, 0.0);
  };
  const BBox tight{c.x() - r, c.x() + r, c.y() - r, c.y() + r};
  const bool in_unit = tight.x0 >= 0.0 && tight.x1 <= 1.0 && tight.y0 >= 0.0 &&
                       tight.y1 <= 1.0;
  dom.bbox = in_unit ? BBox{0.0, 1.0, 0.0, 1.0} : tight;
  dom.area = kPi * r * r;
  auto pos = [c, r](double t) {
    const double a = 2.0 * kPi * t;
    return Vec2(c.x() + r * std::cos(a), c.y() + r * std::sin(a));
  };
  auto d1 = [r](double t) {
    const double a = 2.0 * kPi * t;
    return Vec2(-2.0 * kPi * r * std::sin(a), 2.0 * kPi * r * std::cos(a));
  };
  auto d2 = [r](double t) {
    const double a = 2.0 * kPi * t;
    const double w = 2.0 * kPi;
    return Vec2(-w * w * r * std::cos(a), -w * w * r * std::sin(a));
  };
  dom.boundary = BoundaryCurve(pos, d1, d2);
  return dom;
}

LevelSetDomain make_flower(const Vec2& center, double amplitude, int petals,
                           double base) {
  // rho(theta) = amplitude * (sin(petals * theta) + base)
  const double rho_min = amplitude * (base - 1.0);
  if (!(rho_min > 0.0)) {
    throw std::invalid_argument(
        "make_flower: rho(theta) must stay positive (need amplitude*(base-1) > 0)");
  }
  LevelSetDomain dom;
  const Vec2 c = center;
  const double a = amplitude, b = base;
  const int p = petals;
  dom.phi = [c, a, b, p](const Vec2& q) {
    const Vec2 d = q - c;
    const double rho = d.norm();
    const double theta = std::atan2(d.y(), d.x());
    return rho - a * (std::sin(p * theta) + b);
  };
  dom.grad_phi = [c, a, p](const Vec2& q) {
    const Vec2 d = q - c;
    const double rho = d.norm();
    if (rho == 0.0) return Vec2(0.0, 0.0);
    const double theta = std::atan2(d.y(), d.x());
    // d(theta)/dx = -y/rho^2, d(theta)/dy = x/rho^2
    const double dr = a * p * std::cos(p * theta);
    return Vec2(d.x() / rho + dr * d.y() / (rho * rho),
                d.y() / rho - dr * d.x() / (rho * rho));
  };

  auto rho_fn = [a, b, p](double th) { return a * (std::sin(p * th) + b); };
  auto rho_d1 = [a, p](double th) { return a * p * std::cos(p * th); };
  auto rho_d2 = [a, p](double th) {
    return -a * p * static_cast<double>(p) * std::sin(p * th);
  };
  auto pos = [c, rho_fn](double t) {
    const double th = 2.0 * kPi * t;
    const double r = rho_fn(th);
    return Vec2(c.x() + r * std::cos(th), c.y() + r * std::sin(th));
  };
  auto d1 = [rho_fn, rho_d1](double t) {
    const double th = 2.0 * kPi * t;
    const double w = 2.0 * kPi;
    const double r = rho_fn(th), rp = rho_d1(th);
    return Vec2(w * (rp * std::cos(th) - r * std::sin(th)),
                w * (rp * std::sin(th) + r * std::cos(th)));
  };
  auto d2 = [rho_fn, rho_d1, rho_d2](double t) {
    const double th = 2.0 * kPi * t;
    const double w = 2.0 * kPi;
    const double r = rho_fn(th), rp = rho_d1(th), rpp = rho_d2(th);
    return Vec2(w * w * ((rpp - r) * std::cos(th) - 2.0 * rp * std::sin(th)),
                w * w * ((rpp - r) * std::sin(th) + 2.0 * rp * std::cos(th)));
  };
  dom.boundary = BoundaryCurve(pos, d1, d2);

  // |Omega| = (1/2) integral rho(theta)^2 dtheta; the trapezoid rule on the
  // parameter table is spectrally accurate for this periodic integrand.
  double area = 0.0;
  const int n = BoundaryCurve::kTableSize;
  for (int k = 0; k < n; ++k) {
    const double r = rho_fn(2.0 * kPi * k / n);
    area += 0.5 * r * r;
  }
  dom.area = area * 2.0 * kPi / n;

  const double rho_max = a * (b + 1.0);
  const BBox tight{c.x() - rho_max, c.x() + rho_max, c.y() - rho_max,
                   c.y() + rho_max};
  const bool in_unit = tight.x0 >= 0.0 && tight.x1 <= 1.0 && tight.y0 >= 0.0 &&
                       tight.y1 <= 1.0;
  dom.bbox = in_unit ? BBox{0.0, 1.0, 0.0, 1.0} : tight;
  return dom;
}

std::vector<Vec2> sample_interior_rejection(const LevelSetDomain& domain,
                                            int count, std::uint64_t seed) {
  if (count < 1) {
    throw std::invalid_argument("sample_interior_rejection: count must be >= 1");
  }
  Rng rng(seed, "interior-rejection");
  std::vector<Vec2> pts;
  pts.reserve(count);
  std::int64_t proposals = 0;
  while (static_cast<int>(pts.size()) < count) {
    const Vec2 p(rng.uniform(domain.bbox.x0, domain.bbox.x1),
                 rng.uniform(domain.bbox.y0, domain.bbox.y1));
    ++proposals;
    if (domain.phi(p) < 0.0) pts.push_back(p);
    if (proposals >= 1000000 &&
        static_cast<double>(pts.size()) / static_cast<double>(proposals) < 1e-3) {
      throw DomainDegenerateError(
          "sample_interior_rejection: acceptance rate below 1e-3");
    }
  }
  return pts;
}

std::vector<Vec2> sample_interior_grid(const LevelSetDomain& domain,
                                       double mesh_h) {
  if (!(mesh_h > 0.0)) {
    throw std::invalid_argument("sample_interior_grid: mesh_h must be positive");
  }
  std::vector<Vec2> pts;
  const int nx = static_cast<int>(std::floor(domain.bbox.width() / mesh_h + 1e-12));
  const int ny = static_cast<int>(std::floor(domain.bbox.height() / mesh_h + 1e-12));
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      const Vec2 p(domain.bbox.x0 + i * mesh_h, domain.bbox.y0 + j * mesh_h);
      if (domain.phi(p) < 0.0) pts.push_back(p);
    }
  }
  if (pts.empty()) {
    throw DomainDegenerateError("sample_interior_grid: grid misses the domain");
  }
  return pts;
}

std::vector<Vec2> sample_boundary(const BoundaryCurve& curve, int count,
                                  BoundaryMode mode, std::uint64_t seed) {
  if (count < 2) {
    throw std::invalid_argument("sample_boundary: count must be >= 2");
  }
  const double L = curve.total_length();
  std::vector<Vec2> pts;
  pts.reserve(count);
  if (mode == BoundaryMode::equispaced_arclength) {
    for (int j = 0; j < count; ++j) {
      pts.push_back(curve.point_at_arclength(j * L / count));
    }
  } else {
    Rng rng(seed, "boundary-iid");
    for (int j = 0; j < count; ++j) {
      pts.push_back(curve.point_at_arclength(rng.uniform() * L));
    }
  }
  return pts;
}

double chord_arc_constant(const BoundaryCurve& curve, int grid_n) {
  if (grid_n < 64) {
    throw std::invalid_argument("chord_arc_constant: grid_n must be >= 64");
  }
  const double L = curve.total_length();
  std::vector<Vec2> pts(grid_n);
  std::vector<double> s(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    s[i] = i * L / grid_n;
    pts[i] = curve.point_at_arclength(s[i]);
  }
  double cmin = 1.0;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = i + 1; j < grid_n; ++j) {
      const double chord = (pts[i] - pts[j]).norm();
      const double arc = curve.arc_distance(s[i], s[j]);
      if (chord < 1e-9 * std::max(L, 1.0)) {
        throw GeometryError("chord_arc_constant: curve is not simple "
                            "(duplicate points off-diagonal)");
      }
      cmin = std::min(cmin, chord / arc);
    }
  }
  return cmin;
}

void write_points_csv(const std::string& path, const std::vector<Vec2>& pts) {
  io::CsvWriter w(path, "x,y");
  for (const auto& p : pts) w.row({p.x(), p.y()});
}

}  // namespace cutpinn::geom
