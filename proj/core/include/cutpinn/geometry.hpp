#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cutpinn::geom {

using Vec2 = Eigen::Vector2d;

// Thrown when rejection sampling cannot find the domain or a grid misses it.
struct DomainDegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a closed curve self-intersects (duplicate points off-diagonal).
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BBox {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  bool contains(const Vec2& p) const {
    return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1;
  }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

// Closed C^2 curve given by a smooth parametrisation over t in [0,1),
// with an arc-length lookup table for equispaced sampling. The table
// has kTableSize intervals; inversion is bisection plus Newton refinement
// against the analytic speed, so round-trips are accurate to ~1e-12 * L.
class BoundaryCurve {
 public:
  static constexpr int kTableSize = 4096;

  using ParamFn = std::function<Vec2(double)>;

  BoundaryCurve() = default;
  // pos, d1, d2: position and its first/second derivatives w.r.t. t.
  BoundaryCurve(ParamFn pos, ParamFn d1, ParamFn d2);

  Vec2 param(double t) const { return pos_(wrap(t)); }
  double speed(double t) const { return d1_(wrap(t)).norm(); }
  double total_length() const { return length_; }
  double kappa_max() const { return kappa_max_; }

  // signed curvature at parameter t
  double curvature(double t) const;

  // cumulative arc length s(t), strictly increasing, s(0)=0, s(1)=L
  double arclength(double t) const;

  // inverse t(s) for s in [0, L); periodic outside
  double param_at_arclength(double s) const;
  Vec2 point_at_arclength(double s) const { return param(param_at_arclength(s)); }

  // periodic arc distance between arc-length positions
  double arc_distance(double s, double u) const;

 private:
  static double wrap(double t) { return t - std::floor(t); }

  ParamFn pos_, d1_, d2_;
  std::vector<double> cum_s_;  // size kTableSize + 1, cum_s_[k] = s(k / kTableSize)
  double length_ = 0.0;
  double kappa_max_ = 0.0;
};

struct LevelSetDomain {
  std::function<double(const Vec2&)> phi;
  std::function<Vec2(const Vec2&)> grad_phi;
  BBox bbox;
  double area = 0.0;
  BoundaryCurve boundary;
};

// phi(x) = |x - center| - radius. bbox is the unit square when the disk
// fits inside it (the convention for the embedded test domains), the tight
// box center +/- radius otherwise.
LevelSetDomain make_disk(const Vec2& center, double radius);

// phi = rho - amplitude * (sin(petals * theta) + base) in polar coordinates
// about center.
LevelSetDomain make_flower(const Vec2& center, double amplitude, int petals,
                           double base);

enum class InteriorMode { rejection, tensor_grid };
enum class BoundaryMode { equispaced_arclength, iid_uniform };

struct CollocationSet {
  std::vector<Vec2> interior;
  std::vector<Vec2> boundary;
  InteriorMode interior_mode = InteriorMode::rejection;
  BoundaryMode boundary_mode = BoundaryMode::equispaced_arclength;
  std::uint64_t seed = 0;
};

// Uniform samples on Omega via rejection from the bounding box.
// Throws DomainDegenerateError if the acceptance rate stays below 1e-3
// after 1e6 proposals.
std::vector<Vec2> sample_interior_rejection(const LevelSetDomain& domain,
                                            int count, std::uint64_t seed);

// Tensor grid of spacing mesh_h on the bounding box, intersected with Omega.
std::vector<Vec2> sample_interior_grid(const LevelSetDomain& domain,
                                       double mesh_h);

std::vector<Vec2> sample_boundary(const BoundaryCurve& curve, int count,
                                  BoundaryMode mode, std::uint64_t seed);

// min over a grid_n x grid_n arc-length grid (diagonal excluded) of
// chord / arc. In (0, 1] for a simple closed curve.
double chord_arc_constant(const BoundaryCurve& curve, int grid_n);

// Point set serialization: header "x,y", 17 significant digits.
void write_points_csv(const std::string& path, const std::vector<Vec2>& pts);

}  // namespace cutpinn::geom
