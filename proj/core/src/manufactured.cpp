#include "cutpinn/manufactured.hpp"

#include <cmath>

namespace cutpinn::manufactured {

namespace {

struct Terms {
  double s1, c1;  // sin/cos of 3.2 x (x - y)
  double s2, c2;  // sin/cos of x + 4.3 y
  double s3, c3;  // sin/cos of 4.6 (x + 2 y)
  double s4, c4;  // sin/cos of 2.6 (2 x - y)
};

Terms terms(double x, double y) {
  Terms t;
  const double p1 = 3.2 * x * (x - y);
  const double p2 = x + 4.3 * y;
  const double p3 = 4.6 * (x + 2.0 * y);
  const double p4 = 2.6 * (2.0 * x - y);
  t.s1 = std::sin(p1); t.c1 = std::cos(p1);
  t.s2 = std::sin(p2); t.c2 = std::cos(p2);
  t.s3 = std::sin(p3); t.c3 = std::cos(p3);
  t.s4 = std::sin(p4); t.c4 = std::cos(p4);
  return t;
}

}  // namespace

double u(const Vec2& p) {
  const Terms t = terms(p.x(), p.y());
  return t.s1 * t.c2 + t.s3 * t.c4;
}

Vec2 grad_u(const Vec2& p) {
  const double x = p.x(), y = p.y();
  const Terms t = terms(x, y);
  // phase derivatives: d p1/dx = 3.2 (2x - y), d p1/dy = -3.2 x
  const double ax = 3.2 * (2.0 * x - y);
  const double ay = -3.2 * x;
  const double ux = ax * t.c1 * t.c2 - t.s1 * t.s2
                  + 4.6 * t.c3 * t.c4 - 5.2 * t.s3 * t.s4;
  const double uy = ay * t.c1 * t.c2 - 4.3 * t.s1 * t.s2
                  + 9.2 * t.c3 * t.c4 + 2.6 * t.s3 * t.s4;
  return Vec2(ux, uy);
}

double f(const Vec2& p) {
  const double x = p.x(), y = p.y();
  const Terms t = terms(x, y);
  const double ax = 3.2 * (2.0 * x - y);  // d p1/dx
  const double ay = -3.2 * x;             // d p1/dy
  // lap of term1 = sin(p1) cos(p2):
  //   uxx = (6.4 c1 - ax^2 s1) c2 - 2 ax c1 s2 - s1 c2
  //   uyy = -ay^2 s1 c2 - 2*4.3 ay c1 s2 - 4.3^2 s1 c2
  const double lap1 = (6.4 * t.c1 - (ax * ax + ay * ay) * t.s1) * t.c2
                    - 2.0 * (ax + 4.3 * ay) * t.c1 * t.s2
                    - (1.0 + 4.3 * 4.3) * t.s1 * t.c2;
  // lap of term2 = sin(p3) cos(p4), both phases linear:
  //   p3 coeffs (4.6, 9.2), p4 coeffs (5.2, -2.6)
  const double q3 = 4.6 * 4.6 + 9.2 * 9.2;   // |grad p3|^2
  const double q4 = 5.2 * 5.2 + 2.6 * 2.6;   // |grad p4|^2
  const double cross = 4.6 * 5.2 + 9.2 * (-2.6);
  const double lap2 = -(q3 + q4) * t.s3 * t.c4 - 2.0 * cross * t.c3 * t.s4;
  return -(lap1 + lap2);
}

Data eval(const Vec2& p) {
  return Data{u(p), grad_u(p), f(p), u(p)};
}

}  // namespace cutpinn::manufactured
