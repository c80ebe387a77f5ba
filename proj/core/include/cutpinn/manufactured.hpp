#pragma once

#include <Eigen/Core>

namespace cutpinn::manufactured {

using Vec2 = Eigen::Vector2d;

// Exact reference solution used by every experiment:
//   u(x,y) = sin(3.2 x (x - y)) cos(x + 4.3 y)
//          + sin(4.6 (x + 2 y)) cos(2.6 (y - 2 x))
// The gradient and f = -lap u are hand-derived closed forms, independent
// of the network autodiff they are used to test.
double u(const Vec2& p);
Vec2 grad_u(const Vec2& p);
double f(const Vec2& p);                  // -lap u
inline double g(const Vec2& p) { return u(p); }  // Dirichlet trace

struct Data {
  double u;
  Vec2 grad_u;
  double f;
  double g;
};
Data eval(const Vec2& p);

}  // namespace cutpinn::manufactured
