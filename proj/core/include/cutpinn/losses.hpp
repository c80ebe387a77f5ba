#pragma once

#include <string>

#include "cutpinn/geometry.hpp"
#include "cutpinn/net.hpp"

namespace cutpinn::losses {

// CLI vocabulary: std | wstd | cgamma | c2
enum class Kind { standard, weighted, consistent_gamma, consistent_2 };

std::string name(Kind kind);
Kind kind_from_name(const std::string& s);
inline bool is_consistent(Kind k) {
  return k == Kind::consistent_gamma || k == Kind::consistent_2;
}

struct LossBreakdown {
  double total = 0.0;
  double interior = 0.0;
  double boundary_l2 = 0.0;
  double boundary_semi = 0.0;
  Kind kind = Kind::standard;
};

// Collocation sites with the data vectors (f_i, g_j) precomputed once.
struct TrainingData {
  Eigen::Matrix2Xd interior;  // 2 x m_int
  Eigen::Matrix2Xd boundary;  // 2 x m_bnd
  Eigen::VectorXd f;          // f at interior sites
  Eigen::VectorXd g;          // g at boundary sites
  double gamma = 2.0;         // 1 + 1/ln(m_int), used by cgamma
};

TrainingData make_training_data(const geom::CollocationSet& colloc);

// Exponent weight of the lambda-weighted loss; identically 1 in d = 2.
double boundary_weight(int m_bnd, int dim = 2);

LossBreakdown evaluate(Kind kind, const net::Network& net,
                       const TrainingData& data);

// Reusable tapes for evaluate_with_gradient. Keeping one alive across an
// optimizer run lets the forward pass recycle its recording buffers instead
// of reallocating them on every evaluation.
struct Workspace {
  net::Tape interior;
  net::Tape boundary;
};

// As above, also writing the parameter gradient of the total into grad
// (resized and overwritten). ws may be null; pass one in hot loops.
LossBreakdown evaluate_with_gradient(Kind kind, const net::Network& net,
                                     const TrainingData& data,
                                     net::VectorXd& grad,
                                     Workspace* ws = nullptr);

// Adjoint seeds left behind by a forward evaluation; together with the
// workspace tapes they are all the reverse pass needs.
struct PendingGradient {
  net::VectorXd seed_lap;  // interior laplacian adjoints
  net::VectorXd seed_val;  // boundary value adjoints
};

// Forward-only evaluation that records tapes and adjoint seeds so the
// gradient can be assembled later (or skipped, e.g. for a rejected line
// search probe). The workspace must be untouched between the two calls.
LossBreakdown evaluate_forward(Kind kind, const net::Network& net,
                               const TrainingData& data, Workspace& ws,
                               PendingGradient& pending);

// Reverse pass matching the most recent evaluate_forward on the same
// workspace; grad is resized and overwritten.
void evaluate_backward(const net::Network& net, const Workspace& ws,
                       const PendingGradient& pending, net::VectorXd& grad);

// ParamFunction adapter so the optimizers and gradient checks can treat a
// loss as a differentiable scalar objective.
class LossObjective final : public net::ParamFunction {
 public:
  LossObjective(Kind kind, const TrainingData& data) : kind_(kind), data_(data) {}
  double value(const net::Network& net) const override {
    return evaluate(kind_, net, data_).total;
  }
  void add_gradient(const net::Network& net, net::VectorXd& grad) const override;

 private:
  Kind kind_;
  const TrainingData& data_;
};

}  // namespace cutpinn::losses
