#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace cutpinn::net {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Matrix2Xd = Eigen::Matrix2Xd;
using Vec2 = Eigen::Vector2d;

// Fully-connected tanh MLP on R^2 -> R. Parameters live in one flat
// vector, layer-major: weights of layer k (row-major, out x in), then its
// biases. The default architecture [2,50,50,50,50,50,1] has 10401
// parameters.
struct Network {
  std::vector<int> layer_dims;
  VectorXd params;

  int num_layers() const { return static_cast<int>(layer_dims.size()) - 1; }
  int param_count() const { return static_cast<int>(params.size()); }
};

int param_count_for(const std::vector<int>& layer_dims);

// Kaiming-uniform init: every weight and bias of a layer with fan_in
// inputs is drawn uniformly from [-1/sqrt(fan_in), +1/sqrt(fan_in)].
Network init_network(const std::vector<int>& layer_dims, std::uint64_t seed);

inline std::vector<int> default_dims() { return {2, 50, 50, 50, 50, 50, 1}; }

// How many derivative components to propagate per point.
enum class Order { value, gradient, laplacian };

struct BatchEval {
  VectorXd value;      // N
  Matrix2Xd grad;      // 2 x N, filled for Order >= gradient
  VectorXd laplacian;  // N, filled for Order == laplacian
};

// Intermediate state of a forward pass, kept so backward() can assemble
// parameter gradients without re-evaluating the network.
class Tape {
 public:
  Tape() = default;

 private:
  friend BatchEval forward(const Network&, const Matrix2Xd&, Order, Tape*);
  friend void backward(const Network&, const Tape&, const VectorXd&,
                       const VectorXd&, VectorXd&);
  int comps_ = 0;
  long n_ = 0;
  // inputs_[l]: jets entering the linear map of layer l (d_l x comps*N);
  // for l >= 1 the value block doubles as the tanh outputs of layer l-1
  std::vector<MatrixXd> inputs_;
  // full pre-activation jets [z_v | z_gx | z_gy | z_lap] per hidden layer,
  // needed for the activation adjoints; buffers are recycled across calls
  std::vector<MatrixXd> pre_act_;
  // adjoint scratch for backward(), kept here so repeated passes over the
  // same tape reuse the allocations
  mutable MatrixXd adj_in_, adj_out_;
};

// Evaluate the network at a batch of points. Spatial derivatives are
// propagated in second-order forward mode: each unit carries
// (value, d/dx, d/dy, laplacian), which is exact to rounding.
BatchEval forward(const Network& net, const Matrix2Xd& pts, Order order,
                  Tape* tape = nullptr);

// Reverse pass: accumulates into grad the parameter gradient of
//   sum_i seed_value[i] * v(x_i) + sum_i seed_laplacian[i] * lap v(x_i).
// Pass an empty vector for an unused seed. seed_laplacian requires a tape
// recorded at Order::laplacian.
void backward(const Network& net, const Tape& tape, const VectorXd& seed_value,
              const VectorXd& seed_laplacian, VectorXd& grad);

struct EvalBundle {
  double value;
  Vec2 grad;
  double laplacian;
};

EvalBundle eval_bundle(const Network& net, const Vec2& x);

// A differentiable scalar function of the network parameters. Losses and
// the test objectives implement this; the optimizers consume it.
class ParamFunction {
 public:
  virtual ~ParamFunction() = default;
  virtual double value(const Network& net) const = 0;
  virtual void add_gradient(const Network& net, VectorXd& grad) const = 0;
};

VectorXd objective_gradient(const Network& net, const ParamFunction& objective);

// Checkpoint: text file, first line the comma-separated layer dims, then
// one parameter per line in 17-significant-digit decimal.
void save_checkpoint(const std::string& path, const Network& net);
Network load_checkpoint(const std::string& path);

}  // namespace cutpinn::net
