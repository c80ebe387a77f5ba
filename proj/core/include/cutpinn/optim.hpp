#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace cutpinn::optim {

using Eigen::VectorXd;

struct LbfgsConfig {
  int history = 10;
  int max_outer = 2000;
  int max_eval_per_step = 10;  // objective evaluations per outer iteration
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  double grad_tol = 1e-9;      // on the max-norm of the gradient
  double loss_tol = 0.0;       // 0 disables
};

struct AdamConfig {
  int epochs = 6000;
  double lr_start = 1e-3;
  double lr_end = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class StopReason {
  max_iterations,
  gradient_tolerance,
  loss_tolerance,
  line_search_failed,
  diverged,          // non-finite objective during the run
  invalid_start,
};

struct IterRecord {
  int iter;
  double fx;
};

struct OptimResult {
  VectorXd x;
  double fx = 0.0;
  int iterations = 0;
  long evaluations = 0;
  bool diverged = false;
  StopReason reason = StopReason::max_iterations;
  std::vector<IterRecord> trace;
};

// Objective and gradient evaluated together.
using ValueGradFn = std::function<double(const VectorXd& x, VectorXd& grad)>;

// Called once per outer iteration with (iter, x, fx).
using Callback = std::function<void(int, const VectorXd&, double)>;

// Objective whose gradient can be deferred. The strong Wolfe line search
// needs directional derivatives only at trial steps that pass the
// sufficient-decrease test, so an expensive reverse pass can be skipped for
// rejected probes. gradient() is called at most once per value_at() and
// always refers to the most recent value_at() point.
class DeferredObjective {
 public:
  virtual ~DeferredObjective() = default;
  virtual double value_at(const VectorXd& x) = 0;
  virtual void gradient(VectorXd& grad) = 0;
};

// Two-loop-recursion L-BFGS with a strong Wolfe bracketing line search.
// Accepted steps always satisfy the Armijo condition; curvature pairs with
// s'y <= 1e-10 |s||y| are skipped. Non-finite objectives are reported via
// result.diverged, not thrown.
OptimResult minimize_lbfgs(const ValueGradFn& fn, const VectorXd& x0,
                           const LbfgsConfig& cfg, const Callback& callback = {});

// As above, but probes rejected by the line search never pay for a
// gradient evaluation.
OptimResult minimize_lbfgs(DeferredObjective& objective, const VectorXd& x0,
                           const LbfgsConfig& cfg, const Callback& callback = {});

// Spec-shaped overload with separate objective and gradient functions.
OptimResult minimize_lbfgs(const std::function<double(const VectorXd&)>& objective,
                           const std::function<VectorXd(const VectorXd&)>& grad_fn,
                           const VectorXd& x0, const LbfgsConfig& cfg,
                           const Callback& callback = {});

// learning rate at a given epoch: geometric decay lr_start -> lr_end
double adam_lr(const AdamConfig& cfg, int epoch);

OptimResult minimize_adam(const ValueGradFn& fn, const VectorXd& x0,
                          const AdamConfig& cfg, const Callback& callback = {});

OptimResult minimize_adam(const std::function<double(const VectorXd&)>& objective,
                          const std::function<VectorXd(const VectorXd&)>& grad_fn,
                          const VectorXd& x0, const AdamConfig& cfg,
                          const Callback& callback = {});

}  // namespace cutpinn::optim
