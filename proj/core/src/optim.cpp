#include "cutpinn/optim.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace cutpinn::optim {

namespace {

bool finite(double v) { return std::isfinite(v); }

struct Probe {
  double alpha = 0.0;
  double fx = std::numeric_limits<double>::infinity();
  VectorXd grad;
  bool has_grad = false;
  bool valid = false;
};

// Strong Wolfe bracketing line search (bracket + zoom with bisection).
// Evaluations are capped; on exhaustion the best Armijo-satisfying probe
// is returned. Returns an invalid Probe when no Armijo point was found.
// Gradients are requested only for probes that pass the Armijo test; any
// probe this search can return carries one.
class LineSearch {
 public:
  LineSearch(DeferredObjective& obj, const VectorXd& x, const VectorXd& p,
             double phi0, double dphi0, const LbfgsConfig& cfg, long& evals)
      : obj_(obj), x_(x), p_(p), phi0_(phi0), dphi0_(dphi0), cfg_(cfg),
        evals_(evals) {}

  Probe run(double alpha_init) {
    double alpha_prev = 0.0;
    double phi_prev = phi0_;
    double alpha = alpha_init;
    for (int budget = cfg_.max_eval_per_step; budget > 0;) {
      Probe pr = eval(alpha);
      --budget;
      if (!pr.valid) {  // non-finite: step too far, shrink hard
        alpha = 0.5 * (alpha_prev + alpha);
        continue;
      }
      if (pr.fx > phi0_ + cfg_.wolfe_c1 * alpha * dphi0_ ||
          (alpha_prev > 0.0 && pr.fx >= phi_prev)) {
        return zoom(alpha_prev, phi_prev, alpha, budget);
      }
      ensure_grad(pr);
      const double dphi = pr.grad.dot(p_);
      if (std::abs(dphi) <= -cfg_.wolfe_c2 * dphi0_) return pr;  // strong Wolfe
      if (dphi >= 0.0) return zoom(alpha, pr.fx, alpha_prev, budget);
      alpha_prev = alpha;
      phi_prev = pr.fx;
      alpha *= 2.0;
    }
    return best_;
  }

 private:
  Probe eval(double alpha) {
    Probe pr;
    pr.alpha = alpha;
    pr.fx = obj_.value_at(x_ + alpha * p_);
    ++evals_;
    pr.valid = finite(pr.fx);
    if (pr.valid && pr.fx <= phi0_ + cfg_.wolfe_c1 * alpha * dphi0_ &&
        pr.fx < best_.fx) {
      // the gradient must be fetched while pr is still the most recent
      // evaluation, since best_ may outlive later probes
      ensure_grad(pr);
      best_ = pr;
    }
    return pr;
  }

  // Fetch the gradient for the most recent probe returned by eval().
  void ensure_grad(Probe& pr) {
    if (pr.has_grad) return;
    pr.grad.resize(x_.size());
    obj_.gradient(pr.grad);
    pr.has_grad = true;
  }

  Probe zoom(double lo, double phi_lo, double hi, int budget) {
    int unanchored_fails = 0;
    while (budget-- > 0) {
      // bisect by default; once repeated Armijo failures show the trial step
      // is orders of magnitude too long, backtrack geometrically so the
      // eval budget can still reach an acceptable step
      const double alpha = (lo == 0.0 && unanchored_fails >= 1)
                               ? 0.1 * hi
                               : 0.5 * (lo + hi);
      Probe pr = eval(alpha);
      if (!pr.valid || pr.fx > phi0_ + cfg_.wolfe_c1 * alpha * dphi0_ ||
          pr.fx >= phi_lo) {
        hi = alpha;
        if (lo == 0.0) ++unanchored_fails;
        continue;
      }
      ensure_grad(pr);
      const double dphi = pr.grad.dot(p_);
      if (std::abs(dphi) <= -cfg_.wolfe_c2 * dphi0_) return pr;
      if (dphi * (hi - lo) >= 0.0) hi = lo;
      lo = alpha;
      phi_lo = pr.fx;
    }
    return best_;
  }

  DeferredObjective& obj_;
  const VectorXd& x_;
  const VectorXd& p_;
  double phi0_, dphi0_;
  const LbfgsConfig& cfg_;
  long& evals_;
  Probe best_;
};

// Adapter for objectives that compute value and gradient in one shot: the
// gradient of the latest evaluation is cached and handed out on request.
class FusedDeferred final : public DeferredObjective {
 public:
  explicit FusedDeferred(const ValueGradFn& fn, Eigen::Index n)
      : fn_(fn), grad_(n) {}
  double value_at(const VectorXd& x) override { return fn_(x, grad_); }
  void gradient(VectorXd& grad) override { grad = grad_; }

 private:
  const ValueGradFn& fn_;
  VectorXd grad_;
};

}  // namespace

OptimResult minimize_lbfgs(DeferredObjective& objective, const VectorXd& x0,
                           const LbfgsConfig& cfg, const Callback& callback) {
  if (!(cfg.wolfe_c1 > 0.0 && cfg.wolfe_c1 < cfg.wolfe_c2 && cfg.wolfe_c2 < 1.0)) {
    throw std::invalid_argument("minimize_lbfgs: need 0 < c1 < c2 < 1");
  }
  if (cfg.history < 1) {
    throw std::invalid_argument("minimize_lbfgs: history must be >= 1");
  }

  OptimResult res;
  res.x = x0;
  res.fx = objective.value_at(res.x);
  res.evaluations = 1;
  if (!finite(res.fx)) {
    throw std::invalid_argument("minimize_lbfgs: objective not finite at x0");
  }
  VectorXd g(x0.size());
  objective.gradient(g);

  struct Pair { VectorXd s, y; double rho; };
  std::deque<Pair> mem;
  std::vector<double> alpha_buf;

  for (int k = 0; k < cfg.max_outer; ++k) {
    if (!g.allFinite()) {
      res.diverged = true;
      res.reason = StopReason::diverged;
      break;
    }
    const double gmax = g.cwiseAbs().maxCoeff();
    if (gmax <= cfg.grad_tol) {
      res.reason = StopReason::gradient_tolerance;
      break;
    }

    // two-loop recursion
    VectorXd p = -g;
    alpha_buf.assign(mem.size(), 0.0);
    for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
      alpha_buf[i] = mem[i].rho * mem[i].s.dot(p);
      p -= alpha_buf[i] * mem[i].y;
    }
    if (!mem.empty()) {
      const auto& last = mem.back();
      p *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
      const double beta = mem[i].rho * mem[i].y.dot(p);
      p += (alpha_buf[i] - beta) * mem[i].s;
    }

    double dphi0 = g.dot(p);
    if (dphi0 >= 0.0) {  // not a descent direction: restart from steepest
      mem.clear();
      p = -g;
      dphi0 = g.dot(p);
    }

    const bool steepest = mem.empty();
    const double alpha_init = steepest ? 1.0 / gmax : 1.0;
    LineSearch ls(objective, res.x, p, res.fx, dphi0, cfg, res.evaluations);
    const Probe acc = ls.run(alpha_init);
    if (!acc.valid) {
      if (!steepest) {  // drop the stale curvature model and retry
        mem.clear();
        continue;
      }
      res.reason = StopReason::line_search_failed;
      break;
    }

    VectorXd s = acc.alpha * p;
    VectorXd y = acc.grad - g;
    res.x += s;
    res.fx = acc.fx;
    g = acc.grad;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      mem.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(mem.size()) > cfg.history) mem.pop_front();
    }

    res.iterations = k + 1;
    res.trace.push_back({k + 1, res.fx});
    if (callback) callback(k + 1, res.x, res.fx);

    if (!finite(res.fx)) {
      res.diverged = true;
      res.reason = StopReason::diverged;
      break;
    }
    if (cfg.loss_tol > 0.0 && res.fx <= cfg.loss_tol) {
      res.reason = StopReason::loss_tolerance;
      break;
    }
  }
  return res;
}

OptimResult minimize_lbfgs(const ValueGradFn& fn, const VectorXd& x0,
                           const LbfgsConfig& cfg, const Callback& callback) {
  FusedDeferred obj(fn, x0.size());
  return minimize_lbfgs(obj, x0, cfg, callback);
}

OptimResult minimize_lbfgs(const std::function<double(const VectorXd&)>& objective,
                           const std::function<VectorXd(const VectorXd&)>& grad_fn,
                           const VectorXd& x0, const LbfgsConfig& cfg,
                           const Callback& callback) {
  return minimize_lbfgs(
      [&](const VectorXd& x, VectorXd& grad) {
        grad = grad_fn(x);
        return objective(x);
      },
      x0, cfg, callback);
}

double adam_lr(const AdamConfig& cfg, int epoch) {
  if (cfg.epochs <= 1) return cfg.lr_start;
  const double t = static_cast<double>(epoch) / (cfg.epochs - 1);
  return cfg.lr_start * std::pow(cfg.lr_end / cfg.lr_start, t);
}

OptimResult minimize_adam(const ValueGradFn& fn, const VectorXd& x0,
                          const AdamConfig& cfg, const Callback& callback) {
  if (cfg.epochs < 1) throw std::invalid_argument("minimize_adam: epochs >= 1");
  if (cfg.lr_end > cfg.lr_start) {
    throw std::invalid_argument("minimize_adam: lr_end must be <= lr_start");
  }
  OptimResult res;
  res.x = x0;
  VectorXd g(x0.size());
  res.fx = fn(res.x, g);
  res.evaluations = 1;
  if (!finite(res.fx)) {
    throw std::invalid_argument("minimize_adam: objective not finite at x0");
  }
  VectorXd m = VectorXd::Zero(x0.size());
  VectorXd v = VectorXd::Zero(x0.size());
  for (int e = 0; e < cfg.epochs; ++e) {
    if (!g.allFinite() || !finite(res.fx)) {
      res.diverged = true;
      res.reason = StopReason::diverged;
      break;
    }
    const double lr = adam_lr(cfg, e);
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(cfg.beta1, e + 1);
    const double bc2 = 1.0 - std::pow(cfg.beta2, e + 1);
    res.x.array() -= lr * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + cfg.eps);
    res.fx = fn(res.x, g);
    ++res.evaluations;
    res.iterations = e + 1;
    res.trace.push_back({e + 1, res.fx});
    if (callback) callback(e + 1, res.x, res.fx);
  }
  return res;
}

OptimResult minimize_adam(const std::function<double(const VectorXd&)>& objective,
                          const std::function<VectorXd(const VectorXd&)>& grad_fn,
                          const VectorXd& x0, const AdamConfig& cfg,
                          const Callback& callback) {
  return minimize_adam(
      [&](const VectorXd& x, VectorXd& grad) {
        grad = grad_fn(x);
        return objective(x);
      },
      x0, cfg, callback);
}

}  // namespace cutpinn::optim
