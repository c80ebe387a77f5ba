#include "cutpinn/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "cutpinn/manufactured.hpp"
#include "cutpinn/norms.hpp"

namespace cutpinn::losses {

using net::VectorXd;

std::string name(Kind kind) {
  switch (kind) {
    case Kind::standard: return "std";
    case Kind::weighted: return "wstd";
    case Kind::consistent_gamma: return "cgamma";
    case Kind::consistent_2: return "c2";
  }
  return "?";
}

Kind kind_from_name(const std::string& s) {
  if (s == "std") return Kind::standard;
  if (s == "wstd") return Kind::weighted;
  if (s == "cgamma") return Kind::consistent_gamma;
  if (s == "c2") return Kind::consistent_2;
  throw std::invalid_argument("unknown loss kind: " + s);
}

TrainingData make_training_data(const geom::CollocationSet& colloc) {
  TrainingData d;
  const int mi = static_cast<int>(colloc.interior.size());
  const int mb = static_cast<int>(colloc.boundary.size());
  d.interior.resize(2, mi);
  d.f.resize(mi);
  for (int i = 0; i < mi; ++i) {
    d.interior.col(i) = colloc.interior[i];
    d.f[i] = manufactured::f(colloc.interior[i]);
  }
  d.boundary.resize(2, mb);
  d.g.resize(mb);
  for (int j = 0; j < mb; ++j) {
    d.boundary.col(j) = colloc.boundary[j];
    d.g[j] = manufactured::g(colloc.boundary[j]);
  }
  d.gamma = mi >= 2 ? 1.0 + 1.0 / std::log(static_cast<double>(mi)) : 2.0;
  return d;
}

double boundary_weight(int m_bnd, int dim) {
  return std::pow(static_cast<double>(m_bnd),
                  (2.0 - dim) / (dim - 1.0));
}

namespace {

norms::BoundaryResidual boundary_residual(const TrainingData& data,
                                          const VectorXd& v_boundary) {
  norms::BoundaryResidual res;
  const int m = static_cast<int>(data.g.size());
  res.r.resize(m);
  res.z.resize(m);
  for (int j = 0; j < m; ++j) {
    res.r[j] = data.g[j] - v_boundary[j];
    res.z[j] = data.boundary.col(j);
  }
  return res;
}

// interior term and, optionally, d(term)/d(residual_i)
double interior_term(Kind kind, const VectorXd& resid, double gamma,
                     VectorXd* dres) {
  const int mi = static_cast<int>(resid.size());
  const double inv_m = 1.0 / mi;
  if (kind == Kind::consistent_gamma) {
    // [ (1/m) sum |r|^gamma ]^{2/gamma}
    double s = 0.0;
    for (int i = 0; i < mi; ++i) s += std::pow(std::abs(resid[i]), gamma);
    s *= inv_m;
    const double term = std::pow(s, 2.0 / gamma);
    if (dres) {
      dres->resize(mi);
      const double outer = s > 0.0 ? std::pow(s, 2.0 / gamma - 1.0) : 0.0;
      for (int i = 0; i < mi; ++i) {
        const double a = std::abs(resid[i]);
        (*dres)[i] = a > 0.0
            ? 2.0 * outer * std::pow(a, gamma - 1.0) *
                  (resid[i] > 0.0 ? 1.0 : -1.0) * inv_m
            : 0.0;
      }
    }
    return term;
  }
  const double term = resid.squaredNorm() * inv_m;
  if (dres) *dres = 2.0 * inv_m * resid;
  return term;
}

}  // namespace

LossBreakdown evaluate(Kind kind, const net::Network& net,
                       const TrainingData& data) {
  LossBreakdown out;
  out.kind = kind;

  const net::BatchEval ei =
      net::forward(net, data.interior, net::Order::laplacian);
  const VectorXd resid = ei.laplacian + data.f;
  out.interior = interior_term(kind, resid, data.gamma, nullptr);

  const net::BatchEval eb = net::forward(net, data.boundary, net::Order::value);
  const norms::BoundaryResidual bres = boundary_residual(data, eb.value);
  out.boundary_l2 = norms::discrete_l2_boundary(bres);
  if (kind == Kind::weighted) out.boundary_l2 *= boundary_weight(bres.r.size());
  if (is_consistent(kind)) {
    out.boundary_semi = norms::discrete_h12_semi(bres);
  }
  out.total = out.interior + out.boundary_l2 + out.boundary_semi;
  return out;
}

LossBreakdown evaluate_forward(Kind kind, const net::Network& net,
                               const TrainingData& data, Workspace& ws,
                               PendingGradient& pending) {
  LossBreakdown out;
  out.kind = kind;

  // interior: seed the laplacian adjoints
  const net::BatchEval ei =
      net::forward(net, data.interior, net::Order::laplacian, &ws.interior);
  const VectorXd resid = ei.laplacian + data.f;
  out.interior = interior_term(kind, resid, data.gamma, &pending.seed_lap);

  // boundary: seed the value adjoints; r_j = g_j - v_j so dr/dv = -1
  const net::BatchEval eb =
      net::forward(net, data.boundary, net::Order::value, &ws.boundary);
  const norms::BoundaryResidual bres = boundary_residual(data, eb.value);
  const int m = static_cast<int>(bres.r.size());
  out.boundary_l2 = norms::discrete_l2_boundary(bres);
  const double w = kind == Kind::weighted ? boundary_weight(m) : 1.0;
  if (kind == Kind::weighted) out.boundary_l2 *= w;
  pending.seed_val.resize(m);
  for (int j = 0; j < m; ++j) pending.seed_val[j] = -2.0 * w * bres.r[j] / m;
  if (is_consistent(kind)) {
    out.boundary_semi = norms::discrete_h12_semi(bres);
    const double inv_m2 = 1.0 / (static_cast<double>(m) * m);
    for (int k = 0; k < m; ++k) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) {
        if (j == k) continue;
        acc += (bres.r[k] - bres.r[j]) /
               (bres.z[k] - bres.z[j]).squaredNorm();
      }
      pending.seed_val[k] += -4.0 * inv_m2 * acc;
    }
  }

  out.total = out.interior + out.boundary_l2 + out.boundary_semi;
  return out;
}

void evaluate_backward(const net::Network& net, const Workspace& ws,
                       const PendingGradient& pending, VectorXd& grad) {
  grad = VectorXd::Zero(net.param_count());
  net::backward(net, ws.interior, VectorXd(), pending.seed_lap, grad);
  net::backward(net, ws.boundary, pending.seed_val, VectorXd(), grad);
}

LossBreakdown evaluate_with_gradient(Kind kind, const net::Network& net,
                                     const TrainingData& data,
                                     VectorXd& grad, Workspace* ws) {
  Workspace local;
  if (!ws) ws = &local;
  PendingGradient pending;
  const LossBreakdown out = evaluate_forward(kind, net, data, *ws, pending);
  evaluate_backward(net, *ws, pending, grad);
  return out;
}

void LossObjective::add_gradient(const net::Network& net,
                                 VectorXd& grad) const {
  VectorXd g;
  evaluate_with_gradient(kind_, net, data_, g);
  grad += g;
}

}  // namespace cutpinn::losses
