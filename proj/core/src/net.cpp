#include "cutpinn/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cutpinn/csv.hpp"
#include "cutpinn/rng.hpp"

namespace cutpinn::net {

namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWMap = Eigen::Map<const RowMajorMatrix>;
using WMap = Eigen::Map<RowMajorMatrix>;

int comps_of(Order order) {
  switch (order) {
    case Order::value: return 1;
    case Order::gradient: return 3;
    case Order::laplacian: return 4;
  }
  return 4;
}

// flat-vector offset of layer l's weight block; biases follow the weights
int layer_offset(const std::vector<int>& dims, int l) {
  int off = 0;
  for (int k = 0; k < l; ++k) off += dims[k] * dims[k + 1] + dims[k + 1];
  return off;
}

}  // namespace

int param_count_for(const std::vector<int>& layer_dims) {
  int n = 0;
  for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
    n += layer_dims[k] * layer_dims[k + 1] + layer_dims[k + 1];
  }
  return n;
}

Network init_network(const std::vector<int>& layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) {
    throw std::invalid_argument("init_network: need at least input and output dims");
  }
  if (layer_dims.front() != 2 || layer_dims.back() != 1) {
    throw std::invalid_argument("init_network: dims must start with 2 and end with 1");
  }
  Network net;
  net.layer_dims = layer_dims;
  net.params.resize(param_count_for(layer_dims));
  Rng rng(seed, "net-init");
  int off = 0;
  for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
    const int fan_in = layer_dims[k];
    const int fan_out = layer_dims[k + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int i = 0; i < fan_out * fan_in + fan_out; ++i) {
      net.params[off++] = rng.uniform(-bound, bound);
    }
  }
  return net;
}

BatchEval forward(const Network& net, const Matrix2Xd& pts, Order order,
                  Tape* tape) {
  const int C = comps_of(order);
  const long N = pts.cols();
  const int L = net.num_layers();
  const auto& dims = net.layer_dims;

  // input jets: [ value | d/dx | d/dy | laplacian ] blocks of width N
  MatrixXd A = MatrixXd::Zero(2, C * N);
  A.leftCols(N) = pts;
  if (C >= 3) {
    A.block(0, N, 1, N).setOnes();       // dx of x-coordinate
    A.block(1, 2 * N, 1, N).setOnes();   // dy of y-coordinate
  }

  if (tape) {
    tape->comps_ = C;
    tape->n_ = N;
    // resize, never reassign: a reused Tape keeps its buffers, so the
    // swaps below recycle them instead of allocating every evaluation
    tape->inputs_.resize(L);
    tape->pre_act_.resize(L - 1);
  }

  MatrixXd Z;
  for (int l = 0; l < L; ++l) {
    const int din = dims[l], dout = dims[l + 1];
    const double* base = net.params.data() + layer_offset(dims, l);
    ConstWMap W(base, dout, din);
    Eigen::Map<const VectorXd> b(base + dout * din, dout);

    const MatrixXd* in = &A;
    if (tape) {
      tape->inputs_[l].swap(A);  // record the input jets without copying
      in = &tape->inputs_[l];
    }
    Z.resize(dout, C * N);
    Z.noalias() = W * (*in);
    Z.leftCols(N).colwise() += b;

    if (l + 1 == L) break;  // output layer is linear

    // tanh activation on the jets:
    //   V = tanh(z_v), t1 = 1 - V^2, t2 = -2 V t1
    //   gx' = t1 gx, gy' = t1 gy, lap' = t2 (gx^2 + gy^2) + t1 lap
    // tanh(z) = 1 - 2/(e^{2z} + 1): unlike Array::tanh, the double-precision
    // exp kernel is SIMD-vectorized, and the tails saturate cleanly
    // (e^{2z} -> inf gives 1, e^{2z} -> 0 gives -1)
    A.resize(dout, C * N);
    A.leftCols(N).array() =
        1.0 - 2.0 / ((2.0 * Z.leftCols(N).array()).exp() + 1.0);
    if (C >= 3) {
      // one fused pass over the jets: the blocks of A and Z are contiguous
      // spans of len doubles, so each input is streamed exactly once
      const long len = static_cast<long>(dout) * N;
      const double* v = A.data();
      const double* zgx = Z.data() + len;
      const double* zgy = Z.data() + 2 * len;
      double* agx = A.data() + len;
      double* agy = A.data() + 2 * len;
      if (C == 3) {
        for (long i = 0; i < len; ++i) {
          const double t1 = 1.0 - v[i] * v[i];
          agx[i] = t1 * zgx[i];
          agy[i] = t1 * zgy[i];
        }
      } else {
        const double* zlap = Z.data() + 3 * len;
        double* alap = A.data() + 3 * len;
        for (long i = 0; i < len; ++i) {
          const double t1 = 1.0 - v[i] * v[i];
          const double t2 = -2.0 * v[i] * t1;
          agx[i] = t1 * zgx[i];
          agy[i] = t1 * zgy[i];
          alap[i] = t2 * (zgx[i] * zgx[i] + zgy[i] * zgy[i]) + t1 * zlap[i];
        }
      }
    }
    if (tape) tape->pre_act_[l].swap(Z);
  }

  BatchEval out;
  out.value = Z.leftCols(N).transpose();
  if (C >= 3) {
    out.grad.resize(2, N);
    out.grad.row(0) = Z.middleCols(N, N);
    out.grad.row(1) = Z.middleCols(2 * N, N);
  }
  if (C == 4) out.laplacian = Z.middleCols(3 * N, N).transpose();
  return out;
}

void backward(const Network& net, const Tape& tape, const VectorXd& seed_value,
              const VectorXd& seed_laplacian, VectorXd& grad) {
  const int C = tape.comps_;
  const long N = tape.n_;
  const int L = net.num_layers();
  const auto& dims = net.layer_dims;
  if (C == 0) throw std::logic_error("backward: tape was not recorded");
  if (seed_laplacian.size() > 0 && C != 4) {
    throw std::logic_error("backward: laplacian seed needs an Order::laplacian tape");
  }
  if (grad.size() != net.param_count()) {
    grad = VectorXd::Zero(net.param_count());
  }

  // Layer adjoints ping-pong between two persistent buffers sized for the
  // widest layer, so repeated passes over a reused tape never reallocate.
  const int dmax = *std::max_element(dims.begin(), dims.end());
  MatrixXd* cur = &tape.adj_out_;
  MatrixXd* nxt = &tape.adj_in_;
  cur->resize(dmax, C * N);
  nxt->resize(dmax, C * N);

  // adjoint of the network output jets
  cur->topRows(1).setZero();
  if (seed_value.size() > 0) cur->topRows(1).leftCols(N) = seed_value.transpose();
  if (seed_laplacian.size() > 0) {
    cur->topRows(1).middleCols(3 * N, N) = seed_laplacian.transpose();
  }

  for (int l = L - 1; l >= 0; --l) {
    const int din = dims[l], dout = dims[l + 1];
    const double* base = net.params.data() + layer_offset(dims, l);
    ConstWMap W(base, dout, din);
    double* gbase = grad.data() + layer_offset(dims, l);
    WMap gW(gbase, dout, din);
    Eigen::Map<VectorXd> gb(gbase + dout * din, dout);

    const auto aZ = cur->topRows(dout);
    const MatrixXd& A = tape.inputs_[l];
    gb.noalias() += aZ.leftCols(N).rowwise().sum();
    if (l == 0) {
      gW.noalias() += aZ * A.transpose();
      break;
    }

    // the weight-gradient and input-adjoint products are chunked over
    // columns together, so each aZ panel is read for both while still in
    // cache; both products are memory-bound at this width
    auto aA = nxt->topRows(din);
    constexpr long kChunk = 256;
    const long total = C * N;
    for (long c = 0; c < total; c += kChunk) {
      const long n = std::min(kChunk, total - c);
      aA.middleCols(c, n).noalias() = W.transpose() * aZ.middleCols(c, n);
      gW.noalias() += aZ.middleCols(c, n) * A.middleCols(c, n).transpose();
    }

    // adjoint through the tanh jet of layer l-1, applied in place on aA;
    // the layer's output values are the value block of the jets recorded
    // as layer l's input
    const auto V = tape.inputs_[l].leftCols(N).array();
    if (C == 1) {
      aA.array() *= 1.0 - V.square();
    } else if (C == 3) {
      const MatrixXd& Zd = tape.pre_act_[l - 1];
      const auto zgx = Zd.middleCols(N, N).array();
      const auto zgy = Zd.middleCols(2 * N, N).array();
      const auto t1 = 1.0 - V.square();
      const auto t2 = -2.0 * V * t1;
      auto a_v = aA.leftCols(N).array();
      auto a_gx = aA.middleCols(N, N).array();
      auto a_gy = aA.middleCols(2 * N, N).array();
      // the value block is overwritten first; the later blocks only read
      // their own coefficients and the (still intact) derivative blocks
      a_v = a_v * t1 + (a_gx * zgx + a_gy * zgy) * t2;
      a_gx *= t1;
      a_gy *= t1;
    } else {
      // fused pass over the laplacian-jet adjoints: each input is streamed
      // once per column instead of once per Eigen assignment. The taped
      // blocks are contiguous spans of len doubles; aA lives in the shared
      // dmax-row scratch, hence the column stride.
      const MatrixXd& Zd = tape.pre_act_[l - 1];
      const long len = static_cast<long>(din) * N;
      const double* vp = tape.inputs_[l].data();
      const double* zb = Zd.data();
      double* a = nxt->data();
      const long stride = dmax;
      for (long j = 0; j < N; ++j) {
        const double* v = vp + j * din;
        const double* zgx = zb + len + j * din;
        const double* zgy = zb + 2 * len + j * din;
        const double* zlap = zb + 3 * len + j * din;
        double* av = a + stride * j;
        double* agx = a + stride * (N + j);
        double* agy = a + stride * (2 * N + j);
        double* alap = a + stride * (3 * N + j);
        for (int i = 0; i < din; ++i) {
          const double t1 = 1.0 - v[i] * v[i];
          const double t2 = -2.0 * v[i] * t1;
          // dt1/dz = t2, dt2/dz = -2 (t1^2 + V t2)
          const double t2p = -2.0 * (t1 * t1 + v[i] * t2);
          const double cv = av[i], cgx = agx[i], cgy = agy[i], cl = alap[i];
          av[i] = cv * t1 + (cgx * zgx[i] + cgy * zgy[i]) * t2 +
                  cl * ((zgx[i] * zgx[i] + zgy[i] * zgy[i]) * t2p +
                        zlap[i] * t2);
          agx[i] = cgx * t1 + cl * 2.0 * t2 * zgx[i];
          agy[i] = cgy * t1 + cl * 2.0 * t2 * zgy[i];
          alap[i] = cl * t1;
        }
      }
    }
    std::swap(cur, nxt);
  }
}

EvalBundle eval_bundle(const Network& net, const Vec2& x) {
  Matrix2Xd pts(2, 1);
  pts.col(0) = x;
  const BatchEval e = forward(net, pts, Order::laplacian);
  return EvalBundle{e.value[0], e.grad.col(0), e.laplacian[0]};
}

VectorXd objective_gradient(const Network& net, const ParamFunction& objective) {
  VectorXd g = VectorXd::Zero(net.param_count());
  objective.add_gradient(net, g);
  return g;
}

void save_checkpoint(const std::string& path, const Network& net) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t i = 0; i < net.layer_dims.size(); ++i) {
    if (i) out << ',';
    out << net.layer_dims[i];
  }
  out << '\n';
  for (int i = 0; i < net.param_count(); ++i) {
    out << io::format_full(net.params[i]) << '\n';
  }
}

Network load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty checkpoint: " + path);
  Network net;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) net.layer_dims.push_back(std::stoi(tok));
  const int n = param_count_for(net.layer_dims);
  net.params.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("truncated checkpoint: " + path);
    }
    net.params[i] = std::stod(line);
  }
  return net;
}

}  // namespace cutpinn::net
