#include <benchmark/benchmark.h>

#include "cutpinn/geometry.hpp"
#include "cutpinn/losses.hpp"
#include "cutpinn/net.hpp"
#include "cutpinn/norms.hpp"
#include "cutpinn/rng.hpp"

namespace {

using namespace cutpinn;

losses::TrainingData make_data(int m_int, int m_bnd) {
  const auto dom = geom::make_disk({0.5, 0.5}, 0.4);
  geom::CollocationSet colloc;
  colloc.interior = geom::sample_interior_rejection(dom, m_int, 0);
  colloc.boundary = geom::sample_boundary(
      dom.boundary, m_bnd, geom::BoundaryMode::equispaced_arclength, 0);
  return losses::make_training_data(colloc);
}

void bm_forward_laplacian(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto data = make_data(m, 30);
  const auto nn = net::init_network(net::default_dims(), 1);
  for (auto _ : state) {
    const auto out = net::forward(nn, data.interior, net::Order::laplacian);
    benchmark::DoNotOptimize(out.laplacian.sum());
  }
  state.SetItemsProcessed(state.iterations() * m);
}

void bm_loss_gradient(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto data = make_data(m, 30);
  const auto nn = net::init_network(net::default_dims(), 1);
  net::VectorXd grad;
  for (auto _ : state) {
    const auto out =
        losses::evaluate_with_gradient(losses::Kind::consistent_2, nn, data, grad);
    benchmark::DoNotOptimize(out.total + grad.sum());
  }
  state.SetItemsProcessed(state.iterations() * m);
}

void bm_h12_seminorm(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto dom = geom::make_disk({0.5, 0.5}, 0.4);
  norms::BoundaryResidual res;
  res.z = geom::sample_boundary(dom.boundary, m,
                                geom::BoundaryMode::equispaced_arclength, 0);
  Rng rng(2, "bench-res");
  res.r.resize(m);
  for (double& r : res.r) r = rng.uniform(-1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(norms::discrete_h12_semi(res));
  }
  state.SetItemsProcessed(state.iterations() * m * m);
}

BENCHMARK(bm_forward_laplacian)->Arg(400)->Arg(1600);
BENCHMARK(bm_loss_gradient)->Arg(400)->Arg(1600);
BENCHMARK(bm_h12_seminorm)->Arg(30)->Arg(120);

}  // namespace

BENCHMARK_MAIN();
