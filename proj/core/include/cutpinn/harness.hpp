#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cutpinn/geometry.hpp"
#include "cutpinn/losses.hpp"
#include "cutpinn/net.hpp"
#include "cutpinn/optim.hpp"
#include "cutpinn/rng.hpp"

namespace cutpinn::harness {

using geom::Vec2;

// Fixed evaluation seed, distinct from every training stream, so error
// tables are comparable across losses and experiments.
inline constexpr std::uint64_t kEvalSeed = 0x517cc1b727220a95ULL;

// Stream derivation: every experiment owns (master_seed, tag, run_index)
// and no two runs share an RNG stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index) {
  return master ^ Rng::hash_tag(tag) ^ (0x9e3779b97f4a7c15ULL * (index + 1));
}

enum class DomainKind { disk, flower, unit_disk };
std::string name(DomainKind d);
DomainKind domain_from_name(const std::string& s);

// disk: radius-0.4 circle about disk_center (paper default (0.5,0.5));
// flower: five-petal polar curve about (0.5,0.5); unit_disk: radius 1
// about the origin.
geom::LevelSetDomain make_domain(DomainKind kind,
                                 const Vec2& disk_center = Vec2(0.5, 0.5));

struct ExperimentConfig {
  DomainKind domain = DomainKind::disk;
  Vec2 disk_center{0.5, 0.5};  // only used by DomainKind::disk
  losses::Kind loss = losses::Kind::consistent_2;
  int m_int = 900;
  int m_bnd = 0;  // 0 means floor(sqrt(m_int))
  geom::BoundaryMode boundary_mode = geom::BoundaryMode::equispaced_arclength;
  std::uint64_t seed = 0;
  std::string experiment_tag = "train";
  std::uint64_t run_index = 0;
  optim::LbfgsConfig lbfgs;
  bool use_adam = false;  // Adam warm start, then L-BFGS refinement
  optim::AdamConfig adam;
  int refine_iters = 500;  // L-BFGS outer iterations after Adam
  int eval_points = 10000;
  std::uint64_t eval_seed = kEvalSeed;
  int h1_cadence = 25;  // 0: evaluate the H1 error only at the endpoints

  int resolved_m_bnd() const;
  void validate() const;  // throws std::invalid_argument
};

struct ErrorReport {
  double h1_abs = 0.0, h1_rel = 0.0;
  double l2_abs = 0.0, l2_rel = 0.0;
  std::uint64_t eval_seed = 0;
  int eval_count = 0;
};

// Pointwise evaluator of an approximate solution; lets oracles (exact u,
// zero function) stand in for a network in tests.
using FieldFn = std::function<net::EvalBundle(const Vec2&)>;

// Monte Carlo H1/L2 error against the manufactured solution over n_eval
// rejection-sampled interior points.
ErrorReport h1_error(const FieldFn& v, const geom::LevelSetDomain& domain,
                     int n_eval, std::uint64_t eval_seed);
ErrorReport h1_error(const net::Network& v, const geom::LevelSetDomain& domain,
                     int n_eval, std::uint64_t eval_seed);

struct TraceEntry {
  int iter = 0;
  double loss_total = 0.0;
  // Breakdown and h1 are NaN except at iteration 0, the final iteration,
  // and every h1_cadence iterations.
  double interior = 0.0, boundary_l2 = 0.0, boundary_semi = 0.0;
  double h1 = 0.0;
};

struct TrainTrace {
  std::vector<TraceEntry> entries;
  net::Network net;
  bool diverged = false;
  optim::StopReason reason = optim::StopReason::max_iterations;
  int iterations = 0;
  double wall_seconds = 0.0;
  ErrorReport final_error;  // NaN-filled when diverged
  geom::CollocationSet colloc;
};

// One full training run: seeded collocation, data precompute, network
// init, optimization, trace with H1 checkpoints. Divergence (non-finite
// loss or a degenerate boundary kernel) is reported in the trace, not
// thrown.
TrainTrace run_training(const ExperimentConfig& cfg);

// Writes trace.csv, checkpoint.txt and manifest.txt under out_dir.
void write_train_outputs(const std::string& out_dir,
                         const ExperimentConfig& cfg, const TrainTrace& trace);

// Ordinary least squares slope of log(err) vs log(m); NaN entries skipped.
double fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs);

struct RunResult {
  losses::Kind loss = losses::Kind::standard;
  int m_int = 0, m_bnd = 0;
  std::uint64_t seed = 0;
  ErrorReport err;
  double final_loss = 0.0;
  bool diverged = false;
  int iterations = 0;
  double wall_seconds = 0.0;
};

struct ConvergenceOptions {
  DomainKind domain = DomainKind::disk;
  std::vector<int> m_list = {100, 400, 900, 1600};
  int num_seeds = 10;
  std::vector<losses::Kind> losses = {
      losses::Kind::standard, losses::Kind::weighted,
      losses::Kind::consistent_gamma, losses::Kind::consistent_2};
  int iters = 2000;
  std::uint64_t master_seed = 0;
  std::string out_dir;
  bool verbose = false;
  // worker threads for the (loss, m, seed) sweep; 0 picks the hardware
  // concurrency. Outputs are identical for any thread count.
  int threads = 0;
};

struct ConvergenceResult {
  std::vector<int> m_list;
  std::vector<RunResult> runs;
  // mean of final h1_abs over non-diverged seeds; NaN if every seed diverged
  double mean_h1(losses::Kind loss, int m_int) const;
  // OLS slope over all m in m_list except the smallest
  double slope(losses::Kind loss) const;
};

// Experiment 1 / 4: (loss, m, seed) sweep with per-run, summary and slope
// CSVs.
ConvergenceResult experiment_convergence(const ConvergenceOptions& opt);

struct MovingDiskOptions {
  double c_begin = 0.2, c_end = 0.8, c_step = 0.005;
  int m_int = 900;
  int iters = 2000;
  std::vector<losses::Kind> losses = {losses::Kind::standard,
                                      losses::Kind::consistent_gamma,
                                      losses::Kind::consistent_2};
  std::uint64_t master_seed = 0;
  std::string out_dir;
  bool verbose = false;
};

struct MovingDiskResult {
  struct Row {
    losses::Kind loss;
    double c;
    double h1;  // NaN when diverged
    bool diverged;
  };
  struct Stats {
    double mean = 0.0, stddev = 0.0;
    int nan_count = 0, total = 0;
  };
  std::vector<Row> rows;
  Stats stats(losses::Kind loss) const;
};

// Experiment 3: disk centre slides along the anti-diagonal (c, c);
// divergence is tallied as data.
MovingDiskResult experiment_moving_disk(const MovingDiskOptions& opt);

struct DynamicsOptions {
  int m_int = 900;
  int iters = 2000;
  int h1_cadence = 25;
  std::uint64_t master_seed = 0;
  std::string out_dir;
  bool verbose = false;
};

struct DynamicsResult {
  // all four losses trained from one shared initialization/collocation
  std::map<losses::Kind, TrainTrace> traces;
};

// Experiment 2: per-iteration loss and H1 error for the four losses.
DynamicsResult experiment_dynamics(const DynamicsOptions& opt);

struct FieldOptions {
  DomainKind domain = DomainKind::disk;
  int m_int = 900;
  int iters = 2000;
  int grid_n = 101;
  std::uint64_t master_seed = 0;
  std::string out_dir;
  bool verbose = false;
};

struct FieldResult {
  double mean_err_std = 0.0, mean_err_c2 = 0.0;
  int inside_count = 0, grid_count = 0;
};

// Experiment 5: trains std and c2 on the shared seed-0 collocation and
// writes the pointwise-error grid.
FieldResult experiment_field(const FieldOptions& opt);

// Grid writer for pre-trained networks (x,y,inside,u,v_std,v_c2,err_std,err_c2).
FieldResult write_field_grid(const geom::LevelSetDomain& domain,
                             const net::Network& v_std,
                             const net::Network& v_c2, int grid_n,
                             const std::string& out_dir);

struct NonuniformOptions {
  int m_int = 900;
  int m_bnd = 30;
  int adam_epochs = 6000;
  int refine_iters = 500;
  std::uint64_t master_seed = 0;
  std::string out_dir;
  bool verbose = false;
};

struct NonuniformResult {
  struct Entry {
    double l2_rel = 0.0, h1_rel = 0.0;
    bool diverged = false;
  };
  Entry loss_std, loss_c2;
  // max/min arc gap of the iid boundary sample (equispaced would give 1)
  double gap_ratio = 0.0;
};

// Experiment 6: unit disk at the origin, iid boundary angles, Adam then
// L-BFGS refinement, for std and c2.
NonuniformResult experiment_nonuniform(const NonuniformOptions& opt);

}  // namespace cutpinn::harness
