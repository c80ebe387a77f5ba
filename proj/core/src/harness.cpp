#include "cutpinn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "cutpinn/csv.hpp"
#include "cutpinn/manufactured.hpp"
#include "cutpinn/norms.hpp"

namespace cutpinn::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string path_join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

ErrorReport nan_report(std::uint64_t eval_seed, int n) {
  ErrorReport r;
  r.h1_abs = r.h1_rel = r.l2_abs = r.l2_rel = kNaN;
  r.eval_seed = eval_seed;
  r.eval_count = n;
  return r;
}

struct ErrAccum {
  double err_l2 = 0.0, err_h1 = 0.0, ref_l2 = 0.0, ref_h1 = 0.0;
  void add(double ue, const Vec2& gue, double ve, const Vec2& gve) {
    const double dv = ue - ve;
    const double dg = (gue - gve).squaredNorm();
    err_l2 += dv * dv;
    err_h1 += dv * dv + dg;
    ref_l2 += ue * ue;
    ref_h1 += ue * ue + gue.squaredNorm();
  }
  ErrorReport finish(double area, int n, std::uint64_t seed) const {
    const double scale = area / n;
    ErrorReport r;
    r.l2_abs = std::sqrt(scale * err_l2);
    r.h1_abs = std::sqrt(scale * err_h1);
    r.l2_rel = r.l2_abs / std::sqrt(scale * ref_l2);
    r.h1_rel = r.h1_abs / std::sqrt(scale * ref_h1);
    r.eval_seed = seed;
    r.eval_count = n;
    return r;
  }
};

void write_trace_csv(const std::string& path, const TrainTrace& trace) {
  io::CsvWriter csv(path, "iter,loss_total,interior,boundary_l2,boundary_semi,h1");
  for (const TraceEntry& e : trace.entries) {
    csv.row({std::to_string(e.iter), io::format_full(e.loss_total),
             io::format_full(e.interior), io::format_full(e.boundary_l2),
             io::format_full(e.boundary_semi), io::format_full(e.h1)});
  }
}

std::string loss_list_string(const std::vector<losses::Kind>& kinds) {
  std::string s;
  for (const auto k : kinds) {
    if (!s.empty()) s += ",";
    s += losses::name(k);
  }
  return s;
}

}  // namespace

std::string name(DomainKind d) {
  switch (d) {
    case DomainKind::disk: return "disk";
    case DomainKind::flower: return "flower";
    case DomainKind::unit_disk: return "unit-disk";
  }
  return "?";
}

DomainKind domain_from_name(const std::string& s) {
  if (s == "disk") return DomainKind::disk;
  if (s == "flower") return DomainKind::flower;
  if (s == "unit-disk" || s == "unit_disk") return DomainKind::unit_disk;
  throw std::invalid_argument("unknown domain: " + s);
}

geom::LevelSetDomain make_domain(DomainKind kind, const Vec2& disk_center) {
  switch (kind) {
    case DomainKind::disk: return geom::make_disk(disk_center, 0.4);
    case DomainKind::flower:
      return geom::make_flower(Vec2(0.5, 0.5), 0.12, 5, 3.0);
    case DomainKind::unit_disk: return geom::make_disk(Vec2(0.0, 0.0), 1.0);
  }
  throw std::invalid_argument("unknown domain kind");
}

int ExperimentConfig::resolved_m_bnd() const {
  return m_bnd > 0 ? m_bnd
                   : static_cast<int>(
                         std::floor(std::sqrt(static_cast<double>(m_int))));
}

void ExperimentConfig::validate() const {
  if (m_int < 1) throw std::invalid_argument("m_int must be >= 1");
  if (resolved_m_bnd() < 2) throw std::invalid_argument("m_bnd must be >= 2");
  if (eval_points < 1) throw std::invalid_argument("eval_points must be >= 1");
  if (lbfgs.max_outer < 0) throw std::invalid_argument("iters must be >= 0");
  if (h1_cadence < 0) throw std::invalid_argument("h1_cadence must be >= 0");
  if (refine_iters < 0) throw std::invalid_argument("refine_iters must be >= 0");
}

ErrorReport h1_error(const FieldFn& v, const geom::LevelSetDomain& domain,
                     int n_eval, std::uint64_t eval_seed) {
  const auto pts = geom::sample_interior_rejection(domain, n_eval, eval_seed);
  ErrAccum acc;
  for (const Vec2& p : pts) {
    const auto ref = manufactured::eval(p);
    const net::EvalBundle b = v(p);
    acc.add(ref.u, ref.grad_u, b.value, b.grad);
  }
  return acc.finish(domain.area, n_eval, eval_seed);
}

ErrorReport h1_error(const net::Network& v, const geom::LevelSetDomain& domain,
                     int n_eval, std::uint64_t eval_seed) {
  const auto pts = geom::sample_interior_rejection(domain, n_eval, eval_seed);
  Eigen::Matrix2Xd X(2, n_eval);
  for (int i = 0; i < n_eval; ++i) X.col(i) = pts[i];
  const net::BatchEval be = net::forward(v, X, net::Order::gradient);
  ErrAccum acc;
  for (int i = 0; i < n_eval; ++i) {
    const auto ref = manufactured::eval(pts[i]);
    acc.add(ref.u, ref.grad_u, be.value[i], be.grad.col(i));
  }
  return acc.finish(domain.area, n_eval, eval_seed);
}

namespace {

// Records per-iteration trace entries; breakdown and H1 checkpoints are
// filled at iteration 0, on the cadence, and at the final iteration.
struct TraceRecorder {
  const ExperimentConfig& cfg;
  const geom::LevelSetDomain& domain;
  const losses::TrainingData& data;
  net::Network scratch;
  TrainTrace& trace;
  int iter_offset = 0;

  void record(int iter, const optim::VectorXd& x, double fx, bool force_full) {
    TraceEntry e;
    e.iter = iter + iter_offset;
    e.loss_total = fx;
    e.interior = e.boundary_l2 = e.boundary_semi = e.h1 = kNaN;
    const bool full =
        force_full || (cfg.h1_cadence > 0 && e.iter % cfg.h1_cadence == 0);
    if (full && x.allFinite()) fill_full(e, x);
    trace.entries.push_back(e);
  }

  void fill_full(TraceEntry& e, const optim::VectorXd& x) {
    scratch.params = x;
    const auto bd = losses::evaluate(cfg.loss, scratch, data);
    e.interior = bd.interior;
    e.boundary_l2 = bd.boundary_l2;
    e.boundary_semi = bd.boundary_semi;
    e.h1 = h1_error(scratch, domain, cfg.eval_points, cfg.eval_seed).h1_abs;
  }
};

// Training loss as a deferred objective: the L-BFGS line search requests
// gradients only for steps that pass its sufficient-decrease test, so
// rejected probes skip the reverse pass. Owns the recycled tape workspace.
class TrainingObjective final : public optim::DeferredObjective {
 public:
  TrainingObjective(losses::Kind kind, net::Network& work,
                    const losses::TrainingData& data)
      : kind_(kind), work_(work), data_(data) {}

  double value_at(const optim::VectorXd& x) override {
    work_.params = x;
    return losses::evaluate_forward(kind_, work_, data_, ws_, pending_).total;
  }

  void gradient(optim::VectorXd& grad) override {
    losses::evaluate_backward(work_, ws_, pending_, grad);
  }

 private:
  losses::Kind kind_;
  net::Network& work_;
  const losses::TrainingData& data_;
  losses::Workspace ws_;
  losses::PendingGradient pending_;
};

}  // namespace

TrainTrace run_training(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  const std::uint64_t run_seed =
      derive_seed(cfg.seed, cfg.experiment_tag, cfg.run_index);

  const geom::LevelSetDomain domain = make_domain(cfg.domain, cfg.disk_center);
  TrainTrace trace;
  trace.colloc.seed = run_seed;
  trace.colloc.interior_mode = geom::InteriorMode::rejection;
  trace.colloc.boundary_mode = cfg.boundary_mode;
  trace.colloc.interior =
      geom::sample_interior_rejection(domain, cfg.m_int, run_seed);
  trace.colloc.boundary = geom::sample_boundary(
      domain.boundary, cfg.resolved_m_bnd(), cfg.boundary_mode, run_seed);

  const losses::TrainingData data = losses::make_training_data(trace.colloc);
  trace.net = net::init_network(net::default_dims(), run_seed);

  net::Network work = trace.net;
  TrainingObjective deferred(cfg.loss, work, data);
  const auto objective = [&](const optim::VectorXd& x,
                             optim::VectorXd& grad) -> double {
    const double fx = deferred.value_at(x);
    deferred.gradient(grad);
    return fx;
  };

  // A degenerate pairwise kernel (coincident boundary sites) depends only
  // on the collocation, so one up-front probe decides it; the run is then
  // tallied as diverged, the moving-disk convention for failures.
  double f0;
  {
    optim::VectorXd g0;
    try {
      f0 = objective(trace.net.params, g0);
    } catch (const norms::DegenerateKernelError&) {
      trace.diverged = true;
      trace.reason = optim::StopReason::diverged;
      trace.final_error = nan_report(cfg.eval_seed, cfg.eval_points);
      trace.wall_seconds = elapsed();
      return trace;
    }
  }
  if (!std::isfinite(f0)) {
    trace.diverged = true;
    trace.reason = optim::StopReason::diverged;
    trace.final_error = nan_report(cfg.eval_seed, cfg.eval_points);
    trace.wall_seconds = elapsed();
    return trace;
  }

  TraceRecorder rec{cfg, domain, data, trace.net, trace};
  rec.record(0, trace.net.params, f0, true);

  const optim::Callback cb = [&](int iter, const optim::VectorXd& x,
                                 double fx) { rec.record(iter, x, fx, false); };

  optim::VectorXd x = trace.net.params;
  if (cfg.use_adam) {
    const optim::OptimResult ar = optim::minimize_adam(objective, x, cfg.adam, cb);
    x = ar.x;
    trace.diverged = trace.diverged || ar.diverged;
    trace.reason = ar.reason;
    rec.iter_offset += ar.iterations;
  }
  if (!trace.diverged) {
    optim::LbfgsConfig lcfg = cfg.lbfgs;
    if (cfg.use_adam) lcfg.max_outer = cfg.refine_iters;
    const optim::OptimResult lr = optim::minimize_lbfgs(deferred, x, lcfg, cb);
    x = lr.x;
    trace.diverged = trace.diverged || lr.diverged;
    trace.reason = lr.reason;
  }

  trace.net.params = x;
  trace.iterations = trace.entries.empty() ? 0 : trace.entries.back().iter;
  if (trace.diverged || !x.allFinite()) {
    trace.diverged = true;
    trace.final_error = nan_report(cfg.eval_seed, cfg.eval_points);
  } else {
    // the final entry always carries the full breakdown and H1 error
    if (!trace.entries.empty() && !std::isfinite(trace.entries.back().h1)) {
      rec.fill_full(trace.entries.back(), x);
    }
    trace.final_error = h1_error(trace.net, domain, cfg.eval_points, cfg.eval_seed);
  }
  trace.wall_seconds = elapsed();
  return trace;
}

void write_train_outputs(const std::string& out_dir,
                         const ExperimentConfig& cfg, const TrainTrace& trace) {
  ensure_dir(out_dir);
  write_trace_csv(path_join(out_dir, "trace.csv"), trace);
  net::save_checkpoint(path_join(out_dir, "checkpoint.txt"), trace.net);
  geom::write_points_csv(path_join(out_dir, "interior.csv"),
                         trace.colloc.interior);
  geom::write_points_csv(path_join(out_dir, "boundary.csv"),
                         trace.colloc.boundary);
  io::write_manifest(
      path_join(out_dir, "manifest.txt"),
      {{"experiment", cfg.experiment_tag},
       {"domain", name(cfg.domain)},
       {"disk_center_x", io::format_full(cfg.disk_center.x())},
       {"disk_center_y", io::format_full(cfg.disk_center.y())},
       {"loss", losses::name(cfg.loss)},
       {"m_int", std::to_string(cfg.m_int)},
       {"m_bnd", std::to_string(cfg.resolved_m_bnd())},
       {"boundary_mode",
        cfg.boundary_mode == geom::BoundaryMode::equispaced_arclength
            ? "equispaced"
            : "iid"},
       {"seed", std::to_string(cfg.seed)},
       {"run_index", std::to_string(cfg.run_index)},
       {"iters", std::to_string(cfg.lbfgs.max_outer)},
       {"use_adam", cfg.use_adam ? "1" : "0"},
       {"adam_epochs", std::to_string(cfg.adam.epochs)},
       {"refine_iters", std::to_string(cfg.refine_iters)},
       {"eval_points", std::to_string(cfg.eval_points)},
       {"eval_seed", std::to_string(cfg.eval_seed)},
       {"h1_cadence", std::to_string(cfg.h1_cadence)},
       {"diverged", trace.diverged ? "1" : "0"},
       {"h1_abs", io::format_full(trace.final_error.h1_abs)},
       {"h1_rel", io::format_full(trace.final_error.h1_rel)}});
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [m, err] : pairs) {
    if (!(m > 0.0) || !(err > 0.0) || !std::isfinite(err)) continue;
    const double x = std::log(m), y = std::log(err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return kNaN;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return kNaN;
  return (n * sxy - sx * sy) / denom;
}

double ConvergenceResult::mean_h1(losses::Kind loss, int m_int) const {
  double sum = 0.0;
  int n = 0;
  for (const RunResult& r : runs) {
    if (r.loss != loss || r.m_int != m_int || r.diverged) continue;
    if (!std::isfinite(r.err.h1_abs)) continue;
    sum += r.err.h1_abs;
    ++n;
  }
  return n > 0 ? sum / n : kNaN;
}

double ConvergenceResult::slope(losses::Kind loss) const {
  if (m_list.size() < 3) return kNaN;
  const int m_min = *std::min_element(m_list.begin(), m_list.end());
  std::vector<std::pair<double, double>> pts;
  for (int m : m_list) {
    if (m == m_min) continue;
    pts.emplace_back(static_cast<double>(m), mean_h1(loss, m));
  }
  return fit_loglog_slope(pts);
}

ConvergenceResult experiment_convergence(const ConvergenceOptions& opt) {
  ConvergenceResult result;
  result.m_list = opt.m_list;
  ensure_dir(opt.out_dir);
  const std::string tag = "convergence-" + name(opt.domain);

  std::unique_ptr<io::CsvWriter> runs_csv;
  if (!opt.out_dir.empty()) {
    runs_csv = std::make_unique<io::CsvWriter>(
        path_join(opt.out_dir, "runs.csv"),
        "loss,m_int,m_bnd,seed,h1_abs,h1_rel,l2_abs,l2_rel,final_loss,"
        "iterations,diverged,wall_seconds");
  }

  // Runs are fully independent (each derives its own seed stream from
  // (tag, run_index) and shares no mutable state), so the sweep is farmed
  // out to a thread pool. Results are collected into a preallocated slot
  // per job and written out in sweep order afterwards, so every output is
  // byte-identical no matter how many threads ran.
  struct Job { losses::Kind loss; int m; int seed; };
  std::vector<Job> jobs;
  for (const losses::Kind loss : opt.losses) {
    for (const int m : opt.m_list) {
      for (int seed = 0; seed < opt.num_seeds; ++seed) {
        jobs.push_back({loss, m, seed});
      }
    }
  }
  std::vector<RunResult> slots(jobs.size());

  const auto run_job = [&](std::size_t idx) {
    const Job& jb = jobs[idx];
    ExperimentConfig cfg;
    cfg.domain = opt.domain;
    cfg.loss = jb.loss;
    cfg.m_int = jb.m;
    cfg.seed = opt.master_seed;
    cfg.experiment_tag = tag;
    // the stream depends on (m, seed) only, so every loss trains on
    // the same collocation and initialization; this is what makes the
    // std-vs-weighted columns bitwise comparable
    cfg.run_index = static_cast<std::uint64_t>(jb.seed) * 100000 + jb.m;
    cfg.lbfgs.max_outer = opt.iters;
    cfg.h1_cadence = 0;
    const TrainTrace trace = run_training(cfg);

    RunResult rr;
    rr.loss = jb.loss;
    rr.m_int = jb.m;
    rr.m_bnd = cfg.resolved_m_bnd();
    rr.seed = jb.seed;
    rr.err = trace.final_error;
    rr.final_loss =
        trace.entries.empty() ? kNaN : trace.entries.back().loss_total;
    rr.diverged = trace.diverged;
    rr.iterations = trace.iterations;
    rr.wall_seconds = trace.wall_seconds;
    slots[idx] = rr;

    if (opt.verbose) {
      std::fprintf(stderr, "[%s] %s m=%d seed=%d h1=%.4g%s (%.1fs)\n",
                   tag.c_str(), losses::name(jb.loss).c_str(), jb.m, jb.seed,
                   rr.err.h1_abs, rr.diverged ? " DIVERGED" : "",
                   rr.wall_seconds);
    }
  };

  const unsigned hw = std::thread::hardware_concurrency();
  std::size_t nthreads = opt.threads > 0 ? static_cast<std::size_t>(opt.threads)
                                         : (hw > 0 ? hw : 1);
  nthreads = std::min(nthreads, jobs.size());
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
          if (failed.load()) return;
          try {
            run_job(i);
          } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mu);
            if (!first_error) first_error = std::current_exception();
            failed.store(true);
            return;
          }
        }
      });
    }
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (const RunResult& rr : slots) {
    result.runs.push_back(rr);
    if (runs_csv) {
      runs_csv->row({losses::name(rr.loss), std::to_string(rr.m_int),
                     std::to_string(rr.m_bnd), std::to_string(rr.seed),
                     io::format_full(rr.err.h1_abs),
                     io::format_full(rr.err.h1_rel),
                     io::format_full(rr.err.l2_abs),
                     io::format_full(rr.err.l2_rel),
                     io::format_full(rr.final_loss),
                     std::to_string(rr.iterations),
                     rr.diverged ? "1" : "0",
                     io::format_full(rr.wall_seconds)});
    }
  }

  if (!opt.out_dir.empty()) {
    io::CsvWriter summary(path_join(opt.out_dir, "summary.csv"),
                          "loss,m_int,mean_h1,min_h1,max_h1,diverged_count");
    for (const losses::Kind loss : opt.losses) {
      for (const int m : opt.m_list) {
        double lo = kNaN, hi = kNaN;
        int nd = 0;
        for (const RunResult& r : result.runs) {
          if (r.loss != loss || r.m_int != m) continue;
          if (r.diverged || !std::isfinite(r.err.h1_abs)) {
            ++nd;
            continue;
          }
          lo = std::isnan(lo) ? r.err.h1_abs : std::min(lo, r.err.h1_abs);
          hi = std::isnan(hi) ? r.err.h1_abs : std::max(hi, r.err.h1_abs);
        }
        summary.row({losses::name(loss), std::to_string(m),
                     io::format_full(result.mean_h1(loss, m)),
                     io::format_full(lo), io::format_full(hi),
                     std::to_string(nd)});
      }
    }
    io::CsvWriter slopes(path_join(opt.out_dir, "slopes.csv"), "loss,slope");
    for (const losses::Kind loss : opt.losses) {
      slopes.row({losses::name(loss), io::format_full(result.slope(loss))});
    }
    std::string ms;
    for (int m : opt.m_list) ms += (ms.empty() ? "" : ",") + std::to_string(m);
    io::write_manifest(path_join(opt.out_dir, "manifest.txt"),
                       {{"experiment", tag},
                        {"domain", name(opt.domain)},
                        {"losses", loss_list_string(opt.losses)},
                        {"m_list", ms},
                        {"num_seeds", std::to_string(opt.num_seeds)},
                        {"iters", std::to_string(opt.iters)},
                        {"master_seed", std::to_string(opt.master_seed)},
                        {"eval_seed", std::to_string(kEvalSeed)},
                        {"eval_points", "10000"}});
  }
  return result;
}

MovingDiskResult::Stats MovingDiskResult::stats(losses::Kind loss) const {
  Stats s;
  std::vector<double> vals;
  for (const Row& r : rows) {
    if (r.loss != loss) continue;
    ++s.total;
    if (r.diverged || !std::isfinite(r.h1)) {
      ++s.nan_count;
    } else {
      vals.push_back(r.h1);
    }
  }
  if (vals.empty()) {
    s.mean = s.stddev = kNaN;
    return s;
  }
  for (double v : vals) s.mean += v;
  s.mean /= vals.size();
  if (vals.size() > 1) {
    double acc = 0.0;
    for (double v : vals) acc += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(acc / (vals.size() - 1));
  }
  return s;
}

MovingDiskResult experiment_moving_disk(const MovingDiskOptions& opt) {
  MovingDiskResult result;
  ensure_dir(opt.out_dir);
  std::unique_ptr<io::CsvWriter> rows_csv;
  if (!opt.out_dir.empty()) {
    rows_csv = std::make_unique<io::CsvWriter>(
        path_join(opt.out_dir, "positions.csv"), "loss,c,h1_abs,diverged");
  }

  std::vector<double> centers;
  for (int k = 0;; ++k) {
    const double c = opt.c_begin + k * opt.c_step;
    if (c > opt.c_end + 1e-12) break;
    centers.push_back(c);
  }

  for (const losses::Kind loss : opt.losses) {
    for (const double c : centers) {
      ExperimentConfig cfg;
      cfg.domain = DomainKind::disk;
      cfg.disk_center = Vec2(c, c);
      cfg.loss = loss;
      cfg.m_int = opt.m_int;
      cfg.seed = opt.master_seed;
      cfg.experiment_tag = "moving-disk";
      cfg.run_index = 0;  // every position reuses the same stream, as in
                          // the fixed-seed protocol of the experiment
      cfg.lbfgs.max_outer = opt.iters;
      cfg.h1_cadence = 0;
      const TrainTrace trace = run_training(cfg);
      MovingDiskResult::Row row{loss, c, trace.final_error.h1_abs,
                                trace.diverged};
      if (row.diverged) row.h1 = kNaN;
      result.rows.push_back(row);
      if (rows_csv) {
        rows_csv->row({losses::name(loss), io::format_full(c),
                       io::format_full(row.h1), row.diverged ? "1" : "0"});
      }
      if (opt.verbose) {
        std::fprintf(stderr, "[moving-disk] %s c=%.3f h1=%.4g%s\n",
                     losses::name(loss).c_str(), c, row.h1,
                     row.diverged ? " DIVERGED" : "");
      }
    }
  }

  if (!opt.out_dir.empty()) {
    io::CsvWriter summary(path_join(opt.out_dir, "summary.csv"),
                          "loss,mean_h1,std_h1,nan_count,total");
    for (const losses::Kind loss : opt.losses) {
      const auto s = result.stats(loss);
      summary.row({losses::name(loss), io::format_full(s.mean),
                   io::format_full(s.stddev), std::to_string(s.nan_count),
                   std::to_string(s.total)});
    }
    io::write_manifest(path_join(opt.out_dir, "manifest.txt"),
                       {{"experiment", "moving-disk"},
                        {"losses", loss_list_string(opt.losses)},
                        {"c_begin", io::format_full(opt.c_begin)},
                        {"c_end", io::format_full(opt.c_end)},
                        {"c_step", io::format_full(opt.c_step)},
                        {"positions", std::to_string(centers.size())},
                        {"m_int", std::to_string(opt.m_int)},
                        {"iters", std::to_string(opt.iters)},
                        {"master_seed", std::to_string(opt.master_seed)},
                        {"eval_seed", std::to_string(kEvalSeed)}});
  }
  return result;
}

DynamicsResult experiment_dynamics(const DynamicsOptions& opt) {
  DynamicsResult result;
  ensure_dir(opt.out_dir);
  const std::vector<losses::Kind> all = {
      losses::Kind::standard, losses::Kind::weighted,
      losses::Kind::consistent_gamma, losses::Kind::consistent_2};
  for (const losses::Kind loss : all) {
    ExperimentConfig cfg;
    cfg.domain = DomainKind::disk;
    cfg.loss = loss;
    cfg.m_int = opt.m_int;
    cfg.seed = opt.master_seed;
    cfg.experiment_tag = "dynamics";
    cfg.run_index = 0;  // shared stream: identical init and collocation
    cfg.lbfgs.max_outer = opt.iters;
    cfg.h1_cadence = opt.h1_cadence;
    TrainTrace trace = run_training(cfg);
    if (!opt.out_dir.empty()) {
      write_trace_csv(
          path_join(opt.out_dir, "trace_" + losses::name(loss) + ".csv"),
          trace);
    }
    if (opt.verbose) {
      std::fprintf(stderr, "[dynamics] %s final h1=%.4g (%.1fs)\n",
                   losses::name(loss).c_str(), trace.final_error.h1_abs,
                   trace.wall_seconds);
    }
    result.traces.emplace(loss, std::move(trace));
  }
  if (!opt.out_dir.empty()) {
    io::write_manifest(path_join(opt.out_dir, "manifest.txt"),
                       {{"experiment", "dynamics"},
                        {"m_int", std::to_string(opt.m_int)},
                        {"iters", std::to_string(opt.iters)},
                        {"h1_cadence", std::to_string(opt.h1_cadence)},
                        {"master_seed", std::to_string(opt.master_seed)},
                        {"eval_seed", std::to_string(kEvalSeed)}});
  }
  return result;
}

FieldResult write_field_grid(const geom::LevelSetDomain& domain,
                             const net::Network& v_std,
                             const net::Network& v_c2, int grid_n,
                             const std::string& out_dir) {
  if (grid_n < 2) throw std::invalid_argument("grid_n must be >= 2");
  const geom::BBox& bb = domain.bbox;
  const int n2 = grid_n * grid_n;
  Eigen::Matrix2Xd X(2, n2);
  for (int iy = 0; iy < grid_n; ++iy) {
    for (int ix = 0; ix < grid_n; ++ix) {
      X(0, iy * grid_n + ix) = bb.x0 + bb.width() * ix / (grid_n - 1);
      X(1, iy * grid_n + ix) = bb.y0 + bb.height() * iy / (grid_n - 1);
    }
  }
  const net::BatchEval es = net::forward(v_std, X, net::Order::value);
  const net::BatchEval ec = net::forward(v_c2, X, net::Order::value);

  FieldResult res;
  res.grid_count = n2;
  std::unique_ptr<io::CsvWriter> csv;
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    csv = std::make_unique<io::CsvWriter>(
        path_join(out_dir, "field.csv"),
        "x,y,inside,u,v_std,v_c2,err_std,err_c2");
  }
  for (int i = 0; i < n2; ++i) {
    const Vec2 p = X.col(i);
    const bool inside = domain.phi(p) < 0.0;
    const double u = manufactured::u(p);
    const double e_std = std::abs(u - es.value[i]);
    const double e_c2 = std::abs(u - ec.value[i]);
    if (inside) {
      res.mean_err_std += e_std;
      res.mean_err_c2 += e_c2;
      ++res.inside_count;
    }
    if (csv) {
      csv->row({io::format_full(p.x()), io::format_full(p.y()),
                inside ? "1" : "0", io::format_full(u),
                io::format_full(es.value[i]), io::format_full(ec.value[i]),
                io::format_full(e_std), io::format_full(e_c2)});
    }
  }
  if (res.inside_count > 0) {
    res.mean_err_std /= res.inside_count;
    res.mean_err_c2 /= res.inside_count;
  }
  return res;
}

FieldResult experiment_field(const FieldOptions& opt) {
  const std::string tag = "field-" + name(opt.domain);
  auto train_one = [&](losses::Kind loss) {
    ExperimentConfig cfg;
    cfg.domain = opt.domain;
    cfg.loss = loss;
    cfg.m_int = opt.m_int;
    cfg.seed = opt.master_seed;
    cfg.experiment_tag = tag;
    cfg.run_index = 0;  // shared collocation for the side-by-side panels
    cfg.lbfgs.max_outer = opt.iters;
    cfg.h1_cadence = 0;
    return run_training(cfg);
  };
  const TrainTrace t_std = train_one(losses::Kind::standard);
  const TrainTrace t_c2 = train_one(losses::Kind::consistent_2);
  if (opt.verbose) {
    std::fprintf(stderr, "[%s] h1 std=%.4g c2=%.4g\n", tag.c_str(),
                 t_std.final_error.h1_abs, t_c2.final_error.h1_abs);
  }
  const geom::LevelSetDomain domain = make_domain(opt.domain);
  const FieldResult res =
      write_field_grid(domain, t_std.net, t_c2.net, opt.grid_n, opt.out_dir);
  if (!opt.out_dir.empty()) {
    io::write_manifest(
        path_join(opt.out_dir, "manifest.txt"),
        {{"experiment", tag},
         {"domain", name(opt.domain)},
         {"m_int", std::to_string(opt.m_int)},
         {"iters", std::to_string(opt.iters)},
         {"grid_n", std::to_string(opt.grid_n)},
         {"master_seed", std::to_string(opt.master_seed)},
         {"h1_std", io::format_full(t_std.final_error.h1_abs)},
         {"h1_c2", io::format_full(t_c2.final_error.h1_abs)}});
  }
  return res;
}

NonuniformResult experiment_nonuniform(const NonuniformOptions& opt) {
  NonuniformResult result;
  ensure_dir(opt.out_dir);
  auto run_one = [&](losses::Kind loss) {
    ExperimentConfig cfg;
    cfg.domain = DomainKind::unit_disk;
    cfg.loss = loss;
    cfg.m_int = opt.m_int;
    cfg.m_bnd = opt.m_bnd;
    cfg.boundary_mode = geom::BoundaryMode::iid_uniform;
    cfg.seed = opt.master_seed;
    cfg.experiment_tag = "nonuniform";
    cfg.run_index = 0;
    cfg.use_adam = true;
    cfg.adam.epochs = opt.adam_epochs;
    cfg.refine_iters = opt.refine_iters;
    cfg.h1_cadence = 0;
    return run_training(cfg);
  };
  const TrainTrace t_std = run_one(losses::Kind::standard);
  const TrainTrace t_c2 = run_one(losses::Kind::consistent_2);
  result.loss_std = {t_std.final_error.l2_rel, t_std.final_error.h1_rel,
                     t_std.diverged};
  result.loss_c2 = {t_c2.final_error.l2_rel, t_c2.final_error.h1_rel,
                    t_c2.diverged};

  // spacing diagnostics of the iid angles (shared by both runs)
  std::vector<double> theta;
  for (const Vec2& z : t_c2.colloc.boundary) {
    theta.push_back(std::atan2(z.y(), z.x()));
  }
  std::sort(theta.begin(), theta.end());
  double gmin = std::numeric_limits<double>::infinity(), gmax = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double next =
        j + 1 < theta.size() ? theta[j + 1] : theta[0] + 2.0 * std::numbers::pi;
    const double gap = next - theta[j];
    gmin = std::min(gmin, gap);
    gmax = std::max(gmax, gap);
  }
  result.gap_ratio = gmin > 0.0 ? gmax / gmin
                                : std::numeric_limits<double>::infinity();

  if (!opt.out_dir.empty()) {
    io::CsvWriter csv(path_join(opt.out_dir, "errors.csv"),
                      "loss,l2_rel,h1_rel,diverged");
    csv.row({"std", io::format_full(result.loss_std.l2_rel),
             io::format_full(result.loss_std.h1_rel),
             result.loss_std.diverged ? "1" : "0"});
    csv.row({"c2", io::format_full(result.loss_c2.l2_rel),
             io::format_full(result.loss_c2.h1_rel),
             result.loss_c2.diverged ? "1" : "0"});
    geom::write_points_csv(path_join(opt.out_dir, "boundary.csv"),
                           t_c2.colloc.boundary);
    io::write_manifest(path_join(opt.out_dir, "manifest.txt"),
                       {{"experiment", "nonuniform"},
                        {"domain", "unit-disk"},
                        {"m_int", std::to_string(opt.m_int)},
                        {"m_bnd", std::to_string(opt.m_bnd)},
                        {"adam_epochs", std::to_string(opt.adam_epochs)},
                        {"refine_iters", std::to_string(opt.refine_iters)},
                        {"master_seed", std::to_string(opt.master_seed)},
                        {"eval_seed", std::to_string(kEvalSeed)},
                        {"gap_ratio", io::format_full(result.gap_ratio)}});
  }
  if (opt.verbose) {
    std::fprintf(stderr,
                 "[nonuniform] std h1_rel=%.4g c2 h1_rel=%.4g gap=%.2f\n",
                 result.loss_std.h1_rel, result.loss_c2.h1_rel,
                 result.gap_ratio);
  }
  return result;
}

}  // namespace cutpinn::harness
