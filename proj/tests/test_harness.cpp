#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "cutpinn/harness.hpp"
#include "cutpinn/manufactured.hpp"

using namespace cutpinn;
using harness::DomainKind;
using harness::ExperimentConfig;
using geom::Vec2;

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig smoke_config(int iters = 8) {
  ExperimentConfig cfg;
  cfg.m_int = 40;
  cfg.m_bnd = 8;
  cfg.lbfgs.max_outer = iters;
  cfg.eval_points = 500;
  cfg.h1_cadence = 0;
  cfg.experiment_tag = "harness-smoke";
  return cfg;
}

}  // namespace

TEST_CASE("seed streams are distinct per tag and index") {
  std::set<std::uint64_t> seen;
  for (const char* tag : {"convergence-disk", "moving-disk", "dynamics"}) {
    for (std::uint64_t idx = 0; idx < 50; ++idx) {
      seen.insert(harness::derive_seed(0, tag, idx));
    }
  }
  CHECK(seen.size() == 150);
  CHECK(harness::derive_seed(1, "a", 0) != harness::derive_seed(2, "a", 0));
}

TEST_CASE("domain factory") {
  CHECK(harness::domain_from_name("disk") == DomainKind::disk);
  CHECK(harness::domain_from_name("flower") == DomainKind::flower);
  CHECK(harness::domain_from_name("unit-disk") == DomainKind::unit_disk);
  CHECK_THROWS_AS(harness::domain_from_name("square"), std::invalid_argument);
  for (DomainKind k : {DomainKind::disk, DomainKind::flower, DomainKind::unit_disk}) {
    CHECK(harness::domain_from_name(harness::name(k)) == k);
  }
  const auto ud = harness::make_domain(DomainKind::unit_disk);
  CHECK(ud.area == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  CHECK(ud.phi(Vec2(0.0, 0.0)) == doctest::Approx(-1.0));
  const auto moved = harness::make_domain(DomainKind::disk, Vec2(0.2, 0.2));
  CHECK(moved.phi(Vec2(0.2, 0.2)) == doctest::Approx(-0.4));
}

TEST_CASE("boundary count defaults to floor(sqrt(m_int))") {
  ExperimentConfig cfg;
  for (auto [mi, mb] : {std::pair{100, 10}, {400, 20}, {900, 30}, {1600, 40},
                        {950, 30}}) {
    cfg.m_int = mi;
    cfg.m_bnd = 0;
    CHECK(cfg.resolved_m_bnd() == mb);
  }
  cfg.m_bnd = 17;
  CHECK(cfg.resolved_m_bnd() == 17);
}

TEST_CASE("configuration validation") {
  ExperimentConfig cfg;
  cfg.m_int = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.m_int = 2;  // resolved m_bnd would be 1
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.eval_points = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.h1_cadence = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(ExperimentConfig{}.validate());
}

TEST_CASE("the exact solution has zero H1 error") {
  const auto dom = harness::make_domain(DomainKind::disk);
  const harness::FieldFn oracle = [](const Vec2& p) {
    net::EvalBundle b;
    const auto d = manufactured::eval(p);
    b.value = d.u;
    b.grad = d.grad_u;
    b.laplacian = -d.f;
    return b;
  };
  const auto rep = harness::h1_error(oracle, dom, 2000, harness::kEvalSeed);
  CHECK(rep.h1_abs == 0.0);
  CHECK(rep.h1_rel == 0.0);
  CHECK(rep.l2_abs == 0.0);
  CHECK(rep.eval_count == 2000);
  CHECK(rep.eval_seed == harness::kEvalSeed);
}

TEST_CASE("H1 error of the zero function matches a dense Monte Carlo oracle") {
  const auto dom = harness::make_domain(DomainKind::disk);
  const harness::FieldFn zero = [](const Vec2&) {
    return net::EvalBundle{0.0, Vec2(0.0, 0.0), 0.0};
  };
  const int n = 10000;
  const auto rep = harness::h1_error(zero, dom, n, harness::kEvalSeed);
  const double est_sq = rep.h1_abs * rep.h1_abs;

  // independent oracle: 1e6 points from an unrelated seed, with the
  // empirical variance giving the pooled standard error
  const std::uint64_t oracle_seed = 0xfeedfacecafebeefULL;
  const int big = 1000000;
  const auto pts = geom::sample_interior_rejection(dom, big, oracle_seed);
  double mean = 0.0, msq = 0.0;
  long k = 0;
  for (const Vec2& p : pts) {
    const auto d = manufactured::eval(p);
    const double w = d.u * d.u + d.grad_u.squaredNorm();
    ++k;
    const double delta = w - mean;
    mean += delta / k;
    msq += delta * (w - mean);
  }
  const double var = msq / (big - 1);
  const double oracle_sq = dom.area * mean;
  const double se =
      dom.area * std::sqrt(var / n + var / big);
  CHECK(std::abs(est_sq - oracle_sq) <= 3.0 * se);
  // relative error is absolute over the reference norm, also near 1 here
  CHECK(rep.h1_rel == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the network overload agrees with the generic evaluator") {
  const auto dom = harness::make_domain(DomainKind::disk);
  const auto netw = net::init_network(net::default_dims(), 3);
  const harness::FieldFn fn = [&](const Vec2& p) {
    return net::eval_bundle(netw, p);
  };
  const auto a = harness::h1_error(netw, dom, 1000, harness::kEvalSeed);
  const auto b = harness::h1_error(fn, dom, 1000, harness::kEvalSeed);
  CHECK(a.h1_abs == doctest::Approx(b.h1_abs).epsilon(1e-10));
  CHECK(a.l2_abs == doctest::Approx(b.l2_abs).epsilon(1e-10));
}

TEST_CASE("training runs are bit-reproducible") {
  const auto cfg = smoke_config();
  const auto t1 = harness::run_training(cfg);
  const auto t2 = harness::run_training(cfg);
  CHECK_FALSE(t1.diverged);
  REQUIRE(t1.entries.size() == t2.entries.size());
  for (std::size_t i = 0; i < t1.entries.size(); ++i) {
    CHECK(t1.entries[i].iter == t2.entries[i].iter);
    CHECK(t1.entries[i].loss_total == t2.entries[i].loss_total);
  }
  CHECK(t1.net.params == t2.net.params);
  CHECK(t1.final_error.h1_abs == t2.final_error.h1_abs);

  // a different run index gives a different collocation
  auto cfg2 = cfg;
  cfg2.run_index = 1;
  const auto t3 = harness::run_training(cfg2);
  CHECK(t3.colloc.interior[0] != t1.colloc.interior[0]);
}

TEST_CASE("trace carries endpoints and respects the cadence") {
  auto cfg = smoke_config(12);
  cfg.h1_cadence = 5;
  const auto t = harness::run_training(cfg);
  REQUIRE(!t.entries.empty());
  CHECK(t.entries.front().iter == 0);
  CHECK(std::isfinite(t.entries.front().h1));
  CHECK(std::isfinite(t.entries.back().h1));
  CHECK(std::isfinite(t.entries.back().interior));
  for (std::size_t i = 1; i < t.entries.size(); ++i) {
    CHECK(t.entries[i].iter > t.entries[i - 1].iter);
    const auto& e = t.entries[i];
    const bool on_cadence = e.iter % 5 == 0;
    if (!on_cadence && i + 1 < t.entries.size()) {
      CHECK(std::isnan(e.h1));
      CHECK(std::isnan(e.interior));
    }
    if (on_cadence) CHECK(std::isfinite(e.h1));
  }
  // loss decreases over a short healthy run
  CHECK(t.entries.back().loss_total < t.entries.front().loss_total);
  CHECK(t.final_error.h1_abs == t.entries.back().h1);
  CHECK(std::isfinite(t.final_error.h1_rel));
  CHECK(t.wall_seconds > 0.0);
  CHECK(t.iterations <= 12);
  // collocation sizes
  CHECK(t.colloc.interior.size() == 40);
  CHECK(t.colloc.boundary.size() == 8);
}

TEST_CASE("train outputs are written and byte-reproducible") {
  const fs::path dir1 = fs::temp_directory_path() / "train_out_1";
  const fs::path dir2 = fs::temp_directory_path() / "train_out_2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  const auto cfg = smoke_config();
  for (const auto& dir : {dir1, dir2}) {
    const auto t = harness::run_training(cfg);
    harness::write_train_outputs(dir.string(), cfg, t);
  }
  for (const char* f : {"trace.csv", "checkpoint.txt", "interior.csv",
                        "boundary.csv", "manifest.txt"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(dir1 / f));
    CHECK(read_file(dir1 / f) == read_file(dir2 / f));
  }
  // checkpoint loads back to the trained parameters
  const auto t = harness::run_training(cfg);
  const auto back = net::load_checkpoint((dir1 / "checkpoint.txt").string());
  CHECK(back.params == t.net.params);
  // manifest records the resolved configuration
  const std::string manifest = read_file(dir1 / "manifest.txt");
  CHECK(manifest.find("m_int = 40") != std::string::npos);
  CHECK(manifest.find("m_bnd = 8") != std::string::npos);
  CHECK(manifest.find("loss = c2") != std::string::npos);
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("log-log slope fitting") {
  // exact power law err = 3 m^{-1/2}
  std::vector<std::pair<double, double>> pts;
  for (double m : {400.0, 900.0, 1600.0}) {
    pts.emplace_back(m, 3.0 * std::pow(m, -0.5));
  }
  CHECK(harness::fit_loglog_slope(pts) == doctest::Approx(-0.5).epsilon(1e-12));
  // NaN entries are skipped
  pts.emplace_back(2500.0, std::nan(""));
  CHECK(harness::fit_loglog_slope(pts) == doctest::Approx(-0.5).epsilon(1e-12));
  // constant data gives slope zero
  std::vector<std::pair<double, double>> flat = {{100.0, 2.0}, {400.0, 2.0}};
  CHECK(harness::fit_loglog_slope(flat) == doctest::Approx(0.0).epsilon(1e-12));
  // fewer than two usable points: undefined
  std::vector<std::pair<double, double>> one = {{100.0, 2.0},
                                                {400.0, std::nan("")}};
  CHECK(std::isnan(harness::fit_loglog_slope(one)));
  // published mean errors 0.106 / 0.055 / 0.056 over m = 400 / 900 / 1600
  std::vector<std::pair<double, double>> table = {
      {400.0, 0.106}, {900.0, 0.055}, {1600.0, 0.056}};
  const double s = harness::fit_loglog_slope(table);
  CHECK(s > -0.52);
  CHECK(s < -0.44);
}

TEST_CASE("convergence bookkeeping on a miniature sweep") {
  harness::ConvergenceOptions opt;
  opt.m_list = {30, 60};
  opt.num_seeds = 2;
  opt.losses = {losses::Kind::standard, losses::Kind::weighted};
  opt.iters = 4;
  const fs::path dir = fs::temp_directory_path() / "conv_smoke";
  fs::remove_all(dir);
  opt.out_dir = dir.string();
  const auto res = harness::experiment_convergence(opt);
  CHECK(res.runs.size() == 2 * 2 * 2);
  for (const auto& r : res.runs) CHECK_FALSE(r.diverged);
  // std and wstd share streams and the weight is exactly one, so the
  // entire trained result is bitwise identical
  for (int m : opt.m_list) {
    for (int seed = 0; seed < 2; ++seed) {
      const harness::RunResult *a = nullptr, *b = nullptr;
      for (const auto& r : res.runs) {
        if (r.m_int != m || static_cast<int>(r.seed) != seed) continue;
        if (r.loss == losses::Kind::standard) a = &r;
        if (r.loss == losses::Kind::weighted) b = &r;
      }
      REQUIRE(a);
      REQUIRE(b);
      CHECK(a->err.h1_abs == b->err.h1_abs);
      CHECK(a->final_loss == b->final_loss);
    }
    CHECK(res.mean_h1(losses::Kind::standard, m) ==
          res.mean_h1(losses::Kind::weighted, m));
  }
  CHECK(std::isnan(res.mean_h1(losses::Kind::consistent_2, 30)));
  for (const char* f : {"runs.csv", "summary.csv", "slopes.csv", "manifest.txt"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / f));
  }
  fs::remove_all(dir);
}

TEST_CASE("convergence sweep output does not depend on the thread count") {
  harness::ConvergenceOptions opt;
  opt.m_list = {30, 60};
  opt.num_seeds = 2;
  opt.losses = {losses::Kind::standard, losses::Kind::consistent_2};
  opt.iters = 4;

  const fs::path d1 = fs::temp_directory_path() / "conv_thr1";
  const fs::path d2 = fs::temp_directory_path() / "conv_thr3";
  fs::remove_all(d1);
  fs::remove_all(d2);

  opt.out_dir = d1.string();
  opt.threads = 1;
  const auto serial = harness::experiment_convergence(opt);
  opt.out_dir = d2.string();
  opt.threads = 3;
  const auto threaded = harness::experiment_convergence(opt);

  REQUIRE(serial.runs.size() == threaded.runs.size());
  for (std::size_t i = 0; i < serial.runs.size(); ++i) {
    CAPTURE(i);
    CHECK(serial.runs[i].loss == threaded.runs[i].loss);
    CHECK(serial.runs[i].m_int == threaded.runs[i].m_int);
    CHECK(serial.runs[i].seed == threaded.runs[i].seed);
    CHECK(serial.runs[i].err.h1_abs == threaded.runs[i].err.h1_abs);
    CHECK(serial.runs[i].final_loss == threaded.runs[i].final_loss);
  }

  // the CSVs must be byte-identical apart from the wall-clock column
  const auto read_lines = [](const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
      lines.push_back(line.substr(0, line.rfind(',')));  // drop wall_seconds
    }
    return lines;
  };
  CHECK(read_lines(d1 / "runs.csv") == read_lines(d2 / "runs.csv"));

  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("dynamics shares one initialization across losses") {
  harness::DynamicsOptions opt;
  opt.m_int = 40;
  opt.iters = 3;
  opt.h1_cadence = 0;
  const auto res = harness::experiment_dynamics(opt);
  REQUIRE(res.traces.size() == 4);
  const auto& ref = res.traces.at(losses::Kind::standard);
  for (const auto& [kind, tr] : res.traces) {
    CHECK_FALSE(tr.diverged);
    REQUIRE(tr.colloc.interior.size() == ref.colloc.interior.size());
    for (std::size_t i = 0; i < ref.colloc.interior.size(); ++i) {
      CHECK(tr.colloc.interior[i] == ref.colloc.interior[i]);
    }
    // iteration 0 evaluates the shared initial network
    CHECK(tr.entries.front().iter == 0);
  }
  // std and wstd start at the same loss value; c2 starts higher by the
  // seminorm term
  const double l0_std = ref.entries.front().loss_total;
  CHECK(res.traces.at(losses::Kind::weighted).entries.front().loss_total ==
        l0_std);
  CHECK(res.traces.at(losses::Kind::consistent_2).entries.front().loss_total >=
        l0_std);
}

TEST_CASE("moving-disk tally treats divergence as data") {
  harness::MovingDiskOptions opt;
  opt.c_begin = 0.45;
  opt.c_end = 0.55;
  opt.c_step = 0.05;
  opt.m_int = 40;
  opt.iters = 3;
  opt.losses = {losses::Kind::standard};
  const auto res = harness::experiment_moving_disk(opt);
  REQUIRE(res.rows.size() == 3);
  const auto s = res.stats(losses::Kind::standard);
  CHECK(s.total == 3);
  CHECK(s.nan_count == 0);
  CHECK(std::isfinite(s.mean));
  for (const auto& r : res.rows) {
    CHECK(r.c >= 0.45 - 1e-12);
    CHECK(r.c <= 0.55 + 1e-12);
    if (!r.diverged) CHECK(std::isfinite(r.h1));
  }
}

TEST_CASE("field grid masks the domain and reports pointwise errors") {
  const auto dom = harness::make_domain(DomainKind::disk);
  auto zero = net::init_network(net::default_dims(), 0);
  zero.params.setZero();
  const fs::path dir = fs::temp_directory_path() / "field_smoke";
  fs::remove_all(dir);
  const auto res = harness::write_field_grid(dom, zero, zero, 21, dir.string());
  CHECK(res.grid_count == 441);
  // exact count of 21x21 unit-square grid points inside the 0.4-disk,
  // scripted independently
  CHECK(res.inside_count == 193);
  // zero networks: both error fields equal |u|
  CHECK(res.mean_err_std == res.mean_err_c2);
  CHECK(res.mean_err_std > 0.0);

  std::ifstream in(dir / "field.csv");
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "x,y,inside,u,v_std,v_c2,err_std,err_c2");
  int rows = 0, inside = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> fields;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    REQUIRE(fields.size() == 8);
    const Vec2 p(std::stod(fields[0]), std::stod(fields[1]));
    const bool in_dom = dom.phi(p) < 0.0;
    CHECK(fields[2] == (in_dom ? "1" : "0"));
    inside += fields[2] == "1";
  }
  CHECK(rows == 441);
  CHECK(inside == res.inside_count);
  fs::remove_all(dir);
}

TEST_CASE("iid boundary sampling produces visibly uneven gaps") {
  harness::NonuniformOptions opt;
  opt.m_int = 60;
  opt.m_bnd = 30;
  opt.adam_epochs = 20;
  opt.refine_iters = 4;
  const auto res = harness::experiment_nonuniform(opt);
  // 30 iid angles: the max/min gap ratio is far above the equispaced 1
  CHECK(res.gap_ratio > 1.5);
  CHECK_FALSE(res.loss_std.diverged);
  CHECK_FALSE(res.loss_c2.diverged);
  CHECK(std::isfinite(res.loss_std.h1_rel));
  CHECK(std::isfinite(res.loss_c2.h1_rel));
}
