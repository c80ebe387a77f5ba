#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cutpinn/harness.hpp"
#include "cutpinn/losses.hpp"
#include "cutpinn/verify.hpp"
#include "plot.hpp"

namespace {

using namespace cutpinn;

constexpr int kExitOk = 0;
constexpr int kExitInvalidConfig = 2;
constexpr int kExitDiverged = 3;

std::vector<losses::Kind> parse_losses(const std::vector<std::string>& names) {
  std::vector<losses::Kind> out;
  for (const auto& n : names) out.push_back(losses::kind_from_name(n));
  return out;
}

struct CommonFlags {
  std::string domain = "disk";
  std::string loss = "c2";
  int m_int = 900;
  int m_bnd = 0;
  std::uint64_t seed = 0;
  int iters = 2000;
  std::string out;
  std::string config;  // consumed before parsing; kept here for --help
};

// Expands every `--config FILE` (or `--config=FILE`) into the flags the file
// describes, inserted right after the subcommand name so that explicit
// command-line flags, which come later, win under TakeLast. CLI11 only
// honours set_config on the top-level app, and our config files belong to
// subcommands, so the expansion is done by hand.
std::vector<std::string> expand_config_args(std::vector<std::string> args) {
  for (std::size_t i = 0; i < args.size();) {
    std::string file;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) {
        throw std::invalid_argument("--config requires a file argument");
      }
      file = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
      continue;
    }

    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open config file: " + file);
    std::vector<std::string> extra;
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = CLI::detail::trim_copy(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("config line is not key=value: " + line);
      }
      const std::string key = CLI::detail::trim_copy(trimmed.substr(0, eq));
      const std::string val = CLI::detail::trim_copy(trimmed.substr(eq + 1));
      extra.push_back("--" + key + "=" + val);
    }

    // insert after the subcommand name when one leads the argument list
    const bool leading_subcommand =
        !args.empty() && args.front().rfind('-', 0) != 0 && i >= 1;
    const std::size_t at = leading_subcommand ? 1 : i;
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(),
                extra.end());
    i += extra.size();
  }
  return args;
}

void add_common(CLI::App* cmd, CommonFlags& f, bool with_domain = true,
                bool with_loss = true) {
  if (with_domain) {
    cmd->add_option("--domain", f.domain, "disk | flower | unit-disk")
        ->check(CLI::IsMember({"disk", "flower", "unit-disk"}));
  }
  if (with_loss) {
    cmd->add_option("--loss", f.loss, "std | wstd | cgamma | c2")
        ->check(CLI::IsMember({"std", "wstd", "cgamma", "c2"}));
  }
  cmd->add_option("--m-int", f.m_int, "interior collocation count");
  cmd->add_option("--m-bnd", f.m_bnd,
                  "boundary collocation count (0: floor(sqrt(m_int)))");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--iters", f.iters, "L-BFGS outer iterations");
  cmd->add_option("--out", f.out, "output directory")->required();
  cmd->add_option("--config", f.config,
                  "flat key=value config file; flags override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collocation PDE solver with a consistent boundary loss"};
  app.require_subcommand(1);
  // config-file values are injected as leading flags; the last occurrence
  // (the explicit command line) must win for scalar options
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // --- train ---
  auto* train = app.add_subcommand("train", "single training run");
  CommonFlags tf;
  int t_cadence = 25;
  bool t_adam = false;
  int t_epochs = 6000, t_refine = 500;
  add_common(train, tf);
  train->add_option("--h1-cadence", t_cadence, "H1 trace cadence (0: endpoints)");
  train->add_flag("--adam", t_adam, "Adam warm start before L-BFGS");
  train->add_option("--adam-epochs", t_epochs, "Adam epochs");
  train->add_option("--refine-iters", t_refine, "L-BFGS iterations after Adam");
  std::string t_bmode = "equispaced";
  train->add_option("--boundary-mode", t_bmode, "equispaced | iid")
      ->check(CLI::IsMember({"equispaced", "iid"}));

  // --- convergence ---
  auto* conv = app.add_subcommand("convergence", "(loss, m, seed) error sweep");
  CommonFlags cf;
  int c_seeds = 10;
  std::vector<int> c_mlist = {100, 400, 900, 1600};
  std::vector<std::string> c_losses = {"std", "wstd", "cgamma", "c2"};
  add_common(conv, cf, true, false);
  conv->add_option("--num-seeds", c_seeds, "seeds per (loss, m) pair");
  int c_threads = 0;
  conv->add_option("--threads", c_threads,
                   "sweep worker threads (0: all hardware threads)");
  conv->add_option("--m-list", c_mlist, "interior counts")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  conv->add_option("--losses", c_losses, "losses to sweep")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  // --- moving-disk ---
  auto* mov = app.add_subcommand("moving-disk",
                                 "disk centre sweep along the anti-diagonal");
  CommonFlags mf;
  double m_step = 0.005, m_c0 = 0.2, m_c1 = 0.8;
  std::vector<std::string> m_losses = {"std", "cgamma", "c2"};
  add_common(mov, mf, false, false);
  mov->add_option("--c-begin", m_c0);
  mov->add_option("--c-end", m_c1);
  mov->add_option("--c-step", m_step);
  mov->add_option("--losses", m_losses, "losses to sweep")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  // --- dynamics ---
  auto* dyn = app.add_subcommand("dynamics",
                                 "per-iteration traces from a shared init");
  CommonFlags df;
  int d_cadence = 25;
  add_common(dyn, df, false, false);
  dyn->add_option("--h1-cadence", d_cadence);

  // --- field ---
  auto* fld = app.add_subcommand("field", "pointwise error grid");
  CommonFlags ff;
  int f_grid = 101;
  add_common(fld, ff, true, false);
  fld->add_option("--grid-n", f_grid, "grid resolution per axis");

  // --- nonuniform ---
  auto* non = app.add_subcommand("nonuniform",
                                 "iid boundary sampling on the unit disk");
  CommonFlags nf;
  nf.m_bnd = 30;
  int n_epochs = 6000, n_refine = 500;
  add_common(non, nf, false, false);
  non->add_option("--adam-epochs", n_epochs);
  non->add_option("--refine-iters", n_refine);

  // --- verify ---
  auto* ver = app.add_subcommand("verify", "run the theory checks");
  std::string v_only, v_out;
  std::uint64_t v_seed = 0;
  ver->add_option("--only", v_only, "run a single named check");
  ver->add_option("--seed", v_seed, "master seed");
  ver->add_option("--out", v_out, "output directory")->required();

  // --- plot ---
  auto* plt = app.add_subcommand("plot", "render a CSV as SVG");
  plot::PlotOptions po;
  plt->add_option("--in", po.input, "input CSV")->required();
  plt->add_option("--out", po.output, "output SVG")->required();
  plt->add_option("--kind", po.kind, "line | heat")
      ->check(CLI::IsMember({"line", "heat"}));
  plt->add_option("--x", po.x_col);
  plt->add_option("--y", po.y_col);
  plt->add_option("--series", po.series_col, "grouping column");
  plt->add_option("--value", po.value_col, "heat-map value column");
  plt->add_flag("--logx", po.log_x);
  plt->add_flag("--logy", po.log_y);
  plt->add_option("--title", po.title);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config_args(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(std::move(args));
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return kExitInvalidConfig;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidConfig;
  }

  try {
    if (*train) {
      harness::ExperimentConfig cfg;
      cfg.domain = harness::domain_from_name(tf.domain);
      cfg.loss = losses::kind_from_name(tf.loss);
      cfg.m_int = tf.m_int;
      cfg.m_bnd = tf.m_bnd;
      cfg.seed = tf.seed;
      cfg.lbfgs.max_outer = tf.iters;
      cfg.h1_cadence = t_cadence;
      cfg.use_adam = t_adam;
      cfg.adam.epochs = t_epochs;
      cfg.refine_iters = t_refine;
      cfg.boundary_mode = t_bmode == "iid"
                              ? geom::BoundaryMode::iid_uniform
                              : geom::BoundaryMode::equispaced_arclength;
      const harness::TrainTrace trace = harness::run_training(cfg);
      harness::write_train_outputs(tf.out, cfg, trace);
      std::printf("h1_abs %.17g\nh1_rel %.17g\ndiverged %d\n",
                  trace.final_error.h1_abs, trace.final_error.h1_rel,
                  trace.diverged ? 1 : 0);
      return trace.diverged ? kExitDiverged : kExitOk;
    }
    if (*conv) {
      harness::ConvergenceOptions opt;
      opt.domain = harness::domain_from_name(cf.domain);
      opt.m_list = c_mlist;
      opt.num_seeds = c_seeds;
      opt.losses = parse_losses(c_losses);
      opt.iters = cf.iters;
      opt.master_seed = cf.seed;
      opt.out_dir = cf.out;
      opt.verbose = true;
      opt.threads = c_threads;
      harness::experiment_convergence(opt);
      return kExitOk;
    }
    if (*mov) {
      harness::MovingDiskOptions opt;
      opt.c_begin = m_c0;
      opt.c_end = m_c1;
      opt.c_step = m_step;
      opt.m_int = mf.m_int;
      opt.iters = mf.iters;
      opt.losses = parse_losses(m_losses);
      opt.master_seed = mf.seed;
      opt.out_dir = mf.out;
      opt.verbose = true;
      harness::experiment_moving_disk(opt);
      return kExitOk;
    }
    if (*dyn) {
      harness::DynamicsOptions opt;
      opt.m_int = df.m_int;
      opt.iters = df.iters;
      opt.h1_cadence = d_cadence;
      opt.master_seed = df.seed;
      opt.out_dir = df.out;
      opt.verbose = true;
      harness::experiment_dynamics(opt);
      return kExitOk;
    }
    if (*fld) {
      harness::FieldOptions opt;
      opt.domain = harness::domain_from_name(ff.domain);
      opt.m_int = ff.m_int;
      opt.iters = ff.iters;
      opt.grid_n = f_grid;
      opt.master_seed = ff.seed;
      opt.out_dir = ff.out;
      opt.verbose = true;
      harness::experiment_field(opt);
      return kExitOk;
    }
    if (*non) {
      harness::NonuniformOptions opt;
      opt.m_int = nf.m_int;
      opt.m_bnd = nf.m_bnd > 0 ? nf.m_bnd : 30;
      opt.adam_epochs = n_epochs;
      opt.refine_iters = n_refine;
      opt.master_seed = nf.seed;
      opt.out_dir = nf.out;
      opt.verbose = true;
      harness::experiment_nonuniform(opt);
      return kExitOk;
    }
    if (*ver) {
      const auto reports = verify::run_all_checks(v_seed, v_only);
      verify::write_reports(v_out, reports);
      for (const auto& r : reports) {
        std::printf("%s %s\n", r.passed ? "[PASS]" : "[FAIL]", r.name.c_str());
      }
      return verify::all_passed(reports) ? kExitOk : 1;
    }
    if (*plt) {
      plot::render(po);
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
