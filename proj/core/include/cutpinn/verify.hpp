#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cutpinn/geometry.hpp"
#include "cutpinn/harness.hpp"

namespace cutpinn::verify {

// One executable check of a theoretical statement at desk scale.
struct CheckReport {
  std::string name;
  bool passed = false;
  std::vector<double> observed;
  std::vector<double> threshold;
  std::string details;
};

// Chord-arc inequalities on an arc-length grid: chord <= arc everywhere,
// the chord-arc constant is positive (2/pi for a circle), and pairs closer
// than 1/(2 kappa_max) in arc satisfy chord >= (3/4) arc.
CheckReport check_chord_arc(harness::DomainKind domain, int grid_n = 512);

// Discrete H^{1/2} vs quadrature oracle for the manufactured trace at
// m in m_list; also reproduces the analytic 2 pi^2 seminorm of cos(theta)
// on the unit circle.
CheckReport check_norm_equivalence(
    harness::DomainKind domain,
    const std::vector<int>& m_list = {10, 20, 40, 80, 160});

// Monte Carlo concentration of the boundary V-statistic and the interior
// L2 estimator under iid sampling, 200 replications each.
CheckReport check_concentration(std::uint64_t seed = 0);

// Decay of the tensor-grid L2 discretisation gap across four resolutions;
// passes when the fitted log-log slope is <= -0.25.
CheckReport check_cut_grid_rate(harness::DomainKind domain);

// Standard and weighted losses must agree bitwise in d = 2 on 50 random
// (network, collocation) pairs.
CheckReport check_d2_identity(std::uint64_t seed = 0);

// Finite-difference validation of the network Laplacian and of the loss
// parameter gradients.
CheckReport check_autodiff(std::uint64_t seed = 0);

// All checks (optionally filtered by exact name). Deterministic given seed.
std::vector<CheckReport> run_all_checks(std::uint64_t seed = 0,
                                        const std::string& only = "");

bool all_passed(const std::vector<CheckReport>& reports);

// checks.csv and checks.txt under out_dir.
void write_reports(const std::string& out_dir,
                   const std::vector<CheckReport>& reports);

}  // namespace cutpinn::verify
