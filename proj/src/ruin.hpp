#pragma once

#include <vector>

#include "common.hpp"

namespace rwre {

// Birth-death chain on 0..n with absorption at both ends and site-dependent
// right-probabilities p[1..n-1]. Closed-form absorption probabilities; this is
// the independent oracle the lattice solver is checked against.
struct RuinProblem {
  int n = 0;      // right absorbing state
  int start = 0;  // 0 < start < n
  std::vector<double> p_right;  // size n, entries 1..n-1 used

  void validate() const;
};

struct RuinResult {
  double absorb_left = 0;
  double absorb_right = 0;
  // log of prefix products log(rho_1 * ... * rho_j) for j = 0..n-1 (rho = q/p),
  // exposed for potential-function cross-checks.
  std::vector<double> log_prefix;
};

// Evaluated in log space: the rho products overflow on long chains otherwise.
RuinResult gambler_ruin_exact(const RuinProblem& problem);

}  // namespace rwre
