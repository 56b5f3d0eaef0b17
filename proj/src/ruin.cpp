#include "ruin.hpp"

#include <algorithm>
#include <cmath>

namespace rwre {

namespace {

// log(sum_j exp(v_j)) over v[first..last] inclusive.
double log_sum_exp(const std::vector<double>& v, int first, int last) {
  double m = -std::numeric_limits<double>::infinity();
  for (int j = first; j <= last; ++j) m = std::max(m, v[j]);
  double s = 0;
  for (int j = first; j <= last; ++j) s += std::exp(v[j] - m);
  return m + std::log(s);
}

}  // namespace

void RuinProblem::validate() const {
  if (n < 2) throw Error(ErrorKind::ConfigInvalid, "ruin chain needs n >= 2", "ruin");
  if (start <= 0 || start >= n) {
    throw Error(ErrorKind::ConfigInvalid, "ruin start must satisfy 0 < start < n", "ruin");
  }
  if (static_cast<int>(p_right.size()) < n) {
    throw Error(ErrorKind::ConfigInvalid, "p_right must provide entries 1..n-1", "ruin");
  }
  for (int i = 1; i < n; ++i) {
    if (!(p_right[i] > 0.0) || !(p_right[i] < 1.0)) {
      throw Error(ErrorKind::ConfigInvalid, "ruin probabilities must lie in (0,1)", "ruin");
    }
  }
}

RuinResult gambler_ruin_exact(const RuinProblem& problem) {
  problem.validate();
  const int n = problem.n;
  RuinResult r;
  r.log_prefix.assign(n, 0.0);
  for (int j = 1; j < n; ++j) {
    const double p = problem.p_right[j];
    r.log_prefix[j] = r.log_prefix[j - 1] + std::log1p(-p) - std::log(p);
  }
  const double log_den = log_sum_exp(r.log_prefix, 0, n - 1);
  r.absorb_left = std::exp(log_sum_exp(r.log_prefix, problem.start, n - 1) - log_den);
  r.absorb_right = std::exp(log_sum_exp(r.log_prefix, 0, problem.start - 1) - log_den);
  return r;
}

}  // namespace rwre
