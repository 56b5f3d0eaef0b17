#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "common.hpp"
#include "environment.hpp"
#include "solver.hpp"

namespace rwre {

enum class CiMethod { Wilson, ClopperPearson };
enum class EstimateMode { Exact, MonteCarlo };

const char* ci_method_name(CiMethod m);
const char* estimate_mode_name(EstimateMode m);

struct EstimateCI {
  double estimate = 0;
  double lo = 0;
  double hi = 1;
  double confidence = 0.95;
  int64_t n_env = 0;
  int64_t n_walk = 0;  // per environment; 0 in exact mode
  CiMethod method = CiMethod::Wilson;
  EstimateMode mode = EstimateMode::Exact;
  double bracket_width = 0;  // worst per-environment truncation width, exact mode
};

// Exit event on a box (lateral exit is part of the event) or on a slab
// (laterally unbounded; exact mode brackets it by widening walls).
struct EventSpec {
  enum class Domain { Box, Slab };
  enum class Success { Negative, NotPositive };

  Domain domain = Domain::Slab;
  Eigen::VectorXd direction;
  double half_length = 10;  // L
  double half_width = 0;    // box only
  Success success = Success::Negative;
  Site start;  // default: origin
};

struct EstimateOptions {
  double confidence = 0.95;
  CiMethod method = CiMethod::Wilson;
  int threads = 1;
  double bracket_tol = 1e-9;          // slab truncation target in exact mode
  double lateral_cap_factor = 128;
  int64_t step_budget = 1'000'000'000;
};

// Annealed probability of the event: environment replicas are derived from the
// master seed; exact mode averages per-environment solver values (normal CI on
// the replica values), Monte Carlo mode pools walks into a binomial CI.
EstimateCI estimate_probability(const EnvironmentLaw& law, const EventSpec& event, int64_t n_env,
                                int64_t walks_per_env, uint64_t master_seed,
                                const EstimateOptions& options = {});

// Per-environment exact value of the event (bracket midpoint for slabs).
double exact_event_probability(const TransitionField& field, const EventSpec& event,
                               const EstimateOptions& options, double* bracket_width = nullptr);

struct PairCorrelation {
  int64_t level_a = 0;
  int64_t level_b = 0;
  double r = 0;
  bool flagged = false;
};

struct IndependenceReport {
  std::vector<int64_t> levels;
  std::vector<std::vector<double>> values;  // [level][replica]
  std::vector<PairCorrelation> pairs;
  double flag_threshold = 0;  // 4/sqrt(n_env)
  int64_t n_env = 0;
};

// Pairwise correlations of the decoupled backward-crossing statistic across
// levels; each level's value is computed through a slab view restricted to the
// region that level's chain is allowed to read.
IndependenceReport independence_diagnostic(const EnvironmentLaw& law, const LevelGeometry& geometry,
                                           int64_t level_lo, int64_t level_hi, int64_t n_env,
                                           uint64_t master_seed,
                                           const EstimateOptions& options = {});

std::vector<PairCorrelation> correlation_pairs(const std::vector<int64_t>& levels,
                                               const std::vector<std::vector<double>>& values,
                                               double flag_threshold);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

std::pair<double, double> wilson_interval(int64_t successes, int64_t n, double confidence);
std::pair<double, double> clopper_pearson_interval(int64_t successes, int64_t n, double confidence);
double normal_quantile(double p);

// Deterministic pairwise reduction; order-insensitive accumulation keeps
// results identical across thread counts.
double pairwise_sum(const std::vector<double>& values);

// Static-partition parallel map over [0, n); results land in caller-indexed
// slots so scheduling cannot reorder them.
void parallel_for(int64_t n, int threads, const std::function<void(int64_t)>& fn);

}  // namespace rwre
