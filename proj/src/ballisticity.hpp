#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "json.hpp"

#include "estimate.hpp"

namespace rwre {

// Finite-scale diagnostic for an asymptotic condition; never a proof, and the
// emitted metadata says so.
struct ConditionVerdict {
  enum class Outcome { Pass, Fail, Inconclusive };

  std::string condition;  // "(P)_M", "(T)_gamma", "(T)"
  double parameter = 0;   // M or gamma
  double scale = 0;       // L
  EstimateCI estimate;
  double threshold = 0;
  Outcome outcome = Outcome::Inconclusive;
  double margin = 0;
  bool empirical_only = true;
  int equivalence_m = 0;            // 15d+5
  bool in_equivalence_regime = false;

  nlohmann::json to_json() const;
  static const char* outcome_name(Outcome o);
};

// Polynomial condition at a single scale: annealed back-exit probability of the
// slab of half-width L against 1/L^M, CI-aware (pass needs the CI upper end
// strictly below the threshold).
ConditionVerdict polynomial_condition_check(const EnvironmentLaw& law,
                                            const Eigen::VectorXd& direction, double m, double L,
                                            int64_t n_env, int64_t walks_per_env,
                                            uint64_t master_seed,
                                            const EstimateOptions& options = {});

struct GammaFit {
  double gamma = 1;
  double rate = 0;      // least squares through the origin of -log p against L^gamma
  double residual = 0;  // rms misfit
};

struct DecayFit {
  std::vector<double> scales;
  std::vector<EstimateCI> estimates;
  std::vector<GammaFit> fits;
  double best_gamma = 1;
  double exponential_rate = 0;  // gamma = 1 fit, when on the grid
  bool t_condition_pass = false;
  double residual_threshold = 0;
};

// Pure fitting core, usable on synthetic decay curves.
std::vector<GammaFit> fit_decay_rates(const std::vector<double>& scales,
                                      const std::vector<double>& probabilities,
                                      const std::vector<double>& gammas);

DecayFit decay_fit(const EnvironmentLaw& law, const Eigen::VectorXd& direction,
                   const std::vector<double>& scales, const std::vector<double>& gammas,
                   int64_t n_env, int64_t walks_per_env, uint64_t master_seed,
                   const EstimateOptions& options = {}, double residual_threshold = 0.25);

// k unit directions in the cone around the axis, deterministically placed
// (evenly spaced angles in d = 2, a spiral on the cap in higher dimension).
std::vector<Eigen::VectorXd> direction_scan_directions(const Eigen::VectorXd& axis,
                                                       double half_angle, int k);

std::vector<std::pair<Eigen::VectorXd, ConditionVerdict>> direction_scan(
    const EnvironmentLaw& law, const Eigen::VectorXd& axis, double half_angle, int k, double m,
    double L, int64_t n_env, int64_t walks_per_env, uint64_t master_seed,
    const EstimateOptions& options = {});

}  // namespace rwre
