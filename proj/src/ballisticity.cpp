#include "ballisticity.hpp"

#include <cmath>

#include "lattice.hpp"

namespace rwre {

const char* ConditionVerdict::outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "fail";
    case Outcome::Inconclusive: return "inconclusive";
  }
  return "?";
}

nlohmann::json ConditionVerdict::to_json() const {
  return {
      {"condition", condition},
      {"parameter", parameter},
      {"scale", scale},
      {"estimate", estimate.estimate},
      {"ci_lo", estimate.lo},
      {"ci_hi", estimate.hi},
      {"confidence", estimate.confidence},
      {"n_env", estimate.n_env},
      {"n_walk", estimate.n_walk},
      {"mode", estimate_mode_name(estimate.mode)},
      {"threshold", threshold},
      {"verdict", outcome_name(outcome)},
      {"margin", margin},
      {"empirical_only", empirical_only},
      {"equivalence_m", equivalence_m},
      {"in_equivalence_regime", in_equivalence_regime},
  };
}

ConditionVerdict polynomial_condition_check(const EnvironmentLaw& law,
                                            const Eigen::VectorXd& direction, double m, double L,
                                            int64_t n_env, int64_t walks_per_env,
                                            uint64_t master_seed, const EstimateOptions& options) {
  if (!(m > 0)) throw Error(ErrorKind::ConfigInvalid, "(P)_M needs M > 0", "ballisticity");
  if (!(L >= 1)) throw Error(ErrorKind::ConfigInvalid, "(P)_M needs L >= 1", "ballisticity");

  EventSpec event;
  event.domain = EventSpec::Domain::Slab;
  event.direction = direction;
  event.half_length = L;
  event.success = EventSpec::Success::Negative;

  ConditionVerdict v;
  v.condition = "(P)_M";
  v.parameter = m;
  v.scale = L;
  v.threshold = std::pow(L, -m);
  v.equivalence_m = 15 * law.d + 5;
  v.in_equivalence_regime = m >= v.equivalence_m;
  v.estimate = estimate_probability(law, event, n_env, walks_per_env, master_seed, options);

  if (v.estimate.hi < v.threshold) {
    v.outcome = ConditionVerdict::Outcome::Pass;
    v.margin = v.threshold - v.estimate.hi;
  } else if (v.estimate.lo > v.threshold) {
    v.outcome = ConditionVerdict::Outcome::Fail;
    v.margin = v.estimate.lo - v.threshold;
  } else {
    v.outcome = ConditionVerdict::Outcome::Inconclusive;
    v.margin = 0;
  }
  return v;
}

std::vector<GammaFit> fit_decay_rates(const std::vector<double>& scales,
                                      const std::vector<double>& probabilities,
                                      const std::vector<double>& gammas) {
  if (scales.size() < 3) {
    throw Error(ErrorKind::TooFewScales, "decay fit needs at least 3 scales", "ballisticity");
  }
  if (scales.size() != probabilities.size()) {
    throw Error(ErrorKind::ConfigInvalid, "scales and probabilities differ in length",
                "ballisticity");
  }
  for (size_t i = 1; i < scales.size(); ++i) {
    if (!(scales[i] > scales[i - 1])) {
      throw Error(ErrorKind::ConfigInvalid, "scales must be strictly increasing", "ballisticity");
    }
  }
  std::vector<GammaFit> fits;
  fits.reserve(gammas.size());
  for (double gamma : gammas) {
    GammaFit f;
    f.gamma = gamma;
    double sxy = 0, sxx = 0;
    std::vector<double> x(scales.size()), y(scales.size());
    for (size_t i = 0; i < scales.size(); ++i) {
      x[i] = std::pow(scales[i], gamma);
      y[i] = -std::log(std::max(probabilities[i], 1e-300));
      sxy += x[i] * y[i];
      sxx += x[i] * x[i];
    }
    f.rate = sxy / sxx;
    double ss = 0;
    for (size_t i = 0; i < scales.size(); ++i) {
      const double r = y[i] - f.rate * x[i];
      ss += r * r;
    }
    f.residual = std::sqrt(ss / static_cast<double>(scales.size()));
    fits.push_back(f);
  }
  return fits;
}

DecayFit decay_fit(const EnvironmentLaw& law, const Eigen::VectorXd& direction,
                   const std::vector<double>& scales, const std::vector<double>& gammas,
                   int64_t n_env, int64_t walks_per_env, uint64_t master_seed,
                   const EstimateOptions& options, double residual_threshold) {
  if (scales.size() < 3) {
    throw Error(ErrorKind::TooFewScales, "decay fit needs at least 3 scales", "ballisticity");
  }
  DecayFit out;
  out.scales = scales;
  out.residual_threshold = residual_threshold;
  std::vector<double> probs;
  for (double L : scales) {
    EventSpec event;
    event.domain = EventSpec::Domain::Slab;
    event.direction = direction;
    event.half_length = L;
    event.success = EventSpec::Success::Negative;
    EstimateCI ci = estimate_probability(law, event, n_env, walks_per_env, master_seed, options);
    out.estimates.push_back(ci);
    probs.push_back(ci.estimate);
  }
  out.fits = fit_decay_rates(scales, probs, gammas);
  double best = std::numeric_limits<double>::infinity();
  for (const GammaFit& f : out.fits) {
    if (f.residual < best) {
      best = f.residual;
      out.best_gamma = f.gamma;
    }
    if (f.gamma == 1.0) {
      out.exponential_rate = f.rate;
      out.t_condition_pass = f.rate > 0 && f.residual <= residual_threshold;
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> direction_scan_directions(const Eigen::VectorXd& axis,
                                                       double half_angle, int k) {
  if (k < 1) throw Error(ErrorKind::ConfigInvalid, "direction scan needs k >= 1", "ballisticity");
  if (half_angle < 0 || half_angle > M_PI / 4 + 1e-12) {
    throw Error(ErrorKind::ConfigInvalid, "cone half-angle must lie in [0, pi/4]", "ballisticity");
  }
  const int d = static_cast<int>(axis.size());
  const Eigen::MatrixXd frame = build_rotation(axis);
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(k);
  if (half_angle == 0 || k == 1 || d == 1) {
    dirs.push_back(frame.col(0));  // degenerate cone collapses to the axis
    return dirs;
  }
  if (d == 2) {
    for (int j = 0; j < k; ++j) {
      const double theta = -half_angle + 2 * half_angle * j / static_cast<double>(k - 1);
      dirs.push_back(std::cos(theta) * frame.col(0) + std::sin(theta) * frame.col(1));
    }
    return dirs;
  }
  // spiral on the spherical cap: radius sqrt-spaced, azimuth by golden angle
  constexpr double kGolden = 2.399963229728653;
  for (int j = 0; j < k; ++j) {
    const double theta = half_angle * std::sqrt(static_cast<double>(j) / (k - 1));
    const double phi = j * kGolden;
    Eigen::VectorXd lateral = std::cos(phi) * frame.col(1) + std::sin(phi) * frame.col(2);
    if (d > 3) {
      // spread the remaining components deterministically as well
      for (int a = 3; a < d; ++a) lateral += std::sin(phi * (a - 1)) * frame.col(a);
      lateral.normalize();
    }
    dirs.push_back(std::cos(theta) * frame.col(0) + std::sin(theta) * lateral);
  }
  return dirs;
}

std::vector<std::pair<Eigen::VectorXd, ConditionVerdict>> direction_scan(
    const EnvironmentLaw& law, const Eigen::VectorXd& axis, double half_angle, int k, double m,
    double L, int64_t n_env, int64_t walks_per_env, uint64_t master_seed,
    const EstimateOptions& options) {
  std::vector<std::pair<Eigen::VectorXd, ConditionVerdict>> out;
  for (const Eigen::VectorXd& dir : direction_scan_directions(axis, half_angle, k)) {
    out.emplace_back(
        dir, polynomial_condition_check(law, dir, m, L, n_env, walks_per_env, master_seed, options));
  }
  return out;
}

}  // namespace rwre
