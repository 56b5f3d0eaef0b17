#include "estimate.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <thread>

#include "rng.hpp"
#include "walk.hpp"

namespace rwre {

const char* ci_method_name(CiMethod m) {
  return m == CiMethod::Wilson ? "wilson" : "clopper-pearson";
}

const char* estimate_mode_name(EstimateMode m) {
  return m == EstimateMode::Exact ? "exact" : "mc";
}

double normal_quantile(double p) {
  boost::math::normal_distribution<double> n;
  return boost::math::quantile(n, p);
}

std::pair<double, double> wilson_interval(int64_t successes, int64_t n, double confidence) {
  if (n <= 0) throw Error(ErrorKind::InsufficientSamples, "wilson interval needs n >= 1", "estimate");
  const double z = normal_quantile(0.5 + confidence / 2);
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1 - phat) / nn + z2 / (4 * nn * nn)) / denom;
  // the score bounds are exactly 0 / 1 at the degenerate counts
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == n ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

std::pair<double, double> clopper_pearson_interval(int64_t successes, int64_t n,
                                                   double confidence) {
  if (n <= 0) throw Error(ErrorKind::InsufficientSamples, "interval needs n >= 1", "estimate");
  const double alpha = 1.0 - confidence;
  double lo = 0, hi = 1;
  if (successes > 0) {
    boost::math::beta_distribution<double> bl(static_cast<double>(successes),
                                              static_cast<double>(n - successes + 1));
    lo = boost::math::quantile(bl, alpha / 2);
  }
  if (successes < n) {
    boost::math::beta_distribution<double> bh(static_cast<double>(successes + 1),
                                              static_cast<double>(n - successes));
    hi = boost::math::quantile(bh, 1 - alpha / 2);
  }
  return {lo, hi};
}

double pairwise_sum(const std::vector<double>& values) {
  if (values.empty()) return 0;
  std::vector<double> acc = values;
  size_t n = acc.size();
  while (n > 1) {
    const size_t half = (n + 1) / 2;
    for (size_t i = 0; i < n / 2; ++i) acc[i] = acc[2 * i] + acc[2 * i + 1];
    if (n % 2) acc[n / 2] = acc[n - 1];
    n = half;
  }
  return acc[0];
}

void parallel_for(int64_t n, int threads, const std::function<void(int64_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<int64_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int64_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

StopSpec stop_for_event(const EventSpec& event, const Eigen::MatrixXd& rotation) {
  StopSpec stop;
  stop.rotation = rotation;
  stop.back = -event.half_length;
  stop.front = event.half_length;
  if (event.domain == EventSpec::Domain::Box) stop.lateral = event.half_width;
  return stop;
}

bool success_of_class(const EventSpec& event, BoundaryClass cls) {
  if (event.success == EventSpec::Success::Negative) return cls == BoundaryClass::Negative;
  return cls != BoundaryClass::Positive;
}

}  // namespace

double exact_event_probability(const TransitionField& field, const EventSpec& event,
                               const EstimateOptions& options, double* bracket_width) {
  const Eigen::MatrixXd rotation = build_rotation(event.direction);
  const Eigen::VectorXd dir = rotation.col(0);
  Site start = event.start.dim ? event.start : Site::origin(field.dimension());
  if (bracket_width) *bracket_width = 0;

  if (event.domain == EventSpec::Domain::Box) {
    BoxTriple box{rotation, event.half_length, event.half_width};
    ExitDistribution dist = solve_exit_distribution(problem_from_box(field, box));
    if (event.success == EventSpec::Success::Negative) {
      return dist.probability(start, BoundaryClass::Negative);
    }
    return 1.0 - dist.probability(start, BoundaryClass::Positive);
  }

  // slab: bracket the laterally-unbounded exit by widening absorbing walls
  const double L = event.half_length;
  auto neg = [&](const Site& z) { return site_dot(z, dir) <= -L; };
  auto pos = [&](const Site& z) { return site_dot(z, dir) >= L; };
  double wall = 2 * L;
  const double cap = std::max(wall, options.lateral_cap_factor * L);
  while (true) {
    AbsorbingProblem p = [&] {
      auto interior = [&](const Site& z) {
        const double s = site_dot(z, dir);
        return s > -L - 2 && s < L + 2 && !neg(z) && !pos(z) && within_lateral(z, rotation, wall);
      };
      auto classify = [&](const Site& z) {
        if (neg(z)) return BoundaryClass::Negative;
        if (pos(z)) return BoundaryClass::Positive;
        return BoundaryClass::Lateral;
      };
      return problem_from_flood(field, {start}, interior, classify);
    }();
    ExitDistribution dist = solve_exit_distribution(p);
    const double pl = dist.probability(start, BoundaryClass::Lateral);
    double value;
    if (event.success == EventSpec::Success::Negative) {
      value = dist.probability(start, BoundaryClass::Negative) + pl / 2;
    } else {
      value = 1.0 - dist.probability(start, BoundaryClass::Positive) - pl / 2;
    }
    if (pl <= options.bracket_tol || field.dimension() == 1) {
      if (bracket_width) *bracket_width = pl;
      return value;
    }
    wall *= 2;
    if (wall > cap) {
      throw Error(ErrorKind::BracketNotTight,
                  "slab bracket width " + std::to_string(pl) + " above tolerance at wall cap",
                  "estimate");
    }
  }
}

EstimateCI estimate_probability(const EnvironmentLaw& law, const EventSpec& event, int64_t n_env,
                                int64_t walks_per_env, uint64_t master_seed,
                                const EstimateOptions& options) {
  if (n_env < 1) {
    throw Error(ErrorKind::InsufficientSamples, "estimate needs n_env >= 1", "estimate");
  }
  EstimateCI ci;
  ci.confidence = options.confidence;
  ci.method = options.method;
  ci.n_env = n_env;
  ci.n_walk = walks_per_env;

  const Eigen::MatrixXd rotation = build_rotation(event.direction);
  const Site start = event.start.dim ? event.start : Site::origin(law.d);

  if (walks_per_env <= 0) {
    ci.mode = EstimateMode::Exact;
    std::vector<double> values(n_env, 0.0);
    std::vector<double> widths(n_env, 0.0);
    parallel_for(n_env, options.threads, [&](int64_t r) {
      Environment env(law, rng::derive(master_seed, rng::kTagReplica, static_cast<uint64_t>(r)));
      values[r] = exact_event_probability(env, event, options, &widths[r]);
    });
    const double n = static_cast<double>(n_env);
    const double mean = pairwise_sum(values) / n;
    std::vector<double> sq(n_env);
    for (int64_t r = 0; r < n_env; ++r) sq[r] = (values[r] - mean) * (values[r] - mean);
    const double var = n_env > 1 ? pairwise_sum(sq) / (n - 1) : 0.0;
    double worst_width = 0;
    for (double w : widths) worst_width = std::max(worst_width, w);
    const double z = normal_quantile(0.5 + options.confidence / 2);
    const double half = z * std::sqrt(var / n) + worst_width / 2;
    ci.estimate = mean;
    ci.lo = std::max(0.0, mean - half);
    ci.hi = std::min(1.0, mean + half);
    ci.bracket_width = worst_width;
    return ci;
  }

  ci.mode = EstimateMode::MonteCarlo;
  StopSpec stop = stop_for_event(event, rotation);
  std::vector<double> successes(n_env, 0.0);
  parallel_for(n_env, options.threads, [&](int64_t r) {
    Environment env(law, rng::derive(master_seed, rng::kTagReplica, static_cast<uint64_t>(r)));
    int64_t hits = 0;
    for (int64_t k = 0; k < walks_per_env; ++k) {
      const uint64_t stream = rng::derive(master_seed, rng::kTagWalk,
                                          (static_cast<uint64_t>(r) << 32) | static_cast<uint64_t>(k));
      WalkOutcome o = simulate_walk(env, start, stop, env.seed(), stream, options.step_budget);
      if (success_of_class(event, o.exit_class)) ++hits;
    }
    successes[r] = static_cast<double>(hits);
  });
  const int64_t total = n_env * walks_per_env;
  const auto hits = static_cast<int64_t>(pairwise_sum(successes));
  ci.estimate = static_cast<double>(hits) / static_cast<double>(total);
  const auto [lo, hi] = options.method == CiMethod::Wilson
                            ? wilson_interval(hits, total, options.confidence)
                            : clopper_pearson_interval(hits, total, options.confidence);
  ci.lo = lo;
  ci.hi = hi;
  return ci;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(ErrorKind::InsufficientSamples, "correlation needs two samples of equal size >= 2",
                "estimate");
  }
  const double n = static_cast<double>(a.size());
  const double ma = pairwise_sum(a) / n;
  const double mb = pairwise_sum(b) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0 || sbb == 0) return sab == 0 ? 0.0 : 1.0;
  return sab / std::sqrt(saa * sbb);
}

std::vector<PairCorrelation> correlation_pairs(const std::vector<int64_t>& levels,
                                               const std::vector<std::vector<double>>& values,
                                               double flag_threshold) {
  std::vector<PairCorrelation> pairs;
  for (size_t a = 0; a < levels.size(); ++a) {
    for (size_t b = a + 1; b < levels.size(); ++b) {
      PairCorrelation pc;
      pc.level_a = levels[a];
      pc.level_b = levels[b];
      pc.r = pearson_correlation(values[a], values[b]);
      pc.flagged = std::abs(pc.r) > flag_threshold;
      pairs.push_back(pc);
    }
  }
  return pairs;
}

IndependenceReport independence_diagnostic(const EnvironmentLaw& law,
                                           const LevelGeometry& geometry, int64_t level_lo,
                                           int64_t level_hi, int64_t n_env, uint64_t master_seed,
                                           const EstimateOptions& options) {
  if (n_env < 30) {
    throw Error(ErrorKind::InsufficientSamples, "independence diagnostic needs n_env >= 30",
                "estimate");
  }
  if (level_hi < level_lo) {
    throw Error(ErrorKind::ConfigInvalid, "level range is empty", "estimate");
  }
  IndependenceReport rep;
  rep.n_env = n_env;
  rep.flag_threshold = 4.0 / std::sqrt(static_cast<double>(n_env));
  for (int64_t i = level_lo; i <= level_hi; ++i) rep.levels.push_back(i);
  rep.values.assign(rep.levels.size(), std::vector<double>(n_env, 0.0));

  const double spacing = geometry.spacing;
  const double rho_c = 8 * spacing;
  const Eigen::VectorXd dir = geometry.direction();

  parallel_for(n_env, options.threads, [&](int64_t r) {
    Environment env(law, rng::derive(master_seed, rng::kTagReplica, static_cast<uint64_t>(r)));
    for (size_t k = 0; k < rep.levels.size(); ++k) {
      const int64_t i = rep.levels[k];
      // the chain for level i may only read strictly between the adjacent
      // absorbing sets; the view turns any out-of-region read into an error
      SlabView view = restrict_to_slab(env, (i - 1) * spacing + 1.75, i * spacing + 1.75, dir);
      SliceTilde st = tilde_q_slice(view, geometry, i, rho_c);
      rep.values[k][r] = st.sup.mid();
    }
  });

  rep.pairs = correlation_pairs(rep.levels, rep.values, rep.flag_threshold);
  return rep;
}

}  // namespace rwre
