#include "environment.hpp"

#include <cmath>
#include <mutex>

#include "rng.hpp"

namespace rwre {

namespace {
constexpr size_t kCacheCap = 1u << 21;
}

const char* EnvironmentLaw::kind_name(Kind k) {
  switch (k) {
    case Kind::DeterministicDrift: return "deterministic_drift";
    case Kind::EpsilonPerturbedSrw: return "epsilon_perturbed_srw";
    case Kind::SimplexUniformFloor: return "simplex_uniform_floor";
    case Kind::TwoPoint: return "two_point";
  }
  return "?";
}

void EnvironmentLaw::validate() const {
  if (d < 1 || d > kMaxDim) {
    throw Error(ErrorKind::ConfigInvalid, "law.d must be in [1," + std::to_string(kMaxDim) + "]",
                "environment");
  }
  const double uniform = 1.0 / (2.0 * d);
  if (!(kappa > 0) || kappa > uniform + 1e-15) {
    throw Error(ErrorKind::ConfigInvalid, "law.kappa must lie in (0, 1/(2d)]", "environment");
  }
  switch (kind) {
    case Kind::DeterministicDrift:
    case Kind::EpsilonPerturbedSrw:
      if (epsilon < 0 || uniform - epsilon < kappa - 1e-15) {
        throw Error(ErrorKind::ConfigInvalid,
                    "law.epsilon must satisfy 0 <= epsilon <= 1/(2d) - kappa", "environment");
      }
      break;
    case Kind::SimplexUniformFloor:
      break;
    case Kind::TwoPoint: {
      if (static_cast<int>(p_plus.size()) != 2 * d || static_cast<int>(p_minus.size()) != 2 * d) {
        throw Error(ErrorKind::ConfigInvalid, "two_point vectors must have length 2d", "environment");
      }
      for (const auto* v : {&p_plus, &p_minus}) {
        double sum = 0;
        for (double p : *v) {
          if (p < kappa - 1e-12) {
            throw Error(ErrorKind::ConfigInvalid, "two_point entries must be >= kappa", "environment");
          }
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
          throw Error(ErrorKind::ConfigInvalid, "two_point vectors must sum to 1", "environment");
        }
      }
      if (mix < 0 || mix > 1) {
        throw Error(ErrorKind::ConfigInvalid, "two_point mix must lie in [0,1]", "environment");
      }
      break;
    }
  }
}

EnvironmentLaw EnvironmentLaw::from_json(const nlohmann::json& j) {
  EnvironmentLaw law;
  try {
    law.d = j.at("d").get<int>();
    law.kappa = j.at("kappa").get<double>();
    law.seed = j.value("seed", uint64_t{0});
    const std::string kind = j.at("kind").get<std::string>();
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    if (kind == "deterministic_drift") {
      law.kind = Kind::DeterministicDrift;
      law.epsilon = params.value("epsilon", 0.0);
    } else if (kind == "epsilon_perturbed_srw") {
      law.kind = Kind::EpsilonPerturbedSrw;
      law.epsilon = params.value("epsilon", 0.0);
    } else if (kind == "simplex_uniform_floor") {
      law.kind = Kind::SimplexUniformFloor;
    } else if (kind == "two_point") {
      law.kind = Kind::TwoPoint;
      law.p_plus = params.at("p_plus").get<std::vector<double>>();
      law.p_minus = params.at("p_minus").get<std::vector<double>>();
      law.mix = params.value("mix", 0.5);
    } else {
      throw Error(ErrorKind::ConfigInvalid, "unknown law kind '" + kind + "'", "environment");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("law spec: ") + e.what(), "environment");
  }
  law.validate();
  return law;
}

nlohmann::json EnvironmentLaw::to_json() const {
  nlohmann::json params = nlohmann::json::object();
  switch (kind) {
    case Kind::DeterministicDrift:
    case Kind::EpsilonPerturbedSrw:
      params["epsilon"] = epsilon;
      break;
    case Kind::SimplexUniformFloor:
      break;
    case Kind::TwoPoint:
      params["p_plus"] = p_plus;
      params["p_minus"] = p_minus;
      params["mix"] = mix;
      break;
  }
  return {{"d", d}, {"kappa", kappa}, {"kind", kind_name(kind)}, {"params", params}, {"seed", seed}};
}

Environment::Environment(EnvironmentLaw law) : Environment(law, law.seed) {}

Environment::Environment(EnvironmentLaw law, uint64_t seed_override)
    : law_(std::move(law)), seed_(seed_override) {
  law_.validate();
  cache_enabled_ = law_.kind != EnvironmentLaw::Kind::DeterministicDrift;
  if (law_.kind == EnvironmentLaw::Kind::DeterministicDrift) {
    fixed_.assign(law_.directions(), 1.0 / (2.0 * law_.d));
    fixed_[0] += law_.epsilon;
    fixed_[1] -= law_.epsilon;
  }
}

void Environment::realize(const Site& x, double* out) const {
  const int m = law_.directions();
  rng::Philox gen(rng::derive(seed_, rng::kTagSite), rng::site_key(x), 0);
  switch (law_.kind) {
    case EnvironmentLaw::Kind::DeterministicDrift: {
      for (int k = 0; k < m; ++k) out[k] = fixed_[k];
      return;
    }
    case EnvironmentLaw::Kind::EpsilonPerturbedSrw: {
      const double uniform = 1.0 / m;
      const double sign = (gen.next_u32() & 1u) ? 1.0 : -1.0;
      for (int k = 0; k < m; ++k) out[k] = uniform;
      out[0] += sign * law_.epsilon;
      out[1] -= sign * law_.epsilon;
      return;
    }
    case EnvironmentLaw::Kind::SimplexUniformFloor: {
      // Dirichlet(1,..,1) via exponentials, then rescale onto the kappa floor.
      double total = 0;
      for (int k = 0; k < m; ++k) {
        const double g = -std::log(1.0 - gen.next_unit());
        out[k] = g;
        total += g;
      }
      const double scale = 1.0 - m * law_.kappa;
      if (total <= 0) {
        for (int k = 0; k < m; ++k) out[k] = 1.0 / m;
        return;
      }
      for (int k = 0; k < m; ++k) out[k] = law_.kappa + scale * (out[k] / total);
      return;
    }
    case EnvironmentLaw::Kind::TwoPoint: {
      const std::vector<double>& v = (gen.next_unit() < law_.mix) ? law_.p_plus : law_.p_minus;
      for (int k = 0; k < m; ++k) out[k] = v[k];
      return;
    }
  }
}

void Environment::probs_into(const Site& x, double* out) const {
  const int m = law_.directions();
  if (!cache_enabled_) {
    realize(x, out);
    return;
  }
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(x);
    if (it != cache_.end()) {
      for (int k = 0; k < m; ++k) out[k] = it->second[k];
      return;
    }
  }
  realize(x, out);
  std::unique_lock lock(mutex_);
  if (cache_.size() < kCacheCap) {
    auto& slot = cache_[x];
    for (int k = 0; k < m; ++k) slot[k] = out[k];
  }
}

SlabView::SlabView(const TransitionField& parent, double lower, double upper,
                   Eigen::VectorXd direction)
    : parent_(&parent), lower_(lower), upper_(upper), direction_(std::move(direction)) {
  if (!(lower_ < upper_)) {
    throw Error(ErrorKind::ConfigInvalid, "slab requires lower < upper", "environment");
  }
}

bool SlabView::contains(const Site& x) const {
  double s = 0;
  for (int k = 0; k < x.dim; ++k) s += static_cast<double>(x.c[k]) * direction_[k];
  return s >= lower_ && s < upper_;
}

void SlabView::probs_into(const Site& x, double* out) const {
  if (!contains(x)) {
    throw Error(ErrorKind::OutOfSlab,
                "site " + site_to_string(x) + " outside slab [" + std::to_string(lower_) + "," +
                    std::to_string(upper_) + ")",
                "environment");
  }
  parent_->probs_into(x, out);
}

SlabView restrict_to_slab(const TransitionField& env, double lower, double upper,
                          const Eigen::VectorXd& direction) {
  return SlabView(env, lower, upper, direction);
}

LawStatistics law_statistics(const EnvironmentLaw& law, int64_t n, uint64_t seed) {
  if (n < 2) throw Error(ErrorKind::InsufficientSamples, "law_statistics needs n >= 2", "environment");
  Environment env(law, seed);
  const int m = law.directions();
  LawStatistics st;
  st.n = n;
  st.mean.assign(m, 0.0);
  st.variance.assign(m, 0.0);
  std::vector<double> v(m);
  // Welford, entry by entry; sites along the first axis are i.i.d. draws.
  for (int64_t i = 0; i < n; ++i) {
    Site x = Site::origin(law.d);
    x.c[0] = i;
    env.probs_into(x, v.data());
    for (int k = 0; k < m; ++k) {
      const double delta = v[k] - st.mean[k];
      st.mean[k] += delta / static_cast<double>(i + 1);
      st.variance[k] += delta * (v[k] - st.mean[k]);
    }
  }
  for (int k = 0; k < m; ++k) st.variance[k] /= static_cast<double>(n - 1);
  return st;
}

}  // namespace rwre
