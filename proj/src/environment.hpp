#pragma once

#include <Eigen/Dense>
#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "common.hpp"

namespace rwre {

// A transition-probability field over the lattice: site -> vector of 2d jump
// probabilities ordered (e1, -e1, ..., ed, -ed). Pure and thread-safe.
class TransitionField {
 public:
  virtual ~TransitionField() = default;
  virtual int dimension() const = 0;
  virtual void probs_into(const Site& x, double* out) const = 0;

  std::vector<double> probs(const Site& x) const {
    std::vector<double> v(2 * dimension());
    probs_into(x, v.data());
    return v;
  }
};

// I.i.d. site laws, all uniformly elliptic with floor kappa.
struct EnvironmentLaw {
  enum class Kind { DeterministicDrift, EpsilonPerturbedSrw, SimplexUniformFloor, TwoPoint };

  int d = 2;
  double kappa = 0.05;
  Kind kind = Kind::SimplexUniformFloor;
  uint64_t seed = 0;

  double epsilon = 0.0;                  // drift kinds
  std::vector<double> p_plus, p_minus;   // TwoPoint
  double mix = 0.5;                      // TwoPoint

  int directions() const { return 2 * d; }
  void validate() const;

  static EnvironmentLaw from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  static const char* kind_name(Kind k);
};

// Seeded realization of a law. The vector at a site is a pure function of
// (seed, site); a bounded read-through cache sits in front of the generator
// and must be observationally absent.
class Environment final : public TransitionField {
 public:
  explicit Environment(EnvironmentLaw law);
  Environment(EnvironmentLaw law, uint64_t seed_override);

  int dimension() const override { return law_.d; }
  void probs_into(const Site& x, double* out) const override;

  const EnvironmentLaw& law() const { return law_; }
  uint64_t seed() const { return seed_; }

 private:
  void realize(const Site& x, double* out) const;

  EnvironmentLaw law_;
  uint64_t seed_;
  bool cache_enabled_;
  std::vector<double> fixed_;  // DeterministicDrift short-circuit

  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<Site, std::array<double, 2 * kMaxDim>, SiteHash> cache_;
};

// View of a parent field restricted to lower <= x . direction < upper.
// Queries outside the slab throw; used to certify that computations for
// different levels read disjoint environment regions.
class SlabView final : public TransitionField {
 public:
  SlabView(const TransitionField& parent, double lower, double upper, Eigen::VectorXd direction);

  int dimension() const override { return parent_->dimension(); }
  void probs_into(const Site& x, double* out) const override;
  bool contains(const Site& x) const;

  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  const TransitionField* parent_;
  double lower_, upper_;
  Eigen::VectorXd direction_;
};

SlabView restrict_to_slab(const TransitionField& env, double lower, double upper,
                          const Eigen::VectorXd& direction);

struct LawStatistics {
  std::vector<double> mean;
  std::vector<double> variance;  // unbiased
  int64_t n = 0;
};

// Sample means/variances of the 2d entries over n i.i.d. sites.
LawStatistics law_statistics(const EnvironmentLaw& law, int64_t n, uint64_t seed);

}  // namespace rwre
