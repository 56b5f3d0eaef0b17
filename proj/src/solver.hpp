#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "common.hpp"
#include "environment.hpp"
#include "lattice.hpp"

namespace rwre {

// Two-sided enclosure of a probability obtained from truncated computations.
struct Bracket {
  double lo = 0;
  double hi = 0;
  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  static Bracket point(double v) { return {v, v}; }
};

inline Bracket operator+(const Bracket& a, const Bracket& b) { return {a.lo + b.lo, a.hi + b.hi}; }
// Positive-interval product/inverse; every quantity these touch is nonnegative.
inline Bracket operator*(const Bracket& a, const Bracket& b) { return {a.lo * b.lo, a.hi * b.hi}; }
inline Bracket inverse(const Bracket& a) { return {1.0 / a.hi, 1.0 / a.lo}; }
inline Bracket scale(double c, const Bracket& a) { return {c * a.lo, c * a.hi}; }

// Finite absorbing nearest-neighbor chain: interior (transient) sites plus a
// class-labelled absorbing boundary that closes every interior neighbor.
struct AbsorbingProblem {
  const TransitionField* field = nullptr;
  std::vector<Site> interior;
  std::unordered_map<Site, int, SiteHash> interior_index;
  std::vector<Site> boundary;
  std::vector<BoundaryClass> boundary_class;
  std::unordered_map<Site, int, SiteHash> boundary_index;

  void validate() const;
};

AbsorbingProblem problem_from_box(const TransitionField& field, const BoxTriple& box);

// Builds the chain on the connected component of `seeds` under the interior
// predicate; first-blocked sites become boundary with the classifier's label.
AbsorbingProblem problem_from_flood(const TransitionField& field, const std::vector<Site>& seeds,
                                    const std::function<bool(const Site&)>& interior,
                                    const std::function<BoundaryClass(const Site&)>& classify,
                                    size_t max_interior = 4'000'000);

// Absorption probabilities per boundary class, for every interior start site
// of one problem (one factorization, one right-hand side per class).
class ExitDistribution {
 public:
  double probability(const Site& start, BoundaryClass c) const;
  std::array<double, 3> probabilities(const Site& start) const;
  size_t interior_size() const { return interior_index_.size(); }

  std::unordered_map<Site, int, SiteHash> interior_index_;
  std::unordered_map<Site, int, SiteHash> boundary_index_;
  std::vector<BoundaryClass> boundary_class_;
  std::array<std::vector<double>, 3> values_;
};

struct SolveOptions {
  double tolerance = 1e-10;
  int64_t direct_limit = 200'000;  // interior sites; larger systems use relaxation sweeps
  int64_t max_sweeps = 2'000'000;
  bool force_iterative = false;
};

ExitDistribution solve_exit_distribution(const AbsorbingProblem& problem,
                                         const SolveOptions& options = {});

// MatrixMarket coordinate dump of the assembled system (I - Q) and, when
// requested, the dense per-class right-hand sides, for external verification.
void dump_matrix_market(const AbsorbingProblem& problem, std::ostream& matrix_out,
                        std::ostream* rhs_out = nullptr);

// Geometry shared by the level-crossing machinery: rotation (column 0 is the
// transience direction), level spacing L0, lateral truncation Ltilde1 and the
// shift exponent beta.
struct LevelGeometry {
  Eigen::MatrixXd rotation;
  double spacing = 5;
  double lateral_bound = 40;
  double beta = 0.8;

  int dim() const { return static_cast<int>(rotation.rows()); }
  Eigen::VectorXd direction() const { return rotation.col(0); }
};

struct BracketOptions {
  double width_tol = 1e-6;
  // lateral truncation for unbounded-slab solves starts here and doubles; 0
  // picks max(2*spacing, lateral_bound).
  double lateral_start = 0;
  double lateral_cap_factor = 128;  // cap = factor * spacing
  double confinement = 0;           // rho_c for slice computations; 0 -> 8 * spacing
};

// P[exit the box anywhere but its positive side | start], by exact solve.
double box_failure_probability(const TransitionField& field, const BoxTriple& box,
                               const Site& start);

struct CrossingProbabilities {
  int64_t level = 0;  // I(x)
  Bracket q, p;       // unconstrained crossing, bracketed by lateral truncation
  double q_hat = 0;   // crossing before the lateral exit, exact
  double p_hat = 0;
};

CrossingProbabilities level_crossing_probabilities(const TransitionField& field, const Site& x,
                                                   const LevelGeometry& geometry,
                                                   const BracketOptions& options = {});

// Backward crossing that never touches the frontal boundary of its own level
// set, bracketed by confining the walk to a box of radius rho_c around x.
Bracket tilde_q_bracket(const TransitionField& field, const Site& x, const LevelGeometry& geometry,
                        double rho_c);

// Default confinement policy: start at 8 L0 and double until the width drops
// under 1e-6 or the radius reaches 128 L0; returns the tightest bracket seen.
Bracket tilde_q_bracket_auto(const TransitionField& field, const Site& x,
                             const LevelGeometry& geometry, double width_tol = 1e-6,
                             double cap_factor = 128);

// One solve per level covering the whole laterally-truncated slice.
struct SliceCrossing {
  int64_t level = 0;
  std::vector<Site> sites;
  std::vector<double> q_hat, p_hat;
  std::vector<Bracket> q, p;
};
SliceCrossing slice_crossing(const TransitionField& field, const LevelGeometry& geometry,
                             int64_t level, const BracketOptions& options = {});

struct SliceTilde {
  int64_t level = 0;
  std::vector<Site> sites;
  std::vector<Bracket> values;
  Bracket sup;  // interval enclosure of the slice supremum
};
SliceTilde tilde_q_slice(const TransitionField& field, const LevelGeometry& geometry, int64_t level,
                         double rho_c);

// sup over the frontal slice of P[return to the level set before the next one,
// within the lateral walls]; the geometric-series factor of the excursion bound.
double excursion_return_sup(const TransitionField& field, const LevelGeometry& geometry,
                            int64_t level);

struct RhoFProfile {
  int n = 0;                 // N
  std::vector<Bracket> rho;  // index k <-> level i = k - N + 1, i in [-N+1, N+1]
  std::vector<Bracket> f;    // index k <-> j = k - N, j in [-N, N+2]

  Bracket rho_at(int64_t i) const;
  Bracket f_at(int64_t j) const;
};

// f(j) = sum_{j<=m<=N+1} prod_{m<i<=N+1} rho(i)^{-1}, f = 0 from N+2 on;
// interval arithmetic over the rho brackets.
std::vector<Bracket> f_from_rho(const std::vector<Bracket>& rho, int n);

RhoFProfile rho_f_profile(const TransitionField& field, int n, const LevelGeometry& geometry,
                          const BracketOptions& options = {});

struct TypicalEventCheck {
  bool member = false;
  double threshold = 0;  // exp(-c_tilde * L0^beta)
  double c_tilde = 0;
  double min_lower = 1;  // smallest lower bound seen over all required sites
  bool has_witness = false;
  Site witness;
  int64_t witness_level = 0;
  std::string witness_family;
  Bracket witness_probability;
};

// Checks the front-exit probability of the asymmetric slab from every site of
// the shifted and truncated level slices, levels -N..N+2, against the
// ellipticity threshold.
TypicalEventCheck typical_event_check(const TransitionField& field, const LevelGeometry& geometry,
                                      int n, double c1, double kappa,
                                      const BracketOptions& options = {});

}  // namespace rwre
