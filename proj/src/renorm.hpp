#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "solver.hpp"

namespace rwre {

// Constants the estimates are conditional on. The analysis fixes none of
// c2..c6 or mu numerically; they stay user configuration with defaults 1 and
// every output involving them is tagged as conditional.
struct ConstantsConfig {
  double c1 = 2;  // lattice path-length constant; 2 keeps detours near corners covered
  double c2 = 1, c3 = 1, c4 = 1, c5 = 1, c6 = 1;
  double c7 = 1;
  double mu = 1;
  double beta = 0.8;
  double kappa = 0.1;
  int d = 2;

  double c_tilde() const;  // c1 * log(1/kappa)
  void validate(bool recursion_range = false) const;

  static ConstantsConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ScaleLadder {
  double base_length = 0;  // L_0
  double base_width = 0;   // Ltilde_0
  double ratio = 0;        // nu
  int k_max = 0;
  std::vector<double> lengths;  // L_k = nu^k L_0
  std::vector<double> widths;   // Ltilde_k = nu^3k Ltilde_0
  int64_t step_n = 0;           // N = nu per step (when integral)
  double step_n_tilde = 0;      // Ntilde = nu^3 per step
  bool seed_step_ok = false;    // N integer >= 2 and Ntilde >= 48N
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
};

// Geometric ladder with the base-scale constraints checked; violations throw
// ConstraintViolation naming the broken rule: (scalesk0) L0 > 3 sqrt(d),
// (scalesk) L0^3 > Ltilde0 > L0, (scalesk1)/(scalesk2) the per-step ratios.
ScaleLadder build_ladder(double base_length, double base_width, double ratio, int k_max, int d);

// Validation of explicitly listed scale sequences against the same rules.
void validate_ladder_scales(const std::vector<double>& lengths, const std::vector<double>& widths,
                            int d);

// Requires Ntilde >= 48 N; throws ConstraintViolation naming (seedhyp48).
void require_seed_hypothesis(int64_t n, double n_tilde);

// Nonnegative value carried in log space; the recursion's right-hand sides
// span hundreds of orders of magnitude.
struct LogValue {
  bool zero = true;
  double log = 0;

  double value() const;
  static LogValue from_log(double lg);
  static LogValue nil();
};

LogValue log_add(const LogValue& a, const LogValue& b);

struct SeedStep {
  double base_length = 0;   // L_0
  double base_width = 0;    // Ltilde_0
  double next_length = 0;   // L_1
  double next_width = 0;    // Ltilde_1
  int64_t n = 0;            // N = L_1/L_0
  double n_tilde = 0;       // Ntilde = Ltilde_1/Ltilde_0
};

struct SeedRhs {
  LogValue term1, term2, term3, total;
  nlohmann::json to_json() const;
};

// Right-hand side of the one-step scale recursion at a given expected failure
// probability for the smaller scale.
SeedRhs seed_rhs_eval(const ConstantsConfig& constants, const SeedStep& step, double e_q0);

struct RecursionTrace {
  double d0 = 0;
  double step_a = 0;  // (1 + 3 c1 log(1/kappa)) L0^beta + 3
  double ratio = 0;   // nu^{-(1-beta)}
  std::vector<double> dk;
  double c8 = 0;              // limit of d_k: d0 - A * sum_{k>=0} r^k
  double c8_tail_from_1 = 0;  // d0 - A * sum_{k>=1} r^k (display convention)
  bool positive = false;      // c8 > 0

  nlohmann::json to_json() const;
};

double d0_from_constants(const ConstantsConfig& constants, double base_length);

RecursionTrace dk_sequence(const ConstantsConfig& constants, double d0, double nu,
                           double base_length, int k_max);

struct InequalityCheck {
  bool evaluated = false;
  double lhs_lo = 0, lhs_hi = 0;  // enclosure of the left side (equal when exact)
  double rhs_lo = 0, rhs_hi = 0;
  bool ok_certain = false;         // lhs_hi <= rhs_lo
  bool violation_certain = false;  // lhs_lo > rhs_hi
  double margin = 0;               // rhs_lo - lhs_hi

  static InequalityCheck compare(const Bracket& lhs, const Bracket& rhs);
  nlohmann::json to_json() const;
};

struct VerifyRecord {
  uint64_t env_seed = 0;
  bool in_typical_event = false;
  TypicalEventCheck typical;
  InequalityCheck quenched_bound;        // back-exit of the big box vs f(0)/f(-N)
  std::vector<InequalityCheck> decouple; // per level: max q_hat vs e^{2 c~ L0^b} sup tilde-q
  std::vector<InequalityCheck> excursion;  // per level: return sup vs 1 - e^{-2 c~ L0^b}
  InequalityCheck potential_step_worst;  // worst one-step potential decrease over slice sites
  int64_t potential_sites = 0;
  std::vector<int64_t> decouple_levels;
  std::vector<int64_t> excursion_levels;

  bool decouple_ok() const;
  bool excursion_ok() const;
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  BracketOptions bracket;
  double rho_c_factor = 8;  // confinement for the decoupled statistic
};

// Per-environment verification of the constant-free inequalities: the
// one-dimensional comparison bound (always), and on typical environments the
// decoupling comparison, the excursion-return bound and the one-step potential
// monotonicity. Violations are declared only when bracket-certain.
VerifyRecord verify_quenched_chain(const Environment& env, const LevelGeometry& geometry, int n,
                                   const ConstantsConfig& constants,
                                   const VerifyOptions& options = {});

}  // namespace rwre
