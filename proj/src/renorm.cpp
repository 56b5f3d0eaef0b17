#include "renorm.hpp"

#include <cmath>

namespace rwre {

double ConstantsConfig::c_tilde() const { return c1 * std::log(1.0 / kappa); }

void ConstantsConfig::validate(bool recursion_range) const {
  for (double c : {c1, c2, c3, c4, c5, c6, c7, mu}) {
    if (!(c > 0)) throw Error(ErrorKind::ConfigInvalid, "constants must be positive", "renorm");
  }
  const double lo = recursion_range ? 0.75 : 0.5;
  if (!(beta > lo) || !(beta < 1)) {
    throw Error(ErrorKind::ConfigInvalid,
                std::string("beta must lie in (") + (recursion_range ? "3/4" : "1/2") + ", 1)", "renorm");
  }
  if (d < 1 || !(kappa > 0) || kappa > 1.0 / (2 * d) + 1e-15) {
    throw Error(ErrorKind::ConfigInvalid, "kappa must lie in (0, 1/(2d)]", "renorm");
  }
}

ConstantsConfig ConstantsConfig::from_json(const nlohmann::json& j) {
  ConstantsConfig c;
  c.c1 = j.value("c1", c.c1);
  c.c2 = j.value("c2", c.c2);
  c.c3 = j.value("c3", c.c3);
  c.c4 = j.value("c4", c.c4);
  c.c5 = j.value("c5", c.c5);
  c.c6 = j.value("c6", c.c6);
  c.c7 = j.value("c7", c.c7);
  c.mu = j.value("mu", c.mu);
  c.beta = j.value("beta", c.beta);
  c.kappa = j.value("kappa", c.kappa);
  c.d = j.value("d", c.d);
  return c;
}

nlohmann::json ConstantsConfig::to_json() const {
  return {{"c1", c1}, {"c2", c2},     {"c3", c3},       {"c4", c4}, {"c5", c5}, {"c6", c6},
          {"c7", c7}, {"mu", mu},     {"beta", beta},   {"kappa", kappa}, {"d", d},
          {"note", "estimates are conditional on these constants"}};
}

ScaleLadder build_ladder(double base_length, double base_width, double ratio, int k_max, int d) {
  if (!(base_length > 0) || !(base_width > 0) || !(ratio > 0) || k_max < 0 || d < 1) {
    throw Error(ErrorKind::ConfigInvalid, "ladder inputs must be positive", "renorm");
  }
  if (!(base_length > 3 * std::sqrt(static_cast<double>(d)))) {
    throw Error(ErrorKind::ConstraintViolation,
                "(scalesk0): L_0 > 3*sqrt(d) violated (L_0 = " + std::to_string(base_length) +
                    ", 3*sqrt(d) = " + std::to_string(3 * std::sqrt(static_cast<double>(d))) + ")",
                "renorm");
  }
  if (!(base_width > base_length) || !(base_width < std::pow(base_length, 3))) {
    throw Error(ErrorKind::ConstraintViolation,
                "(scalesk): L_0^3 > tilde_L_0 > L_0 violated (L_0 = " + std::to_string(base_length) +
                    ", tilde_L_0 = " + std::to_string(base_width) + ")",
                "renorm");
  }
  if (!(ratio >= 2)) {
    throw Error(ErrorKind::ConstraintViolation,
                "(scalesk1): L_k = nu*L_{k-1} requires nu >= 2 (nu = " + std::to_string(ratio) + ")",
                "renorm");
  }

  ScaleLadder ladder;
  ladder.base_length = base_length;
  ladder.base_width = base_width;
  ladder.ratio = ratio;
  ladder.k_max = k_max;
  ladder.lengths.resize(k_max + 1);
  ladder.widths.resize(k_max + 1);
  for (int k = 0; k <= k_max; ++k) {
    ladder.lengths[k] = base_length * std::pow(ratio, k);
    ladder.widths[k] = base_width * std::pow(ratio, 3 * k);
  }
  const bool integral = std::abs(ratio - std::round(ratio)) < 1e-12;
  ladder.step_n = integral ? static_cast<int64_t>(std::llround(ratio)) : 0;
  ladder.step_n_tilde = std::pow(ratio, 3);
  const bool n_ok = integral && ladder.step_n >= 2;
  const bool n48_ok = ladder.step_n_tilde >= 48 * ratio;
  ladder.seed_step_ok = n_ok && n48_ok;
  ladder.notes.push_back(n_ok ? "N = nu is an integer >= 2"
                              : "N = nu is not an integer >= 2; seed step not invocable");
  ladder.notes.push_back(n48_ok ? "Ntilde = nu^3 >= 48 N holds"
                                : "(seedhyp48): Ntilde >= 48*N fails; seed step not invocable");
  return ladder;
}

void validate_ladder_scales(const std::vector<double>& lengths, const std::vector<double>& widths,
                            int d) {
  if (lengths.empty() || lengths.size() != widths.size()) {
    throw Error(ErrorKind::ConfigInvalid, "scale lists must be nonempty and equally long", "renorm");
  }
  if (!(lengths[0] > 3 * std::sqrt(static_cast<double>(d)))) {
    throw Error(ErrorKind::ConstraintViolation, "(scalesk0): L_0 > 3*sqrt(d) violated", "renorm");
  }
  if (!(widths[0] > lengths[0]) || !(widths[0] < std::pow(lengths[0], 3))) {
    throw Error(ErrorKind::ConstraintViolation, "(scalesk): L_0^3 > tilde_L_0 > L_0 violated",
                "renorm");
  }
  if (lengths.size() < 2) return;
  const double nu = lengths[1] / lengths[0];
  for (size_t k = 1; k < lengths.size(); ++k) {
    if (std::abs(lengths[k] - nu * lengths[k - 1]) > 1e-9 * lengths[k]) {
      throw Error(ErrorKind::ConstraintViolation,
                  "(scalesk1): L_k = nu*L_{k-1} violated at k = " + std::to_string(k), "renorm");
    }
    if (std::abs(widths[k] - std::pow(nu, 3) * widths[k - 1]) > 1e-9 * widths[k]) {
      throw Error(ErrorKind::ConstraintViolation,
                  "(scalesk2): tilde_L_k = nu^3*tilde_L_{k-1} violated at k = " + std::to_string(k),
                  "renorm");
    }
  }
}

void require_seed_hypothesis(int64_t n, double n_tilde) {
  if (!(n_tilde >= 48.0 * static_cast<double>(n))) {
    throw Error(ErrorKind::ConstraintViolation,
                "(seedhyp48): Ntilde >= 48*N violated (N = " + std::to_string(n) +
                    ", Ntilde = " + std::to_string(n_tilde) + ")",
                "renorm");
  }
}

nlohmann::json ScaleLadder::to_json() const {
  return {{"L0", base_length},       {"Ltilde0", base_width}, {"nu", ratio},
          {"k_max", k_max},          {"lengths", lengths},    {"widths", widths},
          {"step_N", step_n},        {"step_Ntilde", step_n_tilde},
          {"seed_step_ok", seed_step_ok}, {"notes", notes}};
}

double LogValue::value() const { return zero ? 0.0 : std::exp(log); }

LogValue LogValue::from_log(double lg) { return LogValue{false, lg}; }

LogValue LogValue::nil() { return LogValue{}; }

LogValue log_add(const LogValue& a, const LogValue& b) {
  if (a.zero) return b;
  if (b.zero) return a;
  const double m = std::max(a.log, b.log);
  return LogValue::from_log(m + std::log(std::exp(a.log - m) + std::exp(b.log - m)));
}

nlohmann::json SeedRhs::to_json() const {
  auto term = [](const LogValue& v) {
    return nlohmann::json{{"zero", v.zero}, {"log", v.zero ? 0.0 : v.log}, {"value", v.value()}};
  };
  return {{"term1", term(term1)}, {"term2", term(term2)}, {"term3", term(term3)},
          {"total", term(total)}};
}

SeedRhs seed_rhs_eval(const ConstantsConfig& constants, const SeedStep& step, double e_q0) {
  constants.validate(false);
  if (!(e_q0 >= 0) || !(e_q0 <= 1)) {
    throw Error(ErrorKind::ConfigInvalid, "E[q_0] must lie in [0,1]", "renorm");
  }
  const double root3d = 3 * std::sqrt(static_cast<double>(constants.d));
  if (!(step.base_length > root3d) || !(step.base_width > root3d)) {
    throw Error(ErrorKind::HypothesisViolation, "base scales must exceed 3*sqrt(d)", "renorm");
  }
  if (!(step.n_tilde >= 48.0 * static_cast<double>(step.n))) {
    throw Error(ErrorKind::HypothesisViolation,
                "(seedhyp48): Ntilde >= 48*N violated (N = " + std::to_string(step.n) +
                    ", Ntilde = " + std::to_string(step.n_tilde) + ")",
                "renorm");
  }
  if (step.n < 3) {
    throw Error(ErrorKind::HypothesisViolation,
                "the lateral-exit term is derived with N >= 3; refusing N = " +
                    std::to_string(step.n),
                "renorm");
  }

  const double d = constants.d;
  const double log_kappa = std::log(constants.kappa);
  const double l0b = std::pow(step.base_length, constants.beta);
  const double n = static_cast<double>(step.n);

  SeedRhs out;
  if (e_q0 > 0) {
    const double inner1 = std::log(constants.c2) - 3 * constants.c1 * log_kappa +
                          (d - 1) * std::log(step.next_width) - 3 * constants.c1 * log_kappa * l0b;
    out.term1 = LogValue::from_log(std::log(n + 2) + (2 * n + 2) * inner1 + n * std::log(e_q0));
    const double inner2 = std::log(constants.c2) + (d - 2) * std::log(step.next_width) +
                          3 * std::log(step.next_length) - 2 * std::log(step.base_length) +
                          std::log(step.base_width) + std::log(e_q0);
    out.term2 = LogValue::from_log(step.n_tilde / (12 * n) * inner2);
  }
  out.term3 = LogValue::from_log(std::log(constants.c2) + std::log(n) +
                                 (d - 1) * std::log(step.next_width) -
                                 constants.mu * std::pow(step.base_length, d * (2 * constants.beta - 1)));
  out.total = log_add(log_add(out.term1, out.term2), out.term3);
  return out;
}

double d0_from_constants(const ConstantsConfig& constants, double base_length) {
  return constants.c7 / std::pow(base_length, (1 - constants.beta) / 2);
}

RecursionTrace dk_sequence(const ConstantsConfig& constants, double d0, double nu,
                           double base_length, int k_max) {
  constants.validate(true);
  if (!(nu > 1)) throw Error(ErrorKind::ConfigInvalid, "recursion needs nu > 1", "renorm");
  if (!(base_length > 0) || k_max < 0) {
    throw Error(ErrorKind::ConfigInvalid, "recursion needs positive base scale", "renorm");
  }
  RecursionTrace tr;
  tr.d0 = d0;
  tr.step_a = (1 + 3 * constants.c1 * std::log(1.0 / constants.kappa)) *
                  std::pow(base_length, constants.beta) +
              3;
  tr.ratio = std::pow(nu, -(1 - constants.beta));
  tr.dk.resize(k_max + 1);
  tr.dk[0] = d0;
  for (int k = 0; k < k_max; ++k) tr.dk[k + 1] = tr.dk[k] - tr.step_a * std::pow(tr.ratio, k);
  // geometric tails: the recursion consumes the k = 0 term in d_1, so the
  // genuine limit subtracts the full series; the k >= 1 display is also kept
  tr.c8 = d0 - tr.step_a / (1 - tr.ratio);
  tr.c8_tail_from_1 = d0 - tr.step_a * tr.ratio / (1 - tr.ratio);
  tr.positive = tr.c8 > 0;
  return tr;
}

nlohmann::json RecursionTrace::to_json() const {
  return {{"d0", d0},
          {"step_A", step_a},
          {"ratio", ratio},
          {"dk", dk},
          {"c8", c8},
          {"c8_tail_from_1", c8_tail_from_1},
          {"positive", positive}};
}

InequalityCheck InequalityCheck::compare(const Bracket& lhs, const Bracket& rhs) {
  InequalityCheck c;
  c.evaluated = true;
  c.lhs_lo = lhs.lo;
  c.lhs_hi = lhs.hi;
  c.rhs_lo = rhs.lo;
  c.rhs_hi = rhs.hi;
  c.ok_certain = lhs.hi <= rhs.lo;
  c.violation_certain = lhs.lo > rhs.hi;
  c.margin = rhs.lo - lhs.hi;
  return c;
}

nlohmann::json InequalityCheck::to_json() const {
  return {{"evaluated", evaluated}, {"lhs_lo", lhs_lo},       {"lhs_hi", lhs_hi},
          {"rhs_lo", rhs_lo},       {"rhs_hi", rhs_hi},       {"ok", ok_certain},
          {"violation", violation_certain}, {"margin", margin}};
}

bool VerifyRecord::decouple_ok() const {
  for (const InequalityCheck& c : decouple) {
    if (c.evaluated && c.violation_certain) return false;
  }
  return true;
}

bool VerifyRecord::excursion_ok() const {
  for (const InequalityCheck& c : excursion) {
    if (c.evaluated && c.violation_certain) return false;
  }
  return true;
}

nlohmann::json VerifyRecord::to_json() const {
  nlohmann::json dec = nlohmann::json::array();
  for (size_t k = 0; k < decouple.size(); ++k) {
    nlohmann::json j = decouple[k].to_json();
    j["level"] = decouple_levels[k];
    dec.push_back(j);
  }
  nlohmann::json exc = nlohmann::json::array();
  for (size_t k = 0; k < excursion.size(); ++k) {
    nlohmann::json j = excursion[k].to_json();
    j["level"] = excursion_levels[k];
    exc.push_back(j);
  }
  return {{"seed", env_seed},
          {"in_T", in_typical_event},
          {"quenine", quenched_bound.to_json()},
          {"eqcom", dec},
          {"eqcom_ok", decouple_ok()},
          {"excursion", exc},
          {"excursion_ok", excursion_ok()},
          {"potential_step", potential_step_worst.to_json()},
          {"potential_sites", potential_sites}};
}

VerifyRecord verify_quenched_chain(const Environment& env, const LevelGeometry& geometry, int n,
                                   const ConstantsConfig& constants, const VerifyOptions& options) {
  if (n < 2) throw Error(ErrorKind::ConfigInvalid, "verification needs N >= 2", "renorm");
  VerifyRecord rec;
  rec.env_seed = env.seed();
  const double spacing = geometry.spacing;
  const double l0b = std::pow(spacing, geometry.beta);
  const double c_tilde = constants.c1 * std::log(1.0 / constants.kappa);

  rec.typical =
      typical_event_check(env, geometry, n, constants.c1, constants.kappa, options.bracket);
  rec.in_typical_event = rec.typical.member;

  // per-level crossing solves, shared by the profile and the potential check
  std::vector<SliceCrossing> slices;
  slices.reserve(2 * n + 1);
  RhoFProfile prof;
  prof.n = n;
  prof.rho.resize(2 * n + 1);
  for (int64_t i = -n + 1; i <= n + 1; ++i) {
    SliceCrossing sc = slice_crossing(env, geometry, i, options.bracket);
    Bracket sup{0, 0};
    for (size_t s = 0; s < sc.sites.size(); ++s) {
      const Bracket ratio = scale(sc.q_hat[s], inverse(sc.p[s]));
      sup.lo = std::max(sup.lo, ratio.lo);
      sup.hi = std::max(sup.hi, ratio.hi);
    }
    prof.rho[i + n - 1] = sup;
    slices.push_back(std::move(sc));
  }
  prof.f = f_from_rho(prof.rho, n);

  // one-dimensional comparison bound: exact back-exit of the big box vs the
  // potential ratio f(0)/f(-N); holds pathwise, so it is checked on every
  // environment
  {
    BoxTriple box{geometry.rotation, n * spacing, geometry.lateral_bound};
    ExitDistribution dist = solve_exit_distribution(problem_from_box(env, box));
    const double lhs = dist.probability(Site::origin(geometry.dim()), BoundaryClass::Negative);
    const Bracket f0 = prof.f_at(0);
    const Bracket fn = prof.f_at(-n);
    const Bracket rhs{f0.lo / fn.hi, f0.hi / fn.lo};
    rec.quenched_bound = InequalityCheck::compare(Bracket::point(lhs), rhs);
  }

  // decoupling comparison and the excursion-return bound are statements about
  // typical environments; they are recorded but not evaluated outside
  for (int64_t i = -n + 1; i <= n + 1; ++i) {
    InequalityCheck c;
    if (rec.in_typical_event) {
      const SliceCrossing& sc = slices[i + n - 1];
      double qhat_max = 0;
      for (double q : sc.q_hat) qhat_max = std::max(qhat_max, q);
      // confinement doubling until the slice supremum is tight or capped
      double rho_c = options.rho_c_factor * spacing;
      SliceTilde st = tilde_q_slice(env, geometry, i, rho_c);
      while (st.sup.width() > options.bracket.width_tol && 2 * rho_c <= 128 * spacing) {
        rho_c *= 2;
        st = tilde_q_slice(env, geometry, i, rho_c);
      }
      const double factor = std::exp(2 * c_tilde * l0b);
      c = InequalityCheck::compare(Bracket::point(qhat_max), scale(factor, st.sup));
    }
    rec.decouple.push_back(c);
    rec.decouple_levels.push_back(i);
  }
  for (int64_t i = -n; i <= n; ++i) {
    InequalityCheck c;
    if (rec.in_typical_event) {
      const double sup = excursion_return_sup(env, geometry, i);
      const double bound = 1 - std::exp(-2 * c_tilde * l0b);
      c = InequalityCheck::compare(Bracket::point(sup), Bracket::point(bound));
    }
    rec.excursion.push_back(c);
    rec.excursion_levels.push_back(i);
  }

  // one-step potential monotonicity: p_hat f(i+1) + q_hat f(i-1) <= f(i) on
  // every laterally-truncated slice site; definition-backed, always checked
  InequalityCheck worst;
  worst.evaluated = true;
  worst.margin = std::numeric_limits<double>::infinity();
  int64_t sites = 0;
  for (int64_t i = -n + 1; i <= n + 1; ++i) {
    const SliceCrossing& sc = slices[i + n - 1];
    const Bracket f_up = prof.f_at(i + 1);
    const Bracket f_down = prof.f_at(i - 1);
    const Bracket f_here = prof.f_at(i);
    for (size_t s = 0; s < sc.sites.size(); ++s) {
      const Bracket step = scale(sc.p_hat[s], f_up) + scale(sc.q_hat[s], f_down);
      InequalityCheck c = InequalityCheck::compare(step, f_here);
      ++sites;
      if (c.margin < worst.margin) worst = c;
    }
  }
  rec.potential_step_worst = worst;
  rec.potential_sites = sites;
  return rec;
}

}  // namespace rwre
