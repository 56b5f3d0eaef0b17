#include "doctest.h"

#include <cmath>

#include "renorm.hpp"
#include "test_util.hpp"

using namespace rwre;

TEST_CASE("ladder: stated example scales") {
  ScaleLadder ladder = build_ladder(7, 49, 2, 3, 2);
  CHECK(ladder.lengths == std::vector<double>{7, 14, 28, 56});
  CHECK(ladder.widths == std::vector<double>{49, 392, 3136, 25088});
  CHECK(ladder.step_n == 2);
  CHECK(ladder.step_n_tilde == doctest::Approx(8.0));
  CHECK(!ladder.seed_step_ok);  // 8 < 48 * 2
}

TEST_CASE("ladder: base-scale rules are rejected by name") {
  CHECK_THROWS_WITH_AS(build_ladder(4, 30, 2, 3, 2), doctest::Contains("scalesk0"), Error);
  CHECK_THROWS_WITH_AS(build_ladder(7, 343, 2, 3, 2), doctest::Contains("(scalesk)"), Error);
  CHECK_THROWS_WITH_AS(build_ladder(7, 6, 2, 3, 2), doctest::Contains("(scalesk)"), Error);
  CHECK_THROWS_WITH_AS(build_ladder(7, 49, 1.5, 3, 2), doctest::Contains("scalesk1"), Error);
}

TEST_CASE("ladder: explicit sequences validated rule by rule") {
  validate_ladder_scales({7, 14, 28}, {49, 392, 3136}, 2);
  CHECK_THROWS_WITH_AS(validate_ladder_scales({7, 14, 29}, {49, 392, 3136}, 2),
                       doctest::Contains("scalesk1"), Error);
  CHECK_THROWS_WITH_AS(validate_ladder_scales({7, 14, 28}, {49, 392, 3000}, 2),
                       doctest::Contains("scalesk2"), Error);
  CHECK_THROWS_WITH_AS(validate_ladder_scales({4, 8}, {30, 240}, 2),
                       doctest::Contains("scalesk0"), Error);
}

TEST_CASE("seed-step hypothesis is rejected by name") {
  require_seed_hypothesis(3, 144);
  CHECK_THROWS_WITH_AS(require_seed_hypothesis(3, 143), doctest::Contains("48"), Error);
}

TEST_CASE("seed rhs: zero base estimate leaves only the atypical term") {
  ConstantsConfig c;
  c.kappa = 0.1;
  c.beta = 0.8;
  c.d = 2;
  SeedStep step{10, 20, 70, 6860, 7, 343};
  SeedRhs rhs = seed_rhs_eval(c, step, 0.0);
  CHECK(rhs.term1.zero);
  CHECK(rhs.term2.zero);
  CHECK(!rhs.term3.zero);
  CHECK(rhs.total.log == rhs.term3.log);
}

TEST_CASE("seed rhs: monotone in the base estimate, mu moves only the third term") {
  ConstantsConfig c;
  c.kappa = 0.1;
  c.beta = 0.8;
  c.d = 2;
  SeedStep step{10, 20, 70, 6860, 7, 343};
  SeedRhs lo = seed_rhs_eval(c, step, 1e-8);
  SeedRhs hi = seed_rhs_eval(c, step, 1e-6);
  CHECK(lo.term1.log < hi.term1.log);
  CHECK(lo.term2.log < hi.term2.log);
  CHECK(lo.term3.log == hi.term3.log);
  CHECK(lo.total.log <= hi.total.log);

  ConstantsConfig doubled = c;
  doubled.mu = 2 * c.mu;
  SeedRhs dbl = seed_rhs_eval(doubled, step, 1e-8);
  CHECK(dbl.term3.log < lo.term3.log);
  CHECK(dbl.term1.log == lo.term1.log);
  CHECK(dbl.term2.log == lo.term2.log);
}

TEST_CASE("seed rhs: log-space evaluation agrees with direct arithmetic in range") {
  ConstantsConfig c;
  c.kappa = 0.2;
  c.beta = 0.8;
  c.d = 2;
  c.c1 = 1;
  SeedStep step{8, 16, 32, 1024, 4, 64};
  // Ntilde = 64 < 48*4: hypothesis violation expected
  CHECK_THROWS_WITH_AS(seed_rhs_eval(c, step, 0.5), doctest::Contains("48"), Error);
  step.n_tilde = 48 * 4;
  const double e_q0 = 1e-3;
  SeedRhs rhs = seed_rhs_eval(c, step, e_q0);
  const double l0b = std::pow(8.0, 0.8);
  const double inner1 = c.c2 * std::pow(c.kappa, -3 * c.c1) * std::pow(step.next_width, c.d - 1) *
                        std::exp(3 * c.c1 * std::log(1 / c.kappa) * l0b);
  const double term1 = (4 + 2) * std::pow(inner1, 2 * 4 + 2) * std::pow(e_q0, 4);
  CHECK(rhs.term1.value() == doctest::Approx(term1).epsilon(1e-9));
  const double inner2 = c.c2 * std::pow(step.next_width, c.d - 2) *
                        (std::pow(step.next_length, 3) / std::pow(step.base_length, 2)) *
                        step.base_width * e_q0;
  const double term2 = std::pow(inner2, step.n_tilde / (12.0 * 4));
  CHECK(rhs.term2.value() == doctest::Approx(term2).epsilon(1e-9));
  const double term3 = c.c2 * 4 * std::pow(step.next_width, c.d - 1) *
                       std::exp(-c.mu * std::pow(8.0, c.d * (2 * c.beta - 1)));
  CHECK(rhs.term3.value() == doctest::Approx(term3).epsilon(1e-9));
  CHECK(rhs.total.value() == doctest::Approx(term1 + term2 + term3).epsilon(1e-9));
}

TEST_CASE("seed rhs: small N refused") {
  ConstantsConfig c;
  c.kappa = 0.1;
  c.d = 2;
  SeedStep step{10, 20, 20, 960, 2, 96};
  CHECK_THROWS_WITH_AS(seed_rhs_eval(c, step, 0.1), doctest::Contains("HypothesisViolation"),
                       Error);
}

TEST_CASE("recursion decrement constant") {
  ConstantsConfig c;
  c.c1 = 1;
  c.kappa = 0.1;
  c.beta = 0.8;
  c.d = 2;
  RecursionTrace tr = dk_sequence(c, 1.0, 4, 100, 5);
  const double expect = (1 + 3 * std::log(10.0)) * std::pow(100.0, 0.8) + 3;
  CHECK(tr.step_a == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("recursion: strictly decreasing with the limit below every term") {
  ConstantsConfig c;
  c.kappa = 0.1;
  c.beta = 0.8;
  c.d = 2;
  RecursionTrace tr = dk_sequence(c, 5000.0, 8, 10, 40);
  for (size_t k = 1; k < tr.dk.size(); ++k) CHECK(tr.dk[k] < tr.dk[k - 1]);
  for (double dk : tr.dk) CHECK(tr.c8 <= dk + 1e-12);
  CHECK(tr.c8_tail_from_1 == doctest::Approx(tr.c8 + tr.step_a).epsilon(1e-12));
  CHECK(tr.positive == (tr.c8 > 0));
}

TEST_CASE("recursion: closed form equals brute-force summation") {
  ConstantsConfig c;
  c.kappa = 0.1;
  c.beta = 0.8;
  c.d = 2;
  const double nu = 2, L0 = 10;
  RecursionTrace tr = dk_sequence(c, 100.0, nu, L0, 3);
  double tail = 0;
  const double r = std::pow(nu, -(1 - c.beta));
  for (int k = 1'000'000; k >= 1; --k) tail += tr.step_a * std::pow(r, k);
  CHECK(tr.c8_tail_from_1 == doctest::Approx(100.0 - tail).epsilon(1e-9));
  CHECK(tr.c8 == doctest::Approx(100.0 - tail - tr.step_a).epsilon(1e-9));
}

TEST_CASE("recursion: huge ratios kill the tail") {
  ConstantsConfig c;
  c.kappa = 0.1;
  c.beta = 0.8;
  c.d = 2;
  RecursionTrace tr = dk_sequence(c, 1000.0, 1e30, 10, 3);
  CHECK(tr.c8_tail_from_1 == doctest::Approx(1000.0).epsilon(1e-5));
  CHECK(tr.c8 == doctest::Approx(1000.0 - tr.step_a).epsilon(1e-5));
}

TEST_CASE("constants: beta ranges") {
  ConstantsConfig c;
  c.beta = 0.6;
  c.kappa = 0.1;
  c.d = 2;
  c.validate(false);
  CHECK_THROWS_AS(c.validate(true), Error);  // recursion needs beta in (3/4, 1)
  CHECK(ConstantsConfig{}.c_tilde() == doctest::Approx(2 * std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("verification: small typical run has no certain violations") {
  LevelGeometry g{Eigen::MatrixXd::Identity(2, 2), 5, 12, 0.8};
  ConstantsConfig c;
  c.kappa = 0.1;
  c.beta = 0.8;
  c.d = 2;
  int in_t = 0;
  for (int rep = 0; rep < 8; ++rep) {
    Environment env(testutil::simplex_law(2, 0.1, 4000 + rep));
    VerifyRecord rec = verify_quenched_chain(env, g, 2, c);
    CHECK(!rec.quenched_bound.violation_certain);
    CHECK(rec.quenched_bound.ok_certain);
    CHECK(!rec.potential_step_worst.violation_certain);
    CHECK(rec.potential_sites > 0);
    if (rec.in_typical_event) {
      ++in_t;
      CHECK(rec.decouple_ok());
      for (const auto& chk : rec.decouple) CHECK(chk.evaluated);
    }
    const nlohmann::json j = rec.to_json();
    CHECK(j.contains("quenine"));
    CHECK(j.contains("eqcom"));
    CHECK(j.contains("in_T"));
  }
  CHECK(in_t == 8);  // at this kappa and scale the threshold is tiny
}

TEST_CASE("verification: unit ratios reproduce the closed-form bound") {
  // with every ratio pinned to 1, f(0)/f(-N) = (N+2)/(2N+2)
  const int n = 3;
  std::vector<Bracket> rho(2 * n + 1, Bracket::point(1.0));
  std::vector<Bracket> f = f_from_rho(rho, n);
  const double ratio = f[n].mid() / f[0].mid();
  CHECK(ratio == doctest::Approx((n + 2.0) / (2.0 * n + 2.0)).epsilon(1e-12));
}
