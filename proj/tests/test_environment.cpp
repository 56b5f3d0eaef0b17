#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <thread>

#include "environment.hpp"
#include "test_util.hpp"

using namespace rwre;

TEST_CASE("deterministic drift realizes the stated vector at every site") {
  Environment env(testutil::drift_law(2, 0.1, 0.05, 42));
  for (int64_t x1 : {-3, 0, 17}) {
    const std::vector<double> v = env.probs(Site::of({x1, 2 * x1 + 1}));
    CHECK(v[0] == doctest::Approx(0.35).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(v[2] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(v[3] == doctest::Approx(0.25).epsilon(1e-15));
  }
}

TEST_CASE("ellipticity and normalization hold over a million realized sites") {
  const int64_t n = 1'000'000;
  EnvironmentLaw perturbed;
  perturbed.d = 2;
  perturbed.kappa = 0.05;
  perturbed.kind = EnvironmentLaw::Kind::EpsilonPerturbedSrw;
  perturbed.epsilon = 0.15;
  perturbed.seed = 2;
  EnvironmentLaw two_point;
  two_point.d = 2;
  two_point.kappa = 0.05;
  two_point.kind = EnvironmentLaw::Kind::TwoPoint;
  two_point.p_plus = {0.55, 0.05, 0.2, 0.2};
  two_point.p_minus = {0.05, 0.55, 0.2, 0.2};
  two_point.mix = 0.3;
  two_point.seed = 3;
  for (const EnvironmentLaw& law : {testutil::simplex_law(2, 0.05, 1), perturbed, two_point,
                                    testutil::drift_law(2, 0.15, 0.05, 4)}) {
    Environment env(law);
    std::vector<double> v(law.directions());
    double min_entry = 1;
    double worst_sum = 0;
    for (int64_t i = 0; i < n; ++i) {
      Site x = Site::of({i % 1024, i / 1024});
      env.probs_into(x, v.data());
      double sum = 0;
      for (double p : v) {
        min_entry = std::min(min_entry, p);
        sum += p;
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
    CHECK(min_entry >= law.kappa);
    CHECK(worst_sum <= 1e-12);
  }
}

TEST_CASE("realization is a pure function of (seed, site)") {
  const EnvironmentLaw law = testutil::simplex_law(3, 0.04, 99);
  Environment a(law), b(law);
  const Site x = Site::of({5, -3, 2});
  CHECK(a.probs(x) == b.probs(x));
  CHECK(a.probs(x) == a.probs(x));

  // query order cannot matter
  Environment c(law);
  std::vector<Site> sites;
  for (int64_t i = -20; i <= 20; ++i) sites.push_back(Site::of({i, 0, 1}));
  std::vector<std::vector<double>> forward, backward;
  for (const Site& s : sites) forward.push_back(c.probs(s));
  Environment d(law);
  for (auto it = sites.rbegin(); it != sites.rend(); ++it) backward.push_back(d.probs(*it));
  std::reverse(backward.begin(), backward.end());
  CHECK(forward == backward);
}

TEST_CASE("different seeds give different fields") {
  EnvironmentLaw law = testutil::simplex_law(2, 0.05, 7);
  Environment a(law, 7), b(law, 8);
  CHECK(a.probs(Site::of({0, 0})) != b.probs(Site::of({0, 0})));
}

TEST_CASE("law_statistics: deterministic law has zero variance") {
  LawStatistics st = law_statistics(testutil::drift_law(2, 0.05, 0.05, 3), 100, 3);
  for (double v : st.variance) CHECK(v == 0.0);
  double mean_sum = 0;
  for (double m : st.mean) mean_sum += m;
  CHECK(mean_sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("law_statistics: 1d simplex floor is symmetric") {
  const int64_t n = 20'000;
  LawStatistics st = law_statistics(testutil::simplex_law(1, 0.1, 5), n, 5);
  for (int k = 0; k < 2; ++k) {
    const double sigma = std::sqrt(st.variance[k] / static_cast<double>(n));
    CHECK(std::abs(st.mean[k] - 0.5) <= 3 * sigma);
  }
}

TEST_CASE("law_statistics: two-point mixture mean matches the closed form") {
  EnvironmentLaw law;
  law.d = 1;
  law.kappa = 0.1;
  law.kind = EnvironmentLaw::Kind::TwoPoint;
  law.p_plus = {0.7, 0.3};
  law.p_minus = {0.2, 0.8};
  law.mix = 0.5;
  law.seed = 11;
  const int64_t n = 40'000;
  LawStatistics st = law_statistics(law, n, 11);
  for (int k = 0; k < 2; ++k) {
    const double expect = 0.5 * law.p_plus[k] + 0.5 * law.p_minus[k];
    const double sigma = std::sqrt(st.variance[k] / static_cast<double>(n));
    CHECK(std::abs(st.mean[k] - expect) <= 3 * sigma);
  }
}

TEST_CASE("law_statistics requires two samples") {
  CHECK_THROWS_AS(law_statistics(testutil::simplex_law(2, 0.05, 1), 1, 1), Error);
}

TEST_CASE("sites are uncorrelated across seeds") {
  const int64_t n = 10'000;
  EnvironmentLaw law = testutil::simplex_law(2, 0.05, 0);
  std::vector<double> at_origin(n), at_e2(n);
  for (int64_t s = 0; s < n; ++s) {
    Environment env(law, static_cast<uint64_t>(s));
    at_origin[s] = env.probs(Site::of({0, 0}))[0];
    at_e2[s] = env.probs(Site::of({0, 1}))[0];
  }
  const double n_d = static_cast<double>(n);
  double ma = 0, mb = 0;
  for (int64_t i = 0; i < n; ++i) {
    ma += at_origin[i] / n_d;
    mb += at_e2[i] / n_d;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (int64_t i = 0; i < n; ++i) {
    sab += (at_origin[i] - ma) * (at_e2[i] - mb);
    saa += (at_origin[i] - ma) * (at_origin[i] - ma);
    sbb += (at_e2[i] - mb) * (at_e2[i] - mb);
  }
  CHECK(std::abs(sab / std::sqrt(saa * sbb)) <= 4.0 / std::sqrt(n_d));
}

TEST_CASE("slab view: pass-through inside, rejection outside, disjoint views") {
  Environment env(testutil::simplex_law(2, 0.05, 13));
  Eigen::VectorXd e1 = testutil::axis_direction(2);
  SlabView view = restrict_to_slab(env, 0, 4, e1);
  CHECK(view.probs(Site::of({2, 9})) == env.probs(Site::of({2, 9})));
  CHECK_THROWS_WITH_AS(view.probs(Site::of({5, 0})), doctest::Contains("OutOfSlab"), Error);
  CHECK_THROWS_AS(view.probs(Site::of({4, 0})), Error);  // half-open upper end

  SlabView low = restrict_to_slab(env, 0, 4, e1);
  SlabView high = restrict_to_slab(env, 4, 8, e1);
  for (int64_t x1 = -2; x1 <= 10; ++x1) {
    CHECK(!(low.contains(Site::of({x1, 0})) && high.contains(Site::of({x1, 0}))));
  }
}

TEST_CASE("perturbed-sign law uses both signs across sites") {
  EnvironmentLaw law;
  law.d = 2;
  law.kappa = 0.05;
  law.kind = EnvironmentLaw::Kind::EpsilonPerturbedSrw;
  law.epsilon = 0.1;
  law.seed = 21;
  Environment env(law);
  bool saw_plus = false, saw_minus = false;
  for (int64_t i = 0; i < 100; ++i) {
    const double first = env.probs(Site::of({i, 0}))[0];
    if (first > 0.3) saw_plus = true;
    if (first < 0.2) saw_minus = true;
  }
  CHECK(saw_plus);
  CHECK(saw_minus);
}

TEST_CASE("law validation rejects bad parameters") {
  EnvironmentLaw law = testutil::drift_law(2, 0.3, 0.05, 0);  // 1/4 - 0.3 < 0
  CHECK_THROWS_WITH_AS(law.validate(), doctest::Contains("ConfigInvalid"), Error);

  EnvironmentLaw big_kappa = testutil::simplex_law(2, 0.3, 0);  // > 1/(2d)
  CHECK_THROWS_AS(big_kappa.validate(), Error);

  EnvironmentLaw two;
  two.d = 1;
  two.kappa = 0.1;
  two.kind = EnvironmentLaw::Kind::TwoPoint;
  two.p_plus = {0.6, 0.3};  // does not sum to 1
  two.p_minus = {0.5, 0.5};
  CHECK_THROWS_AS(two.validate(), Error);
}

TEST_CASE("law json round-trip") {
  EnvironmentLaw law;
  law.d = 2;
  law.kappa = 0.1;
  law.kind = EnvironmentLaw::Kind::TwoPoint;
  law.p_plus = {0.4, 0.2, 0.2, 0.2};
  law.p_minus = {0.1, 0.5, 0.2, 0.2};
  law.mix = 0.25;
  law.seed = 77;
  EnvironmentLaw back = EnvironmentLaw::from_json(law.to_json());
  CHECK(back.to_json() == law.to_json());

  CHECK_THROWS_WITH_AS(EnvironmentLaw::from_json({{"d", 2}}), doctest::Contains("ConfigInvalid"),
                       Error);
}

TEST_CASE("field hash over a window is stable under concurrent queries") {
  const EnvironmentLaw law = testutil::simplex_law(2, 0.05, 321);
  auto window_hash = [&](const Environment& env) {
    uint64_t h = 0x1234567;
    std::vector<double> v(law.directions());
    for (int64_t x1 = -12; x1 <= 12; ++x1) {
      for (int64_t x2 = -12; x2 <= 12; ++x2) {
        const_cast<Environment&>(env).probs_into(Site::of({x1, x2}), v.data());
        for (double p : v) {
          uint64_t bits;
          std::memcpy(&bits, &p, sizeof bits);
          h = h * 0x100000001b3ull ^ bits;
        }
      }
    }
    return h;
  };
  Environment sequential(law);
  const uint64_t reference = window_hash(sequential);

  Environment shared(law);
  std::vector<std::thread> threads;
  std::vector<uint64_t> hashes(6, 0);
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&, t] { hashes[t] = window_hash(shared); });
  }
  for (auto& t : threads) t.join();
  for (uint64_t h : hashes) CHECK(h == reference);
}
