#include "doctest.h"

#include <random>

#include "lattice.hpp"
#include "test_util.hpp"

using namespace rwre;

TEST_CASE("rotation: identity direction gives the identity") {
  for (int d : {1, 2, 3, 5}) {
    Eigen::MatrixXd rot = build_rotation(testutil::axis_direction(d));
    CHECK((rot - Eigen::MatrixXd::Identity(d, d)).norm() == doctest::Approx(0).epsilon(1e-12));
  }
}

TEST_CASE("rotation: 2d example (0.6, 0.8)") {
  Eigen::VectorXd dir(2);
  dir << 0.6, 0.8;
  Eigen::MatrixXd rot = build_rotation(dir);
  CHECK(rot(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(rot(1, 0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK((rot.transpose() * rot - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-10);
  // second column is +-(-0.8, 0.6)
  const double sign = rot(0, 1) > 0 ? 1.0 : -1.0;
  CHECK(rot(0, 1) == doctest::Approx(sign * 0.8).epsilon(1e-12));
  CHECK(rot(1, 1) == doctest::Approx(-sign * 0.6).epsilon(1e-12));
}

TEST_CASE("rotation: non-unit direction rejected") {
  Eigen::VectorXd dir(2);
  dir << 0.9, 0.0;
  CHECK_THROWS_WITH_AS(build_rotation(dir), doctest::Contains("NonUnitDirection"), Error);
}

TEST_CASE("rotation: random directions are orthogonal and distance preserving") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal;
  for (int d : {2, 3, 4}) {
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::VectorXd v(d);
      for (int k = 0; k < d; ++k) v[k] = normal(gen);
      v.normalize();
      Eigen::MatrixXd rot = build_rotation(v);
      CHECK((rot.transpose() * rot - Eigen::MatrixXd::Identity(d, d)).lpNorm<Eigen::Infinity>() <
            1e-10);
      CHECK((rot.col(0) - v).norm() < 1e-10);
      // pair distances survive rotation
      Eigen::VectorXd a(d), b(d);
      for (int k = 0; k < d; ++k) {
        a[k] = normal(gen);
        b[k] = normal(gen);
      }
      CHECK(std::abs((rot * a - rot * b).norm() - (a - b).norm()) < 1e-9);
    }
  }
}

TEST_CASE("level_index: stated half-open interval examples") {
  Eigen::VectorXd e1 = testutil::axis_direction(1);
  CHECK(level_index(Site::of({5}), e1, 4) == 1);
  CHECK(level_index(Site::of({-2}), e1, 4) == 0);
  CHECK(level_index(Site::of({2}), e1, 4) == 1);
}

TEST_CASE("level_index: nondecreasing along projection-monotone paths") {
  std::mt19937_64 gen(11);
  Eigen::VectorXd dir(2);
  dir << 0.6, 0.8;
  Site x = Site::of({0, 0});
  int64_t prev = level_index(x, dir, 3.0);
  for (int step = 0; step < 200; ++step) {
    // choose a move that does not decrease the projection
    Site next = x.neighbor(gen() % 2, 1);
    if (site_dot(next, dir) < site_dot(x, dir)) continue;
    x = next;
    const int64_t now = level_index(x, dir, 3.0);
    CHECK(now >= prev);
    prev = now;
  }
}

TEST_CASE("box: d=2 integer box interior and positive side") {
  BoxTriple box{Eigen::MatrixXd::Identity(2, 2), 2, 2};
  BoxDomain dom = box_sites_and_boundary(box);
  CHECK(dom.interior.size() == 9);
  int positives = 0;
  for (const auto& [site, cls] : dom.boundary) {
    if (cls == BoundaryClass::Positive) {
      ++positives;
      CHECK(site.c[0] == 2);
      CHECK(std::abs(site.c[1]) <= 1);
    }
  }
  CHECK(positives == 3);
}

TEST_CASE("box: half-unit box has the origin inside and a 4-site boundary") {
  BoxTriple box{Eigen::MatrixXd::Identity(2, 2), 0.5, 0.5};
  BoxDomain dom = box_sites_and_boundary(box);
  REQUIRE(dom.interior.size() == 1);
  CHECK(dom.interior[0] == Site::of({0, 0}));
  REQUIRE(dom.boundary.size() == 4);
  for (const auto& [site, cls] : dom.boundary) {
    if (site == Site::of({1, 0})) CHECK(cls == BoundaryClass::Positive);
    if (site == Site::of({-1, 0})) CHECK(cls == BoundaryClass::Negative);
    if (site == Site::of({0, 1})) CHECK(cls == BoundaryClass::Lateral);
    if (site == Site::of({0, -1})) CHECK(cls == BoundaryClass::Lateral);
  }
}

TEST_CASE("box: boundary closes the interior and labels are unique") {
  Eigen::VectorXd dir(2);
  dir << 0.6, 0.8;
  BoxTriple box{build_rotation(dir), 3.5, 5.0};
  BoxDomain dom = box_sites_and_boundary(box);
  std::unordered_map<Site, int, SiteHash> interior, boundary;
  for (const Site& s : dom.interior) interior[s] = 1;
  for (const auto& [s, cls] : dom.boundary) {
    CHECK(!interior.count(s));
    CHECK(!boundary.count(s));  // one label per site
    boundary[s] = 1;
  }
  for (const Site& s : dom.interior) {
    for (int axis = 0; axis < 2; ++axis) {
      for (int step : {-1, 1}) {
        Site y = s.neighbor(axis, step);
        CHECK((interior.count(y) || boundary.count(y)));
      }
    }
  }
}

TEST_CASE("level family: full straddle set equals the three-plane slab") {
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(2, 2);
  for (int64_t spacing : {2, 3, 4, 5}) {
    LevelFamily full{rot, static_cast<double>(spacing), LevelFamily::Kind::Full, 0, 0};
    for (int64_t i : {-1, 0, 1, 2}) {
      for (int64_t x1 = -14; x1 <= 14; ++x1) {
        for (int64_t x2 = -2; x2 <= 2; ++x2) {
          const bool expect = std::llabs(x1 - i * spacing) <= 1;
          CHECK(full.contains(Site::of({x1, x2}), i) == expect);
        }
      }
    }
  }
}

TEST_CASE("level family: stated membership examples") {
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(2, 2);
  LevelFamily full{rot, 4, LevelFamily::Kind::Full, 0, 0};
  CHECK(full.contains(Site::of({3, 7}), 1));
  CHECK(full.contains(Site::of({4, -7}), 1));
  CHECK(full.contains(Site::of({5, 0}), 1));
  CHECK(!full.contains(Site::of({2, 0}), 1));
  CHECK(full.contains(Site::of({0, 3}), 0));  // zero product counts

  LevelFamily trunc{rot, 4, LevelFamily::Kind::Truncated, 2, 0};
  CHECK(!trunc.contains(Site::of({3, 5}), 1));
  CHECK(trunc.contains(Site::of({3, 1}), 1));
}

TEST_CASE("level family: shifted variants place their levels as defined") {
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(2, 2);
  const double spacing = 5, beta = 0.8;
  LevelFamily shifted{rot, spacing, LevelFamily::Kind::ShiftedBeta, 40, beta};
  const double s1 = spacing + 1 + std::pow(spacing, beta);
  CHECK(shifted.level(1) == doctest::Approx(s1));
  CHECK(shifted.level(2) == doctest::Approx(2 * s1));
  // membership straddles the shifted level
  const auto near = static_cast<int64_t>(std::floor(s1));
  CHECK(shifted.contains(Site::of({near, 0}), 1));
  CHECK(!shifted.contains(Site::of({near - 3, 0}), 1));

  LevelFamily plus3{rot, spacing, LevelFamily::Kind::ShiftedPlus3, 40, 0};
  CHECK(plus3.level(2) == doctest::Approx(13.0));
  CHECK(plus3.contains(Site::of({13, 0}), 2));
  CHECK(!plus3.contains(Site::of({10, 0}), 2));
}

TEST_CASE("frontal boundary of a level set") {
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(2, 2);
  // spacing 4, level 1: members {3,4,5}, frontal boundary {6}
  CHECK(frontal_boundary_contains(Site::of({6, 2}), rot, 4, 1));
  CHECK(!frontal_boundary_contains(Site::of({5, 2}), rot, 4, 1));
  CHECK(!frontal_boundary_contains(Site::of({2, 0}), rot, 4, 1));
  CHECK(!frontal_boundary_contains(Site::of({7, 0}), rot, 4, 1));
}
