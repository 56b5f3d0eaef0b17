#include "walk.hpp"

#include <cmath>

#include "rng.hpp"

namespace rwre {

namespace {

// returns true when stopped, with the class
bool classify_stop(const StopSpec& stop, const Site& x, int64_t start_level, BoundaryClass& cls) {
  const Eigen::VectorXd dir = stop.rotation.col(0);
  if (stop.level_mode) {
    if (straddles_level(x, dir, (start_level - 1) * stop.spacing)) {
      cls = BoundaryClass::Negative;
      return true;
    }
    if (straddles_level(x, dir, (start_level + 1) * stop.spacing)) {
      cls = BoundaryClass::Positive;
      return true;
    }
    if (std::isfinite(stop.lateral) && !within_lateral(x, stop.rotation, stop.lateral)) {
      cls = BoundaryClass::Lateral;
      return true;
    }
    return false;
  }
  const bool lateral_ok =
      !std::isfinite(stop.lateral) || within_lateral(x, stop.rotation, stop.lateral);
  const double s = site_dot(x, dir);
  if (!lateral_ok) {
    cls = BoundaryClass::Lateral;
    return true;
  }
  if (s <= stop.back) {
    cls = BoundaryClass::Negative;
    return true;
  }
  if (s >= stop.front) {
    cls = BoundaryClass::Positive;
    return true;
  }
  return false;
}

}  // namespace

WalkOutcome simulate_walk(const TransitionField& field, const Site& start, const StopSpec& stop,
                          uint64_t seed, uint64_t stream, int64_t budget) {
  const int d = field.dimension();
  const Eigen::VectorXd dir = stop.rotation.col(0);
  const int64_t start_level =
      stop.level_mode ? level_index(start, dir, stop.spacing) : int64_t{0};

  WalkOutcome out;
  out.stream = stream;
  Site x = start;

  std::vector<int64_t> exc;
  if (stop.track) {
    if (stop.track->hi >= stop.track->lo) exc.assign(stop.track->hi - stop.track->lo + 1, 0);
  }

  rng::Philox gen(rng::derive(seed, rng::kTagWalk), stream, 0);
  std::vector<double> w(2 * d);

  BoundaryClass cls;
  if (classify_stop(stop, x, start_level, cls)) {
    out.exit = x;
    out.exit_class = cls;
  } else {
    while (true) {
      if (out.steps >= budget) {
        throw Error(ErrorKind::StepBudgetExceeded,
                    "walk exceeded step budget " + std::to_string(budget), "walk");
      }
      field.probs_into(x, w.data());
      const double u = gen.next_unit();
      double acc = 0;
      int choice = 2 * d - 1;
      for (int k = 0; k < 2 * d; ++k) {
        acc += w[k];
        if (u < acc) {
          choice = k;
          break;
        }
      }
      const int axis = choice / 2;
      const int step = (choice % 2 == 0) ? 1 : -1;

      Site next = x.neighbor(axis, step);
      ++out.steps;

      if (stop.track && !exc.empty()) {
        // a transition x -> next counts for level i when x is in the level set
        // and next is on its frontal boundary; only nearby levels can match
        const int64_t guess = static_cast<int64_t>(
            std::llround(site_dot(next, dir) / stop.track->spacing));
        for (int64_t i = guess - 1; i <= guess + 1; ++i) {
          if (i < stop.track->lo || i > stop.track->hi) continue;
          if (straddles_level(x, dir, i * stop.track->spacing) &&
              frontal_boundary_contains(next, stop.rotation, stop.track->spacing, i)) {
            ++exc[i - stop.track->lo];
          }
        }
      }

      x = next;
      if (classify_stop(stop, x, start_level, cls)) {
        out.exit = x;
        out.exit_class = cls;
        break;
      }
    }
  }

  if (stop.track) {
    for (size_t k = 0; k < exc.size(); ++k) {
      out.excursions.emplace_back(stop.track->lo + static_cast<int64_t>(k), exc[k]);
    }
  }
  return out;
}

}  // namespace rwre
