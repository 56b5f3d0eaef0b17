#include "lattice.hpp"

#include <cmath>
#include <unordered_set>

namespace rwre {

const char* boundary_class_name(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::Positive: return "positive";
    case BoundaryClass::Negative: return "negative";
    case BoundaryClass::Lateral: return "lateral";
  }
  return "?";
}

double site_dot(const Site& x, const Eigen::VectorXd& v) {
  double s = 0;
  for (int k = 0; k < x.dim; ++k) s += static_cast<double>(x.c[k]) * v[k];
  return s;
}

Eigen::MatrixXd build_rotation(const Eigen::VectorXd& direction) {
  const int d = static_cast<int>(direction.size());
  if (d < 1 || d > kMaxDim) {
    throw Error(ErrorKind::ConfigInvalid, "dimension must be in [1," + std::to_string(kMaxDim) + "]",
                "lattice");
  }
  const double norm = direction.norm();
  if (std::abs(norm - 1.0) > 1e-9) {
    throw Error(ErrorKind::NonUnitDirection,
                "direction norm " + std::to_string(norm) + " deviates from 1 by more than 1e-9",
                "lattice");
  }

  Eigen::MatrixXd rot(d, d);
  rot.col(0) = direction / norm;
  int cols = 1;
  for (int a = 0; a < d && cols < d; ++a) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    w[a] = 1.0;
    // two Gram-Schmidt passes keep orthogonality near machine precision
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < cols; ++j) w -= rot.col(j).dot(w) * rot.col(j);
    }
    const double wn = w.norm();
    if (wn < 1e-8) continue;  // nearly parallel to the span so far
    rot.col(cols++) = w / wn;
  }
  if (cols != d) throw Error(ErrorKind::Internal, "basis completion failed", "lattice");
  return rot;
}

int64_t level_index(const Site& x, const Eigen::VectorXd& direction, double spacing) {
  if (!(spacing > 0)) throw Error(ErrorKind::ConfigInvalid, "level spacing must be positive", "lattice");
  return static_cast<int64_t>(std::floor(site_dot(x, direction) / spacing + 0.5));
}

bool box_contains(const BoxTriple& box, const Site& x) {
  const int d = static_cast<int>(box.rotation.rows());
  if (std::abs(site_dot(x, box.rotation.col(0))) >= box.half_length) return false;
  for (int k = 1; k < d; ++k) {
    if (std::abs(site_dot(x, box.rotation.col(k))) >= box.half_width) return false;
  }
  return true;
}

BoundaryClass classify_box_boundary(const BoxTriple& box, const Site& z) {
  const int d = static_cast<int>(box.rotation.rows());
  bool lateral_ok = true;
  for (int k = 1; k < d; ++k) {
    if (std::abs(site_dot(z, box.rotation.col(k))) >= box.half_width) {
      lateral_ok = false;
      break;
    }
  }
  const double s = site_dot(z, box.rotation.col(0));
  if (lateral_ok && s >= box.half_length) return BoundaryClass::Positive;
  if (lateral_ok && s <= -box.half_length) return BoundaryClass::Negative;
  return BoundaryClass::Lateral;
}

namespace {

// Odometer over the axis-aligned bounding box of the rotated box.
template <typename Fn>
void scan_lattice_box(const std::vector<std::pair<int64_t, int64_t>>& ranges, Fn&& fn) {
  const int d = static_cast<int>(ranges.size());
  Site x;
  x.dim = d;
  for (int k = 0; k < d; ++k) x.c[k] = ranges[k].first;
  while (true) {
    fn(x);
    int k = 0;
    while (k < d) {
      if (++x.c[k] <= ranges[k].second) break;
      x.c[k] = ranges[k].first;
      ++k;
    }
    if (k == d) break;
  }
}

}  // namespace

BoxDomain box_sites_and_boundary(const BoxTriple& box) {
  const int d = static_cast<int>(box.rotation.rows());
  if (!(box.half_length > 0) || !(box.half_width > 0 || d == 1)) {
    throw Error(ErrorKind::ConfigInvalid, "box half sizes must be positive", "lattice");
  }

  std::vector<std::pair<int64_t, int64_t>> ranges(d);
  for (int a = 0; a < d; ++a) {
    double bound = std::abs(box.rotation(a, 0)) * box.half_length;
    for (int k = 1; k < d; ++k) bound += std::abs(box.rotation(a, k)) * box.half_width;
    const auto b = static_cast<int64_t>(std::floor(bound));
    ranges[a] = {-b, b};
  }

  BoxDomain dom;
  std::unordered_set<Site, SiteHash> interior;
  scan_lattice_box(ranges, [&](const Site& x) {
    if (box_contains(box, x)) {
      interior.insert(x);
      dom.interior.push_back(x);
    }
  });
  if (dom.interior.empty()) throw Error(ErrorKind::EmptyBox, "no lattice site in the open box", "lattice");

  std::unordered_set<Site, SiteHash> seen;
  for (const Site& x : dom.interior) {
    for (int axis = 0; axis < d; ++axis) {
      for (int step : {-1, 1}) {
        Site z = x.neighbor(axis, step);
        if (interior.count(z) || seen.count(z)) continue;
        seen.insert(z);
        dom.boundary.emplace_back(z, classify_box_boundary(box, z));
      }
    }
  }
  return dom;
}

bool straddles_level(const Site& x, const Eigen::VectorXd& direction, double level) {
  const double s = site_dot(x, direction) - level;
  for (int axis = 0; axis < x.dim; ++axis) {
    for (int step : {-1, 1}) {
      const double t = s + step * direction[axis];
      if (s * t <= 0.0) return true;
    }
  }
  return false;
}

bool within_lateral(const Site& x, const Eigen::MatrixXd& rotation, double bound) {
  const int d = static_cast<int>(rotation.rows());
  for (int k = 1; k < d; ++k) {
    if (std::abs(site_dot(x, rotation.col(k))) >= bound) return false;
  }
  return true;
}

double LevelFamily::level(int64_t i) const {
  switch (kind) {
    case Kind::Full:
    case Kind::Truncated:
      return static_cast<double>(i) * spacing;
    case Kind::ShiftedBeta:
      return static_cast<double>(i) * (spacing + 1.0 + std::pow(spacing, beta));
    case Kind::ShiftedPlus3:
      return static_cast<double>(i) * spacing + 3.0;
  }
  return 0;
}

bool LevelFamily::contains(const Site& x, int64_t i) const {
  if (!straddles_level(x, rotation.col(0), level(i))) return false;
  if (kind == Kind::Full) return true;
  return within_lateral(x, rotation, lateral_bound);
}

bool frontal_boundary_contains(const Site& z, const Eigen::MatrixXd& rotation, double spacing,
                               int64_t i) {
  const Eigen::VectorXd dir = rotation.col(0);
  const double level = static_cast<double>(i) * spacing;
  if (site_dot(z, dir) - level < 0) return false;
  if (straddles_level(z, dir, level)) return false;  // member, not boundary
  for (int axis = 0; axis < z.dim; ++axis) {
    for (int step : {-1, 1}) {
      if (straddles_level(z.neighbor(axis, step), dir, level)) return true;
    }
  }
  return false;
}

}  // namespace rwre
