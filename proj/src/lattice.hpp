#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "common.hpp"

namespace rwre {

enum class BoundaryClass : int { Positive = 0, Negative = 1, Lateral = 2 };

const char* boundary_class_name(BoundaryClass c);

double site_dot(const Site& x, const Eigen::VectorXd& v);

// Deterministic completion of a unit direction to a rotation with first column
// equal to that direction: Gram-Schmidt against e_1, e_2, ... in fixed order,
// skipping candidates that are nearly parallel to the span collected so far.
Eigen::MatrixXd build_rotation(const Eigen::VectorXd& direction);

// Index of the width-L0 level interval [i*L0 - L0/2, i*L0 + L0/2) containing
// x . direction.
int64_t level_index(const Site& x, const Eigen::VectorXd& direction, double spacing);

// Rotated open box (-L, L) x (-Ltilde, Ltilde)^{d-1}.
struct BoxTriple {
  Eigen::MatrixXd rotation;
  double half_length = 0;  // L, along rotation column 0
  double half_width = 0;   // Ltilde, lateral
};

struct BoxDomain {
  std::vector<Site> interior;
  std::vector<std::pair<Site, BoundaryClass>> boundary;
};

bool box_contains(const BoxTriple& box, const Site& x);
BoundaryClass classify_box_boundary(const BoxTriple& box, const Site& z);

// Lattice sites of the open box plus its outer boundary with class labels.
// Positive: z.l' >= L with all lateral coordinates strictly inside; Negative
// mirrored; everything else Lateral.
BoxDomain box_sites_and_boundary(const BoxTriple& box);

// True when some l1-neighbor sits on the other side of (or on) the hyperplane
// x . direction = level; the membership test behind every level family.
bool straddles_level(const Site& x, const Eigen::VectorXd& direction, double level);

bool within_lateral(const Site& x, const Eigen::MatrixXd& rotation, double bound);

// Level-set families along a direction: the full straddle set at spacing L0,
// its lateral truncation, and the two shifted variants used by the typical-exit
// machinery (levels i*(L0+1+L0^beta) and i*L0+3, both laterally truncated).
struct LevelFamily {
  enum class Kind { Full, Truncated, ShiftedBeta, ShiftedPlus3 };

  Eigen::MatrixXd rotation;
  double spacing = 0;        // L0
  Kind kind = Kind::Full;
  double lateral_bound = 0;  // required unless Full
  double beta = 0;           // ShiftedBeta only

  double level(int64_t i) const;
  bool contains(const Site& x, int64_t i) const;
};

// Frontal part of the boundary of the full level set at index i: sites not in
// the set, adjacent to it, on the forward side of the level.
bool frontal_boundary_contains(const Site& z, const Eigen::MatrixXd& rotation, double spacing,
                               int64_t i);

}  // namespace rwre
