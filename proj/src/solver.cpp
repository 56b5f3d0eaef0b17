#include "solver.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>

namespace rwre {

void AbsorbingProblem::validate() const {
  if (!field) throw Error(ErrorKind::Internal, "absorbing problem without field", "solver");
  if (interior.empty()) throw Error(ErrorKind::EmptyBox, "no interior sites", "solver");
  for (const Site& x : interior) {
    if (boundary_index.count(x)) {
      throw Error(ErrorKind::Internal, "interior and boundary overlap at " + site_to_string(x),
                  "solver");
    }
    for (int axis = 0; axis < x.dim; ++axis) {
      for (int step : {-1, 1}) {
        Site y = x.neighbor(axis, step);
        if (!interior_index.count(y) && !boundary_index.count(y)) {
          throw Error(ErrorKind::Internal,
                      "neighbor " + site_to_string(y) + " of interior site escapes the domain",
                      "solver");
        }
      }
    }
  }
}

AbsorbingProblem problem_from_box(const TransitionField& field, const BoxTriple& box) {
  BoxDomain dom = box_sites_and_boundary(box);
  AbsorbingProblem p;
  p.field = &field;
  p.interior = std::move(dom.interior);
  p.interior_index.reserve(p.interior.size());
  for (size_t i = 0; i < p.interior.size(); ++i) p.interior_index[p.interior[i]] = static_cast<int>(i);
  p.boundary.reserve(dom.boundary.size());
  for (auto& [site, cls] : dom.boundary) {
    p.boundary_index[site] = static_cast<int>(p.boundary.size());
    p.boundary.push_back(site);
    p.boundary_class.push_back(cls);
  }
  return p;
}

AbsorbingProblem problem_from_flood(const TransitionField& field, const std::vector<Site>& seeds,
                                    const std::function<bool(const Site&)>& interior,
                                    const std::function<BoundaryClass(const Site&)>& classify,
                                    size_t max_interior) {
  AbsorbingProblem p;
  p.field = &field;
  std::deque<Site> queue;
  for (const Site& s : seeds) {
    if (!interior(s) || p.interior_index.count(s)) continue;
    p.interior_index[s] = static_cast<int>(p.interior.size());
    p.interior.push_back(s);
    queue.push_back(s);
  }
  if (p.interior.empty()) {
    throw Error(ErrorKind::EmptyBox, "no seed satisfies the interior predicate", "solver");
  }
  while (!queue.empty()) {
    Site x = queue.front();
    queue.pop_front();
    for (int axis = 0; axis < x.dim; ++axis) {
      for (int step : {-1, 1}) {
        Site y = x.neighbor(axis, step);
        if (p.interior_index.count(y) || p.boundary_index.count(y)) continue;
        if (interior(y)) {
          if (p.interior.size() >= max_interior) {
            throw Error(ErrorKind::Internal, "flooded domain exceeds site cap", "solver");
          }
          p.interior_index[y] = static_cast<int>(p.interior.size());
          p.interior.push_back(y);
          queue.push_back(y);
        } else {
          p.boundary_index[y] = static_cast<int>(p.boundary.size());
          p.boundary.push_back(y);
          p.boundary_class.push_back(classify(y));
        }
      }
    }
  }
  return p;
}

double ExitDistribution::probability(const Site& start, BoundaryClass c) const {
  auto it = interior_index_.find(start);
  if (it != interior_index_.end()) return values_[static_cast<int>(c)][it->second];
  auto bt = boundary_index_.find(start);
  if (bt != boundary_index_.end()) return boundary_class_[bt->second] == c ? 1.0 : 0.0;
  throw Error(ErrorKind::StartOutsideBox, "site " + site_to_string(start) + " not in solved domain",
              "solver");
}

std::array<double, 3> ExitDistribution::probabilities(const Site& start) const {
  return {probability(start, BoundaryClass::Positive), probability(start, BoundaryClass::Negative),
          probability(start, BoundaryClass::Lateral)};
}

namespace {

struct Assembled {
  Eigen::SparseMatrix<double> matrix;           // I - Q over interior sites
  std::array<Eigen::VectorXd, 3> rhs;           // absorption mass per class
  std::vector<std::vector<std::pair<int, double>>> neighbors;  // for relaxation sweeps
};

Assembled assemble(const AbsorbingProblem& p) {
  const int n = static_cast<int>(p.interior.size());
  const int d = p.field->dimension();
  Assembled a;
  a.matrix.resize(n, n);
  for (auto& v : a.rhs) v = Eigen::VectorXd::Zero(n);
  a.neighbors.assign(n, {});

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(n) * (2 * d + 1));
  std::vector<double> w(2 * d);
  for (int i = 0; i < n; ++i) {
    const Site& x = p.interior[i];
    p.field->probs_into(x, w.data());
    triplets.emplace_back(i, i, 1.0);
    for (int axis = 0; axis < d; ++axis) {
      for (int step : {1, -1}) {
        const double weight = w[2 * axis + (step > 0 ? 0 : 1)];
        Site y = x.neighbor(axis, step);
        auto it = p.interior_index.find(y);
        if (it != p.interior_index.end()) {
          triplets.emplace_back(i, it->second, -weight);
          a.neighbors[i].emplace_back(it->second, weight);
          continue;
        }
        auto bt = p.boundary_index.find(y);
        if (bt == p.boundary_index.end()) {
          throw Error(ErrorKind::Internal, "unclassified neighbor " + site_to_string(y), "solver");
        }
        a.rhs[static_cast<int>(p.boundary_class[bt->second])][i] += weight;
      }
    }
  }
  a.matrix.setFromTriplets(triplets.begin(), triplets.end());
  a.matrix.makeCompressed();
  return a;
}

double residual_inf(const Eigen::SparseMatrix<double>& m, const Eigen::VectorXd& h,
                    const Eigen::VectorXd& b) {
  return (m * h - b).lpNorm<Eigen::Infinity>();
}

}  // namespace

ExitDistribution solve_exit_distribution(const AbsorbingProblem& problem,
                                         const SolveOptions& options) {
  if (!(options.tolerance > 0)) {
    throw Error(ErrorKind::ConfigInvalid, "solver tolerance must be positive", "solver");
  }
  problem.validate();
  Assembled a = assemble(problem);
  const int n = static_cast<int>(problem.interior.size());

  ExitDistribution dist;
  dist.interior_index_ = problem.interior_index;
  dist.boundary_index_ = problem.boundary_index;
  dist.boundary_class_ = problem.boundary_class;

  std::array<Eigen::VectorXd, 3> h;
  if (!options.force_iterative && n <= options.direct_limit) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(a.matrix);
    lu.factorize(a.matrix);
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorKind::SingularSystem, "sparse factorization failed", "solver");
    }
    for (int c = 0; c < 3; ++c) {
      h[c] = lu.solve(a.rhs[c]);
      const double res = residual_inf(a.matrix, h[c], a.rhs[c]);
      if (!(res <= options.tolerance)) {
        throw Error(ErrorKind::SingularSystem,
                    "direct solve residual " + std::to_string(res) + " above tolerance", "solver");
      }
    }
  } else {
    // Relaxation sweeps (repeated local averaging with in-place updates);
    // deterministic row order so results do not depend on scheduling.
    for (int c = 0; c < 3; ++c) h[c] = Eigen::VectorXd::Zero(n);
    int64_t sweeps = 0;
    while (true) {
      for (int c = 0; c < 3; ++c) {
        auto& v = h[c];
        for (int i = 0; i < n; ++i) {
          double acc = a.rhs[c][i];
          for (const auto& [j, weight] : a.neighbors[i]) acc += weight * v[j];
          v[i] = acc;
        }
      }
      ++sweeps;
      if (sweeps % 8 == 0 || sweeps == 1) {
        double worst = 0;
        for (int c = 0; c < 3; ++c) worst = std::max(worst, residual_inf(a.matrix, h[c], a.rhs[c]));
        // the conservation postcondition is part of convergence: a small
        // residual alone does not pin the class sums on large domains
        double worst_sum = 0;
        for (int i = 0; i < n; ++i) {
          worst_sum = std::max(worst_sum, std::abs(h[0][i] + h[1][i] + h[2][i] - 1.0));
        }
        if (worst <= options.tolerance && worst_sum <= 10 * options.tolerance) break;
      }
      if (sweeps >= options.max_sweeps) {
        throw Error(ErrorKind::NonConvergence,
                    "no convergence after " + std::to_string(sweeps) + " sweeps", "solver");
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    const double total = h[0][i] + h[1][i] + h[2][i];
    if (std::abs(total - 1.0) > 10 * options.tolerance) {
      throw Error(ErrorKind::Internal,
                  "class probabilities sum to " + std::to_string(total) + " at row " +
                      std::to_string(i),
                  "solver");
    }
  }
  // absorption masses far below the factorization's absolute accuracy come out
  // as signed noise; clamp within tolerance, reject anything larger
  for (int c = 0; c < 3; ++c) {
    dist.values_[c].assign(h[c].data(), h[c].data() + n);
    for (double& v : dist.values_[c]) {
      if (v < 0 || v > 1) {
        if (v < -10 * options.tolerance || v > 1 + 10 * options.tolerance) {
          throw Error(ErrorKind::Internal, "class probability " + std::to_string(v) + " out of range",
                      "solver");
        }
        v = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return dist;
}

void dump_matrix_market(const AbsorbingProblem& problem, std::ostream& matrix_out,
                        std::ostream* rhs_out) {
  Assembled a = assemble(problem);
  const int n = static_cast<int>(problem.interior.size());
  matrix_out << "%%MatrixMarket matrix coordinate real general\n";
  matrix_out << n << ' ' << n << ' ' << a.matrix.nonZeros() << '\n';
  char buf[64];
  for (int k = 0; k < a.matrix.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a.matrix, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", static_cast<int>(it.row()) + 1,
                    static_cast<int>(it.col()) + 1, it.value());
      matrix_out << buf;
    }
  }
  if (rhs_out) {
    *rhs_out << "%%MatrixMarket matrix array real general\n";
    *rhs_out << n << " 3\n";
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g\n", a.rhs[c][i]);
        *rhs_out << buf;
      }
    }
  }
}

double box_failure_probability(const TransitionField& field, const BoxTriple& box,
                               const Site& start) {
  if (!box_contains(box, start)) {
    throw Error(ErrorKind::StartOutsideBox, "start " + site_to_string(start) + " outside the box",
                "solver");
  }
  AbsorbingProblem p = problem_from_box(field, box);
  ExitDistribution dist = solve_exit_distribution(p);
  return 1.0 - dist.probability(start, BoundaryClass::Positive);
}

namespace {

// Flooded chain between two absorbing predicates along the direction, with
// optional absolute lateral walls and an optional centered confinement box.
AbsorbingProblem band_problem(const TransitionField& field, const LevelGeometry& g,
                              const std::vector<Site>& seeds,
                              const std::function<bool(const Site&)>& neg,
                              const std::function<bool(const Site&)>& pos, double band_lo,
                              double band_hi, double wall, const Site* center = nullptr,
                              double radius = 0) {
  const Eigen::VectorXd dir = g.direction();
  auto confined = [&](const Site& z) {
    if (!center) return true;
    for (int k = 0; k < g.dim(); ++k) {
      const double offset = site_dot(z, g.rotation.col(k)) - site_dot(*center, g.rotation.col(k));
      if (std::abs(offset) >= radius) return false;
    }
    return true;
  };
  auto interior = [&, band_lo, band_hi, wall](const Site& z) {
    const double s = site_dot(z, dir);
    if (s <= band_lo || s >= band_hi) return false;
    if (neg(z) || pos(z)) return false;
    if (std::isfinite(wall) && !within_lateral(z, g.rotation, wall)) return false;
    return confined(z);
  };
  auto classify = [&](const Site& z) {
    if (neg(z)) return BoundaryClass::Negative;
    if (pos(z)) return BoundaryClass::Positive;
    return BoundaryClass::Lateral;
  };
  return problem_from_flood(field, seeds, interior, classify);
}

double initial_wall(const LevelGeometry& g, const BracketOptions& o) {
  double w = std::max(2.0 * g.spacing, g.lateral_bound + g.spacing);
  if (o.lateral_start > 0) w = std::max(w, o.lateral_start);
  return w;
}

double wall_cap(const LevelGeometry& g, const BracketOptions& o) {
  return std::max(initial_wall(g, o), o.lateral_cap_factor * g.spacing);
}

}  // namespace

CrossingProbabilities level_crossing_probabilities(const TransitionField& field, const Site& x,
                                                   const LevelGeometry& geometry,
                                                   const BracketOptions& options) {
  const Eigen::VectorXd dir = geometry.direction();
  const double spacing = geometry.spacing;
  const int64_t i = level_index(x, dir, spacing);
  CrossingProbabilities out;
  out.level = i;

  auto neg = [&, i](const Site& z) { return straddles_level(z, dir, (i - 1) * spacing); };
  auto pos = [&, i](const Site& z) { return straddles_level(z, dir, (i + 1) * spacing); };

  // started on an adjacent level set: the first visit happens at time zero
  if (neg(x)) {
    out.q = Bracket::point(1);
    out.p = Bracket::point(0);
    out.q_hat = 1;
    return out;
  }
  if (pos(x)) {
    out.q = Bracket::point(0);
    out.p = Bracket::point(1);
    out.p_hat = 1;
    return out;
  }

  const double band_lo = (i - 1) * spacing - 2;
  const double band_hi = (i + 1) * spacing + 2;

  {
    AbsorbingProblem hat =
        band_problem(field, geometry, {x}, neg, pos, band_lo, band_hi, geometry.lateral_bound);
    ExitDistribution dist = solve_exit_distribution(hat);
    out.q_hat = dist.probability(x, BoundaryClass::Negative);
    out.p_hat = dist.probability(x, BoundaryClass::Positive);
  }

  double wall = initial_wall(geometry, options);
  for (int k = 0; k < geometry.dim() - 1 && k + 1 < geometry.dim(); ++k) {
    wall = std::max(wall, std::abs(site_dot(x, geometry.rotation.col(k + 1))) + geometry.spacing);
  }
  const double cap = wall_cap(geometry, options);
  while (true) {
    AbsorbingProblem free = band_problem(field, geometry, {x}, neg, pos, band_lo, band_hi, wall);
    ExitDistribution dist = solve_exit_distribution(free);
    const double pn = dist.probability(x, BoundaryClass::Negative);
    const double pp = dist.probability(x, BoundaryClass::Positive);
    const double pl = dist.probability(x, BoundaryClass::Lateral);
    out.q = {pn, pn + pl};
    out.p = {pp, pp + pl};
    if (pl <= options.width_tol) break;
    wall *= 2;
    if (wall > cap) {
      throw Error(ErrorKind::BracketNotTight,
                  "lateral truncation cap reached with bracket width " + std::to_string(pl),
                  "solver");
    }
  }
  return out;
}

namespace {

// All lattice sites satisfying a site predicate inside the axis-aligned hull of
// the slab {|x.l' - level| <= 2.5, |x.R(e_k)| <= lateral_bound + 1}.
std::vector<Site> scan_near_level(const Eigen::MatrixXd& rotation, double level,
                                  double lateral_bound,
                                  const std::function<bool(const Site&)>& keep) {
  const int d = static_cast<int>(rotation.rows());
  std::vector<std::pair<int64_t, int64_t>> ranges(d);
  for (int a = 0; a < d; ++a) {
    const double center = level * rotation(a, 0);
    double span = 2.5 * std::abs(rotation(a, 0)) + 1.0;
    for (int k = 1; k < d; ++k) span += std::abs(rotation(a, k)) * (lateral_bound + 1.0);
    ranges[a] = {static_cast<int64_t>(std::floor(center - span)),
                 static_cast<int64_t>(std::ceil(center + span))};
  }
  std::vector<Site> out;
  Site x;
  x.dim = d;
  std::vector<int64_t> cursor(d);
  for (int k = 0; k < d; ++k) cursor[k] = ranges[k].first;
  while (true) {
    for (int k = 0; k < d; ++k) x.c[k] = cursor[k];
    if (keep(x)) out.push_back(x);
    int k = 0;
    while (k < d) {
      if (++cursor[k] <= ranges[k].second) break;
      cursor[k] = ranges[k].first;
      ++k;
    }
    if (k == d) break;
  }
  return out;
}

std::vector<Site> truncated_level_slice(const LevelGeometry& g, double level) {
  const Eigen::VectorXd dir = g.rotation.col(0);
  return scan_near_level(g.rotation, level, g.lateral_bound, [&](const Site& x) {
    return straddles_level(x, dir, level) && within_lateral(x, g.rotation, g.lateral_bound);
  });
}

}  // namespace

SliceCrossing slice_crossing(const TransitionField& field, const LevelGeometry& geometry,
                             int64_t level, const BracketOptions& options) {
  const Eigen::VectorXd dir = geometry.direction();
  const double spacing = geometry.spacing;
  SliceCrossing out;
  out.level = level;
  out.sites = truncated_level_slice(geometry, level * spacing);
  if (out.sites.empty()) {
    throw Error(ErrorKind::EmptyBox, "empty level slice at level " + std::to_string(level), "solver");
  }

  auto neg = [&, level](const Site& z) { return straddles_level(z, dir, (level - 1) * spacing); };
  auto pos = [&, level](const Site& z) { return straddles_level(z, dir, (level + 1) * spacing); };
  const double band_lo = (level - 1) * spacing - 2;
  const double band_hi = (level + 1) * spacing + 2;

  const size_t m = out.sites.size();
  out.q_hat.resize(m);
  out.p_hat.resize(m);
  out.q.resize(m);
  out.p.resize(m);

  {
    AbsorbingProblem hat = band_problem(field, geometry, out.sites, neg, pos, band_lo, band_hi,
                                        geometry.lateral_bound);
    ExitDistribution dist = solve_exit_distribution(hat);
    for (size_t s = 0; s < m; ++s) {
      out.q_hat[s] = dist.probability(out.sites[s], BoundaryClass::Negative);
      out.p_hat[s] = dist.probability(out.sites[s], BoundaryClass::Positive);
    }
  }

  double wall = initial_wall(geometry, options);
  const double cap = wall_cap(geometry, options);
  while (true) {
    AbsorbingProblem free =
        band_problem(field, geometry, out.sites, neg, pos, band_lo, band_hi, wall);
    ExitDistribution dist = solve_exit_distribution(free);
    double worst = 0;
    double min_p_lo = 1;
    for (size_t s = 0; s < m; ++s) {
      const double pn = dist.probability(out.sites[s], BoundaryClass::Negative);
      const double pp = dist.probability(out.sites[s], BoundaryClass::Positive);
      const double pl = dist.probability(out.sites[s], BoundaryClass::Lateral);
      out.q[s] = {pn, pn + pl};
      out.p[s] = {pp, pp + pl};
      worst = std::max(worst, pl);
      min_p_lo = std::min(min_p_lo, pp);
    }
    if (worst <= options.width_tol && min_p_lo > 0) break;
    wall *= 2;
    if (wall > cap) {
      throw Error(ErrorKind::BracketNotTight,
                  "lateral truncation cap reached (slice bracket width " + std::to_string(worst) +
                      ", min forward lower bound " + std::to_string(min_p_lo) + ")",
                  "solver");
    }
  }
  return out;
}

Bracket tilde_q_bracket(const TransitionField& field, const Site& x, const LevelGeometry& geometry,
                        double rho_c) {
  const Eigen::VectorXd dir = geometry.direction();
  const double spacing = geometry.spacing;
  const int64_t i = level_index(x, dir, spacing);
  auto neg = [&, i](const Site& z) { return straddles_level(z, dir, (i - 1) * spacing); };
  auto pos = [&, i](const Site& z) {
    return frontal_boundary_contains(z, geometry.rotation, spacing, i);
  };
  if (neg(x)) return Bracket::point(1);
  if (pos(x)) return Bracket::point(0);
  const double band_lo = (i - 1) * spacing - 2;
  const double band_hi = i * spacing + 4;
  AbsorbingProblem p = band_problem(field, geometry, {x}, neg, pos, band_lo, band_hi,
                                    std::numeric_limits<double>::infinity(), &x, rho_c);
  ExitDistribution dist = solve_exit_distribution(p);
  const double lo = dist.probability(x, BoundaryClass::Negative);
  return {lo, lo + dist.probability(x, BoundaryClass::Lateral)};
}

Bracket tilde_q_bracket_auto(const TransitionField& field, const Site& x,
                             const LevelGeometry& geometry, double width_tol, double cap_factor) {
  double rho_c = 8 * geometry.spacing;
  const double cap = cap_factor * geometry.spacing;
  Bracket b = tilde_q_bracket(field, x, geometry, rho_c);
  while (b.width() > width_tol && 2 * rho_c <= cap) {
    rho_c *= 2;
    b = tilde_q_bracket(field, x, geometry, rho_c);
  }
  return b;
}

SliceTilde tilde_q_slice(const TransitionField& field, const LevelGeometry& geometry, int64_t level,
                         double rho_c) {
  const Eigen::VectorXd dir = geometry.direction();
  const double spacing = geometry.spacing;
  SliceTilde out;
  out.level = level;
  out.sites = truncated_level_slice(geometry, level * spacing);
  if (out.sites.empty()) {
    throw Error(ErrorKind::EmptyBox, "empty level slice at level " + std::to_string(level), "solver");
  }
  auto neg = [&, level](const Site& z) { return straddles_level(z, dir, (level - 1) * spacing); };
  auto pos = [&, level](const Site& z) {
    return frontal_boundary_contains(z, geometry.rotation, spacing, level);
  };
  const double band_lo = (level - 1) * spacing - 2;
  const double band_hi = level * spacing + 4;
  // shared lateral walls at lateral_bound + rho_c: every slice site keeps at
  // least rho_c of lateral clearance, and one solve covers the whole slice
  AbsorbingProblem p = band_problem(field, geometry, out.sites, neg, pos, band_lo, band_hi,
                                    geometry.lateral_bound + rho_c);
  ExitDistribution dist = solve_exit_distribution(p);
  out.values.resize(out.sites.size());
  out.sup = {0, 0};
  for (size_t s = 0; s < out.sites.size(); ++s) {
    const double lo = dist.probability(out.sites[s], BoundaryClass::Negative);
    const double hi = lo + dist.probability(out.sites[s], BoundaryClass::Lateral);
    out.values[s] = {lo, hi};
    out.sup.lo = std::max(out.sup.lo, lo);
    out.sup.hi = std::max(out.sup.hi, hi);
  }
  return out;
}

double excursion_return_sup(const TransitionField& field, const LevelGeometry& geometry,
                            int64_t level) {
  const Eigen::VectorXd dir = geometry.direction();
  const double spacing = geometry.spacing;
  // frontal slice of the level set, laterally truncated; frontal sites sit
  // within a couple of steps of the level plane
  std::vector<Site> frontal =
      scan_near_level(geometry.rotation, level * spacing + 1.5, geometry.lateral_bound,
                      [&](const Site& z) {
                        return frontal_boundary_contains(z, geometry.rotation, spacing, level) &&
                               within_lateral(z, geometry.rotation, geometry.lateral_bound);
                      });
  if (frontal.empty()) return 0.0;

  auto neg = [&, level](const Site& z) { return straddles_level(z, dir, level * spacing); };
  auto pos = [&, level](const Site& z) { return straddles_level(z, dir, (level + 1) * spacing); };
  const double band_lo = level * spacing - 2;
  const double band_hi = (level + 1) * spacing + 2;
  AbsorbingProblem p =
      band_problem(field, geometry, frontal, neg, pos, band_lo, band_hi, geometry.lateral_bound);
  ExitDistribution dist = solve_exit_distribution(p);
  double sup = 0;
  for (const Site& y : frontal) sup = std::max(sup, dist.probability(y, BoundaryClass::Negative));
  return sup;
}

std::vector<Bracket> f_from_rho(const std::vector<Bracket>& rho, int n) {
  if (static_cast<int>(rho.size()) != 2 * n + 1) {
    throw Error(ErrorKind::ConfigInvalid, "rho must cover levels -N+1..N+1", "solver");
  }
  for (const Bracket& r : rho) {
    if (!(r.lo > 0)) {
      throw Error(ErrorKind::BracketNotTight, "rho lower bound vanished; cannot invert", "solver");
    }
  }
  // suffix products prod[m] = prod_{m<i<=N+1} rho_i^{-1}, m = -N..N+1
  std::vector<Bracket> prod(2 * n + 2);
  prod[2 * n + 1] = Bracket::point(1);  // m = N+1, empty product
  for (int m = 2 * n; m >= 0; --m) prod[m] = prod[m + 1] * inverse(rho[m]);
  std::vector<Bracket> f(2 * n + 3);
  f[2 * n + 2] = Bracket::point(0);  // j = N+2
  for (int j = 2 * n + 1; j >= 0; --j) f[j] = f[j + 1] + prod[j];
  return f;
}

Bracket RhoFProfile::rho_at(int64_t i) const {
  const int64_t k = i + n - 1;
  if (k < 0 || k >= static_cast<int64_t>(rho.size())) {
    throw Error(ErrorKind::ConfigInvalid, "rho level out of range", "solver");
  }
  return rho[k];
}

Bracket RhoFProfile::f_at(int64_t j) const {
  if (j >= n + 2) return Bracket::point(0);
  const int64_t k = j + n;
  if (k < 0) throw Error(ErrorKind::ConfigInvalid, "f index out of range", "solver");
  return f[k];
}

RhoFProfile rho_f_profile(const TransitionField& field, int n, const LevelGeometry& geometry,
                          const BracketOptions& options) {
  if (n < 2) throw Error(ErrorKind::ConfigInvalid, "profile needs N >= 2", "solver");
  RhoFProfile prof;
  prof.n = n;
  prof.rho.resize(2 * n + 1);
  for (int64_t i = -n + 1; i <= n + 1; ++i) {
    SliceCrossing sc = slice_crossing(field, geometry, i, options);
    Bracket sup{0, 0};
    for (size_t s = 0; s < sc.sites.size(); ++s) {
      if (!(sc.p[s].lo > 0)) {
        throw Error(ErrorKind::BracketNotTight, "forward-crossing lower bound vanished", "solver");
      }
      const Bracket ratio = scale(sc.q_hat[s], inverse(sc.p[s]));
      sup.lo = std::max(sup.lo, ratio.lo);
      sup.hi = std::max(sup.hi, ratio.hi);
    }
    prof.rho[i + n - 1] = sup;
  }
  prof.f = f_from_rho(prof.rho, n);
  return prof;
}

TypicalEventCheck typical_event_check(const TransitionField& field, const LevelGeometry& geometry,
                                      int n, double c1, double kappa,
                                      const BracketOptions& options) {
  if (!(geometry.beta > 0.5) || !(geometry.beta < 1)) {
    throw Error(ErrorKind::ConfigInvalid, "typical event requires beta in (1/2, 1)", "solver");
  }
  const Eigen::VectorXd dir = geometry.direction();
  const double spacing = geometry.spacing;
  const double lb = std::pow(spacing, geometry.beta);
  TypicalEventCheck out;
  out.c_tilde = c1 * std::log(1.0 / kappa);
  out.threshold = std::exp(-out.c_tilde * lb);
  out.member = true;
  out.min_lower = 1;

  LevelFamily shifted{geometry.rotation, spacing, LevelFamily::Kind::ShiftedBeta,
                      geometry.lateral_bound, geometry.beta};
  LevelFamily truncated{geometry.rotation, spacing, LevelFamily::Kind::Truncated,
                        geometry.lateral_bound, geometry.beta};

  struct FamilyRef {
    const LevelFamily* fam;
    const char* name;
  };
  const FamilyRef families[2] = {{&shifted, "shifted_beta"}, {&truncated, "truncated"}};

  for (int64_t i = -n; i <= n + 2; ++i) {
    for (const FamilyRef& fr : families) {
      const double level = fr.fam->level(i);
      std::vector<Site> slice =
          scan_near_level(geometry.rotation, level, geometry.lateral_bound,
                          [&](const Site& z) { return fr.fam->contains(z, i); });
      if (slice.empty()) continue;
      // group by the exact projection value: sites in a group share the slab
      std::map<double, std::vector<Site>> groups;
      for (const Site& z : slice) groups[site_dot(z, dir)].push_back(z);

      for (auto& [v, sites] : groups) {
        const double front = v + spacing;
        const double back = v - lb;
        auto negp = [&, back](const Site& z) { return site_dot(z, dir) <= back; };
        auto posp = [&, front](const Site& z) { return site_dot(z, dir) >= front; };
        double wall = geometry.lateral_bound + 2 * spacing;
        const double cap = geometry.lateral_bound + wall_cap(geometry, options);
        while (true) {
          AbsorbingProblem p =
              band_problem(field, geometry, sites, negp, posp, back - 2, front + 2, wall);
          ExitDistribution dist = solve_exit_distribution(p);
          bool widen = false;
          for (const Site& z : sites) {
            const double fp = dist.probability(z, BoundaryClass::Positive);
            const double fl = dist.probability(z, BoundaryClass::Lateral);
            const Bracket b{fp, fp + fl};
            out.min_lower = std::min(out.min_lower, b.lo);
            if (b.lo > out.threshold) continue;
            if (b.hi <= out.threshold) {
              out.member = false;
              out.has_witness = true;
              out.witness = z;
              out.witness_level = i;
              out.witness_family = fr.name;
              out.witness_probability = b;
              return out;
            }
            widen = true;
          }
          if (!widen) break;
          wall *= 2;
          if (wall > cap) {
            throw Error(ErrorKind::BracketNotTight,
                        "typical-event bracket straddles the threshold at the wall cap", "solver");
          }
        }
      }
    }
  }
  return out;
}

}  // namespace rwre
