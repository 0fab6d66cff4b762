// Copyright 2026 The optcoco Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPTCOCO_GEOMETRY_HPP
#define OPTCOCO_GEOMETRY_HPP

#include <Eigen/Core>

#include <string_view>

#include "optcoco/types.hpp"

namespace optcoco {

enum class NormKind { kL2, kL1, kLinf };

double norm(NormKind kind, const Vector& v);
std::string_view to_string(NormKind kind);

/// Primal norm with its dual. Only the pairings (L2, L2) and (L1, Linf)
/// exist; the constructor is private so no other pairing can be built.
class NormPair {
 public:
  static NormPair l2() { return {NormKind::kL2, NormKind::kL2}; }
  static NormPair l1() { return {NormKind::kL1, NormKind::kLinf}; }

  NormKind primal() const { return primal_; }
  NormKind dual() const { return dual_; }

  double primal_norm(const Vector& v) const { return norm(primal_, v); }
  double dual_norm(const Vector& v) const { return norm(dual_, v); }

 private:
  NormPair(NormKind p, NormKind d) : primal_(p), dual_(d) {}
  NormKind primal_;
  NormKind dual_;
};

enum class Regularizer { kHalfSquaredL2, kNegativeEntropy };

/// Regularizer R, its strong-convexity modulus and the norm it is measured
/// in. Half-squared-L2 is 1-strongly convex w.r.t. L2; negative entropy is
/// 1-strongly convex w.r.t. L1 on the simplex.
struct BregmanGeometry {
  Regularizer regularizer = Regularizer::kHalfSquaredL2;
  double beta = 1.0;
  NormPair norms = NormPair::l2();

  static BregmanGeometry euclidean() { return {Regularizer::kHalfSquaredL2, 1.0, NormPair::l2()}; }
  static BregmanGeometry entropic() { return {Regularizer::kNegativeEntropy, 1.0, NormPair::l1()}; }

  bool is_euclidean() const { return regularizer == Regularizer::kHalfSquaredL2; }
};

enum class DomainKind { kBox, kBall, kSimplex, kHalfspaces };

std::string_view to_string(DomainKind kind);

/// Closed, convex, bounded feasible set. Halfspace domains are a box cut by
/// linear inequalities normals.row(k) * x <= offsets(k).
class Domain {
 public:
  static Domain box(Vector lower, Vector upper);
  static Domain ball(Vector center, double radius);
  static Domain simplex(Eigen::Index dim);
  static Domain halfspaces(Vector lower, Vector upper, Eigen::MatrixXd normals, Vector offsets);

  DomainKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }
  const Eigen::MatrixXd& normals() const { return normals_; }
  const Vector& offsets() const { return offsets_; }

  /// Diameter in the given norm. Halfspace domains report the diameter of
  /// their bounding box, which upper-bounds the true one.
  double diameter(NormKind kind) const;

  /// max over the domain of ||x||.
  double max_norm(NormKind kind) const;

  /// Default starting point: box/ball center, uniform simplex point, or the
  /// projection of the box center for halfspace domains.
  Vector centroid() const;

  bool contains(const Vector& x, double tol = 1e-9) const;

  /// Distance to the relative boundary (for the simplex: min_i x_i).
  /// Negative outside.
  double distance_to_boundary(const Vector& x) const;

 private:
  Domain() = default;

  DomainKind kind_ = DomainKind::kBox;
  Eigen::Index dim_ = 0;
  Vector lower_;
  Vector upper_;
  Vector center_;
  double radius_ = 0.0;
  Eigen::MatrixXd normals_;
  Vector offsets_;
  Vector centroid_;
};

/// B(x; y) = R(x) - R(y) - <grad R(y), x - y>.
///
/// Half-squared-L2 gives 0.5 * ||x - y||^2. Negative entropy gives the
/// generalized KL divergence sum x log(x/y) - x + y, which is the KL
/// divergence on the simplex; 0 log 0 = 0, and a zero y_i under a positive
/// x_i returns +infinity.
double bregman_div(const BregmanGeometry& geometry, const Vector& x, const Vector& y);

/// Bregman projection argmin_{x in domain} B(x; y).
///
/// Euclidean: clip for boxes, radial scaling for balls, sort-based
/// projection for the simplex, exact multiplier bisection for a box cut by
/// one halfspace and Dykstra's alternating projections for several.
/// Entropic: normalization on the simplex, clipping on nonnegative boxes.
Vector project(const BregmanGeometry& geometry, const Domain& domain, const Vector& y);

/// Euclidean projection onto the probability simplex (O(d log d)).
Vector project_simplex(const Vector& y);

/// argmin_{x in domain} <ell, x> + B(x; z) / eta.
///
/// The entropic step is computed in log space. Throws InvalidArgument for
/// non-finite ell, eta <= 0, or (entropic) an anchor with a zero entry.
Vector mirror_step(const BregmanGeometry& geometry, const Domain& domain, const Vector& z,
                   const Vector& ell, double eta);

struct ThreePointResult {
  /// |lhs - rhs| when the solution is interior, rhs - lhs otherwise.
  double value = 0.0;
  bool interior = false;
};

/// Tolerance on the distance to the boundary for a solution to count as
/// interior in bregman_three_point_check.
inline constexpr double kInteriorTolerance = 1e-7;

/// Test oracle for the three-point identity of an exact mirror step x*:
///   eta <ell, x* - u> = B(u; z) - B(u; x*) - B(x*; z)
/// which holds with equality for interior solutions and as "<=" otherwise.
ThreePointResult bregman_three_point_check(const BregmanGeometry& geometry, const Domain& domain,
                                           const Vector& z, const Vector& ell, double eta,
                                           const Vector& u);

}  // namespace optcoco

#endif  // OPTCOCO_GEOMETRY_HPP
