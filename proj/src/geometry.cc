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

#include "optcoco/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace optcoco {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector clip(const Vector& y, const Vector& lo, const Vector& hi) {
  return y.cwiseMax(lo).cwiseMin(hi);
}

// Projection onto {x : a.x <= b}.
Vector project_halfspace(const Vector& y, const Vector& a, double b) {
  const double excess = a.dot(y) - b;
  if (excess <= 0.0) return y;
  return y - (excess / a.squaredNorm()) * a;
}

// Box cut by a single halfspace: x(mu) = clip(y - mu a) is monotone in mu,
// so the KKT multiplier is found by bisection. The feasible end of the
// bracket is returned.
Vector project_box_halfspace(const Vector& y, const Vector& lo, const Vector& hi, const Vector& a,
                             double b) {
  auto point = [&](double mu) { return clip(y - mu * a, lo, hi); };
  Vector x = point(0.0);
  if (a.dot(x) <= b) return x;
  double mu_lo = 0.0;
  double mu_hi = 1.0;
  for (int i = 0; i < 2000 && a.dot(point(mu_hi)) > b; ++i) mu_hi *= 2.0;
  if (a.dot(point(mu_hi)) > b) {
    throw Infeasible("box and halfspace do not intersect");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (mu_lo + mu_hi);
    if (mid <= mu_lo || mid >= mu_hi) break;
    if (a.dot(point(mid)) > b) {
      mu_lo = mid;
    } else {
      mu_hi = mid;
    }
  }
  return point(mu_hi);
}

Vector dykstra(const Vector& y, const Domain& domain) {
  const Eigen::Index m = domain.normals().rows();
  const Eigen::Index n = y.size();
  // one correction term per set: the box plus each halfspace
  std::vector<Vector> corrections(static_cast<std::size_t>(m + 1), Vector::Zero(n));
  Vector x = y;
  for (int sweep = 0; sweep < 100000; ++sweep) {
    const Vector start = x;
    {
      Vector shifted = x + corrections[0];
      Vector next = clip(shifted, domain.lower(), domain.upper());
      corrections[0] = shifted - next;
      x = next;
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      Vector shifted = x + corrections[static_cast<std::size_t>(k + 1)];
      Vector next = project_halfspace(shifted, domain.normals().row(k).transpose(), domain.offsets()(k));
      corrections[static_cast<std::size_t>(k + 1)] = shifted - next;
      x = next;
    }
    if ((x - start).lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>())) break;
  }
  return x;
}

Vector euclidean_project(const Domain& domain, const Vector& y) {
  switch (domain.kind()) {
    case DomainKind::kBox:
      return clip(y, domain.lower(), domain.upper());
    case DomainKind::kBall: {
      const Vector offset = y - domain.center();
      const double r = offset.norm();
      if (r <= domain.radius()) return y;
      return domain.center() + (domain.radius() / r) * offset;
    }
    case DomainKind::kSimplex:
      return project_simplex(y);
    case DomainKind::kHalfspaces:
      if (domain.normals().rows() == 1) {
        return project_box_halfspace(y, domain.lower(), domain.upper(),
                                     domain.normals().row(0).transpose(), domain.offsets()(0));
      }
      return dykstra(y, domain);
  }
  return y;
}

void require_entropic_domain(const Domain& domain) {
  if (domain.kind() == DomainKind::kSimplex) return;
  if (domain.kind() == DomainKind::kBox && (domain.lower().array() >= 0.0).all()) return;
  throw InvalidArgument("entropic geometry needs a simplex or a nonnegative box domain");
}

}  // namespace

double norm(NormKind kind, const Vector& v) {
  switch (kind) {
    case NormKind::kL2:
      return v.norm();
    case NormKind::kL1:
      return v.lpNorm<1>();
    case NormKind::kLinf:
      return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::kL2:
      return "l2";
    case NormKind::kL1:
      return "l1";
    case NormKind::kLinf:
      return "linf";
  }
  return "?";
}

std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::kBox:
      return "box";
    case DomainKind::kBall:
      return "ball";
    case DomainKind::kSimplex:
      return "simplex";
    case DomainKind::kHalfspaces:
      return "halfspaces";
  }
  return "?";
}

Domain Domain::box(Vector lower, Vector upper) {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw InvalidArgument("box bounds must be nonempty and of equal dimension");
  }
  require_finite(lower, "box lower bound");
  require_finite(upper, "box upper bound");
  if ((lower.array() > upper.array()).any()) {
    throw InvalidArgument("box lower bound exceeds upper bound");
  }
  Domain d;
  d.kind_ = DomainKind::kBox;
  d.dim_ = lower.size();
  d.center_ = 0.5 * (lower + upper);
  d.centroid_ = d.center_;
  d.lower_ = std::move(lower);
  d.upper_ = std::move(upper);
  return d;
}

Domain Domain::ball(Vector center, double radius) {
  if (center.size() == 0) throw InvalidArgument("ball center must be nonempty");
  require_finite(center, "ball center");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("ball radius must be positive and finite");
  }
  Domain d;
  d.kind_ = DomainKind::kBall;
  d.dim_ = center.size();
  d.radius_ = radius;
  d.lower_ = center.array() - radius;
  d.upper_ = center.array() + radius;
  d.centroid_ = center;
  d.center_ = std::move(center);
  return d;
}

Domain Domain::simplex(Eigen::Index dim) {
  if (dim < 1) throw InvalidArgument("simplex dimension must be positive");
  Domain d;
  d.kind_ = DomainKind::kSimplex;
  d.dim_ = dim;
  d.lower_ = Vector::Zero(dim);
  d.upper_ = Vector::Ones(dim);
  d.centroid_ = Vector::Constant(dim, 1.0 / static_cast<double>(dim));
  d.center_ = d.centroid_;
  return d;
}

Domain Domain::halfspaces(Vector lower, Vector upper, Eigen::MatrixXd normals, Vector offsets) {
  Domain d = box(std::move(lower), std::move(upper));
  if (normals.cols() != d.dim_ || normals.rows() != offsets.size() || normals.rows() == 0) {
    throw InvalidArgument("halfspace normals/offsets have inconsistent shapes");
  }
  if (!normals.allFinite() || !offsets.allFinite()) {
    throw InvalidArgument("halfspace normals/offsets must be finite");
  }
  for (Eigen::Index k = 0; k < normals.rows(); ++k) {
    if (normals.row(k).norm() == 0.0) throw InvalidArgument("halfspace normal is zero");
  }
  d.kind_ = DomainKind::kHalfspaces;
  d.normals_ = std::move(normals);
  d.offsets_ = std::move(offsets);
  d.centroid_ = euclidean_project(d, d.center_);
  if (!d.contains(d.centroid_, 1e-7)) {
    throw Infeasible("halfspace domain is empty");
  }
  return d;
}

double Domain::diameter(NormKind kind) const {
  switch (kind_) {
    case DomainKind::kBox:
    case DomainKind::kHalfspaces:
      return norm(kind, upper_ - lower_);
    case DomainKind::kBall:
      switch (kind) {
        case NormKind::kL2:
        case NormKind::kLinf:
          return 2.0 * radius_;
        case NormKind::kL1:
          return 2.0 * radius_ * std::sqrt(static_cast<double>(dim_));
      }
      break;
    case DomainKind::kSimplex:
      if (dim_ == 1) return 0.0;
      switch (kind) {
        case NormKind::kL2:
          return std::sqrt(2.0);
        case NormKind::kL1:
          return 2.0;
        case NormKind::kLinf:
          return 1.0;
      }
      break;
  }
  return 0.0;
}

double Domain::max_norm(NormKind kind) const {
  switch (kind_) {
    case DomainKind::kBox:
    case DomainKind::kHalfspaces:
      return norm(kind, lower_.cwiseAbs().cwiseMax(upper_.cwiseAbs()));
    case DomainKind::kBall: {
      const double spread = kind == NormKind::kL1 ? radius_ * std::sqrt(static_cast<double>(dim_)) : radius_;
      return norm(kind, center_) + spread;
    }
    case DomainKind::kSimplex:
      return 1.0;
  }
  return 0.0;
}

Vector Domain::centroid() const { return centroid_; }

bool Domain::contains(const Vector& x, double tol) const {
  if (x.size() != dim_ || !x.allFinite()) return false;
  switch (kind_) {
    case DomainKind::kBox:
      return (x.array() >= lower_.array() - tol).all() && (x.array() <= upper_.array() + tol).all();
    case DomainKind::kBall:
      return (x - center_).norm() <= radius_ + tol;
    case DomainKind::kSimplex:
      return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
    case DomainKind::kHalfspaces:
      return (x.array() >= lower_.array() - tol).all() && (x.array() <= upper_.array() + tol).all() &&
             ((normals_ * x - offsets_).array() <= tol).all();
  }
  return false;
}

double Domain::distance_to_boundary(const Vector& x) const {
  switch (kind_) {
    case DomainKind::kBox:
      return std::min((x - lower_).minCoeff(), (upper_ - x).minCoeff());
    case DomainKind::kBall:
      return radius_ - (x - center_).norm();
    case DomainKind::kSimplex:
      return x.minCoeff();
    case DomainKind::kHalfspaces: {
      double dist = std::min((x - lower_).minCoeff(), (upper_ - x).minCoeff());
      for (Eigen::Index k = 0; k < normals_.rows(); ++k) {
        dist = std::min(dist, (offsets_(k) - normals_.row(k).dot(x)) / normals_.row(k).norm());
      }
      return dist;
    }
  }
  return 0.0;
}

double bregman_div(const BregmanGeometry& geometry, const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw InvalidArgument("bregman_div: dimension mismatch");
  if (geometry.is_euclidean()) {
    return 0.5 * (x - y).squaredNorm();
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) < 0.0 || y(i) < 0.0) {
      throw InvalidArgument("entropic divergence needs nonnegative arguments");
    }
    if (x(i) == 0.0) {
      total += y(i);
    } else if (y(i) == 0.0) {
      return kInf;
    } else {
      total += x(i) * std::log(x(i) / y(i)) - x(i) + y(i);
    }
  }
  // rounding can leave a -1e-17 residue for x == y
  return std::max(total, 0.0);
}

Vector project_simplex(const Vector& y) {
  const Eigen::Index n = y.size();
  if ((y.array() >= 0.0).all() &&
      std::abs(y.sum() - 1.0) <= 4.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon()) {
    return y;
  }
  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = -1.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    running += sorted[static_cast<std::size_t>(k)];
    const double candidate = running / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) theta = candidate;
  }
  return (y.array() - theta).cwiseMax(0.0).matrix();
}

Vector project(const BregmanGeometry& geometry, const Domain& domain, const Vector& y) {
  if (y.size() != domain.dim()) throw InvalidArgument("project: dimension mismatch");
  require_finite(y, "projection input");
  if (geometry.is_euclidean()) return euclidean_project(domain, y);

  require_entropic_domain(domain);
  if (domain.kind() == DomainKind::kBox) return clip(y, domain.lower(), domain.upper());
  if ((y.array() < 0.0).any() || y.sum() <= 0.0) {
    throw InvalidArgument("entropic projection onto the simplex needs a nonnegative, nonzero point");
  }
  return y / y.sum();
}

Vector mirror_step(const BregmanGeometry& geometry, const Domain& domain, const Vector& z,
                   const Vector& ell, double eta) {
  if (z.size() != domain.dim() || ell.size() != domain.dim()) {
    throw InvalidArgument("mirror_step: dimension mismatch");
  }
  require_finite(ell, "mirror_step dual vector");
  require_finite(z, "mirror_step anchor");
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw InvalidArgument("mirror_step: step size must be positive and finite");
  }
  if (geometry.is_euclidean()) {
    return euclidean_project(domain, z - eta * ell);
  }

  require_entropic_domain(domain);
  if ((z.array() <= 0.0).any()) {
    throw InvalidArgument("entropic mirror step from an anchor with a zero entry");
  }
  const Vector logits = z.array().log().matrix() - eta * ell;
  if (domain.kind() == DomainKind::kBox) {
    Vector x(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double cap = domain.upper()(i);
      x(i) = logits(i) >= std::log(cap) ? cap : std::max(std::exp(logits(i)), domain.lower()(i));
    }
    return x;
  }
  const double shift = logits.maxCoeff();
  Vector w = (logits.array() - shift).exp().matrix();
  return w / w.sum();
}

ThreePointResult bregman_three_point_check(const BregmanGeometry& geometry, const Domain& domain,
                                           const Vector& z, const Vector& ell, double eta,
                                           const Vector& u) {
  if (!domain.contains(u, 1e-9)) throw InvalidArgument("three-point check: u outside the domain");
  const Vector x = mirror_step(geometry, domain, z, ell, eta);
  const double lhs = eta * ell.dot(x - u);
  const double rhs =
      bregman_div(geometry, u, z) - bregman_div(geometry, u, x) - bregman_div(geometry, x, z);
  ThreePointResult result;
  result.interior = domain.distance_to_boundary(x) > kInteriorTolerance;
  result.value = result.interior ? std::abs(lhs - rhs) : rhs - lhs;
  return result;
}

}  // namespace optcoco
