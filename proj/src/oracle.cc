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

#include "optcoco/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace optcoco {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Halfspace {
  Vector normal;  // normal . x <= offset
  double offset = 0.0;
};

double violation(const Halfspace& h, const Vector& x) { return h.normal.dot(x) - h.offset; }

double max_violation(const std::vector<Halfspace>& cons, const Vector& x, std::size_t* arg = nullptr) {
  double worst = -kInf;
  for (std::size_t k = 0; k < cons.size(); ++k) {
    const double v = violation(cons[k], x);
    if (v > worst) {
      worst = v;
      if (arg) *arg = k;
    }
  }
  return worst;
}

bool lexicographic_less(const Halfspace& a, const Halfspace& b) {
  if (a.offset != b.offset) return a.offset < b.offset;
  for (Eigen::Index i = 0; i < a.normal.size(); ++i) {
    if (a.normal(i) != b.normal(i)) return a.normal(i) < b.normal(i);
  }
  return false;
}

bool same(const Halfspace& a, const Halfspace& b) {
  return a.offset == b.offset && a.normal == b.normal;
}

// A box, ball or simplex with an exact Euclidean projection, plus the
// halfspaces to be satisfied on top of it.
struct Problem {
  Domain base = Domain::simplex(1);
  std::vector<Halfspace> cons;
  QuadraticForm total;  // sum of the losses
  QuadraticForm mean;   // total / T, the form the solver works with
  bool trivially_infeasible = false;
};

Problem build_problem(const std::vector<QuadraticForm>& losses,
                      const std::vector<QuadraticForm>& constraints, const Domain& domain) {
  const Eigen::Index d = domain.dim();
  Problem p;
  if (domain.kind() == DomainKind::kHalfspaces) {
    p.base = Domain::box(domain.lower(), domain.upper());
    for (Eigen::Index k = 0; k < domain.normals().rows(); ++k) {
      p.cons.push_back({domain.normals().row(k).transpose(), domain.offsets()(k)});
    }
  } else {
    p.base = domain;
  }

  std::vector<Halfspace> from_rounds;
  from_rounds.reserve(constraints.size());
  for (const auto& g : constraints) {
    if (g.curvature != 0.0) throw InvalidArgument("comparator constraints must be affine");
    if (g.linear.size() != d) throw InvalidArgument("constraint dimension mismatch");
    if (!g.linear.allFinite() || !std::isfinite(g.constant)) {
      throw InvalidArgument("constraint has a non-finite coefficient");
    }
    if (g.linear.isZero(0.0)) {
      if (g.constant > 0.0) p.trivially_infeasible = true;
      continue;
    }
    from_rounds.push_back({g.linear, -g.constant});
  }
  std::sort(from_rounds.begin(), from_rounds.end(), lexicographic_less);
  from_rounds.erase(std::unique(from_rounds.begin(), from_rounds.end(), same), from_rounds.end());
  p.cons.insert(p.cons.end(), from_rounds.begin(), from_rounds.end());

  p.total = QuadraticForm{0.0, Vector::Zero(d), 0.0};
  CompensatedSum curvature;
  CompensatedSum constant;
  for (const auto& f : losses) {
    if (f.linear.size() != d) throw InvalidArgument("loss dimension mismatch");
    curvature.add(f.curvature);
    constant.add(f.constant);
    p.total.linear += f.linear;
  }
  p.total.curvature = curvature.value();
  p.total.constant = constant.value();
  const double scale = losses.empty() ? 1.0 : 1.0 / static_cast<double>(losses.size());
  p.mean = QuadraticForm{p.total.curvature * scale, p.total.linear * scale, p.total.constant * scale};
  return p;
}

Vector euclid(const Domain& base, const Vector& y) {
  return project(BregmanGeometry::euclidean(), base, y);
}

// argmin over the base domain of <b, x>.
Vector linear_minimizer(const Domain& base, const Vector& b) {
  switch (base.kind()) {
    case DomainKind::kBox: {
      Vector x = base.center();
      for (Eigen::Index i = 0; i < b.size(); ++i) {
        if (b(i) > 0.0) x(i) = base.lower()(i);
        if (b(i) < 0.0) x(i) = base.upper()(i);
      }
      return x;
    }
    case DomainKind::kBall: {
      const double n = b.norm();
      if (n == 0.0) return base.center();
      return base.center() - base.radius() * b / n;
    }
    case DomainKind::kSimplex: {
      Eigen::Index best = 0;
      b.minCoeff(&best);
      Vector x = Vector::Zero(b.size());
      x(best) = 1.0;
      return x;
    }
    case DomainKind::kHalfspaces:
      break;
  }
  throw InvalidArgument("linear_minimizer: unsupported base domain");
}

Vector unconstrained_minimizer(const Domain& base, const QuadraticForm& q) {
  if (q.curvature > 0.0) return euclid(base, -q.linear / q.curvature);
  return linear_minimizer(base, q.linear);
}

// Accelerated projected gradient with gradient-based restart on
// q(x) + (rho/2) sum_k (a_k . x - b_k)_+^2.
Vector penalty_solve(const Domain& base, const QuadraticForm& q, const std::vector<Halfspace>& work,
                     double rho, const Vector& start) {
  double lip = q.curvature;
  for (const auto& h : work) lip += rho * h.normal.squaredNorm();
  if (!(lip > 0.0)) return start;
  const double step = 1.0 / lip;
  auto grad = [&](const Vector& x) {
    Vector g = q.gradient(x);
    for (const auto& h : work) {
      const double v = violation(h, x);
      if (v > 0.0) g += rho * v * h.normal;
    }
    return g;
  };
  Vector x = start;
  Vector y = start;
  double t = 1.0;
  for (int it = 0; it < 200000; ++it) {
    Vector next = euclid(base, y - step * grad(y));
    if ((y - next).dot(next - x) > 0.0) {
      // momentum points uphill: restart from the last iterate
      t = 1.0;
      y = x;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double change = (next - x).lpNorm<Eigen::Infinity>();
    y = next + ((t - 1.0) / t_next) * (next - x);
    x = std::move(next);
    t = t_next;
    if (change <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>())) break;
  }
  return x;
}

// Euclidean projection onto base cut by the working set (Dykstra).
Vector polish(const Domain& base, const std::vector<Halfspace>& work, const Vector& y) {
  const std::size_t m = work.size();
  std::vector<Vector> corr(m + 1, Vector::Zero(y.size()));
  Vector x = y;
  for (int sweep = 0; sweep < 200000; ++sweep) {
    const Vector start = x;
    {
      const Vector shifted = x + corr[0];
      Vector next = euclid(base, shifted);
      corr[0] = shifted - next;
      x = std::move(next);
    }
    for (std::size_t k = 0; k < m; ++k) {
      const Vector shifted = x + corr[k + 1];
      const double v = violation(work[k], shifted);
      Vector next = v > 0.0 ? Vector(shifted - v / work[k].normal.squaredNorm() * work[k].normal)
                            : shifted;
      corr[k + 1] = shifted - next;
      x = std::move(next);
    }
    if ((x - start).lpNorm<Eigen::Infinity>() <= 1e-16 * (1.0 + x.lpNorm<Eigen::Infinity>())) break;
  }
  return euclid(base, x);
}

ComparatorResult finish(const Problem& p, Vector u, ComparatorMethod method, double tolerance) {
  ComparatorResult r;
  r.method = method;
  r.tolerance = tolerance;
  r.distinct_constraints = p.cons.size();
  r.objective = p.total.value(u);
  r.max_violation = p.cons.empty() ? 0.0 : max_violation(p.cons, u);
  r.feasible = !p.trivially_infeasible && r.max_violation <= kFeasibilityTolerance;
  if (!r.feasible) {
    r.report = p.trivially_infeasible
                   ? "a constraint with zero normal and positive offset is never satisfied"
                   : "no feasible point found: max violation " + std::to_string(r.max_violation);
  }
  r.u = std::move(u);
  return r;
}

ComparatorResult solve_descent(const Problem& p) {
  Vector u = unconstrained_minimizer(p.base, p.mean);
  std::vector<Halfspace> work;
  std::vector<bool> in_work(p.cons.size(), false);
  for (std::size_t round = 0; round <= p.cons.size(); ++round) {
    std::size_t worst = 0;
    if (p.cons.empty() || max_violation(p.cons, u, &worst) <= 1e-12) break;
    if (in_work[worst]) {
      // already enforced: the working set itself is infeasible or the
      // polish stalled; another pass will not help
      break;
    }
    in_work[worst] = true;
    work.push_back(p.cons[worst]);
    Vector x = u;
    for (double rho = 1.0; rho <= 1e8 * 1.000001; rho *= 10.0) {
      x = penalty_solve(p.base, p.mean, work, rho, x);
    }
    u = polish(p.base, work, x);
  }
  return finish(p, std::move(u), ComparatorMethod::kDescent, 0.0);
}

ComparatorResult solve_grid(const Problem& p, const Domain& domain) {
  const Eigen::Index d = domain.dim();
  if (d > 3) throw InvalidArgument("grid comparator supports d <= 3");
  const double h = 1e-3 * domain.diameter(NormKind::kL2);
  const Domain& base = p.base;

  Vector lo(d);
  Vector hi(d);
  switch (base.kind()) {
    case DomainKind::kBox:
      lo = base.lower();
      hi = base.upper();
      break;
    case DomainKind::kBall:
      lo = base.center().array() - base.radius();
      hi = base.center().array() + base.radius();
      break;
    case DomainKind::kSimplex:
      lo = Vector::Zero(d);
      hi = Vector::Ones(d);
      break;
    case DomainKind::kHalfspaces:
      throw InvalidArgument("unexpected base domain");
  }
  std::vector<long> count(static_cast<std::size_t>(d));
  Vector spacing(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double w = hi(i) - lo(i);
    count[static_cast<std::size_t>(i)] = w > 0.0 ? static_cast<long>(std::ceil(w / h - 1e-9)) : 0;
    spacing(i) = count[static_cast<std::size_t>(i)] > 0 ? w / count[static_cast<std::size_t>(i)] : 0.0;
  }
  auto coord = [&](Eigen::Index i, long k) {
    return k == count[static_cast<std::size_t>(i)] ? hi(i) : lo(i) + k * spacing(i);
  };

  const QuadraticForm& q = p.mean;
  Vector best;
  double best_value = kInf;
  auto consider = [&](const Vector& x) {
    const double v = q.value(x);
    if (v < best_value) {
      best_value = v;
      best = x;
    }
  };

  const bool simplex = base.kind() == DomainKind::kSimplex;
  // Rows enumerate all coordinates but the last; the last coordinate is
  // either determined (simplex) or ranges over a feasible interval.
  const Eigen::Index free = d - 1;
  std::vector<long> idx(static_cast<std::size_t>(free), 0);
  Vector x(d);
  while (true) {
    for (Eigen::Index i = 0; i < free; ++i) x(i) = coord(i, idx[static_cast<std::size_t>(i)]);
    if (simplex) {
      const double rest = x.head(free).sum();
      x(d - 1) = 1.0 - rest;
      if (x(d - 1) >= 0.0 && (p.cons.empty() || max_violation(p.cons, x) <= 0.0)) consider(x);
    } else {
      double lo_last = lo(d - 1);
      double hi_last = hi(d - 1);
      if (base.kind() == DomainKind::kBall) {
        const double r2 = base.radius() * base.radius() -
                          (x.head(free) - base.center().head(free)).squaredNorm();
        if (r2 < 0.0) {
          lo_last = 1.0;
          hi_last = 0.0;
        } else {
          lo_last = std::max(lo_last, base.center()(d - 1) - std::sqrt(r2));
          hi_last = std::min(hi_last, base.center()(d - 1) + std::sqrt(r2));
        }
      }
      for (const auto& c : p.cons) {
        if (lo_last > hi_last) break;
        const double a = c.normal(d - 1);
        const double rhs = c.offset - c.normal.head(free).dot(x.head(free));
        if (a > 0.0) {
          hi_last = std::min(hi_last, rhs / a);
        } else if (a < 0.0) {
          lo_last = std::max(lo_last, rhs / a);
        } else if (rhs < 0.0) {
          lo_last = 1.0;
          hi_last = 0.0;
        }
      }
      const long n = count[static_cast<std::size_t>(d - 1)];
      const double s = spacing(d - 1);
      if (lo_last <= hi_last) {
        long k_lo = 0;
        long k_hi = n;
        if (s > 0.0) {
          k_lo = std::max(0L, static_cast<long>(std::ceil((lo_last - lo(d - 1)) / s)));
          k_hi = std::min(n, static_cast<long>(std::floor((hi_last - lo(d - 1)) / s)));
        }
        // q restricted to the row is a convex parabola in the last
        // coordinate: check the grid points around its minimizer and the
        // interval ends.
        std::vector<long> candidates = {k_lo, k_hi};
        if (q.curvature > 0.0 && s > 0.0) {
          const double target = -q.linear(d - 1) / q.curvature;
          const long k = static_cast<long>(std::llround((target - lo(d - 1)) / s));
          for (long j = k - 1; j <= k + 1; ++j) candidates.push_back(std::clamp(j, k_lo, std::max(k_lo, k_hi)));
        }
        for (long k : candidates) {
          if (k < k_lo || k > k_hi) continue;
          x(d - 1) = coord(d - 1, k);
          if (x(d - 1) < lo_last || x(d - 1) > hi_last) continue;
          consider(x);
        }
      }
    }
    // advance the row odometer
    Eigen::Index i = 0;
    for (; i < free; ++i) {
      auto& k = idx[static_cast<std::size_t>(i)];
      if (k < count[static_cast<std::size_t>(i)]) {
        ++k;
        break;
      }
      k = 0;
    }
    if (i == free) break;
  }

  const double lip = p.total.curvature * domain.max_norm(NormKind::kL2) + p.total.linear.norm();
  const double tolerance = lip * h * std::sqrt(static_cast<double>(d));
  if (best.size() == 0) {
    ComparatorResult r;
    r.method = ComparatorMethod::kGrid;
    r.tolerance = tolerance;
    r.distinct_constraints = p.cons.size();
    r.u = domain.centroid();
    r.objective = p.total.value(r.u);
    r.max_violation = p.cons.empty() ? 0.0 : max_violation(p.cons, r.u);
    r.feasible = false;
    r.report = "no feasible grid point";
    return r;
  }
  return finish(p, std::move(best), ComparatorMethod::kGrid, tolerance);
}

}  // namespace

std::string_view to_string(ComparatorMethod method) {
  return method == ComparatorMethod::kGrid ? "grid" : "descent";
}

ComparatorResult solve_comparator(const std::vector<QuadraticForm>& losses,
                                  const std::vector<QuadraticForm>& constraints,
                                  const Domain& domain, ComparatorMethod method) {
  Problem p = build_problem(losses, constraints, domain);
  if (method == ComparatorMethod::kGrid) return solve_grid(p, domain);
  return solve_descent(p);
}

}  // namespace optcoco
