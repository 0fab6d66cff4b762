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

#include "optcoco/environments.hpp"

#include <cmath>
#include <string>

namespace optcoco {

namespace {

// RNG streams. Predictor noise uses the PredictionTarget values 1 and 2.
constexpr std::uint64_t kSetupStream = 0;
constexpr std::uint64_t kLossStream = 16;
constexpr std::uint64_t kSwitchStream = 17;

constexpr int kSwitchingNormals = 3;

}  // namespace

QuadraticForm QuadraticForm::centered(const Vector& center) {
  return {1.0, -center, 0.5 * center.squaredNorm()};
}

QuadraticForm QuadraticForm::affine(const Vector& slope, double offset) {
  return {0.0, slope, offset};
}

double QuadraticForm::value(const Vector& x) const {
  return 0.5 * curvature * x.squaredNorm() + linear.dot(x) + constant;
}

Vector QuadraticForm::gradient(const Vector& x) const { return curvature * x + linear; }

Evaluation QuadraticForm::evaluate(const Vector& x) const {
  if (x.size() != linear.size()) throw InvalidArgument("quadratic form: dimension mismatch");
  return {value(x), gradient(x)};
}

FirstOrderOracle QuadraticForm::oracle() const {
  return FirstOrderOracle([form = *this](const Vector& x) { return form.evaluate(x); });
}

QuadraticForm& QuadraticForm::operator+=(const QuadraticForm& other) {
  if (linear.size() == 0) linear = Vector::Zero(other.linear.size());
  curvature += other.curvature;
  linear += other.linear;
  constant += other.constant;
  return *this;
}

bool QuadraticForm::operator==(const QuadraticForm& other) const {
  return curvature == other.curvature && constant == other.constant &&
         linear.size() == other.linear.size() && linear == other.linear;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RoundRng::RoundRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
    : engine_(splitmix64(seed ^ splitmix64(stream ^ splitmix64(counter)))) {}

double RoundRng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double RoundRng::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

Vector RoundRng::normal_vector(Eigen::Index dim) {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal();
  return v;
}

std::string_view to_string(LossFamily family) {
  switch (family) {
    case LossFamily::kLinear: return "linear";
    case LossFamily::kQuadratic: return "quadratic";
    case LossFamily::kSignFlip: return "sign-flip";
  }
  return "?";
}

std::string_view to_string(ConstraintFamily family) {
  switch (family) {
    case ConstraintFamily::kNone: return "none";
    case ConstraintFamily::kFixed: return "fixed";
    case ConstraintFamily::kDrifting: return "drifting";
    case ConstraintFamily::kSwitching: return "switching";
  }
  return "?";
}

std::string_view to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kZero: return "zero";
    case PredictorKind::kPrevious: return "previous";
    case PredictorKind::kPerfect: return "perfect";
    case PredictorKind::kNoisyPerfect: return "noisy";
  }
  return "?";
}

Environment::Environment(EnvironmentSpec spec, Domain domain, NormPair norms)
    : spec_(spec), domain_(std::move(domain)), norms_(norms) {
  if (!(spec_.drift >= 0.0) || !std::isfinite(spec_.drift)) {
    throw InvalidArgument("drift must be finite and nonnegative");
  }
  const Eigen::Index d = domain_.dim();
  RoundRng rng(spec_.seed, kSetupStream, 0);

  feasible_ = domain_.centroid();
  Vector lo = domain_.lower();
  Vector hi = domain_.upper();
  if (domain_.kind() == DomainKind::kBall) {
    lo = domain_.center().array() - domain_.radius();
    hi = domain_.center().array() + domain_.radius();
  } else if (domain_.kind() == DomainKind::kSimplex) {
    lo = Vector::Zero(d);
    hi = Vector::Ones(d);
  }
  center_ = domain_.centroid();
  half_width_ = 0.5 * (hi - lo);
  bias_.resize(d);
  phase_.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    bias_(i) = rng.uniform(-1.0, 1.0);
    phase_(i) = rng.uniform(0.0, 2.0 * M_PI);
  }
  // |d theta_i / dt| <= 0.5 omega w_i, so ||theta_{t+1} - theta_t||_2 <= drift.
  omega_ = 2.0 * spec_.drift / half_width_.norm();

  base_direction_ = normalize_dual(rng.normal_vector(d));

  const bool on_simplex = domain_.kind() == DomainKind::kSimplex;
  auto tangent = [&](Vector v) {
    if (on_simplex) v.array() -= v.mean();
    return v;
  };
  Vector a0;
  if (spec_.loss == LossFamily::kQuadratic) {
    a0 = tangent(half_width_.cwiseProduct(bias_));
  } else {
    a0 = tangent(-base_direction_);
  }
  if (a0.norm() < 1e-12) {
    a0 = Vector::Zero(d);
    a0(0) = 1.0;
    if (on_simplex) a0(1) = -1.0;
  }
  base_normal_ = normalize_dual(a0);
  normal_phase_.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) normal_phase_(i) = rng.uniform(0.0, 2.0 * M_PI);
  switching_normals_.resize(d, kSwitchingNormals);
  const double scale = 0.5 * base_normal_.norm();
  for (int k = 0; k < kSwitchingNormals; ++k) {
    Vector v = rng.normal_vector(d);
    v /= v.norm();
    switching_normals_.col(k) = normalize_dual(tangent(base_normal_ + scale * v));
  }

  const double d2 = domain_.diameter(NormKind::kL2);
  const double d_primal = domain_.diameter(norms_.primal());
  const double d_dual = domain_.diameter(norms_.dual());
  const double d_inf = domain_.diameter(NormKind::kLinf);
  if (spec_.loss == LossFamily::kQuadratic) {
    bounds_.loss_bound = 0.5 * d2 * d2;
    bounds_.loss_curvature = 1.0;
    bounds_.loss_gradient_bound = d_dual;
    bounds_.loss_gradient_sup = d_inf;
  } else {
    bounds_.loss_bound = domain_.max_norm(norms_.primal());
    bounds_.loss_curvature = 0.0;
    bounds_.loss_gradient_bound = 1.0;
    bounds_.loss_gradient_sup = 1.0;
  }
  bounds_.loss_lipschitz = 1.0;
  bounds_.constraint_lipschitz = 1.0;
  bounds_.constraint_curvature = 0.0;
  bounds_.constraint_bound = spec_.constraint == ConstraintFamily::kNone ? 1.0 : d_primal;
  bounds_.constraint_gradient_bound = 1.0;
  bounds_.constraint_gradient_sup = 1.0;
}

Vector Environment::normalize_dual(const Vector& v) const {
  const double n = norms_.dual_norm(v);
  if (!(n > 0.0)) throw InvalidArgument("cannot normalize a zero vector");
  return v / n;
}

Vector Environment::theta(long t) const {
  const double tt = static_cast<double>(t);
  Vector wave(center_.size());
  for (Eigen::Index i = 0; i < wave.size(); ++i) {
    wave(i) = 0.5 * bias_(i) + 0.5 * std::sin(omega_ * tt + phase_(i));
  }
  return project(BregmanGeometry::euclidean(), domain_, center_ + half_width_.cwiseProduct(wave));
}

RoundFunctions Environment::generate_round(long t) const {
  if (t < 1) throw InvalidArgument("rounds are numbered from 1");
  const Eigen::Index d = domain_.dim();
  RoundFunctions out;
  switch (spec_.loss) {
    case LossFamily::kQuadratic:
      out.loss = QuadraticForm::centered(theta(t));
      break;
    case LossFamily::kLinear: {
      RoundRng rng(spec_.seed, kLossStream, static_cast<std::uint64_t>(t));
      const Vector noise = rng.normal_vector(d) / std::sqrt(static_cast<double>(d));
      out.loss = QuadraticForm::affine(normalize_dual(base_direction_ + spec_.drift * noise), 0.0);
      break;
    }
    case LossFamily::kSignFlip:
      out.loss = QuadraticForm::affine((t % 2 == 0 ? 1.0 : -1.0) * base_direction_, 0.0);
      break;
  }

  Vector normal;
  switch (spec_.constraint) {
    case ConstraintFamily::kNone:
      out.constraint = QuadraticForm::affine(Vector::Zero(d), -1.0);
      return out;
    case ConstraintFamily::kFixed:
      normal = base_normal_;
      break;
    case ConstraintFamily::kDrifting: {
      const double tt = static_cast<double>(t);
      Vector wave(d);
      for (Eigen::Index i = 0; i < d; ++i) wave(i) = std::sin(2.0 * spec_.drift * tt + normal_phase_(i));
      wave *= 0.5 * base_normal_.norm() / std::sqrt(static_cast<double>(d));
      if (domain_.kind() == DomainKind::kSimplex) wave.array() -= wave.mean();
      normal = normalize_dual(base_normal_ + wave);
      break;
    }
    case ConstraintFamily::kSwitching: {
      RoundRng rng(spec_.seed, kSwitchStream, static_cast<std::uint64_t>(t));
      normal = switching_normals_.col(static_cast<Eigen::Index>(rng.next_u64() % kSwitchingNormals));
      break;
    }
  }
  out.constraint = QuadraticForm::affine(normal, -normal.dot(feasible_));
  return out;
}

void PredictorSpec::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("noise scale must be >= 0");
}

FirstOrderOracle make_predictor(const PredictorSpec& spec, const Environment& env,
                                PredictionTarget target, long next_round) {
  spec.validate();
  if (next_round < 1) throw InvalidArgument("rounds are numbered from 1");
  const Eigen::Index d = env.domain().dim();
  auto pick = [target](const RoundFunctions& r) {
    return target == PredictionTarget::kLoss ? r.loss : r.constraint;
  };
  switch (spec.kind) {
    case PredictorKind::kZero:
      return FirstOrderOracle::zero(d);
    case PredictorKind::kPrevious:
      if (next_round == 1) return FirstOrderOracle::zero(d);
      return pick(env.generate_round(next_round - 1)).oracle();
    case PredictorKind::kPerfect:
      return pick(env.generate_round(next_round)).oracle();
    case PredictorKind::kNoisyPerfect: {
      QuadraticForm form = pick(env.generate_round(next_round));
      RoundRng rng(env.spec().seed, static_cast<std::uint64_t>(target),
                   static_cast<std::uint64_t>(next_round));
      const Vector noise = spec.sigma * rng.normal_vector(d);
      return FirstOrderOracle([form, noise](const Vector& x) {
        Evaluation e = form.evaluate(x);
        e.gradient += noise;
        return e;
      });
    }
  }
  throw InvalidArgument("unknown predictor kind");
}

double predictor_smoothness(const PredictorSpec& spec, const Environment& env,
                            PredictionTarget target) {
  if (spec.kind == PredictorKind::kZero) return 0.0;
  return target == PredictionTarget::kLoss ? env.bounds().loss_curvature
                                           : env.bounds().constraint_curvature;
}

}  // namespace optcoco
