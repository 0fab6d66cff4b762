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

#ifndef OPTCOCO_ENVIRONMENTS_HPP
#define OPTCOCO_ENVIRONMENTS_HPP

#include <cstdint>
#include <random>
#include <string_view>

#include "optcoco/geometry.hpp"
#include "optcoco/types.hpp"

namespace optcoco {

/// h(x) = (c/2) ||x||_2^2 + <linear, x> + constant. Every generated loss and
/// constraint has this form, which lets the comparator solver aggregate a
/// whole history into a single form.
struct QuadraticForm {
  double curvature = 0.0;
  Vector linear;
  double constant = 0.0;

  /// 0.5 ||x - center||^2.
  static QuadraticForm centered(const Vector& center);
  /// <slope, x> + offset.
  static QuadraticForm affine(const Vector& slope, double offset);

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Evaluation evaluate(const Vector& x) const;
  FirstOrderOracle oracle() const;

  QuadraticForm& operator+=(const QuadraticForm& other);
  bool operator==(const QuadraticForm& other) const;
};

/// Named seedable generator: a 64-bit Mersenne twister whose seed is the
/// splitmix64 mix of (seed, stream, counter). Every draw in the library
/// goes through it so a run is a pure function of its seed.
class RoundRng {
 public:
  RoundRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

  double uniform(double lo, double hi);
  double normal();
  Vector normal_vector(Eigen::Index dim);
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

enum class LossFamily { kLinear, kQuadratic, kSignFlip };
enum class ConstraintFamily { kNone, kFixed, kDrifting, kSwitching };

std::string_view to_string(LossFamily family);
std::string_view to_string(ConstraintFamily family);

struct EnvironmentSpec {
  LossFamily loss = LossFamily::kQuadratic;
  ConstraintFamily constraint = ConstraintFamily::kNone;
  double drift = 0.01;  // per-round parameter change
  std::uint64_t seed = 0;
};

/// Bounds every generated function satisfies on the domain. Lipschitz
/// constants are gradient Lipschitz constants; for affine functions, whose
/// true constant is zero, a positive surrogate of 1 is declared.
struct DeclaredBounds {
  double loss_bound = 1.0;                 // F >= |f_t|
  double constraint_bound = 1.0;           // G >= |g_t|
  double loss_lipschitz = 1.0;             // L_f
  double constraint_lipschitz = 1.0;       // L_g
  double loss_curvature = 0.0;             // exact gradient Lipschitz constant of f_t
  double constraint_curvature = 0.0;       // of g_t
  double loss_gradient_bound = 1.0;        // >= ||grad f_t||_* on the domain
  double constraint_gradient_bound = 1.0;  // >= ||grad g_t||_*
  double loss_gradient_sup = 1.0;          // >= ||grad f_t||_inf on the domain
  double constraint_gradient_sup = 1.0;    // >= ||grad g_t||_inf
};

struct RoundFunctions {
  QuadraticForm loss;
  QuadraticForm constraint;
};

/// Synthetic adversary over a fixed domain.
///
/// Quadratic losses 0.5 ||x - theta_t||^2 with theta_t oscillating inside
/// the domain at speed `drift` in L2; linear losses <c_t, x> with c_t a
/// unit dual-norm vector perturbed by `drift` each round; sign-flip losses
/// <(-1)^t c_0, x>. Constraints are a_t . (x - x_feas) <= 0 with unit
/// dual-norm normals and x_feas the domain centroid, so x_feas is feasible
/// in every round. `kNone` emits g_t = -1.
class Environment {
 public:
  Environment(EnvironmentSpec spec, Domain domain, NormPair norms);

  /// Deterministic in (seed, t); t >= 1.
  RoundFunctions generate_round(long t) const;

  const EnvironmentSpec& spec() const { return spec_; }
  const Domain& domain() const { return domain_; }
  const DeclaredBounds& bounds() const { return bounds_; }
  const Vector& feasible_point() const { return feasible_; }
  NormPair norms() const { return norms_; }

 private:
  Vector normalize_dual(const Vector& v) const;
  Vector theta(long t) const;

  EnvironmentSpec spec_;
  Domain domain_;
  NormPair norms_;
  DeclaredBounds bounds_;
  Vector feasible_;
  Vector center_;
  Vector half_width_;
  Vector bias_;
  Vector phase_;
  double omega_ = 0.0;
  Vector base_direction_;   // c_0 for linear losses
  Vector base_normal_;      // a_0
  Vector normal_phase_;
  Eigen::MatrixXd switching_normals_;  // one normal per column
};

enum class PredictorKind { kZero, kPrevious, kPerfect, kNoisyPerfect };

std::string_view to_string(PredictorKind kind);

struct PredictorSpec {
  PredictorKind kind = PredictorKind::kZero;
  double sigma = 0.0;

  void validate() const;
};

enum class PredictionTarget : std::uint64_t { kLoss = 1, kConstraint = 2 };

/// Prediction of round `next_round`'s function, formed after round
/// next_round - 1 was revealed.
///
/// previous: the function of round next_round - 1 (zero when
/// next_round = 1); perfect: the true function of next_round; noisy:
/// the true function with sigma N(0, I) added to its gradient, the noise
/// drawn once per round so the prediction stays a fixed affine map.
FirstOrderOracle make_predictor(const PredictorSpec& spec, const Environment& env,
                                PredictionTarget target, long next_round);

/// Smoothness constant of the predictions a predictor produces.
double predictor_smoothness(const PredictorSpec& spec, const Environment& env,
                            PredictionTarget target);

}  // namespace optcoco

#endif  // OPTCOCO_ENVIRONMENTS_HPP
