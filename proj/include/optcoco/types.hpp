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

#ifndef OPTCOCO_TYPES_HPP
#define OPTCOCO_TYPES_HPP

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace optcoco {

using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside an operation's domain (non-finite values, bad shapes,
/// points outside the feasible set, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A loss, constraint or prediction oracle produced NaN or infinity.
class NonFiniteOracle : public Error {
 public:
  using Error::Error;
};

/// The virtual queue exceeded the overflow guard of the exponential
/// potential, which means the multiplier was set too large for the run.
class QueueBlowUp : public Error {
 public:
  using Error::Error;
};

/// No point satisfies every per-round constraint.
class Infeasible : public Error {
 public:
  using Error::Error;
};

bool all_finite(const Vector& v);

// Throws InvalidArgument with `what` when v has a non-finite entry.
void require_finite(const Vector& v, const char* what);

struct Evaluation {
  double value = 0.0;
  Vector gradient;
};

/// Value and gradient of a (convex) function at a point. Predictions of
/// losses and constraints share this shape.
class FirstOrderOracle {
 public:
  using Function = std::function<Evaluation(const Vector&)>;

  FirstOrderOracle() = default;
  explicit FirstOrderOracle(Function fn) : fn_(std::move(fn)) {}

  /// The function that is identically zero on R^dim.
  static FirstOrderOracle zero(Eigen::Index dim);

  /// Evaluates and checks the result is finite (NonFiniteOracle otherwise).
  Evaluation operator()(const Vector& x) const;

  double value(const Vector& x) const { return (*this)(x).value; }
  Vector gradient(const Vector& x) const { return (*this)(x).gradient; }

  explicit operator bool() const { return static_cast<bool>(fn_); }

 private:
  Function fn_;
};

/// Neumaier-compensated running sum; the accounting identities of the
/// learners are checked at 1e-12 relative over 1e5 rounds.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace optcoco

#endif  // OPTCOCO_TYPES_HPP
