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

#include "optcoco/omd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace optcoco {

namespace {

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

void ProblemBounds::validate(bool adaptive, double beta) const {
  const auto check = [](double v, const char* name) {
    if (!positive(v)) throw InvalidArgument(std::string("problem bound ") + name + " must be positive");
  };
  check(diameter, "D");
  check(loss_bound, "F");
  check(constraint_bound, "G");
  check(loss_lipschitz, "L_f");
  check(constraint_lipschitz, "L_g");
  check(bregman_radius, "B");
  if (!(loss_smoothness >= 0.0) || !(constraint_smoothness >= 0.0)) {
    throw InvalidArgument("prediction smoothness must be nonnegative");
  }
  if (adaptive) {
    const double cap = std::sqrt(beta);
    if (loss_smoothness > cap * loss_lipschitz || constraint_smoothness > cap * constraint_lipschitz) {
      throw InvalidArgument("adaptive rate needs alpha <= sqrt(beta) L for the predictions");
    }
  }
}

double euclidean_bregman_radius(const Domain& domain) {
  const double d = domain.diameter(NormKind::kL2);
  return 0.5 * d * d;
}

void ErrorTracker::record(double error) {
  if (!(error >= 0.0) || !std::isfinite(error)) {
    throw InvalidArgument("prediction error must be finite and nonnegative");
  }
  previous_ = total_.value();
  total_.add(error);
  last_ = error;
  ++rounds_;
}

double adaptive_eta(double error_lag1, double error_lag2, double beta, double bregman_radius,
                    double lipschitz) {
  if (!positive(beta) || !positive(bregman_radius) || !positive(lipschitz)) {
    throw InvalidArgument("adaptive_eta: beta, B and L must be positive");
  }
  const double cap = std::sqrt(beta) / lipschitz;
  const double denom = std::sqrt(std::max(error_lag1, 0.0)) + std::sqrt(std::max(error_lag2, 0.0));
  if (denom == 0.0) return cap;
  return std::min(std::sqrt(beta * bregman_radius) / denom, cap);
}

double adaptive_eta(const ErrorTracker& tracker, double beta, double bregman_radius,
                    double lipschitz) {
  return adaptive_eta(tracker.total(), tracker.previous(), beta, bregman_radius, lipschitz);
}

double regret_bound_thm1(double bregman_radius, double eta, double total_error, double beta) {
  return 2.0 * bregman_radius / eta + eta / beta * total_error;
}

double regret_bound_thm2(double bregman_radius, double beta, double total_error, double lipschitz) {
  return 5.0 * std::sqrt(bregman_radius / beta) *
         (std::sqrt(total_error) + std::sqrt(bregman_radius) * lipschitz);
}

OptimisticOmd::OptimisticOmd(BregmanGeometry geometry, Domain domain, ProblemBounds bounds,
                             RateSchedule rate, std::optional<Vector> start, bool instrument)
    : geometry_(geometry),
      domain_(std::move(domain)),
      bounds_(bounds),
      rate_(rate),
      instrument_(instrument) {
  bounds_.validate(is_adaptive(rate_), geometry_.beta);
  anchor_ = start ? *start : domain_.centroid();
  if (!domain_.contains(anchor_, 1e-9)) {
    throw InvalidArgument("starting point is outside the domain");
  }
  played_ = anchor_;
  lipschitz_ = bounds_.loss_lipschitz;
  if (const auto* c = std::get_if<ConstantRate>(&rate_)) {
    if (!positive(c->eta)) throw InvalidArgument("constant step size must be positive");
    eta_ = c->eta;
  } else {
    eta_ = adaptive_eta(0.0, 0.0, geometry_.beta, bounds_.bregman_radius, lipschitz_);
  }
  prediction_ = FirstOrderOracle::zero(domain_.dim());
  predicted_at_anchor_ = Vector::Zero(domain_.dim());
}

void OptimisticOmd::set_initial_prediction(FirstOrderOracle prediction) {
  if (t_ != 1) throw InvalidArgument("initial prediction set after the first round");
  predicted_at_anchor_ = prediction(anchor_).gradient;
  played_ = mirror_step(geometry_, domain_, anchor_, predicted_at_anchor_, eta_);
  prediction_ = std::move(prediction);
}

double OptimisticOmd::next_step_size() const {
  if (const auto* c = std::get_if<ConstantRate>(&rate_)) return c->eta;
  return adaptive_eta(tracker_, geometry_.beta, bounds_.bregman_radius, lipschitz_);
}

OmdRecord OptimisticOmd::round(const FirstOrderOracle& loss, FirstOrderOracle next_prediction,
                               std::optional<double> next_lipschitz) {
  const Evaluation observed = loss(played_);
  const Vector predicted_here = prediction_(played_).gradient;
  const double error = std::pow(geometry_.norms.dual_norm(observed.gradient - predicted_here), 2);
  tracker_.record(error);
  if (next_lipschitz) {
    if (!positive(*next_lipschitz)) throw InvalidArgument("Lipschitz bound must be positive");
    lipschitz_ = std::max(lipschitz_, *next_lipschitz);
  }
  const double next_eta = next_step_size();

  Vector next_anchor = mirror_step(geometry_, domain_, anchor_, observed.gradient, eta_);
  Vector next_direction = next_prediction(next_anchor).gradient;
  Vector next_played = mirror_step(geometry_, domain_, next_anchor, next_direction, next_eta);

  OmdRecord rec;
  rec.t = t_;
  rec.played = played_;
  rec.loss = observed.value;
  rec.error = error;
  rec.cumulative_error = tracker_.total();
  rec.eta = eta_;
  rec.next_eta = next_eta;
  rec.lipschitz = lipschitz_;
  const double gap = geometry_.norms.primal_norm(played_ - anchor_);
  const double spread = geometry_.norms.dual_norm(predicted_here - predicted_at_anchor_);
  if (gap > 0.0) {
    rec.prediction_smoothness = spread / gap;
  } else if (spread > 0.0) {
    rec.prediction_smoothness = std::numeric_limits<double>::infinity();
  }
  if (instrument_) {
    rec.anchor = anchor_;
    rec.next_anchor = next_anchor;
    rec.gradient = observed.gradient;
    rec.predicted_at_anchor = predicted_at_anchor_;
    rec.predicted_at_played = predicted_here;
  }

  anchor_ = std::move(next_anchor);
  played_ = std::move(next_played);
  predicted_at_anchor_ = std::move(next_direction);
  prediction_ = std::move(next_prediction);
  eta_ = next_eta;
  ++t_;
  return rec;
}

StepCheck step_inequality_check(const BregmanGeometry& geometry, const OmdRecord& record,
                                const Vector& u) {
  if (record.gradient.size() == 0) {
    throw InvalidArgument("step_inequality_check needs an instrumented record");
  }
  const Vector& x = record.played;
  const double lhs = record.gradient.dot(x - u);
  const double rhs =
      (bregman_div(geometry, u, record.anchor) - bregman_div(geometry, u, record.next_anchor)) / record.eta +
      bregman_div(geometry, x, record.next_anchor) * (1.0 / record.next_eta - 1.0 / record.eta) +
      record.next_eta / geometry.beta * record.error;

  StepCheck out;
  out.slack = rhs - lhs;
  out.local_smoothness = record.prediction_smoothness;
  out.precondition_met = out.local_smoothness <= geometry.beta / std::sqrt(2.0 * record.eta * record.next_eta);
  out.nominal_precondition_met = out.local_smoothness <= geometry.beta / record.eta;
  return out;
}

std::vector<StepCheck> step_inequality_checks(const BregmanGeometry& geometry,
                                              const std::vector<OmdRecord>& history,
                                              const Vector& u) {
  std::vector<StepCheck> out;
  out.reserve(history.size());
  for (const auto& rec : history) out.push_back(step_inequality_check(geometry, rec, u));
  return out;
}

}  // namespace optcoco
