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

#include "optcoco/coco.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace optcoco {

namespace {

void check_queue(double queue) {
  if (!(queue <= ExponentialPotential::kQueueGuard)) {
    throw QueueBlowUp("queue blow-up: Q = " + std::to_string(queue) +
                      " exceeds the guard; lambda is miscalibrated");
  }
}

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

double squared(double v) { return v * v; }

Vector clipped_gradient(const Evaluation& e) {
  return e.value > 0.0 ? e.gradient : Vector::Zero(e.gradient.size());
}

FirstOrderOracle constant_oracle(Evaluation e) {
  return FirstOrderOracle([e = std::move(e)](const Vector&) { return e; });
}

}  // namespace

double ExponentialPotential::value(double queue) {
  check_queue(queue);
  return std::expm1(queue);
}

double ExponentialPotential::derivative(double queue) {
  check_queue(queue);
  return std::exp(queue);
}

QueueState::QueueState(double lambda, double weight) : lambda_(lambda), weight_(weight) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be >= 0");
  if (!(weight > 0.0) || !std::isfinite(weight)) throw InvalidArgument("V must be positive");
}

QueueState queue_update(const QueueState& queue, double constraint_value) {
  if (!std::isfinite(constraint_value)) throw NonFiniteOracle("constraint value is not finite");
  QueueState next = queue;
  const double violation = positive_part(constraint_value);
  next.violation_.add(violation);
  next.queue_.add(queue.lambda_ * violation);
  ++next.rounds_;
  return next;
}

Vector surrogate_gradient(const Vector& loss_gradient, double constraint_value,
                          const Vector& constraint_gradient, double weight, double lambda,
                          double queue) {
  if (loss_gradient.size() != constraint_gradient.size()) {
    throw InvalidArgument("surrogate_gradient: dimension mismatch");
  }
  Vector out = weight * loss_gradient;
  if (constraint_value > 0.0 && lambda != 0.0) {
    out += lambda * ExponentialPotential::derivative(queue) * constraint_gradient;
  } else {
    check_queue(queue);
  }
  return out;
}

Vector predicted_surrogate_gradient(const Vector& predicted_loss_gradient,
                                    double predicted_constraint_value,
                                    const Vector& predicted_constraint_gradient, double weight,
                                    double lambda, double queue) {
  return surrogate_gradient(predicted_loss_gradient, predicted_constraint_value,
                            predicted_constraint_gradient, weight, lambda, queue);
}

double calibrate_lambda(double constant, double constraint_error, double constraint_psi,
                        double constraint_bound) {
  if (!(constant > 0.0) || !(constraint_bound > 0.0)) {
    throw InvalidArgument("calibrate_lambda: C and G must be positive");
  }
  if (!(constraint_error >= 0.0) || !(constraint_psi >= 0.0)) {
    throw InvalidArgument("calibrate_lambda: E_g and psi_g must be nonnegative");
  }
  return 1.0 / (2.0 * constant * (std::sqrt(2.0 * constraint_error) + constraint_psi) +
                2.0 * constraint_bound);
}

double regret_bound_thm6(double constant, double loss_error, double loss_psi, double weight) {
  return constant * (std::sqrt(2.0 * loss_error) + loss_psi) + 1.0 / weight;
}

double ccv_bound_thm6(double constant, double loss_error, double loss_psi, double constraint_error,
                      double constraint_psi, double constraint_bound, double loss_bound,
                      double weight, long horizon) {
  const double inner = constant * (std::sqrt(2.0 * loss_error) + loss_psi) +
                       2.0 * loss_bound * weight * static_cast<double>(horizon) + 2.0;
  return 2.0 * (constant * (std::sqrt(2.0 * constraint_error) + constraint_psi) + constraint_bound) *
         std::log(2.0 * inner);
}

RegretContract RegretContract::for_adaptive_omd(double bregman_radius, double beta) {
  if (!(bregman_radius > 0.0) || !(beta > 0.0)) throw InvalidArgument("B and beta must be positive");
  RegretContract c;
  c.inner = InnerKind::kOptimisticOmd;
  c.constant = 5.0 * std::sqrt(bregman_radius / beta);
  c.bregman_radius = bregman_radius;
  return c;
}

RegretContract RegretContract::for_hedge(Eigen::Index experts, long horizon) {
  const ExpertConfig cfg = ExpertConfig::for_horizon(experts, horizon);
  RegretContract c;
  c.inner = InnerKind::kOptimisticHedge;
  c.constant = 2.0 * std::sqrt(cfg.log_term());
  return c;
}

double RegretContract::psi(double declared) const {
  if (!(declared >= 0.0)) throw InvalidArgument("declared constant must be nonnegative");
  return inner == InnerKind::kOptimisticOmd ? std::sqrt(bregman_radius) * declared : declared;
}

ConstrainedLearner::ConstrainedLearner(OptimisticOmd inner, double lambda, double loss_constant,
                                       double constraint_constant, bool keep_inner_records)
    : inner_(std::move(inner)),
      queue_(lambda),
      loss_constant_(loss_constant),
      constraint_constant_(constraint_constant),
      keep_inner_records_(keep_inner_records) {
  const auto& omd = std::get<OptimisticOmd>(inner_);
  if (omd.round_index() != 1) throw InvalidArgument("inner learner has already played");
  const double needed = queue_.weight() * loss_constant_ + lambda * constraint_constant_;
  if (omd.lipschitz() < needed * (1.0 - 1e-12)) {
    throw InvalidArgument("inner learner's Lipschitz bound is below V L_f + lambda L_g");
  }
  loss_prediction_ = FirstOrderOracle::zero(omd.domain().dim());
  constraint_prediction_ = FirstOrderOracle::zero(omd.domain().dim());
}

ConstrainedLearner::ConstrainedLearner(OptimisticHedge inner, double lambda, double loss_constant,
                                       double constraint_constant, bool keep_inner_records)
    : inner_(std::move(inner)),
      queue_(lambda),
      loss_constant_(loss_constant),
      constraint_constant_(constraint_constant),
      keep_inner_records_(keep_inner_records) {
  const auto& hedge = std::get<OptimisticHedge>(inner_);
  if (hedge.round_index() != 1) throw InvalidArgument("inner learner has already played");
  const double needed = queue_.weight() * loss_constant_ + lambda * constraint_constant_;
  if (hedge.scale() < needed * (1.0 - 1e-12)) {
    throw InvalidArgument("inner learner's loss scale is below V s_f + lambda s_g");
  }
  loss_prediction_ = FirstOrderOracle::zero(hedge.config().experts);
  constraint_prediction_ = FirstOrderOracle::zero(hedge.config().experts);
}

const Vector& ConstrainedLearner::action() const {
  return std::visit([](const auto& inner) -> const Vector& { return inner.action(); }, inner_);
}

InnerKind ConstrainedLearner::inner_kind() const {
  return std::holds_alternative<OptimisticOmd>(inner_) ? InnerKind::kOptimisticOmd
                                                       : InnerKind::kOptimisticHedge;
}

const ErrorTracker& ConstrainedLearner::surrogate_tracker() const {
  return std::visit([](const auto& inner) -> const ErrorTracker& { return inner.tracker(); },
                    inner_);
}

NormPair ConstrainedLearner::norms() const {
  if (const auto* omd = std::get_if<OptimisticOmd>(&inner_)) return omd->geometry().norms;
  return NormPair::l1();
}

void ConstrainedLearner::set_initial_prediction(const FirstOrderOracle& loss_prediction,
                                                const FirstOrderOracle& constraint_prediction) {
  const double v = weight();
  const double lambda = queue_.lambda();
  const double q = queue_.queue();
  if (auto* omd = std::get_if<OptimisticOmd>(&inner_)) {
    omd->set_initial_prediction(FirstOrderOracle(
        [loss_prediction, constraint_prediction, v, lambda, q](const Vector& y) {
          const Evaluation pf = loss_prediction(y);
          const Evaluation pg = constraint_prediction(y);
          const double mult = lambda * ExponentialPotential::derivative(q);
          return Evaluation{v * pf.value + mult * positive_part(pg.value),
                            predicted_surrogate_gradient(pf.gradient, pg.value, pg.gradient, v,
                                                         lambda, q)};
        }));
    loss_prediction_ = loss_prediction;
    constraint_prediction_ = constraint_prediction;
  } else {
    auto& hedge = std::get<OptimisticHedge>(inner_);
    const Vector& y = hedge.mixed_anchor();
    const Evaluation pf = loss_prediction(y);
    const Evaluation pg = constraint_prediction(y);
    hedge.set_initial_prediction(
        predicted_surrogate_gradient(pf.gradient, pg.value, pg.gradient, v, lambda, q));
    loss_prediction_ = constant_oracle(pf);
    constraint_prediction_ = constant_oracle(pg);
  }
}

CocoRecord ConstrainedLearner::round(const FirstOrderOracle& loss,
                                     const FirstOrderOracle& constraint,
                                     const FirstOrderOracle& next_loss_prediction,
                                     const FirstOrderOracle& next_constraint_prediction) {
  const Vector x = action();
  const double v = weight();
  const double lambda = queue_.lambda();
  const double q = queue_.queue();
  const double multiplier = lambda * ExponentialPotential::derivative(q);

  const Evaluation fe = loss(x);
  const Evaluation ge = constraint(x);
  const Evaluation pfe = loss_prediction_(x);
  const Evaluation pge = constraint_prediction_(x);
  const NormPair n = norms();
  const double loss_error = squared(n.dual_norm(fe.gradient - pfe.gradient));
  const double constraint_error = squared(n.dual_norm(clipped_gradient(ge) - clipped_gradient(pge)));
  loss_errors_.record(loss_error);
  constraint_errors_.record(constraint_error);

  queue_ = queue_update(queue_, ge.value);
  const double next_q = queue_.queue();
  const double next_multiplier = lambda * ExponentialPotential::derivative(next_q);

  CocoRecord rec;
  rec.t = queue_.rounds();
  rec.played = x;
  rec.loss = fe.value;
  rec.constraint = ge.value;
  rec.violation = positive_part(ge.value);
  rec.queue = q;
  rec.next_queue = next_q;
  rec.ccv = queue_.ccv();
  rec.multiplier = multiplier;
  rec.surrogate = v * fe.value + multiplier * rec.violation;
  rec.loss_error = loss_error;
  rec.constraint_error = constraint_error;
  rec.cumulative_loss_error = loss_errors_.total();
  rec.cumulative_constraint_error = constraint_errors_.total();

  if (auto* omd = std::get_if<OptimisticOmd>(&inner_)) {
    FirstOrderOracle surrogate([loss, constraint, v, lambda, q](const Vector& y) {
      const Evaluation f = loss(y);
      const Evaluation g = constraint(y);
      const double mult = lambda * ExponentialPotential::derivative(q);
      return Evaluation{v * f.value + mult * positive_part(g.value),
                        surrogate_gradient(f.gradient, g.value, g.gradient, v, lambda, q)};
    });
    FirstOrderOracle prediction(
        [next_loss_prediction, next_constraint_prediction, v, lambda, next_q](const Vector& y) {
          const Evaluation pf = next_loss_prediction(y);
          const Evaluation pg = next_constraint_prediction(y);
          const double mult = lambda * ExponentialPotential::derivative(next_q);
          return Evaluation{v * pf.value + mult * positive_part(pg.value),
                            predicted_surrogate_gradient(pf.gradient, pg.value, pg.gradient, v,
                                                         lambda, next_q)};
        });
    const double next_lipschitz = v * loss_constant_ + next_multiplier * constraint_constant_;
    OmdRecord inner = omd->round(surrogate, std::move(prediction), next_lipschitz);
    rec.surrogate_error = inner.error;
    rec.eta = inner.eta;
    rec.next_eta = inner.next_eta;
    rec.inner_lipschitz = inner.lipschitz;
    rec.prediction_smoothness = inner.prediction_smoothness;
    if (keep_inner_records_) rec.inner = std::move(inner);
    loss_prediction_ = next_loss_prediction;
    constraint_prediction_ = next_constraint_prediction;
  } else {
    auto& hedge = std::get<OptimisticHedge>(inner_);
    const Vector loss_vector = surrogate_gradient(fe.gradient, ge.value, ge.gradient, v, lambda, q);
    Evaluation frozen_f;
    Evaluation frozen_g;
    auto predict = [&](const Vector& y) {
      frozen_f = next_loss_prediction(y);
      frozen_g = next_constraint_prediction(y);
      return predicted_surrogate_gradient(frozen_f.gradient, frozen_g.value, frozen_g.gradient, v,
                                          lambda, next_q);
    };
    const double next_scale = v * loss_constant_ + next_multiplier * constraint_constant_;
    ExpertRecord inner = hedge.round(loss_vector, OptimisticHedge::PredictionAt(predict), next_scale);
    rec.surrogate_error = inner.error;
    rec.eta = inner.eta;
    rec.next_eta = inner.next_eta;
    rec.inner_lipschitz = inner.scale;
    if (keep_inner_records_) rec.inner = std::move(inner);
    loss_prediction_ = constant_oracle(std::move(frozen_f));
    constraint_prediction_ = constant_oracle(std::move(frozen_g));
  }
  return rec;
}

std::vector<double> regret_decomposition_slacks(const std::vector<CocoRecord>& history,
                                                const std::vector<double>& loss_at_u,
                                                const std::vector<double>& constraint_at_u,
                                                double lambda, double weight,
                                                double feasibility_tol) {
  if (loss_at_u.size() != history.size() || constraint_at_u.size() != history.size()) {
    throw InvalidArgument("regret_decomposition_slacks: history length mismatch");
  }
  std::vector<double> out;
  out.reserve(history.size());
  CompensatedSum regret;
  CompensatedSum surrogate_regret;
  CompensatedSum drift;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const CocoRecord& r = history[i];
    if (constraint_at_u[i] > feasibility_tol) {
      throw InvalidArgument("comparator violates the constraint of round " + std::to_string(r.t));
    }
    regret.add(weight * (r.loss - loss_at_u[i]));
    surrogate_regret.add(r.surrogate -
                         (weight * loss_at_u[i] + r.multiplier * positive_part(constraint_at_u[i])));
    drift.add(lambda * r.violation *
              (ExponentialPotential::derivative(r.next_queue) -
               ExponentialPotential::derivative(r.queue)));
    const double lhs = ExponentialPotential::value(r.next_queue) + regret.value();
    out.push_back(surrogate_regret.value() + drift.value() - lhs);
  }
  return out;
}

std::vector<Epoch> doubling_epochs(long horizon) {
  if (horizon < 0) throw InvalidArgument("horizon must be nonnegative");
  std::vector<Epoch> out;
  long start = 1;
  long length = 1;
  int index = 0;
  while (start <= horizon) {
    const long len = std::min(length, horizon - start + 1);
    out.push_back({index++, start, len});
    start += len;
    length *= 2;
  }
  return out;
}

}  // namespace optcoco
