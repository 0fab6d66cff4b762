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

#include "optcoco/experts.hpp"

#include <algorithm>
#include <cmath>

namespace optcoco {

ExpertConfig ExpertConfig::for_horizon(Eigen::Index experts, long horizon) {
  ExpertConfig c;
  c.experts = experts;
  c.horizon = horizon;
  c.delta = horizon > 0 ? 1.0 / static_cast<double>(horizon) : 0.0;
  c.validate();
  return c;
}

void ExpertConfig::validate() const {
  if (experts < 2) throw InvalidArgument("experts setting needs d >= 2");
  if (horizon < 1) throw InvalidArgument("experts setting needs T >= 1");
  const bool ok = delta > 0.0 && (delta < 1.0 || (delta == 1.0 && horizon == 1));
  if (!ok) throw InvalidArgument("mixing weight must lie in (0, 1)");
}

double ExpertConfig::log_term() const {
  const double d = static_cast<double>(experts);
  return std::log(d * d * static_cast<double>(horizon)) + 1.0;
}

double expert_adaptive_eta(double error_lag1, double error_lag2, Eigen::Index experts,
                           long horizon, double scale) {
  if (experts < 2 || horizon < 1) throw InvalidArgument("expert_adaptive_eta: need d >= 2, T >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("loss scale must be positive");
  const double d = static_cast<double>(experts);
  const double root = std::sqrt(std::log(d * d * static_cast<double>(horizon)) + 1.0);
  const double denom = std::sqrt(std::max(error_lag1, 0.0)) + std::sqrt(std::max(error_lag2, 0.0));
  const double cap = 1.0 / scale;
  if (denom == 0.0) return root * cap;
  return root * std::min(1.0 / denom, cap);
}

double expert_adaptive_eta(const ErrorTracker& tracker, Eigen::Index experts, long horizon,
                           double scale) {
  return expert_adaptive_eta(tracker.total(), tracker.previous(), experts, horizon, scale);
}

double regret_bound_thm3(Eigen::Index experts, long horizon, double total_error, double scale) {
  if (experts < 2) throw InvalidArgument("regret_bound_thm3 needs d >= 2");
  if (horizon < 1) throw InvalidArgument("regret_bound_thm3 needs T >= 1");
  const double d = static_cast<double>(experts);
  const double root = std::sqrt(std::log(d * d * static_cast<double>(horizon)) + 1.0);
  return 2.0 * root * (std::sqrt(std::max(total_error, 0.0)) + scale);
}

OptimisticHedge::OptimisticHedge(ExpertConfig config, RateSchedule rate, double scale)
    : config_(config), rate_(rate), domain_(Domain::simplex(config.experts)), scale_(scale) {
  config_.validate();
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw InvalidArgument("loss scale must be positive");
  if (const auto* c = std::get_if<ConstantRate>(&rate_)) {
    if (!(c->eta > 0.0) || !std::isfinite(c->eta)) {
      throw InvalidArgument("constant step size must be positive");
    }
    eta_ = c->eta;
  } else {
    eta_ = expert_adaptive_eta(0.0, 0.0, config_.experts, config_.horizon, scale_);
  }
  mixed_ = mix(domain_.centroid());
  played_ = mixed_;
  prediction_ = Vector::Zero(config_.experts);
}

Vector OptimisticHedge::mix(const Vector& anchor) const {
  const double d = static_cast<double>(config_.experts);
  return ((1.0 - config_.delta) * anchor).array() + config_.delta / d;
}

double OptimisticHedge::next_step_size() const {
  if (const auto* c = std::get_if<ConstantRate>(&rate_)) return c->eta;
  return expert_adaptive_eta(tracker_, config_.experts, config_.horizon, scale_);
}

void OptimisticHedge::set_initial_prediction(const Vector& prediction) {
  if (t_ != 1) throw InvalidArgument("initial prediction set after the first round");
  if (prediction.size() != config_.experts) throw InvalidArgument("prediction has the wrong size");
  require_finite(prediction, "prediction vector");
  prediction_ = prediction;
  played_ = mirror_step(geometry_, domain_, mixed_, prediction_, eta_);
}

ExpertRecord OptimisticHedge::round(const Vector& loss, const Vector& next_prediction,
                                    std::optional<double> next_scale) {
  return round(loss, PredictionAt([&next_prediction](const Vector&) { return next_prediction; }),
               next_scale);
}

ExpertRecord OptimisticHedge::round(const Vector& loss, const PredictionAt& next_prediction,
                                    std::optional<double> next_scale) {
  if (loss.size() != config_.experts) throw InvalidArgument("loss vector has the wrong size");
  require_finite(loss, "loss vector");

  const double error = std::pow((loss - prediction_).lpNorm<Eigen::Infinity>(), 2);
  tracker_.record(error);
  if (next_scale) {
    if (!(*next_scale > 0.0) || !std::isfinite(*next_scale)) {
      throw InvalidArgument("loss scale must be positive");
    }
    scale_ = std::max(scale_, *next_scale);
  }
  const double next_eta = next_step_size();

  Vector next_anchor = mirror_step(geometry_, domain_, mixed_, loss, eta_);
  Vector next_mixed = mix(next_anchor);
  Vector prediction = next_prediction(next_mixed);
  if (prediction.size() != config_.experts) throw InvalidArgument("prediction has the wrong size");
  require_finite(prediction, "prediction vector");
  Vector next_played = mirror_step(geometry_, domain_, next_mixed, prediction, next_eta);

  ExpertRecord rec;
  rec.t = t_;
  rec.played = played_;
  rec.mixed = mixed_;
  rec.next_anchor = next_anchor;
  rec.next_mixed = next_mixed;
  rec.loss_vector = loss;
  rec.prediction = prediction_;
  rec.loss = loss.dot(played_);
  rec.error = error;
  rec.cumulative_error = tracker_.total();
  rec.eta = eta_;
  rec.next_eta = next_eta;
  rec.scale = scale_;

  mixed_ = std::move(next_mixed);
  played_ = std::move(next_played);
  prediction_ = std::move(prediction);
  eta_ = next_eta;
  ++t_;
  return rec;
}

namespace {

void require_simplex(const Vector& p, const char* what) {
  require_finite(p, what);
  if ((p.array() < -1e-12).any() || std::abs(p.sum() - 1.0) > 1e-9) {
    throw InvalidArgument(std::string(what) + " is not a simplex point");
  }
}

}  // namespace

std::pair<double, double> kl_mixing_check(const Vector& u, const Vector& anchor, double delta,
                                          Eigen::Index experts) {
  if (u.size() != experts || anchor.size() != experts) {
    throw InvalidArgument("kl_mixing_check: dimension mismatch");
  }
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("kl_mixing_check: delta in (0, 1]");
  require_simplex(u, "comparator");
  require_simplex(anchor, "anchor");
  const auto geometry = BregmanGeometry::entropic();
  const double d = static_cast<double>(experts);
  const Vector mixed = ((1.0 - delta) * anchor).array() + delta / d;
  const double kl_mixed = bregman_div(geometry, u, mixed);
  const double kl_anchor = bregman_div(geometry, u, anchor);
  return {delta * std::log(d) + kl_anchor - kl_mixed, std::log(d / delta) - kl_mixed};
}

double pinsker_slack(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw InvalidArgument("pinsker_slack: dimension mismatch");
  require_simplex(p, "p");
  require_simplex(q, "q");
  const double l1 = (p - q).lpNorm<1>();
  return bregman_div(BregmanGeometry::entropic(), p, q) - 0.5 * l1 * l1;
}

}  // namespace optcoco
