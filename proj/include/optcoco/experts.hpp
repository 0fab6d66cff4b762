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

#ifndef OPTCOCO_EXPERTS_HPP
#define OPTCOCO_EXPERTS_HPP

#include <functional>
#include <utility>

#include "optcoco/geometry.hpp"
#include "optcoco/omd.hpp"
#include "optcoco/types.hpp"

namespace optcoco {

struct ExpertConfig {
  Eigen::Index experts = 2;  // d
  long horizon = 1;          // T
  double delta = 1.0;        // mixing weight

  /// delta = 1 / T.
  static ExpertConfig for_horizon(Eigen::Index experts, long horizon);

  /// d >= 2, T >= 1, 0 < delta < 1 (delta = 1 is allowed only when T = 1).
  void validate() const;

  /// log(d^2 T e).
  double log_term() const;
};

/// sqrt(log(d^2 T e)) * min{1 / (sqrt(E_{t-1}) + sqrt(E_{t-2})), 1 / scale}.
///
/// `scale` bounds the sup norm of the loss vectors; the unit-scale case is
/// the usual [-1, 1] loss setting. An empty error history picks the second
/// argument.
double expert_adaptive_eta(double error_lag1, double error_lag2, Eigen::Index experts,
                           long horizon, double scale = 1.0);
double expert_adaptive_eta(const ErrorTracker& tracker, Eigen::Index experts, long horizon,
                           double scale = 1.0);

/// 2 sqrt(log(d^2 T e)) (sqrt(E_T) + scale). Rejects d < 2.
double regret_bound_thm3(Eigen::Index experts, long horizon, double total_error,
                         double scale = 1.0);

struct ExpertRecord {
  long t = 0;
  Vector played;       // x_t
  Vector mixed;        // y_t, the anchor x_t was computed from
  Vector next_anchor;  // pre-mixture anchor for round t+1
  Vector next_mixed;   // y_{t+1}
  Vector loss_vector;  // l_t
  Vector prediction;   // the prediction that produced x_t
  double loss = 0.0;   // <l_t, x_t>
  double error = 0.0;  // ||l_t - prediction||_inf^2
  double cumulative_error = 0.0;
  double eta = 0.0;
  double next_eta = 0.0;
  double scale = 1.0;
};

/// Optimistic hedge on the simplex with uniform mixing.
///
/// Round t: play x_t, observe l_t, anchor' = entropic step from y_t with l_t
/// and eta_t, y_{t+1} = (1 - delta) anchor' + delta / d, then
/// x_{t+1} = entropic step from y_{t+1} with the prediction l^_{t+1} and
/// eta_{t+1}. Predictions are constant vectors.
class OptimisticHedge {
 public:
  /// Receives y_{t+1} and returns the constant prediction vector for round
  /// t+1. Used when the prediction is formed at the mixed anchor.
  using PredictionAt = std::function<Vector(const Vector& mixed_anchor)>;

  OptimisticHedge(ExpertConfig config, RateSchedule rate, double scale = 1.0);

  /// Prediction for round 1; x_1 moves to the optimistic step from y_1.
  void set_initial_prediction(const Vector& prediction);

  ExpertRecord round(const Vector& loss, const Vector& next_prediction,
                     std::optional<double> next_scale = std::nullopt);
  ExpertRecord round(const Vector& loss, const PredictionAt& next_prediction,
                     std::optional<double> next_scale = std::nullopt);

  const Vector& action() const { return played_; }
  const Vector& mixed_anchor() const { return mixed_; }
  double eta() const { return eta_; }
  long round_index() const { return t_; }
  double scale() const { return scale_; }
  const ErrorTracker& tracker() const { return tracker_; }
  const ExpertConfig& config() const { return config_; }

 private:
  double next_step_size() const;
  Vector mix(const Vector& anchor) const;

  ExpertConfig config_;
  RateSchedule rate_;
  BregmanGeometry geometry_ = BregmanGeometry::entropic();
  Domain domain_;

  long t_ = 1;
  Vector mixed_;
  Vector played_;
  Vector prediction_;
  double eta_;
  double scale_;
  ErrorTracker tracker_;
};

/// Slacks of D(u; y) <= delta log d + D(u; x) and D(u; y) <= log(d / delta)
/// for y = (1 - delta) x + delta / d, as (first, second).
std::pair<double, double> kl_mixing_check(const Vector& u, const Vector& anchor, double delta,
                                          Eigen::Index experts);

/// D_KL(p; q) - 0.5 ||p - q||_1^2 for simplex points p, q.
double pinsker_slack(const Vector& p, const Vector& q);

}  // namespace optcoco

#endif  // OPTCOCO_EXPERTS_HPP
