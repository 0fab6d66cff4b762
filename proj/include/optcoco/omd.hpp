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

#ifndef OPTCOCO_OMD_HPP
#define OPTCOCO_OMD_HPP

#include <optional>
#include <variant>
#include <vector>

#include "optcoco/geometry.hpp"
#include "optcoco/types.hpp"

namespace optcoco {

/// Problem constants the learners and the bound checks are parameterized
/// by. `bregman_radius` must dominate B(x; anchor) over the domain.
struct ProblemBounds {
  double diameter = 1.0;
  double loss_bound = 1.0;             // F
  double constraint_bound = 1.0;       // G
  double loss_lipschitz = 1.0;         // L_f, gradient Lipschitz constant
  double constraint_lipschitz = 1.0;   // L_g
  double loss_smoothness = 0.0;        // alpha_f, of the loss predictions
  double constraint_smoothness = 0.0;  // alpha_g
  double bregman_radius = 1.0;         // B

  /// Throws InvalidArgument unless the constants are positive (the
  /// prediction smoothness may be zero) and, when `adaptive`, the
  /// predictions satisfy alpha <= sqrt(beta) L.
  void validate(bool adaptive, double beta) const;
};

/// B = D^2 / 2 for the Euclidean geometry, where D is the L2 diameter.
double euclidean_bregman_radius(const Domain& domain);

/// Running prediction-error accounting: eps_t >= 0 per round, E_t its
/// running sum, and E_{t-1} kept for the adaptive step sizes.
class ErrorTracker {
 public:
  void record(double error);

  long rounds() const { return rounds_; }
  double last() const { return last_; }
  /// E_t after the most recent record().
  double total() const { return total_.value(); }
  /// E_{t-1}.
  double previous() const { return previous_; }

 private:
  long rounds_ = 0;
  double last_ = 0.0;
  double previous_ = 0.0;
  CompensatedSum total_;
};

struct ConstantRate {
  double eta = 0.1;
};
struct AdaptiveRate {};
using RateSchedule = std::variant<ConstantRate, AdaptiveRate>;

inline bool is_adaptive(const RateSchedule& r) { return std::holds_alternative<AdaptiveRate>(r); }

/// min{ sqrt(beta B) / (sqrt(E_{t-1}) + sqrt(E_{t-2})), sqrt(beta) / L },
/// with an empty history treated as an infinite first argument.
double adaptive_eta(double error_lag1, double error_lag2, double beta, double bregman_radius,
                    double lipschitz);

/// Step size for the round after the tracker's latest record.
double adaptive_eta(const ErrorTracker& tracker, double beta, double bregman_radius,
                    double lipschitz);

/// 2B/eta + (eta/beta) E_T (constant step size).
double regret_bound_thm1(double bregman_radius, double eta, double total_error, double beta);

/// 5 sqrt(B/beta) (sqrt(E_T) + sqrt(B) L_T) (adaptive step size).
double regret_bound_thm2(double bregman_radius, double beta, double total_error, double lipschitz);

struct OmdRecord {
  long t = 0;
  Vector played;  // x_t
  double loss = 0.0;
  double error = 0.0;  // ||grad f_t(x_t) - pred_t(x_t)||_*^2
  double cumulative_error = 0.0;
  double eta = 0.0;       // eta_t
  double next_eta = 0.0;  // eta_{t+1}
  double lipschitz = 0.0;
  /// Observed smoothness of the prediction between anchor_t and x_t,
  /// |pred_t(x_t) - pred_t(anchor_t)|_* / |x_t - anchor_t| (0 when equal).
  double prediction_smoothness = 0.0;

  // Filled only when instrumentation is enabled.
  Vector anchor;               // anchor_t
  Vector next_anchor;          // anchor_{t+1}
  Vector gradient;             // grad f_t(x_t)
  Vector predicted_at_anchor;  // pred_t(anchor_t), the optimistic step direction
  Vector predicted_at_played;  // pred_t(x_t)
};

/// Optimistic online mirror descent.
///
/// Round t: play x_t, observe f_t, set eta_{t+1}, take the mirror step
/// anchor_{t+1} = argmin <grad f_t(x_t), x> + B(x; anchor_t)/eta_t, receive
/// the prediction for round t+1, and take the optimistic step
/// x_{t+1} = argmin <pred_{t+1}(anchor_{t+1}), x> + B(x; anchor_{t+1})/eta_{t+1}.
class OptimisticOmd {
 public:
  /// anchor_1 = x_1 = `start` (default: domain centroid). The prediction
  /// for round 1 defaults to zero; see set_initial_prediction().
  OptimisticOmd(BregmanGeometry geometry, Domain domain, ProblemBounds bounds, RateSchedule rate,
                std::optional<Vector> start = std::nullopt, bool instrument = false);

  /// Installs pred_1 and moves x_1 to the optimistic step from anchor_1.
  /// Only valid before the first round.
  void set_initial_prediction(FirstOrderOracle prediction);

  /// Plays one round. `next_lipschitz` raises the running Lipschitz bound
  /// used by the adaptive schedule for eta_{t+1}.
  OmdRecord round(const FirstOrderOracle& loss, FirstOrderOracle next_prediction,
                  std::optional<double> next_lipschitz = std::nullopt);

  const Vector& action() const { return played_; }
  const Vector& anchor() const { return anchor_; }
  double eta() const { return eta_; }
  long round_index() const { return t_; }
  double lipschitz() const { return lipschitz_; }
  const ErrorTracker& tracker() const { return tracker_; }
  const BregmanGeometry& geometry() const { return geometry_; }
  const Domain& domain() const { return domain_; }
  const ProblemBounds& bounds() const { return bounds_; }
  const RateSchedule& rate() const { return rate_; }
  bool instrumented() const { return instrument_; }

 private:
  double next_step_size() const;

  BregmanGeometry geometry_;
  Domain domain_;
  ProblemBounds bounds_;
  RateSchedule rate_;
  bool instrument_;

  long t_ = 1;
  Vector anchor_;
  Vector played_;
  double eta_;
  double lipschitz_;
  ErrorTracker tracker_;
  FirstOrderOracle prediction_;
  Vector predicted_at_anchor_;
};

struct StepCheck {
  double slack = 0.0;
  /// Observed smoothness of the prediction between x_t and anchor_t.
  double local_smoothness = 0.0;
  /// local_smoothness <= beta / sqrt(2 eta_t eta_{t+1}). Under the 1/2
  /// convention for beta-strong convexity, B(x; y) >= beta/2 |x - y|^2, so
  /// splitting the prediction gap with (a+b)^2 <= 2a^2 + 2b^2 needs this
  /// condition; beta / eta_t alone is not sufficient.
  bool precondition_met = false;
  /// local_smoothness <= beta / eta_t, the weaker textbook form.
  bool nominal_precondition_met = false;
};

/// Slack of the one-step inequality of optimistic OMD,
///   <g_t, x_t - u> <= (B(u; a_t) - B(u; a_{t+1})) / eta_t
///                     + B(x_t; a_{t+1}) (1/eta_{t+1} - 1/eta_t)
///                     + (eta_{t+1} / beta) eps_t,
/// i.e. right-hand side minus left-hand side. Needs an instrumented record.
StepCheck step_inequality_check(const BregmanGeometry& geometry, const OmdRecord& record,
                                const Vector& u);

std::vector<StepCheck> step_inequality_checks(const BregmanGeometry& geometry,
                                              const std::vector<OmdRecord>& history,
                                              const Vector& u);

}  // namespace optcoco

#endif  // OPTCOCO_OMD_HPP
