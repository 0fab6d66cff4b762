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

#ifndef OPTCOCO_COCO_HPP
#define OPTCOCO_COCO_HPP

#include <variant>
#include <vector>

#include "optcoco/experts.hpp"
#include "optcoco/omd.hpp"
#include "optcoco/types.hpp"

namespace optcoco {

/// Phi(Q) = exp(Q) - 1, Phi'(Q) = exp(Q).
///
/// Q beyond kQueueGuard throws QueueBlowUp: a calibrated multiplier keeps Q
/// at O(log T), so a larger queue means lambda was too large.
struct ExponentialPotential {
  static constexpr double kQueueGuard = 500.0;

  static double value(double queue);
  static double derivative(double queue);
};

/// Virtual queue Q_{t+1} = Q_t + lambda g_t^+(x_t) with its violation total.
/// Q is accumulated as the compensated sum of lambda g^+, so lambda * ccv()
/// and queue() agree to rounding.
class QueueState {
 public:
  explicit QueueState(double lambda = 1.0, double weight = 1.0);

  double lambda() const { return lambda_; }
  double weight() const { return weight_; }
  double queue() const { return queue_.value(); }
  double ccv() const { return violation_.value(); }
  long rounds() const { return rounds_; }

  friend QueueState queue_update(const QueueState& queue, double constraint_value);

 private:
  double lambda_;
  double weight_;  // V
  CompensatedSum queue_;
  CompensatedSum violation_;
  long rounds_ = 0;
};

/// Adds max(0, g) to the violation total and lambda max(0, g) to Q.
QueueState queue_update(const QueueState& queue, double constraint_value);

/// V grad_f + lambda exp(Q) s, with s = grad_g when g_value > 0 and 0
/// otherwise (a subgradient of g^+).
Vector surrogate_gradient(const Vector& loss_gradient, double constraint_value,
                          const Vector& constraint_gradient, double weight, double lambda,
                          double queue);

/// The same map applied to predicted values and gradients.
Vector predicted_surrogate_gradient(const Vector& predicted_loss_gradient,
                                    double predicted_constraint_value,
                                    const Vector& predicted_constraint_gradient, double weight,
                                    double lambda, double queue);

/// 1 / (2C (sqrt(2 E_g) + psi_g) + 2G).
double calibrate_lambda(double constant, double constraint_error, double constraint_psi,
                        double constraint_bound);

/// C (sqrt(2 E_f) + psi_f) + 1 / V.
double regret_bound_thm6(double constant, double loss_error, double loss_psi, double weight = 1.0);

/// 2 (C (sqrt(2 E_g) + psi_g) + G) log(2 (C (sqrt(2 E_f) + psi_f) + 2 F V T + 2)).
double ccv_bound_thm6(double constant, double loss_error, double loss_psi, double constraint_error,
                      double constraint_psi, double constraint_bound, double loss_bound,
                      double weight, long horizon);

enum class InnerKind { kOptimisticOmd, kOptimisticHedge };

/// The regret guarantee C (sqrt(E) + psi(h)) of an inner learner.
///
/// Optimistic OMD with the adaptive rate: C = 5 sqrt(B/beta) and
/// psi(h) = sqrt(B) L^h. Optimistic hedge: C = 2 sqrt(log(d^2 T e)) and
/// psi(h) = the sup-norm bound on the gradients of h, which is 1 for unit
/// scaled losses. Both psi are positively homogeneous and subadditive in
/// the declared constant they read.
struct RegretContract {
  InnerKind inner = InnerKind::kOptimisticOmd;
  double constant = 1.0;        // C
  double bregman_radius = 1.0;  // B, optimistic OMD only

  static RegretContract for_adaptive_omd(double bregman_radius, double beta);
  static RegretContract for_hedge(Eigen::Index experts, long horizon);

  /// psi of a function with the given declared constant (Lipschitz constant
  /// of the gradient for OMD, gradient sup-norm bound for hedge).
  double psi(double declared) const;
};

struct CocoRecord {
  long t = 0;
  Vector played;
  double loss = 0.0;        // f_t(x_t)
  double constraint = 0.0;  // g_t(x_t)
  double violation = 0.0;   // g_t^+(x_t)
  double queue = 0.0;       // Q_t
  double next_queue = 0.0;  // Q_{t+1}
  double ccv = 0.0;         // sum of violations through t
  double multiplier = 0.0;  // lambda Phi'(Q_t)
  double surrogate = 0.0;   // L_t(x_t)
  double loss_error = 0.0;
  double constraint_error = 0.0;
  double surrogate_error = 0.0;
  double cumulative_loss_error = 0.0;
  double cumulative_constraint_error = 0.0;
  double eta = 0.0;
  double next_eta = 0.0;
  double inner_lipschitz = 0.0;  // L of the surrogate (OMD) or the hedge scale
  /// Observed smoothness of the surrogate prediction between the inner
  /// anchor and x_t; 0 for a hedge inner learner, whose predictions are
  /// constant vectors.
  double prediction_smoothness = 0.0;
  std::variant<std::monostate, OmdRecord, ExpertRecord> inner;
};

/// The constrained meta-learner: each round it feeds the inner optimistic
/// learner the surrogate L_t = V f_t + lambda Phi'(Q_t) g_t^+ and the
/// prediction V f^_{t+1} + lambda Phi'(Q_{t+1}) g^_{t+1}^+, where the clip
/// of a predicted constraint is decided by its predicted value.
///
/// The constraint error is measured on the clipped functions:
/// eps_t(g) = ||d g_t^+(x_t) - d g^_t^+(x_t)||_*^2, so that
/// eps_t(L) <= 2 V^2 eps_t(f) + 2 (lambda Phi'(Q_t))^2 eps_t(g).
///
/// With a hedge inner learner the predictions are frozen to constant
/// vectors at the mixed anchor y_{t+1}; the errors are measured against
/// those vectors.
class ConstrainedLearner {
 public:
  /// Declared constants: L_f and L_g (OMD), or the gradient sup-norm
  /// bounds of f and g (hedge).
  ConstrainedLearner(OptimisticOmd inner, double lambda, double loss_constant,
                     double constraint_constant, bool keep_inner_records = false);
  ConstrainedLearner(OptimisticHedge inner, double lambda, double loss_constant,
                     double constraint_constant, bool keep_inner_records = false);

  void set_initial_prediction(const FirstOrderOracle& loss_prediction,
                              const FirstOrderOracle& constraint_prediction);

  /// Plays x_t against (f_t, g_t) and installs the predictions for t+1.
  CocoRecord round(const FirstOrderOracle& loss, const FirstOrderOracle& constraint,
                   const FirstOrderOracle& next_loss_prediction,
                   const FirstOrderOracle& next_constraint_prediction);

  const Vector& action() const;
  const QueueState& queue() const { return queue_; }
  double lambda() const { return queue_.lambda(); }
  double weight() const { return queue_.weight(); }
  InnerKind inner_kind() const;
  const ErrorTracker& loss_tracker() const { return loss_errors_; }
  const ErrorTracker& constraint_tracker() const { return constraint_errors_; }
  const ErrorTracker& surrogate_tracker() const;
  NormPair norms() const;

 private:
  std::variant<OptimisticOmd, OptimisticHedge> inner_;
  QueueState queue_;
  double loss_constant_;
  double constraint_constant_;
  bool keep_inner_records_;
  ErrorTracker loss_errors_;
  ErrorTracker constraint_errors_;
  FirstOrderOracle loss_prediction_;
  FirstOrderOracle constraint_prediction_;
};

/// Per-round slacks of
///   Phi(Q_{t+1}) + V Regret_t(u) <= Regret_t^A(u) + S_t,
///   S_t = lambda sum_tau g_tau^+(x_tau) (Phi'(Q_{tau+1}) - Phi'(Q_tau)),
/// with Regret^A the surrogate regret computed from the recorded surrogate
/// values. `loss_at_u` and `constraint_at_u` hold f_tau(u) and g_tau(u);
/// throws InvalidArgument if some g_tau(u) exceeds `feasibility_tol`.
std::vector<double> regret_decomposition_slacks(const std::vector<CocoRecord>& history,
                                                const std::vector<double>& loss_at_u,
                                                const std::vector<double>& constraint_at_u,
                                                double lambda, double weight = 1.0,
                                                double feasibility_tol = 1e-8);

struct Epoch {
  int index = 0;
  long start = 1;  // first round, 1-based
  long length = 1;
};

/// Epochs of lengths 1, 2, 4, ... covering `horizon` rounds; the last one
/// is truncated.
std::vector<Epoch> doubling_epochs(long horizon);

}  // namespace optcoco

#endif  // OPTCOCO_COCO_HPP
