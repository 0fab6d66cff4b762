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

#include <cmath>
#include <random>

#include <doctest.h>

#include "optcoco/coco.hpp"
#include "optcoco/environments.hpp"

namespace {

using optcoco::BregmanGeometry;
using optcoco::ConstrainedLearner;
using optcoco::Domain;
using optcoco::FirstOrderOracle;
using optcoco::OptimisticOmd;
using optcoco::QuadraticForm;
using optcoco::Vector;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Bounds for the inner learner, whose losses are f + lambda e^Q g^+: the
// Lipschitz constant starts at L_f + lambda L_g.
optcoco::ProblemBounds box_bounds(double lambda) {
  optcoco::ProblemBounds pb;
  pb.diameter = 2.0 * std::sqrt(2.0);
  pb.bregman_radius = 4.0;
  pb.loss_lipschitz = 1.0 + lambda;
  pb.constraint_lipschitz = 1.0;
  return pb;
}

Domain square() { return Domain::box(Vector::Constant(2, -1.0), Vector::Ones(2)); }

}  // namespace

TEST_CASE("surrogate gradient examples") {
  Vector g = optcoco::surrogate_gradient(vec({1, 0}), 0.5, vec({0, 2}), 1.0, 0.5, 0.0);
  CHECK((g - vec({1, 1})).norm() <= 1e-15);
  g = optcoco::surrogate_gradient(vec({1, 0}), -0.1, vec({0, 2}), 1.0, 0.5, 0.0);
  CHECK((g - vec({1, 0})).norm() == 0.0);
  g = optcoco::surrogate_gradient(vec({1, 3}), 0.5, vec({0, 2}), 2.0, 0.0, 0.0);
  CHECK((g - vec({2, 6})).norm() == 0.0);
  // Phi'(Q) = e^Q
  g = optcoco::surrogate_gradient(vec({0, 0}), 1.0, vec({1, 0}), 1.0, 0.5, 2.0);
  CHECK(g(0) == doctest::Approx(0.5 * std::exp(2.0)).epsilon(1e-15));
  CHECK((optcoco::predicted_surrogate_gradient(vec({0, 0}), 0.0, vec({0, 0}), 1.0, 0.5, 0.0)).norm() == 0.0);
}

TEST_CASE("prediction error in f alone is at most 2 V^2 eps(f)") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 1000; ++k) {
    const Vector gf = vec({u(rng), u(rng)});
    const Vector pf = vec({u(rng), u(rng)});
    const Vector gg = vec({u(rng), u(rng)});
    const double gv = u(rng);
    const double v = 1.0;
    const double lambda = std::abs(u(rng));
    const double q = std::abs(u(rng));
    const Vector a = optcoco::surrogate_gradient(gf, gv, gg, v, lambda, q);
    const Vector b = optcoco::predicted_surrogate_gradient(pf, gv, gg, v, lambda, q);
    CHECK((a - b).squaredNorm() <= 2.0 * v * v * (gf - pf).squaredNorm() + 1e-12);
  }
}

TEST_CASE("queue update examples") {
  optcoco::QueueState q(0.5);
  q = optcoco::queue_update(q, -1.0);
  CHECK(q.queue() == 0.0);
  CHECK(q.ccv() == 0.0);
  q = optcoco::queue_update(q, 2.0);
  CHECK(q.queue() == 1.0);
  q = optcoco::queue_update(q, 2.0);
  CHECK(q.queue() == 2.0);
  CHECK(q.ccv() == 4.0);
  CHECK(q.rounds() == 3);
  CHECK_THROWS_AS(optcoco::QueueState(-1.0), optcoco::InvalidArgument);
}

TEST_CASE("multiplier calibration examples") {
  CHECK(optcoco::calibrate_lambda(1.0, 0.0, 0.0, 1.0) == 0.5);
  CHECK(optcoco::calibrate_lambda(1.0, 2.0, 1.0, 0.5) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  CHECK(optcoco::calibrate_lambda(1.0, 0.0, 0.0, 1e300) < 1e-299);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int k = 0; k < 100; ++k) {
    const double g = u(rng);
    CHECK(optcoco::calibrate_lambda(u(rng), u(rng), u(rng), g) <= 1.0 / (2.0 * g));
  }
}

TEST_CASE("constrained bound examples") {
  CHECK(optcoco::regret_bound_thm6(1.0, 0.0, 0.0) == 1.0);
  CHECK(optcoco::ccv_bound_thm6(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 10) ==
        doctest::Approx(7.568379267836522).epsilon(1e-14));
  // E_f = 8 enters the log as sqrt(16) = 4
  CHECK(optcoco::ccv_bound_thm6(1.0, 8.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 10) ==
        doctest::Approx(2.0 * std::log(2.0 * (4.0 + 20.0 + 2.0))).epsilon(1e-14));
  CHECK(optcoco::regret_bound_thm6(3.0, 8.0, 1.0) == doctest::Approx(3.0 * (4.0 + 1.0) + 1.0).epsilon(1e-15));
}

TEST_CASE("regret contracts") {
  const auto omd = optcoco::RegretContract::for_adaptive_omd(4.0, 1.0);
  CHECK(omd.constant == 10.0);
  CHECK(omd.psi(1.5) == 3.0);
  const auto hedge = optcoco::RegretContract::for_hedge(2, 10);
  CHECK(hedge.constant == doctest::Approx(4.330764114617159).epsilon(1e-14));
  CHECK(hedge.psi(1.5) == 1.5);
}

TEST_CASE("potential guard") {
  CHECK(optcoco::ExponentialPotential::value(0.0) == 0.0);
  CHECK(optcoco::ExponentialPotential::derivative(0.0) == 1.0);
  CHECK_THROWS_AS(optcoco::ExponentialPotential::value(1e4), optcoco::QueueBlowUp);
}

TEST_CASE("always-feasible constraint reduces to the unconstrained learner") {
  optcoco::EnvironmentSpec spec;
  spec.seed = 14;
  const optcoco::Environment env(spec, square(), optcoco::NormPair::l2());
  const FirstOrderOracle slack = QuadraticForm::affine(Vector::Zero(2), -1.0).oracle();
  OptimisticOmd plain(BregmanGeometry::euclidean(), square(), box_bounds(0.3), optcoco::ConstantRate{0.2});
  ConstrainedLearner coco(OptimisticOmd(BregmanGeometry::euclidean(), square(), box_bounds(0.3),
                                        optcoco::ConstantRate{0.2}),
                          0.3, 1.0, 1.0);
  plain.set_initial_prediction(env.generate_round(1).loss.oracle());
  coco.set_initial_prediction(env.generate_round(1).loss.oracle(), slack);
  for (long t = 1; t <= 300; ++t) {
    const auto f = env.generate_round(t).loss.oracle();
    const auto next = env.generate_round(t + 1).loss.oracle();
    const auto a = plain.round(f, next);
    const auto b = coco.round(f, slack, next, slack);
    CHECK((a.played.array() == b.played.array()).all());
    CHECK(b.next_queue == 0.0);
    CHECK(b.ccv == 0.0);
    CHECK(b.surrogate_error == 0.0);
  }
}

TEST_CASE("single violated round: CCV = Q / lambda") {
  ConstrainedLearner coco(OptimisticOmd(BregmanGeometry::euclidean(), square(), box_bounds(0.25),
                                        optcoco::AdaptiveRate{}),
                          0.25, 1.0, 1.0);
  const FirstOrderOracle f = QuadraticForm::affine(vec({1, 0}), 0.0).oracle();
  const FirstOrderOracle g = QuadraticForm::affine(vec({0, 0}), 2.0).oracle();
  const auto rec = coco.round(f, g, FirstOrderOracle::zero(2), FirstOrderOracle::zero(2));
  CHECK(rec.next_queue == 0.5);
  CHECK(rec.ccv == 2.0);
  CHECK(rec.next_queue / 0.25 == rec.ccv);
}

TEST_CASE("regret decomposition after one round, by hand") {
  // u must satisfy g(u) <= 0; V = 1, lambda = 0.4, Q_1 = 0.
  const double lambda = 0.4;
  ConstrainedLearner coco(OptimisticOmd(BregmanGeometry::euclidean(), square(), box_bounds(lambda),
                                        optcoco::AdaptiveRate{}, vec({0.5, 0.5})),
                          lambda, 1.0, 1.0);
  const QuadraticForm f = QuadraticForm::centered(vec({-0.5, 0.2}));
  const QuadraticForm g = QuadraticForm::affine(vec({1, 1}), -0.2);  // g(x_1) = 0.8
  const auto rec = coco.round(f.oracle(), g.oracle(), FirstOrderOracle::zero(2), FirstOrderOracle::zero(2));
  const Vector u = vec({-0.5, -0.5});
  REQUIRE(g.value(u) <= 0.0);
  const double q2 = lambda * 0.8;
  const double lhs = std::expm1(q2) + (f.value(rec.played) - f.value(u));
  // L_1(x) = f(x) + lambda e^0 g^+(x); S_1 = lambda g^+(x_1)(e^{Q_2} - e^{Q_1})
  const double surrogate_regret = f.value(rec.played) + lambda * 0.8 - f.value(u);
  const double s1 = lambda * 0.8 * (std::exp(q2) - 1.0);
  const auto slacks = optcoco::regret_decomposition_slacks({rec}, {f.value(u)}, {g.value(u)}, lambda);
  REQUIRE(slacks.size() == 1);
  CHECK(slacks[0] == doctest::Approx(surrogate_regret + s1 - lhs).epsilon(1e-14));
  CHECK(slacks[0] >= 0.0);
  CHECK_THROWS_AS(optcoco::regret_decomposition_slacks({rec}, {0.0}, {0.5}, lambda), optcoco::InvalidArgument);
}

TEST_CASE("regret decomposition slack stays nonnegative along a run") {
  for (auto family : {optcoco::ConstraintFamily::kFixed, optcoco::ConstraintFamily::kDrifting,
                      optcoco::ConstraintFamily::kSwitching}) {
    optcoco::EnvironmentSpec spec;
    spec.constraint = family;
    spec.seed = 19;
    const optcoco::Environment env(spec, square(), optcoco::NormPair::l2());
    const double lambda = 0.02;
    ConstrainedLearner coco(OptimisticOmd(BregmanGeometry::euclidean(), square(), box_bounds(lambda),
                                          optcoco::AdaptiveRate{}),
                            lambda, 1.0, 1.0);
    const Vector u = env.feasible_point();
    std::vector<optcoco::CocoRecord> history;
    std::vector<double> fu;
    std::vector<double> gu;
    const optcoco::PredictorSpec previous{optcoco::PredictorKind::kPrevious, 0.0};
    for (long t = 1; t <= 500; ++t) {
      const auto round = env.generate_round(t);
      history.push_back(coco.round(round.loss.oracle(), round.constraint.oracle(),
                                   optcoco::make_predictor(previous, env, optcoco::PredictionTarget::kLoss, t + 1),
                                   optcoco::make_predictor(previous, env, optcoco::PredictionTarget::kConstraint, t + 1)));
      fu.push_back(round.loss.value(u));
      gu.push_back(round.constraint.value(u));
      CHECK(history.back().ccv == doctest::Approx(history.back().next_queue / lambda).epsilon(1e-12));
    }
    for (double s : optcoco::regret_decomposition_slacks(history, fu, gu, lambda)) CHECK(s >= -1e-9);
  }
}

TEST_CASE("clipped constraint makes the surrogate prediction nonsmooth") {
  // g(x) = x_0 is affine, so its gradient is 0-Lipschitz, but the predicted
  // surrogate gradient carries lambda e^Q 1[x_0 > 0] e_0: a jump across
  // x_0 = 0. Whenever the anchor and the played point straddle the face the
  // observed smoothness exceeds any finite declared constant.
  const double lambda = 0.5;
  ConstrainedLearner coco(OptimisticOmd(BregmanGeometry::euclidean(), square(), box_bounds(lambda),
                                        optcoco::ConstantRate{0.2}, vec({0.05, 0.0})),
                          lambda, 1.0, 1.0);
  const FirstOrderOracle f = QuadraticForm::affine(vec({-1, 0}), 0.0).oracle();  // pushes x_0 up
  const FirstOrderOracle g = QuadraticForm::affine(vec({1, 0}), 0.0).oracle();
  coco.set_initial_prediction(f, g);
  long rough = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto rec = coco.round(f, g, f, g);
    CHECK(rec.constraint_error == 0.0);
    if (rec.prediction_smoothness > rec.inner_lipschitz) ++rough;
    worst = std::max(worst, rec.prediction_smoothness / rec.inner_lipschitz);
  }
  CHECK(rough > 0);
  CHECK(worst > 1.0);
}

TEST_CASE("hedge inner learner") {
  const Domain simplex = Domain::simplex(3);
  optcoco::EnvironmentSpec spec;
  spec.loss = optcoco::LossFamily::kLinear;
  spec.constraint = optcoco::ConstraintFamily::kDrifting;
  spec.seed = 6;
  const optcoco::Environment env(spec, simplex, optcoco::NormPair::l1());
  const double lambda = 0.05;
  ConstrainedLearner coco(optcoco::OptimisticHedge(optcoco::ExpertConfig::for_horizon(3, 400), optcoco::AdaptiveRate{},
                                                   1.0 + lambda),
                          lambda, 1.0, 1.0);
  CHECK(coco.inner_kind() == optcoco::InnerKind::kOptimisticHedge);
  for (long t = 1; t <= 400; ++t) {
    const auto round = env.generate_round(t);
    const auto rec = coco.round(round.loss.oracle(), round.constraint.oracle(), FirstOrderOracle::zero(3),
                                FirstOrderOracle::zero(3));
    CHECK(simplex.contains(rec.played));
    CHECK(rec.prediction_smoothness == 0.0);
    CHECK(rec.ccv == doctest::Approx(rec.next_queue / lambda).epsilon(1e-12));
  }
}

TEST_CASE("doubling epochs") {
  const auto e = optcoco::doubling_epochs(7);
  REQUIRE(e.size() == 3);
  CHECK(e[0].length == 1);
  CHECK(e[1].length == 2);
  CHECK(e[2].length == 4);
  CHECK(e[2].start == 4);
  const auto partial = optcoco::doubling_epochs(10);
  REQUIRE(partial.size() == 4);
  CHECK(partial[3].length == 3);
  CHECK(optcoco::doubling_epochs(0).empty());
}
