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

// Acceptance suite. Prints one PASS/FAIL line per criterion (plus indented
// detail lines) and exits nonzero if any criterion fails.
//
// Bounds, comparators for unconstrained runs, best experts, KL divergences
// and the plain OMD baseline are recomputed here from first principles;
// the library is only trusted to run the learners and generate rounds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <random>
#include <string>
#include <vector>

#include "optcoco/experts.hpp"
#include "optcoco/geometry.hpp"
#include "optcoco/harness.hpp"
#include "optcoco/omd.hpp"

namespace {

using nlohmann::json;
using optcoco::Vector;

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      lines.push_back("FAIL " + what);
    }
  }
  void info(const std::string& what) { lines.push_back(what); }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Instrumented runs from every criterion, pooled for criteria 5 and 9.
struct Pool {
  std::vector<std::shared_ptr<optcoco::RunResult>> runs;
  std::vector<std::string> names;
  void add(std::string name, std::shared_ptr<optcoco::RunResult> r) {
    names.push_back(std::move(name));
    runs.push_back(std::move(r));
  }
};

std::vector<std::shared_ptr<optcoco::RunResult>> run_all(const std::vector<json>& configs) {
  std::vector<std::future<std::shared_ptr<optcoco::RunResult>>> jobs;
  for (const json& c : configs) {
    jobs.push_back(std::async(std::launch::async, [c]() {
      return std::make_shared<optcoco::RunResult>(optcoco::run(optcoco::parse_config(c)));
    }));
  }
  std::vector<std::shared_ptr<optcoco::RunResult>> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

optcoco::Environment environment_of(const optcoco::RunConfig& cfg) {
  optcoco::EnvironmentSpec spec = cfg.environment;
  spec.seed = cfg.seed;
  return optcoco::Environment(spec, cfg.domain, cfg.geometry().norms);
}

// Regret series of the played losses against u, recomputed from the rounds.
std::vector<double> regret_series(const optcoco::RunResult& r, const Vector& u) {
  const optcoco::Environment env = environment_of(r.config);
  std::vector<double> out;
  long double acc = 0.0L;
  for (const auto& row : r.trace) {
    acc += static_cast<long double>(row.loss) - env.generate_round(row.t).loss.value(u);
    out.push_back(static_cast<double>(acc));
  }
  return out;
}

// Minimizer of sum_t f_t over a box or ball, in closed form (the summed
// quadratic is isotropic).
Vector unconstrained_comparator(const optcoco::RunConfig& cfg) {
  const optcoco::Environment env = environment_of(cfg);
  const Eigen::Index d = cfg.domain.dim();
  double curvature = 0.0;
  Vector linear = Vector::Zero(d);
  for (long t = 1; t <= cfg.horizon; ++t) {
    const auto f = env.generate_round(t).loss;
    curvature += f.curvature;
    linear += f.linear;
  }
  if (curvature == 0.0) {  // linear: a vertex of the box, a boundary point of the ball
    if (cfg.domain.kind() == optcoco::DomainKind::kBox) {
      Vector u(d);
      for (Eigen::Index i = 0; i < d; ++i) u(i) = linear(i) > 0.0 ? cfg.domain.lower()(i) : cfg.domain.upper()(i);
      return u;
    }
    return cfg.domain.center() - linear * (cfg.domain.radius() / linear.norm());
  }
  const Vector free = -linear / curvature;
  if (cfg.domain.kind() == optcoco::DomainKind::kBox) {
    return free.cwiseMax(cfg.domain.lower()).cwiseMin(cfg.domain.upper());
  }
  const Vector off = free - cfg.domain.center();
  const double n = off.norm();
  return n <= cfg.domain.radius() ? free : Vector(cfg.domain.center() + off * (cfg.domain.radius() / n));
}

double box_diameter(const Vector& lo, const Vector& hi) { return (hi - lo).norm(); }

// ---------------------------------------------------------------------------
// 1. Mirror step against a zooming dense grid.

// Minimizes a strictly convex function on [a, b] x [c, d] (or a segment when
// c == d) by repeated 201-point grids, each zoomed 10x around the best point.
Vector grid_min_2d(const std::function<double(const Vector&)>& obj, Vector lo, Vector hi) {
  constexpr int kN = 200;
  Vector best = 0.5 * (lo + hi);
  for (int level = 0; level < 8; ++level) {
    double best_v = std::numeric_limits<double>::infinity();
    Vector arg = best;
    for (int i = 0; i <= kN; ++i) {
      for (int j = 0; j <= kN; ++j) {
        Vector x(2);
        x(0) = lo(0) + (hi(0) - lo(0)) * i / kN;
        x(1) = lo(1) + (hi(1) - lo(1)) * j / kN;
        const double v = obj(x);
        if (v < best_v) {
          best_v = v;
          arg = x;
        }
      }
    }
    best = arg;
    const Vector half = (hi - lo) / 20.0;
    const Vector new_lo = (best - half).cwiseMax(lo);
    const Vector new_hi = (best + half).cwiseMin(hi);
    lo = new_lo;
    hi = new_hi;
  }
  return best;
}

double grid_min_1d(const std::function<double(double)>& obj, double lo, double hi) {
  constexpr int kN = 2000;
  double best = 0.5 * (lo + hi);
  for (int level = 0; level < 6; ++level) {
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kN; ++i) {
      const double s = lo + (hi - lo) * i / kN;
      const double v = obj(s);
      if (v < best_v) {
        best_v = v;
        best = s;
      }
    }
    const double half = (hi - lo) / 200.0;
    lo = std::max(lo, best - half);
    hi = std::min(hi, best + half);
  }
  return best;
}

double kl_generalized(const Vector& x, const Vector& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) > 0.0) s += x(i) * std::log(x(i) / y(i));
    s += y(i) - x(i);
  }
  return s;
}

Outcome criterion1() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  int instances = 0;
  for (int k = 0; k < 1000; ++k) {
    const bool simplex = k % 2 == 0;
    const bool entropic = (k / 2) % 2 == 0;
    const optcoco::BregmanGeometry g =
        entropic ? optcoco::BregmanGeometry::entropic() : optcoco::BregmanGeometry::euclidean();
    const double eta = std::exp(std::log(0.01) + unif(rng) * std::log(1000.0));  // 0.01 .. 10
    Vector ell(2);
    ell << 4.0 * unif(rng) - 2.0, 4.0 * unif(rng) - 2.0;
    Vector got;
    Vector want;
    if (simplex) {
      const double s0 = 0.02 + 0.96 * unif(rng);
      Vector z(2);
      z << s0, 1.0 - s0;
      const optcoco::Domain dom = optcoco::Domain::simplex(2);
      got = optcoco::mirror_step(g, dom, z, ell, eta);
      auto obj = [&](double s) {
        Vector x(2);
        x << s, 1.0 - s;
        const double b = entropic ? kl_generalized(x, z) : 0.5 * (x - z).squaredNorm();
        return ell.dot(x) + b / eta;
      };
      const double s = grid_min_1d(obj, 0.0, 1.0);
      want = Vector(2);
      want << s, 1.0 - s;
    } else {
      Vector lo(2);
      Vector hi(2);
      for (int i = 0; i < 2; ++i) {
        const double a = entropic ? 0.05 + unif(rng) : 2.0 * unif(rng) - 1.0;
        lo(i) = a;
        hi(i) = a + 0.2 + unif(rng);
      }
      Vector z(2);
      for (int i = 0; i < 2; ++i) z(i) = lo(i) + (hi(i) - lo(i)) * (0.01 + 0.98 * unif(rng));
      const optcoco::Domain dom = optcoco::Domain::box(lo, hi);
      got = optcoco::mirror_step(g, dom, z, ell, eta);
      auto obj = [&](const Vector& x) {
        const double b = entropic ? kl_generalized(x, z) : 0.5 * (x - z).squaredNorm();
        return ell.dot(x) + b / eta;
      };
      want = grid_min_2d(obj, lo, hi);
    }
    const double gap = g.norms.primal_norm(got - want);
    worst = std::max(worst, gap);
    ++instances;
  }
  const double elapsed = seconds_since(start);
  out.check(worst <= 1e-4, "max primal gap " + fmt(worst) + " > 1e-4");
  out.check(elapsed < 60.0, "runtime " + fmt(elapsed) + " s >= 60 s");
  out.info(std::to_string(instances) + " instances, max primal-norm gap " + fmt(worst) + ", " + fmt(elapsed) + " s");
  return out;
}

// ---------------------------------------------------------------------------
// 2. Constant-rate bound.

json omd_config(const std::string& algorithm, json domain, json predictor, long horizon, long seed,
                const std::string& loss = "quadratic") {
  json c = {{"algorithm", algorithm},
            {"domain", std::move(domain)},
            {"environment", {{"loss", loss}, {"drift", 0.01}}},
            {"predictor", std::move(predictor)},
            {"horizon", horizon},
            {"seed", seed},
            {"instrument", true}};
  return c;
}

Outcome criterion2(Pool& pool) {
  Outcome out;
  constexpr double kEta = 0.5;
  constexpr double kBeta = 1.0;
  const json box = {{"kind", "box"}, {"dim", 2}, {"lower", -1}, {"upper", 1}};
  std::vector<json> configs;
  for (const char* loss : {"quadratic", "linear"}) {
    for (const char* pred : {"previous", "perfect"}) {
      for (long seed = 1; seed <= 5; ++seed) {
        json c = omd_config("omd", box, {{"kind", pred}}, 1000, seed, loss);
        c["eta"] = kEta;
        configs.push_back(c);
      }
    }
  }
  const auto results = run_all(configs);
  const double diameter = box_diameter(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  const double b = 0.5 * diameter * diameter;
  double worst_ratio = -std::numeric_limits<double>::infinity();
  double worst_regret = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = *results[i];
    pool.add("omd " + configs[i]["environment"]["loss"].get<std::string>() + " " +
                 configs[i]["predictor"]["kind"].get<std::string>() + " seed " +
                 std::to_string(configs[i]["seed"].get<long>()),
             results[i]);
    // smoothness 1 of both predictors and L_f = 1: alpha_f <= beta/eta holds
    const Vector u = unconstrained_comparator(r.config);
    const double regret = regret_series(r, u).back();
    const double bound = 2.0 * b / kEta + kEta / kBeta * r.trace.back().cum_err_f;
    out.check(regret <= bound, "run " + std::to_string(i) + ": regret " + fmt(regret) + " > bound " + fmt(bound));
    worst_ratio = std::max(worst_ratio, regret / bound);
    worst_regret = std::max(worst_regret, regret);
  }
  out.info(std::to_string(results.size()) +
           " runs (quadratic and linear losses, previous and perfect predictors, 5 seeds), eta=0.5, T=1000; "
           "max regret " + fmt(worst_regret) + ", max regret/bound " + fmt(worst_ratio));
  return out;
}

// ---------------------------------------------------------------------------
// 3. Adaptive-rate bound and sigma = 0 flatness.

Outcome criterion3(Pool& pool) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  const json ball = {{"kind", "ball"}, {"dim", 3}, {"center", 0}, {"radius", 1}};
  std::vector<json> configs;
  for (double sigma : {0.0, 0.1, 1.0, 10.0}) {
    json pred = sigma == 0.0 ? json{{"kind", "noisy"}, {"sigma", 0.0}} : json{{"kind", "noisy"}, {"sigma", sigma}};
    configs.push_back(omd_config("adagrad-omd", ball, pred, 10000, 7));
  }
  for (long horizon : {100L, 1000L}) {
    configs.push_back(omd_config("adagrad-omd", ball, {{"kind", "noisy"}, {"sigma", 0.0}}, horizon, 7));
  }
  for (double sigma : {0.0, 1.0}) {
    for (long horizon : {100L, 1000L, 10000L}) {
      configs.push_back(omd_config("adagrad-omd", ball, {{"kind", "noisy"}, {"sigma", sigma}}, horizon, 8, "linear"));
    }
  }
  const auto results = run_all(configs);
  const double b = 0.5 * 2.0 * 2.0;  // D = 2 for the unit ball
  const double beta = 1.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = *results[i];
    pool.add("adagrad " + configs[i]["environment"]["loss"].get<std::string>() + " sigma " +
                 fmt(configs[i]["predictor"]["sigma"].get<double>()) + " T " +
                 std::to_string(r.config.horizon),
             results[i]);
    const double l = r.final_lipschitz;
    const double e = r.trace.back().cum_err_f;
    const double regret = regret_series(r, unconstrained_comparator(r.config)).back();
    const double bound = 5.0 * std::sqrt(b / beta) * (std::sqrt(e) + std::sqrt(b) * l);
    out.check(regret <= bound, "sigma " + fmt(r.config.predictor.sigma) + " T " + std::to_string(r.config.horizon) +
                                   ": regret " + fmt(regret) + " > bound " + fmt(bound));
    out.info(configs[i]["environment"]["loss"].get<std::string>() + " sigma=" + fmt(r.config.predictor.sigma) +
             " T=" + std::to_string(r.config.horizon) + ": regret " +
             fmt(regret) + ", E_T " + fmt(e) + ", bound " + fmt(bound));
    if (r.config.predictor.sigma == 0.0) {
      const double flat = 5.0 * std::sqrt(b / beta) * std::sqrt(b) * l;
      out.check(regret <= flat, configs[i]["environment"]["loss"].get<std::string>() + " sigma 0, T " + std::to_string(r.config.horizon) + ": regret " + fmt(regret) +
                                    " > T-independent constant " + fmt(flat));
    }
  }
  const double elapsed = seconds_since(start);
  out.check(elapsed < 120.0, "runtime " + fmt(elapsed) + " s >= 120 s");
  out.info(fmt(elapsed) + " s");
  return out;
}

// ---------------------------------------------------------------------------
// 4. Experts bound.

Outcome criterion4(Pool& pool) {
  Outcome out;
  std::vector<json> configs;
  for (int d : {2, 16, 256}) {
    for (const char* loss : {"linear", "sign-flip"}) {
      for (const char* pred : {"zero", "previous"}) {
        configs.push_back({{"algorithm", "experts"},
                           {"domain", {{"kind", "simplex"}, {"dim", d}}},
                           {"environment", {{"loss", loss}, {"drift", 0.05}}},
                           {"predictor", {{"kind", pred}}},
                           {"horizon", 10000},
                           {"seed", 11}});
      }
    }
  }
  const auto results = run_all(configs);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = *results[i];
    pool.add("experts " + configs[i].dump(), results[i]);
    const optcoco::Environment env = environment_of(r.config);
    const Eigen::Index d = r.config.domain.dim();
    const long t_max = r.config.horizon;
    Vector cumulative = Vector::Zero(d);
    long double played = 0.0L;
    for (const auto& row : r.trace) {
      const auto f = env.generate_round(row.t).loss;
      cumulative += f.linear;  // loss value at e_i is linear_i + constant
      played += static_cast<long double>(row.loss) - f.constant;
    }
    const double regret = static_cast<double>(played) - cumulative.minCoeff();
    const double k = std::log(static_cast<double>(d) * d * t_max * std::exp(1.0));
    const double scale = env.bounds().loss_gradient_sup;
    const double bound = 2.0 * std::sqrt(k) * (std::sqrt(r.trace.back().cum_err_f) + scale);
    const std::string name = "d=" + std::to_string(d) + " " + configs[i]["environment"]["loss"].get<std::string>() +
                             " " + configs[i]["predictor"]["kind"].get<std::string>();
    out.check(regret <= bound, name + ": regret " + fmt(regret) + " > bound " + fmt(bound));
    out.info(name + ": regret " + fmt(regret) + ", bound " + fmt(bound));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 6. Constrained bounds in oracle-lambda mode.

struct CocoSetting {
  std::string inner;
  json domain;
  std::string loss;
};

std::vector<CocoSetting> coco_settings() {
  return {{"adagrad-omd", {{"kind", "box"}, {"dim", 2}, {"lower", -1}, {"upper", 1}}, "quadratic"},
          {"experts", {{"kind", "simplex"}, {"dim", 4}}, "linear"}};
}

struct Contract {
  double c;
  double psi_f;
  double psi_g;
};

Contract contract_of(const optcoco::RunResult& r) {
  const optcoco::Environment env = environment_of(r.config);
  if (r.config.inner == optcoco::InnerKind::kOptimisticOmd) {
    const double dia = r.config.domain.kind() == optcoco::DomainKind::kBox
                           ? box_diameter(r.config.domain.lower(), r.config.domain.upper())
                           : 2.0 * r.config.domain.radius();
    const double b = 0.5 * dia * dia;
    return {5.0 * std::sqrt(b), std::sqrt(b) * env.bounds().loss_lipschitz,
            std::sqrt(b) * env.bounds().constraint_lipschitz};
  }
  const double d = static_cast<double>(r.config.domain.dim());
  const double t = static_cast<double>(r.config.horizon);
  return {2.0 * std::sqrt(std::log(d * d * t) + 1.0), env.bounds().loss_gradient_sup,
          env.bounds().constraint_gradient_sup};
}

double ccv_bound(const optcoco::RunResult& r, const Contract& k, double e_f, double e_g) {
  const optcoco::Environment env = environment_of(r.config);
  const double g = env.bounds().constraint_bound;
  const double f = env.bounds().loss_bound;
  const double t = static_cast<double>(r.config.horizon);
  return 2.0 * (k.c * (std::sqrt(2.0 * e_g) + k.psi_g) + g) *
         std::log(2.0 * (k.c * (std::sqrt(2.0 * e_f) + k.psi_f) + 2.0 * f * t + 2.0));
}

Outcome criterion6(Pool& pool) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  std::vector<json> configs;
  for (const auto& s : coco_settings()) {
    for (const char* cons : {"fixed", "drifting", "switching"}) {
      for (const char* pred : {"perfect", "previous", "zero"}) {
        for (long seed : {21L, 22L, 23L}) {
          configs.push_back({{"algorithm", "coco"},
                             {"inner", s.inner},
                             {"domain", s.domain},
                             {"environment", {{"loss", s.loss}, {"constraint", cons}, {"drift", 0.01}}},
                             {"predictor", {{"kind", pred}}},
                             {"horizon", 10000},
                             {"seed", seed},
                             {"instrument", true}});
        }
      }
    }
  }
  const auto results = run_all(configs);
  int regret_failures = 0;
  int ccv_failures = 0;
  int rough_runs = 0;
  int rough_failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = *results[i];
    const std::string name = configs[i]["inner"].get<std::string>() + "/" +
                             configs[i]["environment"]["constraint"].get<std::string>() + "/" +
                             configs[i]["predictor"]["kind"].get<std::string>() + "/seed " +
                             std::to_string(configs[i]["seed"].get<long>());
    pool.add("coco " + name, results[i]);
    if (!r.comparator || !r.comparator->feasible) {
      out.check(false, name + ": no feasible comparator");
      continue;
    }
    const Contract k = contract_of(r);
    // lambda as calibrated from the run's estimate of E_g
    const double g = environment_of(r.config).bounds().constraint_bound;
    const double lambda = 1.0 / (2.0 * k.c * (std::sqrt(2.0 * r.lambda_error_estimate) + k.psi_g) + 2.0 * g);
    out.check(std::abs(lambda - r.lambda) <= 1e-12 * lambda, name + ": lambda " + fmt(r.lambda) + " != " + fmt(lambda));
    out.check(r.lambda_error_estimate >= r.trace.back().cum_err_g,
              name + ": E_g estimate " + fmt(r.lambda_error_estimate) + " below measured " + fmt(r.trace.back().cum_err_g));
    const auto regret = regret_series(r, r.comparator->u);
    bool regret_ok = true;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < regret.size(); ++t) {
      const double bound = k.c * (std::sqrt(2.0 * r.trace[t].cum_err_f) + k.psi_f) + 1.0;
      worst_excess = std::max(worst_excess, regret[t] - bound);
      if (regret[t] > bound) regret_ok = false;
    }
    const double cb = ccv_bound(r, k, r.trace.back().cum_err_f, r.lambda_error_estimate);
    const bool ccv_ok = r.trace.back().ccv <= cb;
    const bool rough = r.nonsmooth_rounds > 0;
    rough_runs += rough ? 1 : 0;
    if (!regret_ok) {
      ++regret_failures;
      rough_failures += rough ? 1 : 0;
      out.check(false, name + ": regret exceeds its bound by " + fmt(worst_excess) +
                           (rough ? " (surrogate prediction nonsmooth in " + std::to_string(r.nonsmooth_rounds) + " rounds)" : ""));
    }
    if (!ccv_ok) {
      ++ccv_failures;
      out.check(false, name + ": CCV " + fmt(r.trace.back().ccv) + " > bound " + fmt(cb));
    }
  }
  const double elapsed = seconds_since(start);
  out.check(elapsed < 300.0, "runtime " + fmt(elapsed) + " s >= 300 s");
  out.info(std::to_string(results.size()) + " runs; regret bound violated in " + std::to_string(regret_failures) +
           " (all with a nonsmooth surrogate prediction: " + (rough_failures == regret_failures ? "yes" : "no") +
           "), CCV bound violated in " + std::to_string(ccv_failures) + "; " + std::to_string(rough_runs) +
           " runs had a nonsmooth surrogate prediction; " + fmt(elapsed) + " s");
  return out;
}

// ---------------------------------------------------------------------------
// 7. Logarithmic CCV growth for a fixed known constraint.

Outcome criterion7(Pool& pool) {
  Outcome out;
  const std::vector<long> horizons = {1000, 10000, 100000};
  struct Env {
    std::string name;
    std::string loss;
  };
  for (const Env& e : {Env{"linear loss", "linear"}, Env{"quadratic drifting loss", "quadratic"}}) {
    std::vector<json> configs;
    for (long t : horizons) {
      configs.push_back({{"algorithm", "coco"},
                         {"inner", "adagrad-omd"},
                         {"domain", {{"kind", "box"}, {"dim", 2}, {"lower", -1}, {"upper", 1}}},
                         {"environment", {{"loss", e.loss}, {"constraint", "fixed"}, {"drift", 0.01}}},
                         {"predictor", {{"kind", "previous"}}},
                         {"constraint_predictor", {{"kind", "perfect"}}},
                         {"horizon", t},
                         {"seed", 31}});
    }
    const auto results = run_all(configs);
    std::vector<double> ccv;
    std::vector<double> bound;
    for (const auto& rp : results) {
      const auto& r = *rp;
      pool.add("log-T " + e.name + " T " + std::to_string(r.config.horizon), rp);
      out.check(r.trace.back().cum_err_g == 0.0, e.name + ": E_g " + fmt(r.trace.back().cum_err_g) + " != 0 with pred_g = grad g");
      ccv.push_back(r.trace.back().ccv);
      bound.push_back(ccv_bound(r, contract_of(r), r.trace.back().cum_err_f, 0.0));
    }
    double c = 0.0;
    for (std::size_t i = 0; i < horizons.size(); ++i) c = std::max(c, bound[i] / std::log(static_cast<double>(horizons[i])));
    for (std::size_t i = 0; i < horizons.size(); ++i) {
      const double cap = c * std::log(static_cast<double>(horizons[i]));
      out.check(ccv[i] <= cap, e.name + ", T=" + std::to_string(horizons[i]) + ": CCV " + fmt(ccv[i]) + " > c log T " + fmt(cap));
    }
    // ratio of the bounds' logarithmic factors (the prefactor is T-free)
    auto log_factor = [&](std::size_t i) {
      const auto& r = *results[i];
      const Contract k = contract_of(r);
      const optcoco::Environment env = environment_of(r.config);
      return std::log(2.0 * (k.c * (std::sqrt(2.0 * r.trace.back().cum_err_f) + k.psi_f) +
                             2.0 * env.bounds().loss_bound * static_cast<double>(horizons[i]) + 2.0));
    };
    const double allowed = log_factor(2) / log_factor(0) * 1.1;
    const double ratio = ccv[2] / ccv[0];
    out.check(ratio <= allowed, e.name + ": CCV(1e5)/CCV(1e3) = " + fmt(ratio) + " > " + fmt(allowed));
    out.info(e.name + ": CCV " + fmt(ccv[0]) + ", " + fmt(ccv[1]) + ", " + fmt(ccv[2]) + "; c = " + fmt(c) +
             "; growth ratio " + fmt(ratio) + " (allowed " + fmt(allowed) + ")");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 8. Zero predictor reduces to plain OMD.

Outcome criterion8() {
  Outcome out;
  // Euclidean: optimistic OMD with constant eta against projected gradient.
  {
    const optcoco::Domain box = optcoco::Domain::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
    optcoco::EnvironmentSpec spec;
    spec.loss = optcoco::LossFamily::kQuadratic;
    spec.seed = 41;
    const optcoco::Environment env(spec, box, optcoco::NormPair::l2());
    optcoco::ProblemBounds pb;
    pb.diameter = 2.0 * std::sqrt(2.0);
    pb.loss_bound = 4.0;
    pb.constraint_bound = 1.0;
    pb.loss_lipschitz = 1.0;
    pb.constraint_lipschitz = 1.0;
    pb.loss_smoothness = 0.0;
    pb.bregman_radius = 4.0;
    constexpr double kEta = 0.3;
    optcoco::OptimisticOmd learner(optcoco::BregmanGeometry::euclidean(), box, pb, optcoco::ConstantRate{kEta},
                                   std::nullopt, true);
    Vector plain = Vector::Zero(2);
    long double regret_learner = 0.0L;
    long double regret_plain = 0.0L;
    bool identical = true;
    double worst = 0.0;
    const Vector u = Vector::Constant(2, 0.25);
    for (long t = 1; t <= 2000; ++t) {
      const auto f = env.generate_round(t).loss;
      const auto rec = learner.round(f.oracle(), optcoco::FirstOrderOracle::zero(2));
      identical = identical && (rec.played.array() == rec.anchor.array()).all();
      regret_learner += f.value(rec.played) - f.value(u);
      regret_plain += f.value(plain) - f.value(u);
      worst = std::max(worst, std::abs(static_cast<double>(regret_learner - regret_plain)));
      plain = (plain - kEta * f.gradient(plain)).cwiseMax(-1.0).cwiseMin(1.0);
    }
    out.check(identical, "euclidean: x_t differs from the anchor");
    out.check(worst <= 1e-9, "euclidean: regret trace differs from plain OMD by " + fmt(worst));
    out.info("euclidean box, 2000 rounds: x_t == anchor bitwise: " + std::string(identical ? "yes" : "no") +
             "; max regret-trace gap vs projected gradient " + fmt(worst));
  }
  // Entropic: optimistic OMD on the simplex against multiplicative weights.
  {
    constexpr Eigen::Index kD = 5;
    const optcoco::Domain simplex = optcoco::Domain::simplex(kD);
    optcoco::EnvironmentSpec spec;
    spec.loss = optcoco::LossFamily::kLinear;
    spec.drift = 0.05;
    spec.seed = 42;
    const optcoco::Environment env(spec, simplex, optcoco::NormPair::l1());
    optcoco::ProblemBounds pb;
    pb.diameter = 2.0;
    pb.loss_bound = 1.0;
    pb.constraint_bound = 1.0;
    pb.loss_lipschitz = 1.0;
    pb.constraint_lipschitz = 1.0;
    pb.loss_smoothness = 0.0;
    pb.bregman_radius = std::log(static_cast<double>(kD));
    constexpr double kEta = 0.2;
    optcoco::OptimisticOmd learner(optcoco::BregmanGeometry::entropic(), simplex, pb, optcoco::ConstantRate{kEta},
                                   std::nullopt, true);
    Vector weights = Vector::Constant(kD, 1.0 / kD);
    long double regret_learner = 0.0L;
    long double regret_plain = 0.0L;
    double gap = 0.0;
    double worst = 0.0;
    const Vector u = Vector::Unit(kD, 0);
    for (long t = 1; t <= 2000; ++t) {
      const auto f = env.generate_round(t).loss;
      const auto rec = learner.round(f.oracle(), optcoco::FirstOrderOracle::zero(kD));
      gap = std::max(gap, (rec.played - rec.anchor).lpNorm<Eigen::Infinity>());
      regret_learner += f.value(rec.played) - f.value(u);
      regret_plain += f.value(weights) - f.value(u);
      worst = std::max(worst, std::abs(static_cast<double>(regret_learner - regret_plain)));
      const Vector g = f.gradient(weights);
      for (Eigen::Index i = 0; i < kD; ++i) weights(i) *= std::exp(-kEta * g(i));
      weights /= weights.sum();
    }
    out.check(gap <= 1e-12, "entropic: |x_t - anchor| = " + fmt(gap) + " > 1e-12");
    out.check(worst <= 1e-9, "entropic: regret trace differs from multiplicative weights by " + fmt(worst));
    out.info("entropic simplex, 2000 rounds: max |x_t - anchor| " + fmt(gap) +
             "; max regret-trace gap vs multiplicative weights " + fmt(worst));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 5 and 9 over the pooled runs.

Outcome criterion5(const Pool& pool) {
  Outcome out;
  long step_rounds = 0;
  long decomposition_rounds = 0;
  long nominal_only = 0;
  double nominal_min = std::numeric_limits<double>::infinity();
  double worst_step = std::numeric_limits<double>::infinity();
  double worst_decomposition = std::numeric_limits<double>::infinity();
  int instrumented = 0;
  for (std::size_t i = 0; i < pool.runs.size(); ++i) {
    const auto& r = *pool.runs[i];
    if (!r.config.instrument) continue;
    ++instrumented;
    for (std::size_t t = 0; t < r.step_slacks.size(); ++t) {
      if (r.step_precondition[t]) {
        ++step_rounds;
        worst_step = std::min(worst_step, r.step_slacks[t]);
        if (r.step_slacks[t] < -1e-9) {
          out.check(false, pool.names[i] + ": step slack " + fmt(r.step_slacks[t]) + " at t=" + std::to_string(t + 1));
          break;
        }
      } else if (r.step_nominal_precondition[t]) {
        ++nominal_only;
        nominal_min = std::min(nominal_min, r.step_slacks[t]);
      }
    }
    for (std::size_t t = 0; t < r.decomposition_slacks.size(); ++t) {
      ++decomposition_rounds;
      worst_decomposition = std::min(worst_decomposition, r.decomposition_slacks[t]);
      if (r.decomposition_slacks[t] < -1e-9) {
        out.check(false, pool.names[i] + ": decomposition slack " + fmt(r.decomposition_slacks[t]) + " at t=" +
                             std::to_string(t + 1));
        break;
      }
    }
    if (r.config.algorithm == optcoco::Algorithm::kCoco && r.comparator && r.comparator->feasible) {
      out.check(r.decomposition_slacks.size() == r.trace.size(), pool.names[i] + ": decomposition not checked at every t");
    }
  }
  out.info(std::to_string(instrumented) + " instrumented runs; decomposition: " + std::to_string(decomposition_rounds) +
           " rounds, min slack " + fmt(worst_decomposition));
  out.info("step inequality: " + std::to_string(step_rounds) +
           " rounds with smoothness <= beta/sqrt(2 eta_t eta_{t+1}), min slack " + fmt(worst_step));
  out.info("not judged: " + std::to_string(nominal_only) +
           " rounds meeting only smoothness <= beta/eta_t, min slack " + fmt(nominal_min));
  return out;
}

Outcome criterion9(const Pool& pool) {
  Outcome out;
  double worst_ccv = 0.0;
  double worst_err = 0.0;
  long coco_runs = 0;
  for (std::size_t i = 0; i < pool.runs.size(); ++i) {
    const auto& r = *pool.runs[i];
    long double sf = 0.0L;
    long double sg = 0.0L;
    for (const auto& row : r.trace) {
      sf += row.err_f;
      sg += row.err_g;
      auto rel = [](double a, double b) {
        const double s = std::max(std::abs(a), std::abs(b));
        return s == 0.0 ? 0.0 : std::abs(a - b) / s;
      };
      worst_err = std::max({worst_err, rel(static_cast<double>(sf), row.cum_err_f), rel(static_cast<double>(sg), row.cum_err_g)});
      if (r.config.algorithm == optcoco::Algorithm::kCoco && r.config.lambda_mode == optcoco::LambdaMode::kOracle) {
        worst_ccv = std::max(worst_ccv, rel(row.ccv, row.queue / r.lambda));
      }
    }
    if (r.config.algorithm == optcoco::Algorithm::kCoco) ++coco_runs;
  }
  out.check(worst_ccv <= 1e-12, "max relative |CCV_t - Q_{t+1}/lambda| " + fmt(worst_ccv));
  out.check(worst_err <= 1e-12, "max relative |E_t - sum eps| " + fmt(worst_err));
  out.info(std::to_string(pool.runs.size()) + " runs (" + std::to_string(coco_runs) + " constrained); max gaps " +
           fmt(worst_ccv) + " (CCV) and " + fmt(worst_err) + " (E)");
  return out;
}

// ---------------------------------------------------------------------------
// 10. KL mixing and Pinsker.

Vector random_simplex(std::mt19937_64& rng, Eigen::Index d, double concentration) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  Vector x(d);
  for (Eigen::Index i = 0; i < d; ++i) x(i) = gamma(rng);
  if (x.sum() <= 0.0) x(0) = 1.0;
  return x / x.sum();
}

double kl(const Vector& p, const Vector& q) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) s += p(i) * std::log(p(i) / q(i));
  }
  return s;
}

Outcome criterion10() {
  Outcome out;
  std::mt19937_64 rng(20261010);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> dim(2, 32);
  double worst_mix = std::numeric_limits<double>::infinity();
  double worst_pinsker = std::numeric_limits<double>::infinity();
  double worst_agreement = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Index d = dim(rng);
    const double conc = std::pow(10.0, -2.0 + 3.0 * unif(rng));
    Vector u = random_simplex(rng, d, conc);
    if (k % 4 == 0) u = Vector::Unit(d, k % d);
    const Vector anchor = random_simplex(rng, d, conc).cwiseMax(1e-300);
    const Vector anchor_n = anchor / anchor.sum();
    const double delta = std::pow(10.0, -4.0 * unif(rng));
    const Vector y = (1.0 - delta) * anchor_n + Vector::Constant(d, delta / static_cast<double>(d));
    const double lhs = kl(u, y);
    const double s1 = delta * std::log(static_cast<double>(d)) + kl(u, anchor_n) - lhs;
    const double s2 = std::log(static_cast<double>(d) / delta) - lhs;
    const auto [l1, l2] = optcoco::kl_mixing_check(u, anchor_n, delta, d);
    worst_mix = std::min({worst_mix, l1, l2});
    if (std::isfinite(s1)) worst_agreement = std::max(worst_agreement, std::abs(l1 - s1) / std::max(1.0, std::abs(s1)));
    worst_agreement = std::max(worst_agreement, std::abs(l2 - s2) / std::max(1.0, std::abs(s2)));

    const Vector p = random_simplex(rng, d, conc);
    const Vector q = random_simplex(rng, d, conc).cwiseMax(1e-300);
    const Vector qn = q / q.sum();
    const double own = kl(p, qn) - 0.5 * std::pow((p - qn).lpNorm<1>(), 2);
    const double lib = optcoco::pinsker_slack(p, qn);
    worst_pinsker = std::min(worst_pinsker, lib);
    if (std::isfinite(own)) worst_agreement = std::max(worst_agreement, std::abs(lib - own) / std::max(1.0, std::abs(own)));
  }
  out.check(worst_mix >= -1e-10, "min KL-mixing slack " + fmt(worst_mix));
  out.check(worst_pinsker >= -1e-10, "min Pinsker slack " + fmt(worst_pinsker));
  out.check(worst_agreement <= 1e-9, "library slacks disagree with direct evaluation by " + fmt(worst_agreement));
  out.info("1000 mixing triples, min slack " + fmt(worst_mix) + "; 1000 Pinsker pairs, min slack " + fmt(worst_pinsker) +
           "; max disagreement with direct evaluation " + fmt(worst_agreement));
  return out;
}

}  // namespace

int main() {
  Pool pool;
  struct Entry {
    int id;
    std::string title;
    std::function<Outcome()> fn;
  };
  std::vector<Entry> entries = {
      {1, "mirror step matches dense-grid brute force", criterion1},
      {2, "constant-rate regret bound", [&] { return criterion2(pool); }},
      {3, "adaptive-rate regret bound and sigma=0 flatness", [&] { return criterion3(pool); }},
      {4, "experts regret bound", [&] { return criterion4(pool); }},
      {6, "constrained regret and CCV bounds (oracle lambda)", [&] { return criterion6(pool); }},
      {7, "logarithmic CCV growth for a fixed known constraint", [&] { return criterion7(pool); }},
      {8, "zero predictor reduces to plain OMD", criterion8},
      {5, "regret-decomposition and one-step slacks", [&] { return criterion5(pool); }},
      {9, "exact accounting identities", [&] { return criterion9(pool); }},
      {10, "KL-mixing and Pinsker inequalities", criterion10},
  };
  std::vector<std::pair<int, std::string>> summary;
  bool all = true;
  for (const auto& e : entries) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o.check(false, std::string("exception: ") + ex.what());
    }
    all = all && o.pass;
    std::printf("criterion %d: %s  %s  (%.1f s)\n", e.id, o.pass ? "PASS" : "FAIL", e.title.c_str(), seconds_since(start));
    for (const auto& line : o.lines) std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
