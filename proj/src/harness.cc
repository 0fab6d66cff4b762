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

#include "optcoco/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <set>
#include <sstream>

#include "optcoco/experts.hpp"
#include "optcoco/omd.hpp"

namespace optcoco {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlackTolerance = 1e-9;
constexpr double kIdentityTolerance = 1e-12;
constexpr int kMaxLambdaIterations = 16;
constexpr double kLambdaMargin = 1.1;
constexpr double kLambdaResolution = 0.05;

// ---------------------------------------------------------------------------
// Config parsing

int line_of_key(const std::string& text, const std::string& pointer) {
  if (text.empty() || pointer.empty()) return 0;
  // Find each object key of the pointer in turn, each after the previous
  // one; array indices resolve to their parent key.
  std::size_t pos = 0;
  bool found = false;
  std::size_t begin = 1;
  while (begin <= pointer.size()) {
    std::size_t end = pointer.find('/', begin);
    if (end == std::string::npos) end = pointer.size();
    const std::string key = pointer.substr(begin, end - begin);
    begin = end + 1;
    if (key.empty() || std::all_of(key.begin(), key.end(), ::isdigit)) continue;
    const std::size_t at = text.find("\"" + key + "\"", pos);
    if (at == std::string::npos) break;
    pos = at;
    found = true;
  }
  if (!found) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class ConfigReader {
 public:
  ConfigReader(const json& root, const std::string& text) : root_(root), text_(text) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    throw ConfigError(pointer, line_of_key(text_, pointer), message);
  }

  void only_keys(const json& obj, const std::string& pointer, std::set<std::string> allowed) const {
    if (!obj.is_object()) fail(pointer, "expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.count(key)) fail(pointer + "/" + key, "unknown key '" + key + "'");
    }
  }

  const json* find(const json& obj, const std::string& key) const {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  std::string string(const json& obj, const std::string& pointer, const std::string& key,
                     const std::optional<std::string>& fallback = std::nullopt) const {
    const json* v = find(obj, key);
    if (!v) {
      if (fallback) return *fallback;
      fail(pointer + "/" + key, "missing required key '" + key + "'");
    }
    if (!v->is_string()) fail(pointer + "/" + key, "expected a string");
    return v->get<std::string>();
  }

  double number(const json& obj, const std::string& pointer, const std::string& key,
                const std::optional<double>& fallback = std::nullopt) const {
    const json* v = find(obj, key);
    if (!v) {
      if (fallback) return *fallback;
      fail(pointer + "/" + key, "missing required key '" + key + "'");
    }
    if (!v->is_number()) fail(pointer + "/" + key, "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(pointer + "/" + key, "expected a finite number");
    return x;
  }

  long integer(const json& obj, const std::string& pointer, const std::string& key,
               const std::optional<long>& fallback = std::nullopt) const {
    const json* v = find(obj, key);
    if (!v) {
      if (fallback) return *fallback;
      fail(pointer + "/" + key, "missing required key '" + key + "'");
    }
    if (!v->is_number_integer()) fail(pointer + "/" + key, "expected an integer");
    return v->get<long>();
  }

  bool boolean(const json& obj, const std::string& pointer, const std::string& key, bool fallback) const {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(pointer + "/" + key, "expected true or false");
    return v->get<bool>();
  }

  // A scalar broadcasts to all coordinates.
  Vector vector(const json& obj, const std::string& pointer, const std::string& key, Eigen::Index dim) const {
    const json* v = find(obj, key);
    const std::string here = pointer + "/" + key;
    if (!v) fail(here, "missing required key '" + key + "'");
    if (v->is_number()) return Vector::Constant(dim, v->get<double>());
    if (!v->is_array()) fail(here, "expected a number or an array");
    if (static_cast<Eigen::Index>(v->size()) != dim) {
      fail(here, "expected " + std::to_string(dim) + " entries");
    }
    Vector out(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const json& e = (*v)[static_cast<std::size_t>(i)];
      if (!e.is_number()) fail(here + "/" + std::to_string(i), "expected a number");
      out(i) = e.get<double>();
    }
    if (!out.allFinite()) fail(here, "entries must be finite");
    return out;
  }

  const json& root() const { return root_; }

 private:
  const json& root_;
  const std::string& text_;
};

template <typename E>
E pick(const ConfigReader& r, const std::string& pointer, const std::string& value,
       std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    names += names.empty() ? "" : ", ";
    names += name;
  }
  r.fail(pointer, "'" + value + "' is not one of: " + names);
}

Domain parse_domain(const ConfigReader& r, const json& d) {
  const std::string p = "/domain";
  const std::string kind = r.string(d, p, "kind");
  const long dim = r.integer(d, p, "dim");
  if (dim < 1) r.fail(p + "/dim", "dimension must be >= 1");
  try {
    if (kind == "box") {
      r.only_keys(d, p, {"kind", "dim", "lower", "upper"});
      return Domain::box(r.vector(d, p, "lower", dim), r.vector(d, p, "upper", dim));
    }
    if (kind == "ball") {
      r.only_keys(d, p, {"kind", "dim", "center", "radius"});
      return Domain::ball(r.vector(d, p, "center", dim), r.number(d, p, "radius"));
    }
    if (kind == "simplex") {
      r.only_keys(d, p, {"kind", "dim"});
      return Domain::simplex(dim);
    }
    if (kind == "halfspaces") {
      r.only_keys(d, p, {"kind", "dim", "lower", "upper", "normals", "offsets"});
      const json* normals = r.find(d, "normals");
      if (!normals || !normals->is_array()) r.fail(p + "/normals", "expected an array of rows");
      const auto m = static_cast<Eigen::Index>(normals->size());
      Eigen::MatrixXd a(m, dim);
      for (Eigen::Index k = 0; k < m; ++k) {
        const std::string row = p + "/normals/" + std::to_string(k);
        const json& rj = (*normals)[static_cast<std::size_t>(k)];
        if (!rj.is_array() || static_cast<Eigen::Index>(rj.size()) != dim) {
          r.fail(row, "expected " + std::to_string(dim) + " entries");
        }
        for (Eigen::Index i = 0; i < dim; ++i) {
          if (!rj[static_cast<std::size_t>(i)].is_number()) r.fail(row, "expected numbers");
          a(k, i) = rj[static_cast<std::size_t>(i)].get<double>();
        }
      }
      return Domain::halfspaces(r.vector(d, p, "lower", dim), r.vector(d, p, "upper", dim), a,
                                r.vector(d, p, "offsets", m));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    r.fail(p, e.what());
  }
  r.fail(p + "/kind", "'" + kind + "' is not one of: box, ball, simplex, halfspaces");
}

PredictorSpec parse_predictor(const ConfigReader& r, const json& j, const std::string& p) {
  r.only_keys(j, p, {"kind", "sigma"});
  PredictorSpec s;
  s.kind = pick<PredictorKind>(r, p + "/kind", r.string(j, p, "kind"),
                               {{"zero", PredictorKind::kZero},
                                {"previous", PredictorKind::kPrevious},
                                {"perfect", PredictorKind::kPerfect},
                                {"noisy", PredictorKind::kNoisyPerfect}});
  s.sigma = r.number(j, p, "sigma", 0.0);
  if (s.sigma < 0.0) r.fail(p + "/sigma", "noise scale must be >= 0");
  if (s.kind != PredictorKind::kNoisyPerfect && s.sigma != 0.0) {
    r.fail(p + "/sigma", "sigma is only meaningful for the noisy predictor");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Formatting and files

void write_atomically(const std::filesystem::path& file, const std::string& content) {
  const std::filesystem::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

std::filesystem::path sidecar_path(const std::filesystem::path& trace_file) {
  std::filesystem::path p = trace_file;
  p.replace_extension(".json");
  return p;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// ---------------------------------------------------------------------------
// Shared run pieces

Environment make_environment(const RunConfig& cfg) {
  EnvironmentSpec spec = cfg.environment;
  spec.seed = cfg.seed;
  return Environment(spec, cfg.domain, cfg.geometry().norms);
}

void fill_regret(std::vector<TraceRow>& trace, const std::vector<QuadraticForm>& losses, const Vector& u) {
  CompensatedSum regret;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    regret.add(trace[i].loss - losses[i].value(u));
    trace[i].regret = regret.value();
  }
}

ReportRow upper_bound_row(std::string name, double measured, double bound, std::string note = "") {
  return {std::move(name), measured, bound, measured <= bound ? Status::kPass : Status::kFail,
          std::move(note)};
}

ReportRow slack_row(std::string name, const std::vector<double>& slacks,
                    const std::vector<bool>* applicable, double tolerance) {
  double worst = kInf;
  long used = 0;
  long at = 0;
  for (std::size_t i = 0; i < slacks.size(); ++i) {
    if (applicable && !(*applicable)[i]) continue;
    ++used;
    if (slacks[i] < worst) {
      worst = slacks[i];
      at = static_cast<long>(i) + 1;
    }
  }
  ReportRow row;
  row.name = std::move(name);
  row.bound = -tolerance;
  if (used == 0) {
    row.measured = 0.0;
    row.status = Status::kPreconditionUnmet;
    row.note = "no round met the precondition";
    return row;
  }
  row.measured = worst;
  row.status = worst >= -tolerance ? Status::kPass : Status::kFail;
  row.note = "min slack at t=" + std::to_string(at) + " over " + std::to_string(used) + " of " +
             std::to_string(slacks.size()) + " rounds";
  return row;
}

// Rounds that meet smoothness <= beta/eta_t but not the sqrt(2) stronger
// condition; the one-step inequality is not guaranteed there, so the
// minimum slack is reported, not judged.
ReportRow nominal_step_row(const RunResult& res) {
  std::vector<bool> only_nominal(res.step_slacks.size());
  for (std::size_t i = 0; i < only_nominal.size(); ++i) {
    only_nominal[i] = res.step_nominal_precondition[i] && !res.step_precondition[i];
  }
  ReportRow row = slack_row("step-inequality-nominal-only", res.step_slacks, &only_nominal, kSlackTolerance);
  row.status = Status::kReported;
  return row;
}

// Marks a bound row whose theorem assumptions were observed to fail; the
// measured-vs-bound comparison stays in the note.
void gate(ReportRow& row, const std::string& reason) {
  if (row.status != Status::kPass && row.status != Status::kFail) return;
  row.note = reason + "; bound " + (row.status == Status::kPass ? "holds" : "exceeded") +
             (row.note.empty() ? "" : "; " + row.note);
  row.status = Status::kPreconditionUnmet;
}

ReportRow accounting_row(const std::vector<TraceRow>& trace) {
  CompensatedSum f;
  CompensatedSum g;
  double worst = 0.0;
  for (const auto& r : trace) {
    f.add(r.err_f);
    g.add(r.err_g);
    worst = std::max({worst, relative_gap(f.value(), r.cum_err_f), relative_gap(g.value(), r.cum_err_g)});
  }
  return upper_bound_row("error-accounting", worst, kIdentityTolerance,
                         "max relative gap between E_t and the sum of eps");
}

ReportRow comparator_row(const ComparatorResult& c) {
  ReportRow row{"comparator-feasible", c.max_violation, kFeasibilityTolerance,
                c.feasible ? Status::kPass : Status::kFail,
                std::string(to_string(c.method)) + (c.report.empty() ? "" : ": " + c.report)};
  return row;
}

std::vector<QuadraticForm> constraint_forms(const std::vector<RoundFunctions>& fns) {
  std::vector<QuadraticForm> out;
  out.reserve(fns.size());
  for (const auto& f : fns) out.push_back(f.constraint);
  return out;
}

std::vector<QuadraticForm> loss_forms(const std::vector<RoundFunctions>& fns) {
  std::vector<QuadraticForm> out;
  out.reserve(fns.size());
  for (const auto& f : fns) out.push_back(f.loss);
  return out;
}

// ---------------------------------------------------------------------------
// Unconstrained optimistic OMD

RunResult run_omd(const RunConfig& cfg) {
  RunResult res;
  res.config = cfg;
  const BregmanGeometry geometry = cfg.geometry();
  const Environment env = make_environment(cfg);
  const DeclaredBounds& db = env.bounds();
  const bool adaptive = cfg.algorithm == Algorithm::kAdagradOmd;

  ProblemBounds pb;
  pb.diameter = cfg.domain.diameter(geometry.norms.primal());
  pb.loss_bound = db.loss_bound;
  pb.constraint_bound = db.constraint_bound;
  pb.loss_lipschitz = db.loss_lipschitz;
  pb.constraint_lipschitz = db.constraint_lipschitz;
  pb.loss_smoothness = predictor_smoothness(cfg.predictor, env, PredictionTarget::kLoss);
  pb.constraint_smoothness = predictor_smoothness(cfg.constraint_predictor, env, PredictionTarget::kConstraint);
  pb.bregman_radius = euclidean_bregman_radius(cfg.domain);
  res.bregman_radius = pb.bregman_radius;

  const RateSchedule rate = adaptive ? RateSchedule(AdaptiveRate{}) : RateSchedule(ConstantRate{*cfg.eta});
  OptimisticOmd learner(geometry, cfg.domain, pb, rate, std::nullopt, cfg.instrument);
  learner.set_initial_prediction(make_predictor(cfg.predictor, env, PredictionTarget::kLoss, 1));

  std::vector<QuadraticForm> losses;
  std::vector<OmdRecord> records;
  losses.reserve(static_cast<std::size_t>(cfg.horizon));
  CompensatedSum ccv;
  for (long t = 1; t <= cfg.horizon; ++t) {
    const RoundFunctions fns = env.generate_round(t);
    OmdRecord rec = learner.round(fns.loss.oracle(),
                                  make_predictor(cfg.predictor, env, PredictionTarget::kLoss, t + 1),
                                  db.loss_lipschitz);
    TraceRow row;
    row.t = t;
    row.loss = rec.loss;
    row.constraint = fns.constraint.value(rec.played);
    row.violation = std::max(row.constraint, 0.0);
    ccv.add(row.violation);
    row.ccv = ccv.value();
    row.eta = rec.eta;
    row.err_f = rec.error;
    row.cum_err_f = rec.cumulative_error;
    res.trace.push_back(row);
    losses.push_back(fns.loss);
    if (cfg.instrument) {
      res.played.push_back(rec.played);
      res.anchors.push_back(rec.anchor);
      records.push_back(std::move(rec));
    }
  }
  res.final_lipschitz = learner.lipschitz();

  ComparatorResult comp = solve_comparator(losses, {}, cfg.domain, cfg.comparator);
  res.u = comp.u;
  fill_regret(res.trace, losses, res.u);
  res.report.rows.push_back(comparator_row(comp));
  res.comparator = std::move(comp);

  const double regret = res.final_regret();
  const double total_error = res.total_loss_error();
  if (adaptive) {
    res.constant = 5.0 * std::sqrt(pb.bregman_radius / geometry.beta);
    res.loss_psi = std::sqrt(pb.bregman_radius) * res.final_lipschitz;
    res.report.rows.push_back(upper_bound_row(
        "thm2-regret", regret,
        regret_bound_thm2(pb.bregman_radius, geometry.beta, total_error, res.final_lipschitz)));
  } else {
    const double eta = *cfg.eta;
    const double cap = geometry.beta / eta;
    ReportRow row = upper_bound_row("thm1-regret", regret,
                                    regret_bound_thm1(pb.bregman_radius, eta, total_error, geometry.beta));
    if (pb.loss_smoothness > cap || pb.loss_lipschitz > cap) {
      row.status = Status::kPreconditionUnmet;
      row.note = "needs alpha_f <= beta/eta and L_f <= beta/eta";
    }
    res.report.rows.push_back(row);
  }

  if (cfg.instrument) {
    for (const auto& rec : records) {
      const StepCheck c = step_inequality_check(geometry, rec, res.u);
      res.step_slacks.push_back(c.slack);
      res.step_precondition.push_back(c.precondition_met);
      res.step_nominal_precondition.push_back(c.nominal_precondition_met);
    }
    res.report.rows.push_back(slack_row("step-inequality", res.step_slacks, &res.step_precondition,
                                        kSlackTolerance));
    res.report.rows.push_back(nominal_step_row(res));
    if (cfg.predictor.kind == PredictorKind::kZero) {
      double worst = 0.0;
      for (std::size_t i = 0; i < res.played.size(); ++i) {
        worst = std::max(worst, (res.played[i] - res.anchors[i]).lpNorm<Eigen::Infinity>());
      }
      res.report.rows.push_back(upper_bound_row("zero-predictor-reduction", worst, 0.0,
                                                "max |x_t - anchor_t|"));
    }
  }
  res.report.rows.push_back(accounting_row(res.trace));
  return res;
}

// ---------------------------------------------------------------------------
// Experts

RunResult run_experts(const RunConfig& cfg) {
  RunResult res;
  res.config = cfg;
  const Environment env = make_environment(cfg);
  const Eigen::Index d = cfg.domain.dim();
  const ExpertConfig ec = ExpertConfig::for_horizon(d, cfg.horizon);
  const double scale = env.bounds().loss_gradient_sup;
  const RateSchedule rate = cfg.eta ? RateSchedule(ConstantRate{*cfg.eta}) : RateSchedule(AdaptiveRate{});
  OptimisticHedge hedge(ec, rate, scale);
  hedge.set_initial_prediction(
      make_predictor(cfg.predictor, env, PredictionTarget::kLoss, 1)(hedge.mixed_anchor()).gradient);

  std::vector<QuadraticForm> losses;
  std::vector<Vector> next_anchors;
  std::vector<Vector> mixed;
  CompensatedSum ccv;
  double worst_floor = kInf;
  double worst_simplex = 0.0;
  for (long t = 1; t <= cfg.horizon; ++t) {
    const RoundFunctions fns = env.generate_round(t);
    const Vector x = hedge.action();
    const Vector loss_vector = fns.loss.gradient(x);
    const FirstOrderOracle next = make_predictor(cfg.predictor, env, PredictionTarget::kLoss, t + 1);
    ExpertRecord rec = hedge.round(
        loss_vector, OptimisticHedge::PredictionAt([&next](const Vector& y) { return next(y).gradient; }));
    TraceRow row;
    row.t = t;
    row.loss = fns.loss.value(x);
    row.constraint = fns.constraint.value(x);
    row.violation = std::max(row.constraint, 0.0);
    ccv.add(row.violation);
    row.ccv = ccv.value();
    row.eta = rec.eta;
    row.err_f = rec.error;
    row.cum_err_f = rec.cumulative_error;
    res.trace.push_back(row);
    losses.push_back(fns.loss);
    worst_floor = std::min(worst_floor, rec.next_mixed.minCoeff() - ec.delta / static_cast<double>(d));
    for (const Vector* p : {&rec.played, &rec.next_anchor, &rec.next_mixed}) {
      worst_simplex = std::max({worst_simplex, std::abs(p->sum() - 1.0), -p->minCoeff()});
    }
    if (cfg.instrument) {
      res.played.push_back(rec.played);
      next_anchors.push_back(rec.next_anchor);
    }
  }

  // best expert, exactly
  QuadraticForm total{0.0, Vector::Zero(d), 0.0};
  for (const auto& f : losses) total += f;
  Eigen::Index best = 0;
  double best_value = kInf;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double v = total.value(Vector::Unit(d, i));
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  res.u = Vector::Unit(d, best);
  fill_regret(res.trace, losses, res.u);
  res.constant = 2.0 * std::sqrt(ec.log_term());
  res.loss_psi = hedge.scale();
  res.final_lipschitz = hedge.scale();

  ReportRow thm3 = upper_bound_row("thm3-regret", res.final_regret(),
                                   regret_bound_thm3(d, cfg.horizon, res.total_loss_error(), hedge.scale()));
  if (hedge.scale() != 1.0) thm3.note = "loss sup-norm scale " + format_double(hedge.scale());
  res.report.rows.push_back(thm3);
  res.report.rows.push_back(upper_bound_row("simplex-feasibility", worst_simplex, 1e-9));
  res.report.rows.push_back(upper_bound_row("mixing-floor", -worst_floor, 1e-15, "negated min of y - delta/d"));
  if (cfg.instrument) {
    std::vector<double> first;
    std::vector<double> second;
    for (const auto& a : next_anchors) {
      const auto [s1, s2] = kl_mixing_check(res.u, a, ec.delta, d);
      first.push_back(s1);
      second.push_back(s2);
    }
    res.report.rows.push_back(slack_row("kl-mixing-shift", first, nullptr, 1e-10));
    res.report.rows.push_back(slack_row("kl-mixing-cap", second, nullptr, 1e-10));
  }
  res.report.rows.push_back(accounting_row(res.trace));
  return res;
}

// ---------------------------------------------------------------------------
// Constrained runs

struct CocoSimulation {
  std::vector<CocoRecord> records;
  std::vector<RoundFunctions> functions;
  double lambda = 0.0;
  double constant = 0.0;
  double loss_psi = 0.0;
  double constraint_psi = 0.0;
  double final_lipschitz = 0.0;
  std::string failure;
  double loss_error = 0.0;
  double constraint_error = 0.0;
  /// Rounds whose surrogate prediction was observed to be rougher than the
  /// inner learner allows (smoothness > sqrt(beta) L); the clipped g+ term
  /// makes the prediction discontinuous across the constraint boundary.
  long nonsmooth_rounds = 0;
  BregmanGeometry geometry;
};

RegretContract contract_for(const RunConfig& cfg, long length) {
  if (cfg.inner == InnerKind::kOptimisticHedge) return RegretContract::for_hedge(cfg.domain.dim(), length);
  return RegretContract::for_adaptive_omd(euclidean_bregman_radius(cfg.domain), cfg.geometry().beta);
}

CocoSimulation simulate_coco(const RunConfig& cfg, const Environment& env, long start, long length,
                             double error_estimate) {
  CocoSimulation sim;
  sim.geometry = cfg.geometry();
  const DeclaredBounds& db = env.bounds();
  const RegretContract contract = contract_for(cfg, length);
  const bool hedge = cfg.inner == InnerKind::kOptimisticHedge;
  const double loss_constant = hedge ? db.loss_gradient_sup : db.loss_lipschitz;
  const double constraint_constant = hedge ? db.constraint_gradient_sup : db.constraint_lipschitz;
  sim.constant = contract.constant;
  sim.loss_psi = contract.psi(loss_constant);
  sim.constraint_psi = contract.psi(constraint_constant);
  sim.lambda = calibrate_lambda(sim.constant, error_estimate, sim.constraint_psi, db.constraint_bound);
  const double v = cfg.weight;

  std::optional<ConstrainedLearner> learner;
  if (hedge) {
    OptimisticHedge inner(ExpertConfig::for_horizon(cfg.domain.dim(), length), AdaptiveRate{},
                          v * loss_constant + sim.lambda * constraint_constant);
    learner.emplace(std::move(inner), sim.lambda, loss_constant, constraint_constant, cfg.instrument);
  } else {
    ProblemBounds pb;
    pb.diameter = cfg.domain.diameter(sim.geometry.norms.primal());
    pb.loss_bound = db.loss_bound;
    pb.constraint_bound = db.constraint_bound;
    pb.loss_lipschitz = v * loss_constant + sim.lambda * constraint_constant;
    pb.constraint_lipschitz = constraint_constant;
    pb.loss_smoothness =
        v * predictor_smoothness(cfg.predictor, env, PredictionTarget::kLoss) +
        sim.lambda * predictor_smoothness(cfg.constraint_predictor, env, PredictionTarget::kConstraint);
    pb.constraint_smoothness = predictor_smoothness(cfg.constraint_predictor, env, PredictionTarget::kConstraint);
    pb.bregman_radius = euclidean_bregman_radius(cfg.domain);
    OptimisticOmd inner(sim.geometry, cfg.domain, pb, AdaptiveRate{}, std::nullopt, cfg.instrument);
    learner.emplace(std::move(inner), sim.lambda, loss_constant, constraint_constant, cfg.instrument);
  }
  learner->set_initial_prediction(make_predictor(cfg.predictor, env, PredictionTarget::kLoss, start),
                                  make_predictor(cfg.constraint_predictor, env, PredictionTarget::kConstraint, start));
  sim.records.reserve(static_cast<std::size_t>(length));
  sim.functions.reserve(static_cast<std::size_t>(length));
  try {
    for (long t = start; t < start + length; ++t) {
      RoundFunctions fns = env.generate_round(t);
      CocoRecord rec = learner->round(
          fns.loss.oracle(), fns.constraint.oracle(),
          make_predictor(cfg.predictor, env, PredictionTarget::kLoss, t + 1),
          make_predictor(cfg.constraint_predictor, env, PredictionTarget::kConstraint, t + 1));
      rec.t = t;
      if (rec.prediction_smoothness > std::sqrt(sim.geometry.beta) * rec.inner_lipschitz) ++sim.nonsmooth_rounds;
      sim.records.push_back(std::move(rec));
      sim.functions.push_back(std::move(fns));
    }
  } catch (const QueueBlowUp& e) {
    sim.failure = e.what();
  }
  sim.loss_error = learner->loss_tracker().total();
  sim.constraint_error = learner->constraint_tracker().total();
  if (!sim.records.empty()) sim.final_lipschitz = sim.records.back().inner_lipschitz;
  return sim;
}

TraceRow coco_row(const CocoRecord& rec) {
  TraceRow row;
  row.t = rec.t;
  row.loss = rec.loss;
  row.constraint = rec.constraint;
  row.violation = rec.violation;
  row.ccv = rec.ccv;
  row.queue = rec.next_queue;
  row.eta = rec.eta;
  row.err_f = rec.loss_error;
  row.err_g = rec.constraint_error;
  row.cum_err_f = rec.cumulative_loss_error;
  row.cum_err_g = rec.cumulative_constraint_error;
  return row;
}

void instrument_coco(RunResult& res, const CocoSimulation& sim, const Vector& u) {
  std::vector<double> loss_at_u;
  std::vector<double> constraint_at_u;
  for (const auto& f : sim.functions) {
    loss_at_u.push_back(f.loss.value(u));
    constraint_at_u.push_back(f.constraint.value(u));
  }
  try {
    const auto slacks = regret_decomposition_slacks(sim.records, loss_at_u, constraint_at_u, sim.lambda,
                                                    res.config.weight);
    res.decomposition_slacks.insert(res.decomposition_slacks.end(), slacks.begin(), slacks.end());
  } catch (const InvalidArgument& e) {
    res.report.rows.push_back({"regret-decomposition", 0.0, 0.0, Status::kPreconditionUnmet, e.what()});
  }
  const double v = res.config.weight;
  // the inner learner's own guarantee on the surrogate sequence, at every t
  {
    CompensatedSum surrogate_regret;
    CompensatedSum surrogate_error;
    double worst = kInf;
    long worst_t = 0;
    double measured = 0.0;
    double bound = 0.0;
    for (std::size_t i = 0; i < sim.records.size(); ++i) {
      const CocoRecord& rec = sim.records[i];
      surrogate_regret.add(rec.surrogate - (v * loss_at_u[i] + rec.multiplier * std::max(constraint_at_u[i], 0.0)));
      surrogate_error.add(rec.surrogate_error);
      double scale = 0.0;
      if (const auto* r = std::get_if<OmdRecord>(&rec.inner)) {
        scale = std::sqrt(euclidean_bregman_radius(res.config.domain)) * r->lipschitz;
      } else if (const auto* r = std::get_if<ExpertRecord>(&rec.inner)) {
        scale = r->scale;
      }
      const double b = sim.constant * (std::sqrt(surrogate_error.value()) + scale);
      if (b - surrogate_regret.value() < worst) {
        worst = b - surrogate_regret.value();
        worst_t = rec.t;
        measured = surrogate_regret.value();
        bound = b;
      }
    }
    res.inner_contract.push_back({"inner-regret-contract", measured, bound,
                                  worst >= 0.0 ? Status::kPass : Status::kFail,
                                  "surrogate regret vs C(sqrt(E(L)) + psi(L)); tightest t=" + std::to_string(worst_t)});
  }
  for (const auto& rec : sim.records) {
    const double bound = 2.0 * v * v * rec.loss_error + 2.0 * rec.multiplier * rec.multiplier * rec.constraint_error;
    // relative tolerance for rounding in the norms
    res.surrogate_error_gaps.push_back(bound - rec.surrogate_error + 1e-12 * std::max(bound, rec.surrogate_error));
    if (const auto* r = std::get_if<OmdRecord>(&rec.inner)) {
      const StepCheck c = step_inequality_check(sim.geometry, *r, u);
      res.step_slacks.push_back(c.slack);
      res.step_precondition.push_back(c.precondition_met);
      res.step_nominal_precondition.push_back(c.nominal_precondition_met);
      res.played.push_back(r->played);
      res.anchors.push_back(r->anchor);
    }
  }
}

RunResult run_coco_oracle(const RunConfig& cfg) {
  RunResult res;
  res.config = cfg;
  const Environment env = make_environment(cfg);
  const DeclaredBounds& db = env.bounds();

  // lambda is calibrated with an estimate E_est of the run's final E_g,
  // which itself depends on lambda. Search for a small covering estimate
  // (measured E_g <= E_est): raise from 0 until covered, then shrink toward
  // the measured value, bisecting against the largest estimate known not
  // to cover.
  int iterations = 0;
  auto attempt = [&](double e) {
    ++iterations;
    CocoSimulation s = simulate_coco(cfg, env, 1, cfg.horizon, e);
    const bool ok = s.failure.empty() && s.constraint_error <= e;
    return std::make_pair(ok, std::move(s));
  };
  double estimate = 0.0;
  auto [covered, sim] = attempt(estimate);
  double uncovered = -1.0;
  while (!covered && iterations < kMaxLambdaIterations) {
    uncovered = estimate;
    estimate = std::max({kLambdaMargin * sim.constraint_error, 2.0 * estimate, sim.failure.empty() ? 0.0 : 1.0});
    std::tie(covered, sim) = attempt(estimate);
  }
  while (covered && iterations < kMaxLambdaIterations) {
    double next = kLambdaMargin * sim.constraint_error;
    if (uncovered >= 0.0 && next <= uncovered) next = 0.5 * (uncovered + estimate);
    if (!(next < estimate * (1.0 - kLambdaResolution))) break;
    auto [ok, s] = attempt(next);
    if (ok) {
      estimate = next;
      sim = std::move(s);
    } else {
      uncovered = next;
    }
  }
  res.lambda = sim.lambda;
  res.lambda_error_estimate = estimate;
  res.lambda_iterations = iterations;
  res.constant = sim.constant;
  res.loss_psi = sim.loss_psi;
  res.constraint_psi = sim.constraint_psi;
  res.bregman_radius = cfg.inner == InnerKind::kOptimisticOmd ? euclidean_bregman_radius(cfg.domain) : 0.0;
  res.final_lipschitz = sim.final_lipschitz;
  res.nonsmooth_rounds = sim.nonsmooth_rounds;

  for (const auto& rec : sim.records) res.trace.push_back(coco_row(rec));
  const auto losses = loss_forms(sim.functions);
  ComparatorResult comp = solve_comparator(losses, constraint_forms(sim.functions), cfg.domain, cfg.comparator);
  res.u = comp.u;
  fill_regret(res.trace, losses, res.u);
  res.report.rows.push_back(comparator_row(comp));
  res.comparator = std::move(comp);

  if (!sim.failure.empty()) {
    res.report.rows.push_back({"queue", 0.0, ExponentialPotential::kQueueGuard, Status::kFail, sim.failure});
  }
  res.report.rows.push_back({"lambda-calibration", sim.constraint_error, estimate,
                             covered ? Status::kPass : Status::kPreconditionUnmet,
                             "measured E_g against the estimate used for lambda after " +
                                 std::to_string(iterations) + " run(s)"});

  // regret bound at every t
  double worst_margin = kInf;
  long worst_t = 0;
  double worst_regret = 0.0;
  double worst_bound = 0.0;
  for (const auto& row : res.trace) {
    const double bound = regret_bound_thm6(sim.constant, row.cum_err_f, sim.loss_psi, cfg.weight);
    if (bound - row.regret < worst_margin) {
      worst_margin = bound - row.regret;
      worst_t = row.t;
      worst_regret = row.regret;
      worst_bound = bound;
    }
  }
  ReportRow regret_row{"thm6-regret", worst_regret, worst_bound,
                       worst_margin >= 0.0 ? Status::kPass : Status::kFail,
                       "tightest round t=" + std::to_string(worst_t) + "; checked for all t"};
  ReportRow ccv_row = upper_bound_row(
      "thm6-ccv", res.final_ccv(),
      ccv_bound_thm6(sim.constant, res.total_loss_error(), sim.loss_psi, estimate, sim.constraint_psi,
                     db.constraint_bound, db.loss_bound, cfg.weight, cfg.horizon));
  if (!covered) {
    gate(regret_row, "lambda estimate below the measured E_g");
    gate(ccv_row, "lambda estimate below the measured E_g");
  }
  const std::string rough = "surrogate prediction rougher than sqrt(beta) L in " +
                            std::to_string(sim.nonsmooth_rounds) + " rounds";
  if (sim.nonsmooth_rounds > 0) {
    gate(regret_row, rough);
    gate(ccv_row, rough);
  }
  res.report.rows.push_back(regret_row);
  res.report.rows.push_back(ccv_row);

  double worst_identity = 0.0;
  for (const auto& row : res.trace) {
    worst_identity = std::max(worst_identity, relative_gap(row.ccv, row.queue / sim.lambda));
  }
  res.report.rows.push_back(upper_bound_row("ccv-identity", worst_identity, kIdentityTolerance,
                                            "max relative gap between CCV_t and Q_{t+1}/lambda"));
  if (cfg.instrument && res.comparator->feasible) {
    instrument_coco(res, sim, res.u);
    if (sim.nonsmooth_rounds > 0) gate(res.inner_contract.back(), rough);
    res.report.rows.push_back(slack_row("regret-decomposition", res.decomposition_slacks, nullptr, kSlackTolerance));
    res.report.rows.push_back(slack_row("surrogate-error", res.surrogate_error_gaps, nullptr, 0.0));
    res.report.rows.insert(res.report.rows.end(), res.inner_contract.begin(), res.inner_contract.end());
    if (!res.step_slacks.empty()) {
      res.report.rows.push_back(
          slack_row("step-inequality", res.step_slacks, &res.step_precondition, kSlackTolerance));
      res.report.rows.push_back(nominal_step_row(res));
    }
  }
  res.report.rows.push_back(accounting_row(res.trace));
  return res;
}

RunResult run_coco_doubling(const RunConfig& cfg) {
  RunResult res;
  res.config = cfg;
  const Environment env = make_environment(cfg);
  const DeclaredBounds& db = env.bounds();

  std::vector<RoundFunctions> functions;
  std::vector<CocoSimulation> sims;
  double previous_error = 0.0;
  CompensatedSum ccv_total;
  CompensatedSum err_f_total;
  CompensatedSum err_g_total;
  double regret_bound_total = 0.0;
  double ccv_bound_total = 0.0;
  std::string failure;
  for (const Epoch& epoch : doubling_epochs(cfg.horizon)) {
    CocoSimulation sim = simulate_coco(cfg, env, epoch.start, epoch.length, previous_error);
    EpochSummary summary;
    summary.epoch = epoch;
    summary.lambda = sim.lambda;
    summary.constant = sim.constant;
    summary.loss_error = sim.loss_error;
    summary.constraint_error = sim.constraint_error;
    summary.ccv = sim.records.empty() ? 0.0 : sim.records.back().ccv;
    for (const auto& rec : sim.records) {
      TraceRow row = coco_row(rec);
      ccv_total.add(rec.violation);
      err_f_total.add(rec.loss_error);
      err_g_total.add(rec.constraint_error);
      row.ccv = ccv_total.value();
      row.cum_err_f = err_f_total.value();
      row.cum_err_g = err_g_total.value();
      res.trace.push_back(row);
    }
    regret_bound_total += regret_bound_thm6(sim.constant, sim.loss_error, sim.loss_psi, cfg.weight);
    ccv_bound_total += ccv_bound_thm6(sim.constant, sim.loss_error, sim.loss_psi, sim.constraint_error,
                                      sim.constraint_psi, db.constraint_bound, db.loss_bound, cfg.weight,
                                      epoch.length);
    res.epochs.push_back(summary);
    functions.insert(functions.end(), sim.functions.begin(), sim.functions.end());
    previous_error = sim.constraint_error;
    res.nonsmooth_rounds += sim.nonsmooth_rounds;
    res.constant = sim.constant;
    res.loss_psi = sim.loss_psi;
    res.constraint_psi = sim.constraint_psi;
    res.lambda = sim.lambda;
    if (!sim.failure.empty()) {
      failure = sim.failure;
      break;
    }
    sims.push_back(std::move(sim));
  }

  const auto losses = loss_forms(functions);
  ComparatorResult comp = solve_comparator(losses, constraint_forms(functions), cfg.domain, cfg.comparator);
  res.u = comp.u;
  fill_regret(res.trace, losses, res.u);
  res.report.rows.push_back(comparator_row(comp));
  res.comparator = std::move(comp);
  // per-epoch regrets against the common comparator
  std::size_t offset = 0;
  for (auto& s : res.epochs) {
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(s.epoch.length), res.trace.size() - offset);
    const double before = offset == 0 ? 0.0 : res.trace[offset - 1].regret;
    s.regret = n == 0 ? 0.0 : res.trace[offset + n - 1].regret - before;
    offset += n;
  }
  if (!failure.empty()) res.report.rows.push_back({"queue", 0.0, ExponentialPotential::kQueueGuard, Status::kFail, failure});
  const double regret = res.final_regret();
  const double ccv = res.final_ccv();
  res.report.rows.push_back({"doubling-regret", regret, regret_bound_total, Status::kReported,
                             std::string(regret <= regret_bound_total ? "within" : "exceeds") +
                                 " the sum of per-epoch bounds"});
  res.report.rows.push_back({"doubling-ccv", ccv, ccv_bound_total, Status::kReported,
                             std::string(ccv <= ccv_bound_total ? "within" : "exceeds") +
                                 " the sum of per-epoch bounds at measured errors"});
  if (cfg.instrument && res.comparator->feasible) {
    for (const auto& sim : sims) instrument_coco(res, sim, res.u);
    res.report.rows.push_back(slack_row("regret-decomposition", res.decomposition_slacks, nullptr, kSlackTolerance));
    res.report.rows.push_back(slack_row("surrogate-error", res.surrogate_error_gaps, nullptr, 0.0));
    res.report.rows.insert(res.report.rows.end(), res.inner_contract.begin(), res.inner_contract.end());
  }
  res.report.rows.push_back(accounting_row(res.trace));
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API

ConfigError::ConfigError(std::string path, int line, const std::string& message)
    : Error("config error at " + (path.empty() ? std::string("/") : path) +
            (line > 0 ? " (line " + std::to_string(line) + ")" : std::string()) + ": " + message),
      path_(std::move(path)),
      line_(line) {}

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kOmd: return "omd";
    case Algorithm::kAdagradOmd: return "adagrad-omd";
    case Algorithm::kExperts: return "experts";
    case Algorithm::kCoco: return "coco";
  }
  return "?";
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::kPass: return "PASS";
    case Status::kFail: return "FAIL";
    case Status::kPreconditionUnmet: return "PRECONDITION UNMET";
    case Status::kReported: return "REPORTED";
  }
  return "?";
}

BregmanGeometry RunConfig::geometry() const {
  return regularizer == Regularizer::kHalfSquaredL2 ? BregmanGeometry::euclidean() : BregmanGeometry::entropic();
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", 0, std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j, text);
}

RunConfig parse_config(const json& j, const std::string& text) {
  const ConfigReader r(j, text);
  r.only_keys(j, "", {"algorithm", "inner", "geometry", "domain", "environment", "predictor",
                      "constraint_predictor", "horizon", "doubling", "seed", "eta", "lambda_mode",
                      "weight", "instrument", "comparator"});
  RunConfig c;
  c.source = j;
  c.algorithm = pick<Algorithm>(r, "/algorithm", r.string(j, "", "algorithm"),
                                {{"omd", Algorithm::kOmd},
                                 {"adagrad-omd", Algorithm::kAdagradOmd},
                                 {"experts", Algorithm::kExperts},
                                 {"coco", Algorithm::kCoco}});
  const bool experts = c.algorithm == Algorithm::kExperts;
  const bool coco = c.algorithm == Algorithm::kCoco;

  if (r.find(j, "inner") && !coco) r.fail("/inner", "only coco runs take an inner learner");
  c.inner = pick<InnerKind>(r, "/inner", r.string(j, "", "inner", "adagrad-omd"),
                            {{"adagrad-omd", InnerKind::kOptimisticOmd}, {"experts", InnerKind::kOptimisticHedge}});
  const bool simplex_learner = experts || (coco && c.inner == InnerKind::kOptimisticHedge);

  c.regularizer = pick<Regularizer>(r, "/geometry",
                                    r.string(j, "", "geometry", simplex_learner ? "entropic" : "euclidean"),
                                    {{"euclidean", Regularizer::kHalfSquaredL2},
                                     {"entropic", Regularizer::kNegativeEntropy}});
  if (simplex_learner && c.regularizer != Regularizer::kNegativeEntropy) {
    r.fail("/geometry", "the experts learner uses the entropic geometry");
  }
  if (!simplex_learner && c.regularizer != Regularizer::kHalfSquaredL2) {
    r.fail("/geometry", "optimistic OMD runs need the euclidean geometry (the entropic radius is unbounded)");
  }

  const json* domain = r.find(j, "domain");
  if (!domain) r.fail("/domain", "missing required key 'domain'");
  if (!domain->is_object()) r.fail("/domain", "expected an object");
  c.domain = parse_domain(r, *domain);
  if (simplex_learner && c.domain.kind() != DomainKind::kSimplex) {
    r.fail("/domain/kind", "the experts learner needs a simplex domain");
  }
  if (simplex_learner && c.domain.dim() < 2) r.fail("/domain/dim", "the experts learner needs d >= 2");

  const json* env = r.find(j, "environment");
  if (!env) r.fail("/environment", "missing required key 'environment'");
  r.only_keys(*env, "/environment", {"loss", "constraint", "drift"});
  c.environment.loss = pick<LossFamily>(r, "/environment/loss", r.string(*env, "/environment", "loss"),
                                        {{"linear", LossFamily::kLinear},
                                         {"quadratic", LossFamily::kQuadratic},
                                         {"sign-flip", LossFamily::kSignFlip}});
  c.environment.constraint = pick<ConstraintFamily>(
      r, "/environment/constraint", r.string(*env, "/environment", "constraint", "none"),
      {{"none", ConstraintFamily::kNone},
       {"fixed", ConstraintFamily::kFixed},
       {"drifting", ConstraintFamily::kDrifting},
       {"switching", ConstraintFamily::kSwitching}});
  c.environment.drift = r.number(*env, "/environment", "drift", 0.01);
  if (c.environment.drift < 0.0) r.fail("/environment/drift", "drift must be >= 0");
  if (experts && c.environment.loss == LossFamily::kQuadratic) {
    r.fail("/environment/loss", "the experts algorithm takes linear loss vectors");
  }

  const json* pred = r.find(j, "predictor");
  if (!pred) r.fail("/predictor", "missing required key 'predictor'");
  c.predictor = parse_predictor(r, *pred, "/predictor");
  c.constraint_predictor = c.predictor;
  if (const json* cp = r.find(j, "constraint_predictor")) {
    if (!coco) r.fail("/constraint_predictor", "only coco runs predict constraints");
    c.constraint_predictor = parse_predictor(r, *cp, "/constraint_predictor");
  }

  c.horizon = r.integer(j, "", "horizon");
  if (c.horizon < 1) r.fail("/horizon", "horizon must be >= 1");
  const long seed = r.integer(j, "", "seed", 0);
  if (seed < 0) r.fail("/seed", "seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);

  if (r.find(j, "eta")) {
    if (c.algorithm == Algorithm::kAdagradOmd || coco) r.fail("/eta", "this algorithm uses the adaptive step size");
    c.eta = r.number(j, "", "eta");
    if (!(*c.eta > 0.0)) r.fail("/eta", "step size must be positive");
  }
  if (c.algorithm == Algorithm::kOmd && !c.eta) r.fail("/eta", "constant-rate omd needs 'eta'");

  // 'doubling: true' is shorthand for 'lambda_mode: doubling'; either may
  // be given alone.
  const bool doubling = r.boolean(j, "", "doubling", false);
  c.lambda_mode = pick<LambdaMode>(r, "/lambda_mode", r.string(j, "", "lambda_mode", doubling ? "doubling" : "oracle"),
                                   {{"oracle", LambdaMode::kOracle}, {"doubling", LambdaMode::kDoubling}});
  if (r.find(j, "doubling") && doubling != (c.lambda_mode == LambdaMode::kDoubling)) {
    r.fail("/doubling", "'doubling' and 'lambda_mode' disagree");
  }
  if (!coco && (r.find(j, "lambda_mode") || doubling)) {
    r.fail(r.find(j, "lambda_mode") ? "/lambda_mode" : "/doubling", "only coco runs have a multiplier schedule");
  }

  c.weight = r.number(j, "", "weight", 1.0);
  if (c.weight != 1.0) r.fail("/weight", "V is fixed to 1");
  c.instrument = r.boolean(j, "", "instrument", false);
  c.comparator = pick<ComparatorMethod>(r, "/comparator", r.string(j, "", "comparator", "descent"),
                                        {{"descent", ComparatorMethod::kDescent}, {"grid", ComparatorMethod::kGrid}});
  if (c.comparator == ComparatorMethod::kGrid && c.domain.dim() > 3) {
    r.fail("/comparator", "the grid comparator supports d <= 3");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

bool VerificationReport::passed() const {
  return std::none_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.status == Status::kFail; });
}

const ReportRow* VerificationReport::find(std::string_view name) const {
  for (const auto& r : rows) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::string VerificationReport::format() const {
  std::ostringstream out;
  for (const auto& r : rows) {
    out << to_string(r.status) << "  " << r.name << "  measured=" << format_double(r.measured)
        << "  bound=" << format_double(r.bound);
    if (!r.note.empty()) out << "  (" << r.note << ")";
    out << "\n";
  }
  return out.str();
}

RunResult run(const RunConfig& config) {
  switch (config.algorithm) {
    case Algorithm::kOmd:
    case Algorithm::kAdagradOmd:
      return run_omd(config);
    case Algorithm::kExperts:
      return run_experts(config);
    case Algorithm::kCoco:
      return config.lambda_mode == LambdaMode::kOracle ? run_coco_oracle(config) : run_coco_doubling(config);
  }
  throw InvalidArgument("unknown algorithm");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out = kTraceHeader;
  out += "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.t);
    for (double v : {r.loss, r.constraint, r.violation, r.regret, r.ccv, r.queue, r.eta, r.err_f, r.err_g,
                     r.cum_err_f, r.cum_err_g}) {
      out += ",";
      out += format_double(v);
    }
    out += "\n";
  }
  return out;
}

json RunResult::sidecar() const {
  json j;
  j["seed"] = config.seed;
  j["config"] = config.source;
  j["algorithm"] = std::string(to_string(config.algorithm));
  j["horizon"] = config.horizon;
  j["lambda_mode"] = config.lambda_mode == LambdaMode::kOracle ? "oracle" : "doubling";
  const BregmanGeometry g = config.geometry();
  json constants;
  constants["beta"] = g.beta;
  constants["weight"] = config.weight;
  constants["C"] = constant;
  constants["psi_f"] = loss_psi;
  constants["psi_g"] = constraint_psi;
  constants["B"] = bregman_radius;
  constants["final_lipschitz"] = final_lipschitz;
  constants["lambda"] = lambda;
  constants["lambda_error_estimate"] = lambda_error_estimate;
  constants["lambda_iterations"] = lambda_iterations;
  constants["dim"] = config.domain.dim();
  constants["nonsmooth_rounds"] = nonsmooth_rounds;
  if (config.eta) constants["eta"] = *config.eta;
  {
    const Environment env = make_environment(config);
    const DeclaredBounds& db = env.bounds();
    constants["F"] = db.loss_bound;
    constants["G"] = db.constraint_bound;
    constants["L_f"] = db.loss_lipschitz;
    constants["L_g"] = db.constraint_lipschitz;
    constants["alpha_f"] = predictor_smoothness(config.predictor, env, PredictionTarget::kLoss);
  }
  j["constants"] = constants;
  json comp;
  comp["u"] = vector_json(u);
  if (comparator) {
    comp["objective"] = comparator->objective;
    comp["feasible"] = comparator->feasible;
    comp["max_violation"] = comparator->max_violation;
    comp["method"] = std::string(to_string(comparator->method));
    comp["tolerance"] = comparator->tolerance;
  } else {
    comp["method"] = "best-expert";
  }
  j["comparator"] = comp;
  json totals;
  totals["regret"] = final_regret();
  totals["ccv"] = final_ccv();
  totals["E_f"] = total_loss_error();
  totals["E_g"] = total_constraint_error();
  j["totals"] = totals;
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"name", r.name},
                    {"measured", r.measured},
                    {"bound", r.bound},
                    {"status", std::string(to_string(r.status))},
                    {"note", r.note}});
  }
  j["report"] = rows;
  j["passed"] = report.passed();
  json epochs_json = json::array();
  for (const auto& e : epochs) {
    epochs_json.push_back({{"index", e.epoch.index},
                           {"start", e.epoch.start},
                           {"length", e.epoch.length},
                           {"lambda", e.lambda},
                           {"C", e.constant},
                           {"ccv", e.ccv},
                           {"regret", e.regret},
                           {"E_f", e.loss_error},
                           {"E_g", e.constraint_error}});
  }
  j["epochs"] = epochs_json;
  return j;
}

void write_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_atomically(dir / "trace.csv", trace_csv(result.trace));
  write_atomically(dir / "trace.json", result.sidecar().dump(2) + "\n");
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read " + file.string());
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw Error("unexpected trace header in " + file.string());
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 12) throw Error("malformed trace row: " + line);
    TraceRow r;
    r.t = std::stol(cells[0]);
    double* fields[] = {&r.loss, &r.constraint, &r.violation, &r.regret, &r.ccv, &r.queue,
                        &r.eta, &r.err_f, &r.err_g, &r.cum_err_f, &r.cum_err_g};
    for (std::size_t i = 0; i < 11; ++i) *fields[i] = std::strtod(cells[i + 1].c_str(), nullptr);
    rows.push_back(r);
  }
  return rows;
}

VerificationReport verify_trace(const std::filesystem::path& trace_file) {
  const std::vector<TraceRow> rows = read_trace_csv(trace_file);
  std::ifstream in(sidecar_path(trace_file));
  if (!in) throw Error("missing sidecar " + sidecar_path(trace_file).string());
  const json side = json::parse(in);
  const json& k = side.at("constants");
  const std::string algorithm = side.at("algorithm").get<std::string>();
  const long horizon = side.at("horizon").get<long>();

  VerificationReport rep;
  rep.rows.push_back({"row-count", static_cast<double>(rows.size()), static_cast<double>(horizon),
                      static_cast<long>(rows.size()) == horizon ? Status::kPass : Status::kFail, ""});
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    monotone = monotone && rows[i].ccv >= rows[i - 1].ccv && rows[i].cum_err_f >= rows[i - 1].cum_err_f &&
               rows[i].cum_err_g >= rows[i - 1].cum_err_g;
  }
  rep.rows.push_back({"monotone-columns", monotone ? 1.0 : 0.0, 1.0, monotone ? Status::kPass : Status::kFail,
                      "CCV, E(f), E(g) nondecreasing"});
  rep.rows.push_back(accounting_row(rows));
  if (rows.empty()) return rep;
  const TraceRow& last = rows.back();

  if (algorithm == "omd") {
    const double eta = k.at("eta").get<double>();
    const double beta = k.at("beta").get<double>();
    ReportRow row = upper_bound_row("thm1-regret", last.regret,
                                    regret_bound_thm1(k.at("B").get<double>(), eta, last.cum_err_f, beta));
    if (k.at("alpha_f").get<double>() > beta / eta || k.at("L_f").get<double>() > beta / eta) {
      row.status = Status::kPreconditionUnmet;
    }
    rep.rows.push_back(row);
  } else if (algorithm == "adagrad-omd") {
    rep.rows.push_back(upper_bound_row("thm2-regret", last.regret,
                                       regret_bound_thm2(k.at("B").get<double>(), k.at("beta").get<double>(),
                                                         last.cum_err_f, k.at("final_lipschitz").get<double>())));
  } else if (algorithm == "experts") {
    rep.rows.push_back(upper_bound_row(
        "thm3-regret", last.regret,
        regret_bound_thm3(k.at("dim").get<Eigen::Index>(), horizon, last.cum_err_f, k.at("psi_f").get<double>())));
  } else if (side.at("lambda_mode") == "oracle") {
    const double lambda = k.at("lambda").get<double>();
    const double c = k.at("C").get<double>();
    const double v = k.at("weight").get<double>();
    double identity = 0.0;
    bool regret_ok = true;
    for (const auto& r : rows) {
      identity = std::max(identity, relative_gap(r.ccv, r.queue / lambda));
      regret_ok = regret_ok && r.regret <= regret_bound_thm6(c, r.cum_err_f, k.at("psi_f").get<double>(), v);
    }
    rep.rows.push_back(upper_bound_row("ccv-identity", identity, kIdentityTolerance));
    ReportRow regret{"thm6-regret", last.regret,
                     regret_bound_thm6(c, last.cum_err_f, k.at("psi_f").get<double>(), v),
                     regret_ok ? Status::kPass : Status::kFail, "checked for all t"};
    const double estimate = k.at("lambda_error_estimate").get<double>();
    ReportRow ccv = upper_bound_row(
        "thm6-ccv", last.ccv,
        ccv_bound_thm6(c, last.cum_err_f, k.at("psi_f").get<double>(), estimate, k.at("psi_g").get<double>(),
                       k.at("G").get<double>(), k.at("F").get<double>(), v, horizon));
    if (last.cum_err_g > estimate) {
      gate(regret, "lambda estimate below the measured E_g");
      gate(ccv, "lambda estimate below the measured E_g");
    }
    if (const long rough = k.at("nonsmooth_rounds").get<long>(); rough > 0) {
      const std::string why = "surrogate prediction rougher than sqrt(beta) L in " + std::to_string(rough) + " rounds";
      gate(regret, why);
      gate(ccv, why);
    }
    rep.rows.push_back(regret);
    rep.rows.push_back(ccv);
  }
  return rep;
}

std::vector<SweepRow> sweep(const json& base, const std::string& axis, const std::vector<std::string>& values,
                            const std::optional<std::filesystem::path>& out) {
  std::vector<std::future<SweepRow>> jobs;
  for (const std::string& value : values) {
    json cfg = base;
    json* node = &cfg;
    std::stringstream ss(axis);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (parts.empty()) throw ConfigError("", 0, "empty sweep axis");
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->is_object()) throw ConfigError("/" + parts[i], 0, "sweep axis crosses a non-object");
      node = &(*node)[parts[i]];
    }
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::parse_error&) {
      parsed = value;
    }
    (*node)[parts.back()] = parsed;
    const RunConfig rc = parse_config(cfg, cfg.dump(2));
    jobs.push_back(std::async(std::launch::async, [rc, value, axis, out]() {
      const RunResult r = run(rc);
      if (out) write_outputs(r, *out / (axis + "=" + value));
      return SweepRow{value, r.final_regret(), r.final_ccv(), r.total_loss_error(), r.total_constraint_error(),
                      r.report.passed()};
    }));
  }
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  if (out) {
    std::filesystem::create_directories(*out);
    write_atomically(*out / "sweep.csv", sweep_csv(axis, rows));
  }
  return rows;
}

std::string sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows) {
  std::string s = axis + ",regret,ccv,E_f,E_g,passed\n";
  for (const auto& r : rows) {
    s += r.value + "," + format_double(r.regret) + "," + format_double(r.ccv) + "," + format_double(r.loss_error) +
         "," + format_double(r.constraint_error) + "," + (r.passed ? "true" : "false") + "\n";
  }
  return s;
}

}  // namespace optcoco
