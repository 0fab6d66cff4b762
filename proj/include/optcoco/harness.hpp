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

#ifndef OPTCOCO_HARNESS_HPP
#define OPTCOCO_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "optcoco/coco.hpp"
#include "optcoco/environments.hpp"
#include "optcoco/geometry.hpp"
#include "optcoco/oracle.hpp"

namespace optcoco {

/// Invalid run configuration. `path` is a JSON pointer into the config and
/// `line` the 1-based line of the offending key in the source text (0 when
/// unknown).
class ConfigError : public Error {
 public:
  ConfigError(std::string path, int line, const std::string& message);
  const std::string& path() const { return path_; }
  int line() const { return line_; }

 private:
  std::string path_;
  int line_;
};

enum class Algorithm { kOmd, kAdagradOmd, kExperts, kCoco };
enum class LambdaMode { kOracle, kDoubling };

std::string_view to_string(Algorithm algorithm);

struct RunConfig {
  Algorithm algorithm = Algorithm::kAdagradOmd;
  InnerKind inner = InnerKind::kOptimisticOmd;  // coco only
  Regularizer regularizer = Regularizer::kHalfSquaredL2;
  Domain domain = Domain::box(Vector::Zero(2), Vector::Ones(2));
  EnvironmentSpec environment;
  PredictorSpec predictor;
  PredictorSpec constraint_predictor;
  long horizon = 1000;
  std::uint64_t seed = 0;
  std::optional<double> eta;
  LambdaMode lambda_mode = LambdaMode::kOracle;
  double weight = 1.0;  // V, read-only
  bool instrument = false;
  ComparatorMethod comparator = ComparatorMethod::kDescent;

  nlohmann::json source;  // the parsed config, echoed in the sidecar

  BregmanGeometry geometry() const;
};

/// Parses and validates a JSON config. `text` is used for line numbers.
RunConfig parse_config(const std::string& text);
RunConfig parse_config(const nlohmann::json& config, const std::string& text = "");
RunConfig load_config(const std::filesystem::path& file);

struct TraceRow {
  long t = 0;
  double loss = 0.0;        // f_t(x_t)
  double constraint = 0.0;  // g_t(x_t)
  double violation = 0.0;   // g_t^+(x_t)
  double regret = 0.0;      // sum_{tau <= t} f_tau(x_tau) - f_tau(u)
  double ccv = 0.0;
  double queue = 0.0;  // Q_{t+1}
  double eta = 0.0;    // eta_t
  double err_f = 0.0;
  double err_g = 0.0;
  double cum_err_f = 0.0;
  double cum_err_g = 0.0;
};

inline constexpr const char* kTraceHeader =
    "t,loss,constraint,violation,regret,ccv,queue,eta,err_f,err_g,cum_err_f,cum_err_g";

enum class Status { kPass, kFail, kPreconditionUnmet, kReported };

std::string_view to_string(Status status);

struct ReportRow {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  Status status = Status::kReported;
  std::string note;
};

struct VerificationReport {
  std::vector<ReportRow> rows;

  bool passed() const;
  const ReportRow* find(std::string_view name) const;
  std::string format() const;
};

struct EpochSummary {
  Epoch epoch;
  double lambda = 0.0;
  double constant = 0.0;
  double ccv = 0.0;
  double regret = 0.0;
  double loss_error = 0.0;
  double constraint_error = 0.0;
};

struct RunResult {
  RunConfig config;
  std::vector<TraceRow> trace;
  VerificationReport report;
  std::optional<ComparatorResult> comparator;
  Vector u;

  double lambda = 0.0;  // coco, oracle mode
  double lambda_error_estimate = 0.0;
  int lambda_iterations = 0;
  double constant = 0.0;  // C of the regret contract
  double loss_psi = 0.0;
  double constraint_psi = 0.0;
  double bregman_radius = 0.0;
  double final_lipschitz = 0.0;
  long nonsmooth_rounds = 0;  // coco: rounds breaking the inner smoothness assumption
  std::vector<EpochSummary> epochs;

  // Instrumentation (empty unless enabled).
  std::vector<double> step_slacks;
  std::vector<bool> step_precondition;
  std::vector<bool> step_nominal_precondition;
  std::vector<double> decomposition_slacks;
  std::vector<double> surrogate_error_gaps;  // bound minus eps_t(L)
  std::vector<ReportRow> inner_contract;     // one row per inner run
  std::vector<Vector> played;
  std::vector<Vector> anchors;

  double final_regret() const { return trace.empty() ? 0.0 : trace.back().regret; }
  double final_ccv() const { return trace.empty() ? 0.0 : trace.back().ccv; }
  double total_loss_error() const { return trace.empty() ? 0.0 : trace.back().cum_err_f; }
  double total_constraint_error() const { return trace.empty() ? 0.0 : trace.back().cum_err_g; }

  nlohmann::json sidecar() const;
};

/// Runs the online protocol, solves for the comparator and evaluates every
/// applicable bound.
RunResult run(const RunConfig& config);

std::string format_double(double v);
std::string trace_csv(const std::vector<TraceRow>& rows);

/// Writes trace.csv and trace.json into `dir` (created if needed); each
/// file is written to a temporary name and renamed into place.
void write_outputs(const RunResult& result, const std::filesystem::path& dir);

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& file);

/// Re-checks a written trace: row count, monotone cumulative columns, the
/// accounting identities, and the bounds recomputed from the sidecar.
VerificationReport verify_trace(const std::filesystem::path& trace_file);

struct SweepRow {
  std::string value;
  double regret = 0.0;
  double ccv = 0.0;
  double loss_error = 0.0;
  double constraint_error = 0.0;
  bool passed = false;
};

/// Runs `base` once per value with the dotted config path `axis` set to the
/// value (a JSON literal). Runs are independent and execute in parallel;
/// when `out` is set each run is written to out/<axis>=<value>/ and the
/// table to out/sweep.csv.
std::vector<SweepRow> sweep(const nlohmann::json& base, const std::string& axis,
                            const std::vector<std::string>& values,
                            const std::optional<std::filesystem::path>& out = std::nullopt);

std::string sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows);

}  // namespace optcoco

#endif  // OPTCOCO_HARNESS_HPP
