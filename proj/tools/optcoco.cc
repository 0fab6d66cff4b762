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

// optcoco run    --config cfg.json --out dir
// optcoco sweep  --config cfg.json --axis predictor.sigma --values 0,0.1 --out dir
// optcoco verify --trace dir/trace.csv
//
// Exit status: 0 when every check passes, 1 on a FAIL row or runtime error,
// 2 on an invalid config or command line.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "optcoco/harness.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw optcoco::ConfigError("", 0, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimistic online learning with constraints: runs, sweeps and trace checks"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string axis;
  std::vector<std::string> values;
  std::string trace;

  CLI::App* run = app.add_subcommand("run", "Run one configuration");
  run->add_option("--config", config, "JSON config")->required();
  run->add_option("--out", out, "Output directory")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "Run one configuration per axis value");
  sweep->add_option("--config", config, "JSON config")->required();
  sweep->add_option("--axis", axis, "Dotted config path, e.g. predictor.sigma")->required();
  sweep->add_option("--values", values, "Comma-separated JSON values")->required()->delimiter(',');
  sweep->add_option("--out", out, "Output directory")->required();

  CLI::App* verify = app.add_subcommand("verify", "Re-check a written trace");
  verify->add_option("--trace", trace, "trace.csv (the .json sidecar must sit next to it)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      const optcoco::RunResult result = optcoco::run(optcoco::load_config(config));
      optcoco::write_outputs(result, out);
      std::cout << result.report.format();
      return result.report.passed() ? 0 : kExitFail;
    }
    if (*sweep) {
      const std::string text = read_file(config);
      nlohmann::json base;
      try {
        base = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw optcoco::ConfigError("", 0, std::string("malformed JSON: ") + e.what());
      }
      optcoco::parse_config(base, text);  // validate the base before fanning out
      const auto rows = optcoco::sweep(base, axis, values, std::filesystem::path(out));
      std::cout << optcoco::sweep_csv(axis, rows);
      for (const auto& r : rows) {
        if (!r.passed) return kExitFail;
      }
      return 0;
    }
    const optcoco::VerificationReport report = optcoco::verify_trace(trace);
    std::cout << report.format();
    return report.passed() ? 0 : kExitFail;
  } catch (const optcoco::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
}
