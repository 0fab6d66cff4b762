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

#ifndef OPTCOCO_ORACLE_HPP
#define OPTCOCO_ORACLE_HPP

#include <string>
#include <string_view>
#include <vector>

#include "optcoco/environments.hpp"
#include "optcoco/geometry.hpp"

namespace optcoco {

enum class ComparatorMethod { kGrid, kDescent };

std::string_view to_string(ComparatorMethod method);

/// Feasibility tolerance of a comparator: max_t g_t(u) <= kFeasibilityTolerance.
inline constexpr double kFeasibilityTolerance = 1e-8;

struct ComparatorResult {
  Vector u;
  double objective = 0.0;  // sum_t f_t(u)
  bool feasible = false;
  double max_violation = 0.0;  // max_t g_t(u), 0 without constraints
  ComparatorMethod method = ComparatorMethod::kDescent;
  /// Documented objective accuracy: Lipschitz constant of the summed loss
  /// times the grid diagonal (grid), or 0 beyond the solver tolerance
  /// (descent).
  double tolerance = 0.0;
  std::size_t distinct_constraints = 0;
  std::string report;  // set when no feasible point was found
};

/// Best fixed point in hindsight over {x in domain : g_t(x) <= 0 for all t}.
///
/// Losses may be any QuadraticForm; constraints must be affine. Descent
/// mode minimizes the summed loss plus a quadratic penalty on a working
/// set of the most violated constraints, raising the penalty weight from 1
/// to 1e8 by factors of 10 with accelerated projected gradient, then
/// projects onto the domain cut by the working set (Dykstra) and adds the
/// most violated constraint until all hold to kFeasibilityTolerance. Grid
/// mode (d <= 3) scans a grid of spacing 1e-3 D over the bounding box,
/// keeping only points that satisfy every constraint exactly.
ComparatorResult solve_comparator(const std::vector<QuadraticForm>& losses,
                                  const std::vector<QuadraticForm>& constraints,
                                  const Domain& domain, ComparatorMethod method);

}  // namespace optcoco

#endif  // OPTCOCO_ORACLE_HPP
