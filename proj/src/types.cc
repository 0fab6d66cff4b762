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

#include "optcoco/types.hpp"

namespace optcoco {

bool all_finite(const Vector& v) { return v.allFinite(); }

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidArgument(std::string(what) + " has a non-finite entry");
  }
}

FirstOrderOracle FirstOrderOracle::zero(Eigen::Index dim) {
  return FirstOrderOracle([dim](const Vector&) { return Evaluation{0.0, Vector::Zero(dim)}; });
}

Evaluation FirstOrderOracle::operator()(const Vector& x) const {
  if (!fn_) {
    throw InvalidArgument("evaluating an empty oracle");
  }
  Evaluation e = fn_(x);
  if (!std::isfinite(e.value) || !e.gradient.allFinite()) {
    throw NonFiniteOracle("oracle returned a non-finite value or gradient");
  }
  if (e.gradient.size() != x.size()) {
    throw InvalidArgument("oracle gradient dimension does not match the point");
  }
  return e;
}

}  // namespace optcoco
