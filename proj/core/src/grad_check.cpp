// Copyright 2026 The MFM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mfm/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace mfm {

Real relative_error(Real analytic, Real numeric) {
  const Real denom = std::max({std::abs(analytic), std::abs(numeric), Real(1e-8)});
  return std::abs(analytic - numeric) / denom;
}

namespace {

Real evaluate(const LossBuilder& loss) {
  Tape tape;
  return loss(tape).value()(0, 0);
}

std::vector<std::size_t> pick_coordinates(std::size_t size, const GradCheckOptions& options,
                                          std::mt19937_64& rng) {
  std::vector<std::size_t> coords(size);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  const std::size_t budget = std::max<std::size_t>(options.max_coordinates, 64);
  if (size <= budget) return coords;
  std::shuffle(coords.begin(), coords.end(), rng);
  coords.resize(budget);
  std::sort(coords.begin(), coords.end());
  return coords;
}

}  // namespace

std::vector<GradCheckReport> grad_check(const LossBuilder& loss, const ParameterList& params,
                                        const GradCheckOptions& options) {
  std::vector<GradCheckReport> reports;
  params.zero_grad();
  {
    Tape tape;
    Var out = loss(tape);
    const Real value = out.value()(0, 0);
    if (!std::isfinite(value)) {
      for (Parameter* p : params) {
        reports.push_back({p->name, std::numeric_limits<Real>::infinity(), options.tolerance, 0,
                           false, "non-finite loss at the unperturbed point"});
      }
      return reports;
    }
    tape.backward(out);
    tape.accumulate_param_grads();
  }

  std::mt19937_64 rng(options.seed);
  const Real h = options.step;
  for (Parameter* p : params) {
    GradCheckReport report{p->name, 0, options.tolerance, 0, true, {}};
    for (std::size_t i : pick_coordinates(p->value.size(), options, rng)) {
      const Real original = p->value[i];
      p->value[i] = original + h;
      const Real plus = evaluate(loss);
      p->value[i] = original - h;
      const Real minus = evaluate(loss);
      p->value[i] = original;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        report.pass = false;
        report.max_relative_error = std::numeric_limits<Real>::infinity();
        report.message = "non-finite loss when perturbing coordinate " + std::to_string(i);
        break;
      }
      const Real numeric = (plus - minus) / (Real(2) * h);
      report.max_relative_error =
          std::max(report.max_relative_error, relative_error(p->grad[i], numeric));
      ++report.coordinates_checked;
    }
    if (report.message.empty()) report.pass = report.max_relative_error < options.tolerance;
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace mfm
