// Copyright 2026 The xrtg Authors.
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

#ifndef XRTG_NELDER_MEAD_HPP
#define XRTG_NELDER_MEAD_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace xrtg {

struct SimplexOptions {
  // Stop when every vertex lies within rel_tolerance * max(1, |best|_inf) of the best.
  double rel_tolerance = 1e-8;
  // Zero means 2000 * dimension.
  int max_iterations = 0;
};

struct SimplexResult {
  Eigen::VectorXd argmin;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// Derivative-free downhill simplex minimizer. Non-finite objective values are
// treated as +infinity so the simplex retreats from invalid regions.
template <typename Objective>
SimplexResult nelder_mead(Objective&& objective, const Eigen::VectorXd& start,
                          const Eigen::VectorXd& steps, const SimplexOptions& options = {}) {
  const Eigen::Index dim = start.size();
  const int max_iterations =
      options.max_iterations > 0 ? options.max_iterations : static_cast<int>(2000 * dim);
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  SimplexResult result;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++result.evaluations;
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  Eigen::MatrixXd vertices(dim, dim + 1);
  Eigen::VectorXd values(dim + 1);
  vertices.col(0) = start;
  for (Eigen::Index i = 0; i < dim; ++i) {
    vertices.col(i + 1) = start;
    vertices(i, i + 1) += steps[i];
  }
  for (Eigen::Index j = 0; j <= dim; ++j) {
    values[j] = eval(vertices.col(j));
  }

  std::vector<Eigen::Index> order(dim + 1);
  for (; result.iterations < max_iterations; ++result.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
    const Eigen::Index best = order.front();
    const Eigen::Index worst = order.back();
    const Eigen::Index second_worst = order[dim - 1];

    double diameter = 0.0;
    for (Eigen::Index j = 0; j <= dim; ++j) {
      diameter = std::max(diameter, (vertices.col(j) - vertices.col(best)).cwiseAbs().maxCoeff());
    }
    const double ref = std::max(1.0, vertices.col(best).cwiseAbs().maxCoeff());
    if (diameter < options.rel_tolerance * ref && std::isfinite(values[best])) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = (vertices.rowwise().sum() - vertices.col(worst)) / double(dim);
    const Eigen::VectorXd reflected = centroid + kReflect * (centroid - vertices.col(worst));
    const double f_reflected = eval(reflected);

    if (f_reflected < values[best]) {
      const Eigen::VectorXd expanded = centroid + kExpand * (reflected - centroid);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        vertices.col(worst) = expanded;
        values[worst] = f_expanded;
      } else {
        vertices.col(worst) = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      vertices.col(worst) = reflected;
      values[worst] = f_reflected;
      continue;
    }

    const bool outside = f_reflected < values[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + kContract * (reflected - centroid))
                : Eigen::VectorXd(centroid + kContract * (vertices.col(worst) - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < (outside ? f_reflected : values[worst])) {
      vertices.col(worst) = contracted;
      values[worst] = f_contracted;
      continue;
    }

    for (Eigen::Index j = 0; j <= dim; ++j) {
      if (j == best) continue;
      vertices.col(j) = vertices.col(best) + kShrink * (vertices.col(j) - vertices.col(best));
      values[j] = eval(vertices.col(j));
    }
  }

  Eigen::Index best_index;
  result.value = values.minCoeff(&best_index);
  result.argmin = vertices.col(best_index);
  return result;
}

}  // namespace xrtg

#endif  // XRTG_NELDER_MEAD_HPP
