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

#ifndef XRTG_JOHNSON_SU_HPP
#define XRTG_JOHNSON_SU_HPP

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "xrtg/error.hpp"
#include "xrtg/normal.hpp"

namespace xrtg {

using Rng = std::mt19937_64;

/// Johnson's S_U distribution, X = location + scale * sinh((Z - shape_a) / shape_b)
/// with Z standard normal. Equivalently Z = shape_a + shape_b * asinh((X - location) / scale).
template <typename Scalar = double>
struct JohnsonSUParams {
  Scalar location{0};
  Scalar scale{1};
  Scalar shape_a{0};
  Scalar shape_b{1};

  friend bool operator==(const JohnsonSUParams&, const JohnsonSUParams&) = default;
};

using JohnsonSU = JohnsonSUParams<double>;

template <typename Scalar>
bool is_valid(const JohnsonSUParams<Scalar>& p) {
  using std::isfinite;
  return isfinite(p.location) && isfinite(p.scale) && isfinite(p.shape_a) &&
         isfinite(p.shape_b) && p.scale > Scalar(0) && p.shape_b > Scalar(0);
}

template <typename Scalar>
void validate(const JohnsonSUParams<Scalar>& p) {
  if (!is_valid(p)) {
    throw DomainError("Johnson S_U parameters require finite values, scale > 0 and shape_b > 0");
  }
}

// Normal-space image of x: shape_a + shape_b * asinh((x - location) / scale).
template <typename Scalar>
Scalar jsu_to_normal(Scalar x, const JohnsonSUParams<Scalar>& p) {
  return p.shape_a + p.shape_b * std::asinh((x - p.location) / p.scale);
}

template <typename Scalar>
Scalar jsu_log_pdf(Scalar x, const JohnsonSUParams<Scalar>& p) {
  validate(p);
  const Scalar u = (x - p.location) / p.scale;
  const Scalar z = p.shape_a + p.shape_b * std::asinh(u);
  return std::log(p.shape_b) - std::log(p.scale) - Scalar(0.5) * std::log1p(u * u) -
         Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) - Scalar(0.5) * z * z;
}

template <typename Scalar>
Scalar jsu_pdf(Scalar x, const JohnsonSUParams<Scalar>& p) {
  validate(p);
  const Scalar u = (x - p.location) / p.scale;
  return p.shape_b / (p.scale * std::sqrt(u * u + Scalar(1))) *
         norm_pdf(p.shape_a + p.shape_b * std::asinh(u));
}

template <typename Scalar>
Scalar jsu_cdf(Scalar x, const JohnsonSUParams<Scalar>& p) {
  validate(p);
  return norm_cdf(jsu_to_normal(x, p));
}

template <typename Scalar>
Scalar jsu_quantile(Scalar q, const JohnsonSUParams<Scalar>& p) {
  validate(p);
  if (!(q > Scalar(0) && q < Scalar(1))) {
    throw DomainError("Johnson S_U quantile requires 0 < q < 1");
  }
  return p.location + p.scale * std::sinh((norm_quantile(q) - p.shape_a) / p.shape_b);
}

template <typename Scalar>
Scalar jsu_mean(const JohnsonSUParams<Scalar>& p) {
  validate(p);
  return p.location - p.scale * std::exp(Scalar(1) / (Scalar(2) * p.shape_b * p.shape_b)) *
                          std::sinh(p.shape_a / p.shape_b);
}

// Maps a standard normal draw onto the distribution.
template <typename Scalar>
Scalar jsu_from_normal(Scalar z, const JohnsonSUParams<Scalar>& p) {
  return p.location + p.scale * std::sinh((z - p.shape_a) / p.shape_b);
}

inline Eigen::VectorXd jsu_sample(Eigen::Index n, const JohnsonSU& p, Rng& rng) {
  validate(p);
  if (n < 1) {
    throw DomainError("jsu_sample requires n >= 1");
  }
  std::normal_distribution<double> normal;
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = jsu_from_normal(normal(rng), p);
  }
  return out;
}

}  // namespace xrtg

#endif  // XRTG_JOHNSON_SU_HPP
