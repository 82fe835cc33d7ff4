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

#ifndef XRTG_NORMAL_HPP
#define XRTG_NORMAL_HPP

#include <cmath>
#include <numbers>

#include "xrtg/error.hpp"

namespace xrtg {

template <typename Scalar>
Scalar norm_pdf(Scalar z) {
  return std::exp(Scalar(-0.5) * z * z) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

template <typename Scalar>
Scalar norm_cdf(Scalar z) {
  return Scalar(0.5) * std::erfc(-z / std::numbers::sqrt2_v<Scalar>);
}

// log Phi(z), accurate far into the lower tail where erfc underflows.
template <typename Scalar>
Scalar norm_log_cdf(Scalar z) {
  if (z > Scalar(0)) {
    return std::log1p(Scalar(-0.5) * std::erfc(z / std::numbers::sqrt2_v<Scalar>));
  }
  if (z > Scalar(-37)) {
    return std::log(norm_cdf(z));
  }
  // Mills-ratio asymptotic series.
  const Scalar z2 = z * z;
  const Scalar series = Scalar(1) - Scalar(1) / z2 + Scalar(3) / (z2 * z2) -
                        Scalar(15) / (z2 * z2 * z2);
  return Scalar(-0.5) * z2 - std::log(-z) -
         Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) +
         std::log(series);
}

// Inverse of the standard normal CDF (Wichura, AS 241, PPND16).
template <typename Scalar>
Scalar norm_quantile(Scalar p) {
  if (!(p > Scalar(0) && p < Scalar(1))) {
    throw DomainError("normal quantile requires 0 < q < 1");
  }
  const double q = static_cast<double>(p) - 0.5;
  double val;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    val = q *
          (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                67265.770927008700853) * r + 45921.953931549871457) * r +
              13731.693765509461125) * r + 1971.5909503065514427) * r +
            133.14166789178437745) * r + 3.387132872796366608) /
          (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                39307.89580009271061) * r + 21213.794301586595867) * r +
              5394.1960214247511077) * r + 687.1870074920579083) * r +
            42.313330701600911252) * r + 1.0);
    return static_cast<Scalar>(val);
  }
  double r = q < 0 ? static_cast<double>(p) : 1.0 - static_cast<double>(p);
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return static_cast<Scalar>(q < 0.0 ? -val : val);
}

}  // namespace xrtg

#endif  // XRTG_NORMAL_HPP
