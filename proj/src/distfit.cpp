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

#include "xrtg/distfit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "xrtg/nelder_mead.hpp"
#include "xrtg/normal.hpp"

namespace xrtg {
namespace {

constexpr std::array<std::string_view, 4> kJsuNames{"location", "scale", "shape_a", "shape_b"};
constexpr std::array<std::string_view, 2> kNormalNames{"mean", "sd"};
constexpr std::array<std::string_view, 3> kEmnNames{"gaussian_mean", "gaussian_sd", "exp_rate"};

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// Guard for log-reparameterized positive parameters.
bool sane_log(double v) { return std::isfinite(v) && std::fabs(v) < 60.0; }

double normal_log_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return -std::log(sd) - kHalfLog2Pi - 0.5 * z * z;
}

// Sorted observations collapsed to distinct values with multiplicities.
// Captures quantize sizes and times, so this shrinks the likelihood sums a lot.
struct Tied {
  Eigen::VectorXd z;
  Eigen::VectorXd w;
  double n = 0.0;

  static Tied from_sorted(const Eigen::VectorXd& sorted) {
    std::vector<double> values, counts;
    for (double x : sorted) {
      if (!values.empty() && values.back() == x) {
        counts.back() += 1.0;
      } else {
        values.push_back(x);
        counts.push_back(1.0);
      }
    }
    Tied t;
    t.z = Eigen::Map<const Eigen::VectorXd>(values.data(), Eigen::Index(values.size()));
    t.w = Eigen::Map<const Eigen::VectorXd>(counts.data(), Eigen::Index(counts.size()));
    t.n = double(sorted.size());
    return t;
  }
};

// Negative log-likelihoods over standardized data, parameters in the
// optimizer's coordinates (positive parameters on a log scale).
struct JsuObjective {
  const Tied& data;
  double operator()(const Eigen::VectorXd& theta) const {
    if (!sane_log(theta[1]) || !sane_log(theta[3]) || !std::isfinite(theta[0]) ||
        !std::isfinite(theta[2])) {
      return std::numeric_limits<double>::infinity();
    }
    const double loc = theta[0];
    const double scale = std::exp(theta[1]);
    const double a = theta[2];
    const double b = std::exp(theta[3]);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < data.z.size(); ++i) {
      const double u = (data.z[i] - loc) / scale;
      const double w = a + b * std::asinh(u);
      acc += data.w[i] * (0.5 * std::log1p(u * u) + 0.5 * w * w);
    }
    return acc + data.n * (theta[1] - theta[3] + kHalfLog2Pi);
  }
};

struct NormalObjective {
  const Tied& data;
  double operator()(const Eigen::VectorXd& theta) const {
    if (!sane_log(theta[1]) || !std::isfinite(theta[0])) {
      return std::numeric_limits<double>::infinity();
    }
    const double sd = std::exp(theta[1]);
    const double ss = (data.w.array() * ((data.z.array() - theta[0]) / sd).square()).sum();
    return 0.5 * ss + data.n * (theta[1] + kHalfLog2Pi);
  }
};

struct EmnObjective {
  const Tied& data;
  double operator()(const Eigen::VectorXd& theta) const {
    if (!sane_log(theta[1]) || !sane_log(theta[2]) || !std::isfinite(theta[0])) {
      return std::numeric_limits<double>::infinity();
    }
    const double mu = theta[0];
    const double sigma = std::exp(theta[1]);
    const double rate = std::exp(theta[2]);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < data.z.size(); ++i) {
      acc += data.w[i] * emn_log_pdf(data.z[i], mu, sigma, rate);
    }
    return -acc;
  }
};

struct Moments {
  double mean;
  double sd;
  double skew;
};

Moments moments_of(const Eigen::VectorXd& v) {
  const double n = double(v.size());
  const double m = v.mean();
  const Eigen::ArrayXd d = v.array() - m;
  const double var = d.square().sum() / n;
  const double sd = std::sqrt(var);
  const double skew = sd > 0 ? (d.cube().sum() / n) / (var * sd) : 0.0;
  return {m, sd, skew};
}

std::string describe(const Eigen::VectorXd& theta) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    os << (i ? ", " : "") << theta[i];
  }
  os << "]";
  return os.str();
}

template <typename Objective>
SimplexResult minimize(const Objective& objective, const Eigen::VectorXd& start,
                       const Eigen::VectorXd& steps, const FitOptions& options) {
  SimplexOptions simplex;
  simplex.rel_tolerance = options.rel_tolerance;
  simplex.max_iterations = options.iterations_per_dim * int(start.size());
  SimplexResult first = nelder_mead(objective, start, steps, simplex);
  if (!std::isfinite(first.value)) {
    return first;
  }
  // A fresh simplex around the optimum guards against premature collapse.
  SimplexResult second = nelder_mead(objective, first.argmin, steps * 0.1, simplex);
  return second.value <= first.value ? second : first;
}

template <typename Objective>
Eigen::VectorXd fit_with_fallback(const Objective& objective, Family family,
                                  const Eigen::VectorXd& start, const Eigen::VectorXd& fallback,
                                  const Eigen::VectorXd& steps, const FitOptions& options) {
  SimplexResult result = minimize(objective, start, steps, options);
  if (std::isfinite(result.value)) {
    return result.argmin;
  }
  const double start_value = objective(start);
  result = minimize(objective, fallback, steps, options);
  if (std::isfinite(result.value)) {
    return result.argmin;
  }
  throw FitError(std::string("maximum-likelihood fit failed for ") +
                 std::string(to_string(family)) +
                 ": non-finite likelihood (initial theta " + describe(start) + " -> " +
                 std::to_string(start_value) + ", fallback theta " + describe(fallback) + " -> " +
                 std::to_string(objective(fallback)) + ")");
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::kJohnsonSU:
      return "johnson_su";
    case Family::kNormal:
      return "normal";
    case Family::kExpModifiedNormal:
      return "exp_mod_normal";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "johnson_su" || name == "jsu" || name == "johnsonsu") return Family::kJohnsonSU;
  if (name == "normal" || name == "norm") return Family::kNormal;
  if (name == "exp_mod_normal" || name == "emn" || name == "exponnorm") {
    return Family::kExpModifiedNormal;
  }
  throw LookupError("unknown distribution family '" + std::string(name) +
                    "' (valid: johnson_su, normal, exp_mod_normal)");
}

Eigen::Index param_count(Family family) { return Eigen::Index(param_names(family).size()); }

std::span<const std::string_view> param_names(Family family) {
  switch (family) {
    case Family::kJohnsonSU:
      return kJsuNames;
    case Family::kNormal:
      return kNormalNames;
    case Family::kExpModifiedNormal:
      return kEmnNames;
  }
  return {};
}

DistModel DistModel::johnson_su(const JohnsonSU& p, std::optional<double> ks) {
  DistModel m{Family::kJohnsonSU, Eigen::Vector4d(p.location, p.scale, p.shape_a, p.shape_b), ks};
  return m;
}

DistModel DistModel::normal(double mean, double sd, std::optional<double> ks) {
  return DistModel{Family::kNormal, Eigen::Vector2d(mean, sd), ks};
}

DistModel DistModel::exp_mod_normal(double mu, double sigma, double rate,
                                    std::optional<double> ks) {
  return DistModel{Family::kExpModifiedNormal, Eigen::Vector3d(mu, sigma, rate), ks};
}

JohnsonSU DistModel::as_johnson_su() const {
  if (family != Family::kJohnsonSU || params.size() != 4) {
    throw DomainError("distribution is not Johnson S_U");
  }
  return {params[0], params[1], params[2], params[3]};
}

void validate(const DistModel& model) {
  if (model.params.size() != param_count(model.family)) {
    throw DomainError(std::string(to_string(model.family)) + " expects " +
                      std::to_string(param_count(model.family)) + " parameters, got " +
                      std::to_string(model.params.size()));
  }
  if (!model.params.allFinite()) {
    throw DomainError("distribution parameters must be finite");
  }
  if (model.ks && !(*model.ks >= 0.0 && *model.ks <= 1.0)) {
    throw DomainError("KS score must lie in [0, 1]");
  }
  switch (model.family) {
    case Family::kJohnsonSU:
      validate(model.as_johnson_su());
      break;
    case Family::kNormal:
      if (!(model.params[1] > 0)) throw DomainError("normal sd must be > 0");
      break;
    case Family::kExpModifiedNormal:
      if (!(model.params[1] > 0) || !(model.params[2] > 0)) {
        throw DomainError("exp-modified normal requires gaussian_sd > 0 and exp_rate > 0");
      }
      break;
  }
}

double emn_log_pdf(double x, double mu, double sigma, double rate) {
  const double lam_s2 = rate * sigma * sigma;
  return std::log(rate) + rate * (mu - x) + 0.5 * rate * lam_s2 +
         norm_log_cdf((x - mu - lam_s2) / sigma);
}

double emn_cdf(double x, double mu, double sigma, double rate) {
  const double lam_s2 = rate * sigma * sigma;
  const double tail = std::exp(rate * (mu - x) + 0.5 * rate * lam_s2 +
                               norm_log_cdf((x - mu - lam_s2) / sigma));
  return std::clamp(norm_cdf((x - mu) / sigma) - tail, 0.0, 1.0);
}

double log_pdf(const DistModel& model, double x) {
  validate(model);
  const auto& p = model.params;
  switch (model.family) {
    case Family::kJohnsonSU:
      return jsu_log_pdf(x, model.as_johnson_su());
    case Family::kNormal:
      return normal_log_pdf(x, p[0], p[1]);
    case Family::kExpModifiedNormal:
      return emn_log_pdf(x, p[0], p[1], p[2]);
  }
  return -std::numeric_limits<double>::infinity();
}

double pdf(const DistModel& model, double x) {
  if (model.family == Family::kJohnsonSU) {
    return jsu_pdf(x, model.as_johnson_su());
  }
  return std::exp(log_pdf(model, x));
}

double cdf(const DistModel& model, double x) {
  validate(model);
  const auto& p = model.params;
  switch (model.family) {
    case Family::kJohnsonSU:
      return jsu_cdf(x, model.as_johnson_su());
    case Family::kNormal:
      return norm_cdf((x - p[0]) / p[1]);
    case Family::kExpModifiedNormal:
      return emn_cdf(x, p[0], p[1], p[2]);
  }
  return 0.0;
}

double mean(const DistModel& model) {
  validate(model);
  const auto& p = model.params;
  switch (model.family) {
    case Family::kJohnsonSU:
      return jsu_mean(model.as_johnson_su());
    case Family::kNormal:
      return p[0];
    case Family::kExpModifiedNormal:
      return p[0] + 1.0 / p[2];
  }
  return 0.0;
}

DistSampler::DistSampler(DistModel model) : model_(std::move(model)) {
  validate(model_);
  if (model_.family == Family::kJohnsonSU) {
    jsu_ = model_.as_johnson_su();
  }
  if (model_.family == Family::kExpModifiedNormal) {
    exponential_ = std::exponential_distribution<double>(model_.params[2]);
  }
}

double DistSampler::operator()(Rng& rng) {
  const auto& p = model_.params;
  switch (model_.family) {
    case Family::kJohnsonSU:
      return jsu_from_normal(normal_(rng), jsu_);
    case Family::kNormal:
      return p[0] + p[1] * normal_(rng);
    case Family::kExpModifiedNormal: {
      const double g = p[0] + p[1] * normal_(rng);
      return g + exponential_(rng);
    }
  }
  return 0.0;
}

Eigen::VectorXd sample(const DistModel& model, Eigen::Index n, Rng& rng) {
  if (n < 1) {
    throw DomainError("sample size must be >= 1");
  }
  if (model.family == Family::kJohnsonSU) {
    return jsu_sample(n, model.as_johnson_su(), rng);
  }
  DistSampler sampler(model);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = sampler(rng);
  }
  return out;
}

std::string_view to_string(Units units) {
  return units == Units::kBytes ? "bytes" : "seconds";
}

EmpiricalSample EmpiricalSample::from(Eigen::VectorXd values, Units units) {
  if (values.size() < 1) {
    throw EmptyDataError("empirical sample must contain at least one value");
  }
  if (!values.allFinite()) {
    throw DomainError("empirical sample contains non-finite values");
  }
  std::sort(values.begin(), values.end());
  return EmpiricalSample(std::move(values), units);
}

EmpiricalSample EmpiricalSample::from(std::span<const double> values, Units units) {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(values.data(), Eigen::Index(values.size()));
  return from(std::move(v), units);
}

double EmpiricalSample::quantile(double q) const {
  const double pos = std::clamp(q, 0.0, 1.0) * double(count() - 1);
  const auto lo = Eigen::Index(std::floor(pos));
  const auto hi = std::min(lo + 1, count() - 1);
  const double frac = pos - double(lo);
  return values_[lo] + frac * (values_[hi] - values_[lo]);
}

double ks_statistic(const EmpiricalSample& sample, const DistModel& model) {
  validate(model);
  const auto& x = sample.values();
  const double n = double(x.size());
  double sup = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double f = cdf(model, x[i]);
    const double upper = std::fabs(double(i + 1) / n - f);
    const double lower = std::fabs(double(i) / n - f);
    sup = std::max({sup, upper, lower});
  }
  return sup;
}

DistModel fit_mle(const EmpiricalSample& sample, Family family, const FitOptions& options) {
  if (sample.count() < options.min_count) {
    throw FitError("sample of " + std::to_string(sample.count()) +
                   " values is too small for a reliable fit (need >= " +
                   std::to_string(options.min_count) + ")");
  }
  const Moments raw = moments_of(sample.values());
  if (!(raw.sd > 0.0)) {
    throw FitError("degenerate sample: all values are equal");
  }
  // Work on standardized data; estimates are mapped back below.
  const double center = sample.quantile(0.5);
  double spread = 0.5 * (sample.quantile(0.75) - sample.quantile(0.25));
  if (!(spread > 0.0)) {
    spread = raw.sd;
  }
  const Eigen::VectorXd z = (sample.values().array() - center) / spread;
  const Moments m = moments_of(z);
  const Tied data = Tied::from_sorted(z);

  DistModel model;
  switch (family) {
    case Family::kJohnsonSU: {
      const double iqr_z = 0.5 * ((sample.quantile(0.75) - sample.quantile(0.25)) / spread);
      const Eigen::Vector4d start(0.0, std::log(iqr_z > 0 ? iqr_z : 1.0), 0.0, 0.0);
      const double sinh_sd = std::sqrt(0.5 * (std::exp(2.0) - 1.0));
      const Eigen::Vector4d fallback(m.mean, std::log(m.sd / sinh_sd), 0.0, 0.0);
      const Eigen::Vector4d steps(0.5, 0.5, 0.5, 0.3);
      const Eigen::VectorXd t =
          fit_with_fallback(JsuObjective{data}, family, start, fallback, steps, options);
      model = DistModel::johnson_su(
          {center + spread * t[0], spread * std::exp(t[1]), t[2], std::exp(t[3])});
      break;
    }
    case Family::kNormal: {
      const Eigen::Vector2d start(m.mean, std::log(m.sd));
      const Eigen::Vector2d fallback(0.0, 0.0);
      const Eigen::Vector2d steps(0.5, 0.3);
      const Eigen::VectorXd t =
          fit_with_fallback(NormalObjective{data}, family, start, fallback, steps, options);
      model = DistModel::normal(center + spread * t[0], spread * std::exp(t[1]));
      break;
    }
    case Family::kExpModifiedNormal: {
      const double g = std::clamp(m.skew, 0.05, 1.9);
      const double tau = m.sd * std::cbrt(0.5 * g);
      const double sigma = std::sqrt(std::max(m.sd * m.sd - tau * tau, 1e-6 * m.sd * m.sd));
      const Eigen::Vector3d start(m.mean - tau, std::log(sigma), -std::log(tau));
      const Eigen::Vector3d fallback(m.mean, std::log(m.sd), 0.0);
      const Eigen::Vector3d steps(0.5, 0.3, 0.5);
      const Eigen::VectorXd t =
          fit_with_fallback(EmnObjective{data}, family, start, fallback, steps, options);
      model = DistModel::exp_mod_normal(center + spread * t[0], spread * std::exp(t[1]),
                                        std::exp(t[2]) / spread);
      break;
    }
  }
  try {
    validate(model);
  } catch (const DomainError& e) {
    throw FitError(std::string("fit produced invalid parameters: ") + e.what());
  }
  model.ks = ks_statistic(sample, model);
  return model;
}

std::vector<RankedFit> select_best(const EmpiricalSample& sample, std::span<const Family> families,
                                   const FitOptions& options) {
  if (families.empty()) {
    throw UsageError("select_best requires at least one distribution family");
  }
  std::vector<RankedFit> ranked;
  for (Family family : families) {
    RankedFit entry{family, std::nullopt, 1.0, {}};
    try {
      entry.model = fit_mle(sample, family, options);
      entry.ks = *entry.model->ks;
    } catch (const Error& e) {
      entry.failure = e.what();
    }
    ranked.push_back(std::move(entry));
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedFit& a, const RankedFit& b) {
    if (a.model.has_value() != b.model.has_value()) return a.model.has_value();
    if (a.ks != b.ks) return a.ks < b.ks;
    return static_cast<int>(a.family) < static_cast<int>(b.family);
  });
  if (!ranked.front().model) {
    std::string reasons;
    for (const auto& r : ranked) {
      reasons += "\n  " + std::string(to_string(r.family)) + ": " + r.failure;
    }
    throw FitError("every requested distribution family failed to fit:" + reasons);
  }
  return ranked;
}

}  // namespace xrtg
