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

#ifndef XRTG_DISTFIT_HPP
#define XRTG_DISTFIT_HPP

#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "xrtg/johnson_su.hpp"

namespace xrtg {

enum class Family { kJohnsonSU, kNormal, kExpModifiedNormal };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);
Eigen::Index param_count(Family family);
std::span<const std::string_view> param_names(Family family);

// A fitted (or given) continuous distribution. Parameter layout per family:
//   JohnsonSU:          location, scale, shape_a, shape_b
//   Normal:             mean, sd
//   ExpModifiedNormal:  gaussian_mean, gaussian_sd, exp_rate
struct DistModel {
  Family family = Family::kJohnsonSU;
  Eigen::VectorXd params;
  std::optional<double> ks;

  static DistModel johnson_su(const JohnsonSU& p, std::optional<double> ks = {});
  static DistModel normal(double mean, double sd, std::optional<double> ks = {});
  static DistModel exp_mod_normal(double mu, double sigma, double rate,
                                  std::optional<double> ks = {});

  JohnsonSU as_johnson_su() const;

  friend bool operator==(const DistModel& a, const DistModel& b) {
    return a.family == b.family && a.params.size() == b.params.size() &&
           a.params == b.params && a.ks == b.ks;
  }
};

void validate(const DistModel& model);
double pdf(const DistModel& model, double x);
double log_pdf(const DistModel& model, double x);
double cdf(const DistModel& model, double x);
double mean(const DistModel& model);

// Exponentially-modified normal primitives.
double emn_log_pdf(double x, double mu, double sigma, double rate);
double emn_cdf(double x, double mu, double sigma, double rate);

// Draws one value at a time; holds the normal/exponential engines so a
// stream of draws from one model consumes the generator predictably.
class DistSampler {
 public:
  explicit DistSampler(DistModel model);
  double operator()(Rng& rng);
  const DistModel& model() const { return model_; }

 private:
  DistModel model_;
  JohnsonSU jsu_;
  std::normal_distribution<double> normal_;
  std::exponential_distribution<double> exponential_;
};

Eigen::VectorXd sample(const DistModel& model, Eigen::Index n, Rng& rng);

enum class Units { kBytes, kSeconds };
std::string_view to_string(Units units);

// Finite observations sorted ascending.
class EmpiricalSample {
 public:
  static EmpiricalSample from(Eigen::VectorXd values, Units units);
  static EmpiricalSample from(std::span<const double> values, Units units);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index count() const { return values_.size(); }
  Units units() const { return units_; }

  // Linearly interpolated quantile of the sorted values.
  double quantile(double q) const;

 private:
  EmpiricalSample(Eigen::VectorXd values, Units units)
      : values_(std::move(values)), units_(units) {}
  Eigen::VectorXd values_;
  Units units_;
};

double ks_statistic(const EmpiricalSample& sample, const DistModel& model);

struct FitOptions {
  double rel_tolerance = 1e-8;
  int iterations_per_dim = 2000;
  Eigen::Index min_count = 50;
  int jobs = 1;  // concurrent fits in fit_stream_model
};

DistModel fit_mle(const EmpiricalSample& sample, Family family, const FitOptions& options = {});

struct RankedFit {
  Family family;
  std::optional<DistModel> model;  // empty when the fit failed
  double ks = 1.0;
  std::string failure;
};

// Fits every requested family and ranks by KS ascending. Failed fits are kept
// at the end with KS = 1.
std::vector<RankedFit> select_best(const EmpiricalSample& sample, std::span<const Family> families,
                                   const FitOptions& options = {});

}  // namespace xrtg

#endif  // XRTG_DISTFIT_HPP
