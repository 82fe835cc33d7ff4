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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "test_support.hpp"
#include "xrtg/distfit.hpp"
#include "xrtg/error.hpp"
#include "xrtg/johnson_su.hpp"
#include "xrtg/modelbank.hpp"
#include "xrtg/normal.hpp"

using namespace xrtg;
using xrtg::testing::simpson;

namespace {

std::vector<JohnsonSU> published_sets() {
  std::vector<JohnsonSU> out;
  for (auto id : builtin_ids()) {
    const StreamModel& m = builtin_entry(id).model;
    out.push_back(m.frame_size_dist.as_johnson_su());
    out.push_back(m.inter_frame_dist.as_johnson_su());
    out.push_back(m.inter_packet_dist.as_johnson_su());
  }
  return out;
}

// F_n by counting, for every sample point.
double ks_double_loop(const std::vector<double>& xs, const DistModel& model) {
  const double n = double(xs.size());
  double d = 0.0;
  for (double x : xs) {
    double le = 0.0, lt = 0.0;
    for (double y : xs) {
      le += y <= x;
      lt += y < x;
    }
    const double f = cdf(model, x);
    d = std::max({d, std::abs(le / n - f), std::abs(lt / n - f)});
  }
  return d;
}

const JohnsonSU kStream1HighFrames{220497.49, 20161.10, -0.4782, 1.2396};

}  // namespace

TEST_SUITE("normal") {
  // Reference values from scipy.stats.norm (ppf / logcdf).
  TEST_CASE("quantile matches reference values") {
    CHECK(norm_quantile(0.01) == doctest::Approx(-2.3263478740408408).epsilon(1e-14));
    CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(norm_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-13));
    CHECK(norm_quantile(1e-300) == doctest::Approx(-37.0470962993612).epsilon(1e-12));
    CHECK(norm_quantile(0.5) == 0.0);
  }

  TEST_CASE("quantile rejects the closed interval ends") {
    CHECK_THROWS_AS(norm_quantile(0.0), DomainError);
    CHECK_THROWS_AS(norm_quantile(1.0), DomainError);
    CHECK_THROWS_AS(norm_quantile(-0.2), DomainError);
  }

  TEST_CASE("log cdf in the far lower tail") {
    CHECK(norm_log_cdf(-30.0) == doctest::Approx(-454.32124395634327).epsilon(1e-13));
    CHECK(norm_log_cdf(-40.0) == doctest::Approx(-804.6084420137539).epsilon(1e-12));
    CHECK(norm_log_cdf(0.0) == doctest::Approx(std::log(0.5)));
    CHECK(norm_log_cdf(5.0) == doctest::Approx(-2.866516129637636e-07).epsilon(1e-10));
  }

  TEST_CASE("cdf of quantile") {
    for (double q = 1e-6; q < 1.0; q += 0.0137) {
      CHECK(norm_cdf(norm_quantile(q)) == doctest::Approx(q).epsilon(1e-13));
    }
  }
}

TEST_SUITE("johnson_su") {
  TEST_CASE("pdf reductions") {
    CHECK(jsu_pdf(0.0, JohnsonSU{0, 1, 0, 1}) == doctest::Approx(0.3989422804014327));
    const JohnsonSU p{3.0, 2.5, 0.0, 1.7};
    CHECK(jsu_pdf(3.0, p) == doctest::Approx(1.7 * 0.3989422804014327 / 2.5));
  }

  TEST_CASE("invalid parameters raise a domain error") {
    CHECK_THROWS_AS(jsu_pdf(0.0, JohnsonSU{0, -1, 0, 1}), DomainError);
    CHECK_THROWS_AS(jsu_cdf(0.0, JohnsonSU{0, 1, 0, 0}), DomainError);
    CHECK_THROWS_AS(jsu_mean(JohnsonSU{0, 1, NAN, 1}), DomainError);
  }

  TEST_CASE("cdf limits and midpoint") {
    const JohnsonSU p{5.0, 2.0, 0.0, 1.3};
    CHECK(jsu_cdf(5.0, p) == doctest::Approx(0.5));
    CHECK(jsu_cdf(-1e300, p) == doctest::Approx(0.0));
    CHECK(jsu_cdf(1e300, p) == doctest::Approx(1.0));
  }

  TEST_CASE("quantile examples") {
    CHECK(jsu_quantile(0.5, JohnsonSU{0, 1, 0, 1}) == 0.0);
    CHECK(jsu_quantile(0.5, JohnsonSU{5, 2, 0, 1}) == doctest::Approx(5.0));
    CHECK(jsu_quantile(0.8413, JohnsonSU{0, 1, 0, 1}) == doctest::Approx(1.1752).epsilon(1e-3));
    CHECK_THROWS_AS(jsu_quantile(1.0, JohnsonSU{0, 1, 0, 1}), DomainError);
    CHECK_THROWS_AS(jsu_quantile(0.0, JohnsonSU{0, 1, 0, 1}), DomainError);
  }

  TEST_CASE("mean examples") {
    CHECK(jsu_mean(JohnsonSU{0, 1, 0, 1}) == 0.0);
    // Frozen from the closed form evaluated independently.
    CHECK(jsu_mean(kStream1HighFrames) == doctest::Approx(231535.15).epsilon(1e-7));
    CHECK(jsu_mean(kStream1HighFrames) == doctest::Approx(232084.33).epsilon(0.01));
    const double s1_low_if = jsu_mean(JohnsonSU{0.0168, 0.000204, 0.0282, 1.2227});
    CHECK(s1_low_if == doctest::Approx(0.01676).epsilon(1e-3));
  }

  TEST_CASE("pdf integrates to one for every published parameter set") {
    for (const auto& p : published_sets()) {
      // x = loc + scale * sinh(t) maps the density to a bell in t.
      const double mass = simpson(
          [&](double t) {
            return jsu_pdf(p.location + p.scale * std::sinh(t), p) * p.scale * std::cosh(t);
          },
          (-12.0 - p.shape_a) / p.shape_b, (12.0 - p.shape_a) / p.shape_b);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
  }

  TEST_CASE("pdf is nonnegative and the cdf is monotone") {
    for (const auto& p : published_sets()) {
      double prev = 0.0;
      for (int k = -400; k <= 400; ++k) {
        const double x = p.location + p.scale * std::sinh(k / 40.0);
        CHECK(jsu_pdf(x, p) >= 0.0);
        const double c = jsu_cdf(x, p);
        CHECK(c >= prev);
        prev = c;
      }
    }
  }

  TEST_CASE("cdf and quantile are inverses") {
    for (const auto& p : published_sets()) {
      for (double q : {0.01, 0.5, 0.99, 1e-7, 1.0 - 1e-7}) {
        CHECK(std::abs(jsu_cdf(jsu_quantile(q, p), p) - q) <= 1e-9);
      }
      for (double q = 0.0005; q <= 0.9995; q += 0.0111) {
        const double x = jsu_quantile(q, p);
        CHECK(std::abs(jsu_quantile(jsu_cdf(x, p), p) - x) <=
              1e-6 * std::max(std::abs(x), p.scale));
      }
    }
  }

  TEST_CASE("sampling is seed-deterministic") {
    Rng a(11), b(11);
    CHECK(jsu_sample(5, JohnsonSU{0, 1, 0.3, 1.1}, a) == jsu_sample(5, JohnsonSU{0, 1, 0.3, 1.1}, b));
  }

  TEST_CASE("sample moments") {
    Rng rng(2024);
    const Eigen::VectorXd x = jsu_sample(200000, kStream1HighFrames, rng);
    CHECK(x.mean() == doctest::Approx(232084.33).epsilon(0.01));

    Eigen::VectorXd z = jsu_sample(200000, JohnsonSU{0, 1, 0, 1}, rng);
    std::sort(z.begin(), z.end());
    CHECK(std::abs(z[100000]) < 0.02);
  }

  TEST_CASE("closed-form mean matches large-sample means") {
    Rng rng(77);
    for (const auto& p : published_sets()) {
      if (std::abs(p.shape_a) / p.shape_b >= 6.0) continue;
      const Eigen::VectorXd x = jsu_sample(1000000, p, rng);
      CHECK(x.mean() == doctest::Approx(jsu_mean(p)).epsilon(0.005));
    }
  }
}

TEST_SUITE("exp_mod_normal") {
  TEST_CASE("density integrates to one and matches the cdf") {
    const double mu = 1.5, sigma = 0.7, rate = 0.8;
    auto f = [&](double x) { return std::exp(emn_log_pdf(x, mu, sigma, rate)); };
    CHECK(simpson(f, mu - 12 * sigma, mu + 60 / rate) == doctest::Approx(1.0).epsilon(1e-8));
    for (double x : {0.0, 1.5, 3.0, 7.0}) {
      CHECK(emn_cdf(x, mu, sigma, rate) ==
            doctest::Approx(simpson(f, mu - 12 * sigma, x)).epsilon(1e-8));
    }
    CHECK(mean(DistModel::exp_mod_normal(mu, sigma, rate)) == doctest::Approx(mu + 1.0 / rate));
  }

  TEST_CASE("log density stays finite far from the mode") {
    CHECK(std::isfinite(emn_log_pdf(-50.0, 0.0, 1.0, 5.0)));
    CHECK(std::isfinite(emn_log_pdf(500.0, 0.0, 1.0, 0.01)));
  }
}

TEST_SUITE("dist_model") {
  TEST_CASE("parameter counts and names") {
    CHECK(param_count(Family::kJohnsonSU) == 4);
    CHECK(param_count(Family::kNormal) == 2);
    CHECK(param_count(Family::kExpModifiedNormal) == 3);
    CHECK(family_from_string("jsu") == Family::kJohnsonSU);
    CHECK(family_from_string(to_string(Family::kExpModifiedNormal)) == Family::kExpModifiedNormal);
    CHECK_THROWS_AS(family_from_string("gamma"), LookupError);
  }

  TEST_CASE("validation enforces positivity and arity") {
    CHECK_THROWS_AS(validate(DistModel::normal(0.0, -1.0)), DomainError);
    CHECK_THROWS_AS(validate(DistModel::exp_mod_normal(0.0, 1.0, 0.0)), DomainError);
    DistModel bad = DistModel::normal(0.0, 1.0);
    bad.params.resize(3);
    CHECK_THROWS_AS(validate(bad), DomainError);
  }

  TEST_CASE("sampler draws follow the family") {
    Rng rng(5);
    const Eigen::VectorXd x = sample(DistModel::normal(10.0, 2.0), 100000, rng);
    CHECK(x.mean() == doctest::Approx(10.0).epsilon(0.002));
    const Eigen::VectorXd y = sample(DistModel::exp_mod_normal(1.0, 0.5, 2.0), 100000, rng);
    CHECK(y.mean() == doctest::Approx(1.5).epsilon(0.01));
  }
}

TEST_SUITE("ks_statistic") {
  TEST_CASE("single point at the median") {
    const DistModel m = DistModel::normal(0.0, 1.0);
    const std::vector<double> one{0.0};
    CHECK(ks_statistic(EmpiricalSample::from(one, Units::kBytes), m) == doctest::Approx(0.5));
  }

  TEST_CASE("plug-in quantiles give half a step") {
    const JohnsonSU p{2.0, 3.0, -0.4, 1.2};
    std::vector<double> xs;
    for (int i = 1; i <= 100; ++i) xs.push_back(jsu_quantile((i - 0.5) / 100.0, p));
    CHECK(ks_statistic(EmpiricalSample::from(xs, Units::kBytes), DistModel::johnson_su(p)) ==
          doctest::Approx(0.005).epsilon(1e-9));
  }

  TEST_CASE("matches a brute-force double loop, ties included") {
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
      const DistModel m = DistModel::johnson_su({0.0, 1.0, 0.2 * trial, 1.0 + 0.1 * trial});
      Eigen::VectorXd x = sample(m, 200 + 150 * trial, rng);
      for (Eigen::Index i = 0; i < x.size(); i += 7) x[i] = std::round(x[i] * 4) / 4;
      const std::vector<double> xs(x.begin(), x.end());
      CHECK(ks_statistic(EmpiricalSample::from(x, Units::kSeconds), m) ==
            doctest::Approx(ks_double_loop(xs, m)).epsilon(1e-12));
    }
  }

  TEST_CASE("self-drawn samples stay inside the DKW band") {
    Rng rng(31);
    const DistModel m = DistModel::johnson_su(kStream1HighFrames);
    CHECK(ks_statistic(EmpiricalSample::from(sample(m, 200000, rng), Units::kBytes), m) < 0.005);
  }
}

TEST_SUITE("empirical_sample") {
  TEST_CASE("sorted, finite and nonempty") {
    const std::vector<double> v{3.0, 1.0, 2.0};
    const auto s = EmpiricalSample::from(v, Units::kBytes);
    CHECK(s.values()[0] == 1.0);
    CHECK(s.values()[2] == 3.0);
    CHECK(s.quantile(0.5) == 2.0);
    CHECK(s.quantile(0.25) == doctest::Approx(1.5));
    CHECK_THROWS(EmpiricalSample::from(std::vector<double>{}, Units::kBytes));
    CHECK_THROWS(EmpiricalSample::from(std::vector<double>{1.0, NAN}, Units::kBytes));
  }
}

TEST_SUITE("fit_mle") {
  TEST_CASE("recovers Johnson S_U parameters") {
    Rng rng(100);
    const JohnsonSU truth{0.0, 1.0, -1.0, 0.8};
    const auto s = EmpiricalSample::from(jsu_sample(100000, truth, rng), Units::kSeconds);
    const DistModel fit = fit_mle(s, Family::kJohnsonSU);
    const JohnsonSU p = fit.as_johnson_su();
    CHECK(std::abs(p.location - truth.location) < 0.05);
    CHECK(p.scale == doctest::Approx(truth.scale).epsilon(0.05));
    CHECK(p.shape_a == doctest::Approx(truth.shape_a).epsilon(0.05));
    CHECK(p.shape_b == doctest::Approx(truth.shape_b).epsilon(0.05));
    REQUIRE(fit.ks);
    CHECK(*fit.ks == doctest::Approx(ks_statistic(s, fit)));
  }

  TEST_CASE("normal fit equals the closed-form MLE") {
    Rng rng(101);
    const Eigen::VectorXd x = sample(DistModel::normal(10.0, 2.0), 100000, rng);
    const DistModel fit = fit_mle(EmpiricalSample::from(x, Units::kBytes), Family::kNormal);
    const double mu = x.mean();
    const double sd = std::sqrt((x.array() - mu).square().mean());
    CHECK(fit.params[0] == doctest::Approx(mu).epsilon(1e-6));
    CHECK(fit.params[1] == doctest::Approx(sd).epsilon(1e-6));
    CHECK(std::abs(fit.params[0] - 10.0) < 0.05);
    CHECK(std::abs(fit.params[1] - 2.0) < 0.05);
  }

  TEST_CASE("exp-modified normal recovers its parameters") {
    Rng rng(102);
    const Eigen::VectorXd x = sample(DistModel::exp_mod_normal(5.0, 1.0, 0.5), 50000, rng);
    const DistModel fit = fit_mle(EmpiricalSample::from(x, Units::kBytes),
                                  Family::kExpModifiedNormal);
    CHECK(fit.params[0] == doctest::Approx(5.0).epsilon(0.05));
    CHECK(fit.params[1] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(fit.params[2] == doctest::Approx(0.5).epsilon(0.05));
  }

  TEST_CASE("degenerate and small samples fail") {
    CHECK_THROWS_AS(fit_mle(EmpiricalSample::from(std::vector<double>(200, 4.0), Units::kBytes),
                            Family::kJohnsonSU),
                    FitError);
    std::vector<double> few;
    for (int i = 0; i < 49; ++i) few.push_back(i);
    CHECK_THROWS_AS(fit_mle(EmpiricalSample::from(few, Units::kBytes), Family::kNormal), FitError);
  }

  TEST_CASE("fit is scale-equivariant") {
    Rng rng(103);
    const Eigen::VectorXd x = jsu_sample(20000, JohnsonSU{3.0, 2.0, 0.5, 1.5}, rng);
    const double c = 1234.5;
    const JohnsonSU a =
        fit_mle(EmpiricalSample::from(x, Units::kBytes), Family::kJohnsonSU).as_johnson_su();
    const JohnsonSU b =
        fit_mle(EmpiricalSample::from(Eigen::VectorXd(c * x), Units::kBytes), Family::kJohnsonSU)
            .as_johnson_su();
    CHECK(b.location == doctest::Approx(c * a.location).epsilon(1e-3));
    CHECK(b.scale == doctest::Approx(c * a.scale).epsilon(1e-3));
    CHECK(b.shape_a == doctest::Approx(a.shape_a).epsilon(1e-3));
    CHECK(b.shape_b == doctest::Approx(a.shape_b).epsilon(1e-3));
  }
}

TEST_SUITE("select_best") {
  TEST_CASE("normal data ranks by KS ascending") {
    Rng rng(104);
    const auto s = EmpiricalSample::from(sample(DistModel::normal(0.0, 1.0), 5000, rng),
                                         Units::kSeconds);
    const Family families[] = {Family::kNormal, Family::kJohnsonSU};
    const auto ranked = select_best(s, families);
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].ks <= ranked[1].ks);
    CHECK(std::abs(ranked[0].ks - ranked[1].ks) < 0.002);
  }

  TEST_CASE("empty family set is a usage error") {
    const auto s = EmpiricalSample::from(std::vector<double>{1, 2, 3}, Units::kBytes);
    CHECK_THROWS_AS(select_best(s, std::span<const Family>{}), UsageError);
  }

  TEST_CASE("failed fits rank last, all failing throws") {
    std::vector<double> v(100, 1.0);
    v.back() = 2.0;
    const auto s = EmpiricalSample::from(v, Units::kBytes);
    const Family all[] = {Family::kJohnsonSU, Family::kNormal, Family::kExpModifiedNormal};
    try {
      const auto ranked = select_best(s, all);
      for (std::size_t i = 1; i < ranked.size(); ++i) {
        CHECK(ranked[i - 1].ks <= ranked[i].ks);
        if (!ranked[i - 1].model) CHECK(!ranked[i].model);
      }
    } catch (const FitError&) {
      // Acceptable: every family failed on this near-degenerate sample.
    }
    const auto flat = EmpiricalSample::from(std::vector<double>(100, 1.0), Units::kBytes);
    CHECK_THROWS_AS(select_best(flat, all), FitError);
  }
}
