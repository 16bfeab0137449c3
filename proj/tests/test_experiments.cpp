// Copyright 2026 The DPAC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "dpac/experiments.hpp"
#include "dpac/serialize.hpp"

using namespace dpac;
using namespace dpac::experiments;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ExperimentConfig paper_gaussian_config() {
  ExperimentConfig c;
  c.graph = {net::GraphKind::cycle, 10, 0.3};
  c.data.low = 1;
  c.data.high = 25;
  c.data.force_mean = 13.1336;
  c.budget = {10.0, 0.1, 5.0};
  c.algorithm = privacy::Algorithm::dishuf_gaussian;
  c.design_param = 0.01;
  c.abar = 10000;
  c.paillier = {128, 40};
  c.trials = 1;
  c.seed = 7;
  c.stop.tol = 1e-8;
  return c;
}

ExperimentConfig paper_laplace_config() {
  auto c = paper_gaussian_config();
  c.budget = {10.0, 0.0, 5.0};
  c.algorithm = privacy::Algorithm::dishuf_laplace;
  c.design_param = 2.0;
  return c;
}

}  // namespace

TEST_CASE("data generation: force_mean pins dstar") {
  const auto config = paper_gaussian_config();
  const auto data = config.make_data();
  Real mean = 0;
  for (Real v : data) mean += v;
  mean /= 10;
  CHECK_THAT(static_cast<double>(mean), WithinAbs(13.1336, 1e-12));
  CHECK(config.make_data() == data);  // deterministic
}

TEST_CASE("trials are deterministic in (seed, index)") {
  const auto config = paper_gaussian_config();
  const TrialContext ctx(config);
  const auto a = run_trial(config, ctx, 3);
  const auto b = run_trial(config, ctx, 3);
  const auto c = run_trial(config, ctx, 4);
  CHECK(a.mean_sq_error == b.mean_sq_error);
  CHECK(a.mean_sq_error != c.mean_sq_error);
}

TEST_CASE("zero noise levels give zero error") {
  auto config = paper_gaussian_config();
  config.sigma_gamma_override = 0.0;
  config.sigma_eta_override = 0.0;
  config.stop.tol = 1e-9;
  const auto r = run_trial(config, 0);
  CHECK(r.converged);
  CHECK(r.mean_sq_error <= 1e-17);

  auto osp = config;
  osp.algorithm = privacy::Algorithm::osp_gaussian;
  osp.sigma_gamma_override.reset();
  osp.sigma_eta_override.reset();
  osp.sigma_xi_override = 0.0;
  CHECK(run_trial(osp, 0).mean_sq_error <= 1e-17);

  auto dpca = osp;
  dpca.algorithm = privacy::Algorithm::dpca_gaussian;
  CHECK(run_trial(dpca, 0).mean_sq_error <= 1e-25);
}

TEST_CASE("gaussian trial error equals the squared mean of its gamma draw") {
  const auto config = paper_gaussian_config();
  TrialArtifacts artifacts;
  const auto r = run_trial(config, 5, &artifacts);
  REQUIRE(r.converged);
  Real gamma_mean = 0;
  for (Real g : artifacts.init.gamma) gamma_mean += g;
  gamma_mean /= 10;
  CHECK_THAT(r.mean_sq_error, WithinAbs(static_cast<double>(gamma_mean * gamma_mean), 1e-5));
}

TEST_CASE("small monte carlo approaches theory") {
  auto config = paper_laplace_config();
  config.trials = 600;
  config.reuse_keypairs = true;
  config.threads = 2;
  const auto s = monte_carlo(config);
  CHECK(s.trials == 600);
  CHECK_THAT(s.mse_theory, WithinRel(0.02, 1e-12));  // 2 h^2 mu^2 / (n eps)^2
  // 5 SE band at sqrt(5)/sqrt(600) relative.
  CHECK(std::fabs(s.mse_mean - s.mse_theory) <= 5.0 * std::sqrt(5.0 / 600) * s.mse_theory);
  CHECK(s.mse_se > 0);
  CHECK(s.unconverged == 0);
  CHECK(s.exact_limit_trials == 0);
}

TEST_CASE("monte carlo aggregation is identical across thread counts") {
  auto config = paper_gaussian_config();
  config.trials = 24;
  config.reuse_keypairs = true;
  config.threads = 1;
  const auto s1 = monte_carlo(config);
  config.threads = 2;
  const auto s2 = monte_carlo(config);
  CHECK(s1.per_trial == s2.per_trial);
  CHECK(s1.mse_mean == s2.mse_mean);
  CHECK(s1.mse_se == s2.mse_se);
}

TEST_CASE("huge sigma_eta switches to the exact integer-domain limit") {
  auto config = paper_laplace_config();
  config.design_param = 1.1;  // sigma_eta ~ 1.5e15, iterated in extended precision
  config.trials = 2;
  config.reuse_keypairs = true;
  const auto iterated = monte_carlo(config);
  CHECK(iterated.exact_limit_trials == 0);

  config.limit_mode = LimitMode::exact;
  const auto exact = monte_carlo(config);
  CHECK(exact.exact_limit_trials == 2);
  // Same draws, two evaluation routes: limits agree to the float-noise level.
  CHECK_THAT(exact.mse_mean, WithinAbs(iterated.mse_mean, 1e-4));

  // n = 50 designs push sigma_eta ~ 1e101; auto mode must refuse to iterate.
  auto big = config;
  big.limit_mode = LimitMode::automatic;
  big.graph.n = 50;
  big.paillier.key_bits = 512;
  big.trials = 1;
  const auto s = monte_carlo(big);
  CHECK(s.exact_limit_trials == 1);
  CHECK(s.unconverged == 0);
}

TEST_CASE("sweep produces one row per value plus the DPCA row") {
  auto config = paper_laplace_config();
  config.trials = 40;
  config.reuse_keypairs = true;
  const auto rows = sweep(config, "h", {4.0, 3.0, 2.0, 1.1});
  REQUIRE(rows.size() == 5);
  for (int i = 0; i < 4; ++i) {
    CHECK(rows[i].summary.has_value());
    CHECK(rows[i].error.empty());
  }
  CHECK(std::isnan(rows[4].param_value));
  REQUIRE(rows[4].summary.has_value());
  CHECK(rows[4].summary->config.algorithm == privacy::Algorithm::dpca_laplace);
  CHECK_THAT(rows[4].summary->mse_theory, WithinRel(0.005, 1e-12));

  // Theory column: 2 h^2 mu^2/(n^2 eps^2) = {0.08, 0.045, 0.02, 0.00605}.
  const double expect[] = {0.08, 0.045, 0.02, 0.00605};
  for (int i = 0; i < 4; ++i) CHECK_THAT(rows[i].summary->mse_theory, WithinRel(expect[i], 1e-12));
}

TEST_CASE("sweep rows with invalid values carry errors and the sweep continues") {
  auto config = paper_laplace_config();
  config.trials = 5;
  config.reuse_keypairs = true;
  const auto rows = sweep(config, "h", {0.5, 2.0});
  REQUIRE(rows.size() == 3);
  CHECK_FALSE(rows[0].summary.has_value());
  CHECK(rows[0].error.find("h must exceed 1") != std::string::npos);
  CHECK(rows[1].summary.has_value());

  CHECK_THROWS_AS(sweep(config, "bogus", {1.0}), ValidationError);
  CHECK(sweep(config, "h", {}).empty());

  // Family mismatch: sweeping g over a laplace config errors per row.
  const auto bad = sweep(config, "g", {1.0});
  REQUIRE(bad.size() == 2);  // value row + dpca-gaussian row
  CHECK_FALSE(bad[0].summary.has_value());
}

TEST_CASE("epsilon sweep redesigns the plan per value") {
  auto config = paper_laplace_config();
  config.trials = 3;
  config.reuse_keypairs = true;
  const auto rows = sweep(config, "epsilon", {0.1, 1.0, 10.0});
  REQUIRE(rows.size() == 3);
  // mse_theory = 2 h^2 mu^2/(n^2 eps^2) scales as 1/eps^2.
  CHECK_THAT(rows[0].summary->mse_theory / rows[2].summary->mse_theory, WithinRel(1e4, 1e-9));
  CHECK_THAT(rows[1].summary->mse_theory / rows[2].summary->mse_theory, WithinRel(1e2, 1e-9));
}

TEST_CASE("csv emission") {
  auto config = paper_laplace_config();
  config.trials = 4;
  config.reuse_keypairs = true;
  const auto rows = sweep(config, "h", {2.0});
  std::ostringstream csv;
  serialize::emit_csv(rows, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("algorithm,param_name,param_value,trials,mse_mean,mse_se,mse_theory,iters_mean\n",
                   0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find("dishuf-laplace,h,2,4,") != std::string::npos);
  CHECK(text.find("dpca-laplace,h,,4,") != std::string::npos);

  std::ostringstream empty;
  serialize::emit_csv({}, empty);
  CHECK(empty.str() ==
        "algorithm,param_name,param_value,trials,mse_mean,mse_se,mse_theory,iters_mean\n");
}

TEST_CASE("csv bytes are reproducible for identical config+seed") {
  auto config = paper_gaussian_config();
  config.trials = 6;
  config.reuse_keypairs = true;
  auto render = [&] {
    std::ostringstream csv;
    serialize::emit_csv(sweep(config, "g", {1.0, 0.01}), csv);
    return csv.str();
  };
  CHECK(render() == render());
}

TEST_CASE("summary json roundtrip is exact") {
  auto config = paper_laplace_config();
  config.trials = 8;
  config.reuse_keypairs = true;
  const auto s = monte_carlo(config);
  const auto j = serialize::summary_to_json(s);
  const auto back = serialize::summary_from_json(serialize::json::parse(j.dump()));
  CHECK(back.mse_mean == s.mse_mean);
  CHECK(back.mse_se == s.mse_se);
  CHECK(back.mse_theory == s.mse_theory);
  CHECK(back.network_error_mean == s.network_error_mean);
  CHECK(back.iters_mean == s.iters_mean);
  CHECK(back.per_trial == s.per_trial);
  CHECK(back.trials == s.trials);
  CHECK(back.config.seed == s.config.seed);
  CHECK(back.config.design_param == s.config.design_param);
}

TEST_CASE("config json: strict parsing") {
  const auto config = paper_gaussian_config();
  const auto j = serialize::config_to_json(config);
  const auto back = serialize::config_from_json(j);
  CHECK(back.algorithm == config.algorithm);
  CHECK(back.design_param == config.design_param);
  CHECK(back.graph.n == config.graph.n);
  CHECK(back.abar == config.abar);

  auto bad = j;
  bad["unknown_block"] = 1;
  CHECK_THROWS_AS(serialize::config_from_json(bad), ValidationError);
  auto bad2 = j;
  bad2["run"]["typo_key"] = true;
  CHECK_THROWS_AS(serialize::config_from_json(bad2), ValidationError);
  auto bad3 = j;
  bad3["algorithm"].erase("g");
  CHECK_THROWS_AS(serialize::config_from_json(bad3), ValidationError);
  auto bad4 = j;
  bad4["algorithm"]["name"] = "osp-gaussian";
  CHECK_THROWS_AS(serialize::config_from_json(bad4), ValidationError);  // stray g/abar
}

TEST_CASE("invalid configs are rejected") {
  auto config = paper_gaussian_config();
  config.trials = 0;
  CHECK_THROWS_AS(monte_carlo(config), ValidationError);
  auto config2 = paper_gaussian_config();
  config2.budget.delta = 0;
  CHECK_THROWS_AS(run_trial(config2, 0), ValidationError);
  auto config3 = paper_laplace_config();
  config3.kstar = 10;
  CHECK_THROWS_AS(run_trial(config3, 0), ValidationError);
}
