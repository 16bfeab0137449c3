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
//
// Command-line surface: design | run | sweep | check.
// Exit codes: 0 success, 1 unconverged run, 2 invalid flags/config,
// 3 privacy condition violation.

#ifndef DPAC_CLI_HPP
#define DPAC_CLI_HPP

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dpac/serialize.hpp"

namespace dpac::cli {

namespace detail {

inline int threads_from_env() {
  if (const char* env = std::getenv("DP_CONSENSUS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;
}

inline std::uint64_t fresh_seed(std::ostream& out) {
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  out << "seed: " << seed << " (drawn fresh; pass --seed to reproduce)\n";
  return seed;
}

inline serialize::json condition_report_json(const privacy::NoisePlan& plan,
                                             const experiments::ExperimentConfig& config) {
  serialize::json out;
  if (config.algorithm == privacy::Algorithm::dishuf_gaussian) {
    const auto report = privacy::check_gaussian_condition(plan, config.budget, config.graph.n,
                                                          static_cast<Real>(config.abar));
    out["condition"] = "gaussian-sufficient";
    out["lhs"] = static_cast<double>(report.lhs);
    out["rhs"] = static_cast<double>(report.rhs);
    out["margin"] = static_cast<double>(report.margin);
    out["pass"] = report.satisfied;
  } else if (config.algorithm == privacy::Algorithm::dishuf_laplace) {
    const auto report = privacy::check_laplace_condition(plan, config.budget, config.graph.n,
                                                         static_cast<Real>(config.abar));
    out["condition"] = "laplace-sufficient";
    out["margin_gamma"] = static_cast<double>(report.margin_gamma);
    out["margin_eta"] = serialize::detail::real_to_json(report.margin_eta);
    out["pass"] = report.satisfied;
  } else {
    // Baselines: compare against the minimal calibrated level.
    const auto minimal = privacy::design_baseline(config.budget, config.graph.n, config.algorithm);
    const Real margin = plan.sigma_xi - minimal.sigma_xi;
    out["condition"] = "baseline-minimal-noise";
    out["sigma_xi_minimal"] = static_cast<double>(minimal.sigma_xi);
    out["margin"] = static_cast<double>(margin);
    out["pass"] = margin >= -1e-9L * minimal.sigma_xi;
  }
  return out;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Differentially private average consensus toolkit"};
  app.set_help_flag("--help", "print usage");  // frees -h/--h for the Laplace design knob
  app.require_subcommand(1);

  // ---- design ----
  auto* design = app.add_subcommand("design", "Design noise levels for a privacy budget");
  std::string d_algorithm;
  double d_epsilon = 0, d_delta = 0, d_mu = 0, d_abar = 1e4;
  std::optional<double> d_g, d_h;
  int d_n = 0;
  design->add_option("--algorithm", d_algorithm, "dishuf-gaussian|dishuf-laplace|osp-gaussian|osp-laplace|dpca-gaussian|dpca-laplace")->required();
  design->add_option("--epsilon", d_epsilon)->required();
  design->add_option("--delta", d_delta);
  design->add_option("--mu", d_mu)->required();
  design->add_option("--n", d_n)->required();
  design->add_option("--abar", d_abar);
  design->add_option("--g", d_g, "design freedom g > 0 (Gaussian)");
  design->add_option("--h", d_h, "design freedom h > 1 (Laplace)");

  // ---- run ----
  auto* runcmd = app.add_subcommand("run", "Run one trial from a config file");
  std::string r_config, r_transcript, r_trajectory;
  std::optional<std::uint64_t> r_seed;
  std::optional<int> r_threads;
  runcmd->add_option("--config", r_config)->required();
  runcmd->add_option("--transcript", r_transcript, "write the transcript as JSONL");
  runcmd->add_option("--trajectory", r_trajectory, "write the state trajectory as CSV");
  runcmd->add_option("--seed", r_seed, "overrides the config seed");
  runcmd->add_option("--threads", r_threads);

  // ---- sweep ----
  auto* sweepcmd = app.add_subcommand("sweep", "Monte Carlo sweep over g|h|epsilon|n");
  std::string s_config, s_param, s_values, s_out;
  std::optional<long> s_trials;
  std::optional<std::uint64_t> s_seed;
  std::optional<int> s_threads;
  sweepcmd->add_option("--config", s_config)->required();
  sweepcmd->add_option("--param", s_param)->required();
  sweepcmd->add_option("--values", s_values, "comma-separated list")->required();
  sweepcmd->add_option("--trials", s_trials, "overrides the config trial count");
  sweepcmd->add_option("--out", s_out, "output directory")->required();
  sweepcmd->add_option("--seed", s_seed);
  sweepcmd->add_option("--threads", s_threads);

  // ---- check ----
  auto* checkcmd = app.add_subcommand("check", "Verify the privacy condition of a config");
  std::string c_config;
  checkcmd->add_option("--config", c_config)->required();

  std::vector<const char*> argv;
  argv.push_back("dpac");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (design->parsed()) {
      privacy::Algorithm algorithm;
      try {
        algorithm = privacy::algorithm_from_string(d_algorithm);
      } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
      }
      experiments::ExperimentConfig config;
      config.algorithm = algorithm;
      config.budget = {d_epsilon, d_delta, d_mu};
      config.graph.n = d_n;
      config.abar = static_cast<long>(d_abar);
      privacy::NoisePlan plan;
      try {
        switch (algorithm) {
          case privacy::Algorithm::dishuf_gaussian:
            if (!d_g) throw std::domain_error("dishuf-gaussian requires --g (g > 0)");
            if (d_h) throw std::domain_error("--h does not apply to the Gaussian design");
            config.design_param = *d_g;
            break;
          case privacy::Algorithm::dishuf_laplace:
            if (!d_h) throw std::domain_error("dishuf-laplace requires --h (h must exceed 1)");
            if (d_g) throw std::domain_error("--g does not apply to the Laplace design");
            if (*d_h <= 1) throw std::domain_error("h must exceed 1");
            config.design_param = *d_h;
            break;
          default:
            if (d_g || d_h)
              throw std::domain_error("--g/--h do not apply to the baseline designs");
            break;
        }
        plan = config.plan();
      } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
      }
      auto doc = serialize::plan_to_json(
          plan, privacy::predict_mse(plan, config.graph.n, algorithm));
      if (config.is_dishuf()) doc["check"] = detail::condition_report_json(plan, config);
      if (plan.eta_clamped)
        err << "warning: sufficient condition holds without shuffle noise; sigma_eta "
               "clamped to 0\n";
      out << doc.dump(2) << "\n";
      return 0;
    }

    if (runcmd->parsed()) {
      experiments::ExperimentConfig config;
      try {
        config = serialize::load_config_file(r_config);
      } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
      }
      if (r_seed) {
        config.seed = *r_seed;
        config.seed_explicit = true;
      }
      if (!config.seed_explicit) config.seed = detail::fresh_seed(out);
      if (r_threads) config.threads = *r_threads;
      else if (int env_threads = detail::threads_from_env()) config.threads = env_threads;
      if (!r_transcript.empty()) config.record_transcript = true;
      if (!r_trajectory.empty() && config.thin <= 0) config.thin = 1;

      experiments::TrialArtifacts artifacts;
      experiments::TrialResult result;
      try {
        result = experiments::run_trial(config, 0, &artifacts);
      } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
      }
      if (!r_transcript.empty()) {
        std::ofstream tfile(r_transcript, std::ios::binary);
        if (!tfile) {
          err << "error: cannot write " << r_transcript << "\n";
          return 2;
        }
        artifacts.transcript.to_jsonl(tfile);
      }
      if (!r_trajectory.empty()) {
        std::ofstream tfile(r_trajectory, std::ios::binary);
        if (!tfile) {
          err << "error: cannot write " << r_trajectory << "\n";
          return 2;
        }
        consensus::trajectory_csv(artifacts.run, tfile);
      }
      serialize::json doc{{"algorithm", privacy::to_string(config.algorithm)},
                          {"seed", config.seed},
                          {"mean_sq_error", result.mean_sq_error},
                          {"network_error", result.network_error},
                          {"iterations", result.iterations},
                          {"converged", result.converged},
                          {"exact_limit", result.exact_limit},
                          {"plan", serialize::plan_to_json(
                                       artifacts.plan,
                                       privacy::predict_mse(artifacts.plan, config.graph.n,
                                                            config.algorithm))}};
      out << doc.dump(2) << "\n";
      return result.converged ? 0 : 1;
    }

    if (sweepcmd->parsed()) {
      experiments::ExperimentConfig config;
      std::vector<double> values;
      try {
        config = serialize::load_config_file(s_config);
        std::stringstream ss(s_values);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (!item.empty()) values.push_back(std::stod(item));
        }
        if (values.empty()) throw ValidationError("sweep: --values is empty");
      } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
      }
      if (s_seed) {
        config.seed = *s_seed;
        config.seed_explicit = true;
      }
      if (!config.seed_explicit) config.seed = detail::fresh_seed(out);
      if (s_trials) config.trials = *s_trials;
      if (s_threads) config.threads = *s_threads;
      else if (int env_threads = detail::threads_from_env()) config.threads = env_threads;

      std::vector<experiments::SweepRow> rows;
      try {
        rows = experiments::sweep(config, s_param, values);
      } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
      }
      std::error_code ec;
      std::filesystem::create_directories(s_out, ec);
      std::ostringstream csv;
      serialize::emit_csv(rows, csv);
      serialize::write_file(s_out + "/sweep.csv", csv.str());
      serialize::write_file(s_out + "/sweep.json", serialize::sweep_to_json(rows).dump(2) + "\n");
      out << csv.str();
      return 0;
    }

    if (checkcmd->parsed()) {
      experiments::ExperimentConfig config;
      privacy::NoisePlan plan;
      try {
        config = serialize::load_config_file(c_config);
        plan = config.plan();
      } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
      }
      auto report = detail::condition_report_json(plan, config);
      serialize::json doc{{"algorithm", privacy::to_string(config.algorithm)},
                          {"plan", serialize::plan_to_json(
                                       plan, privacy::predict_mse(plan, config.graph.n,
                                                                  config.algorithm))},
                          {"check", report}};
      out << doc.dump(2) << "\n";
      return report.at("pass").get<bool>() ? 0 : 3;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace dpac::cli

#endif  // DPAC_CLI_HPP
