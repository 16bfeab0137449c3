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
// JSON config files (strict: unknown keys are rejected), Summary and sweep
// serialization, and the CSV emitter. The config schema mirrors
// ExperimentConfig with blocks graph{}, data{}, privacy{}, algorithm{},
// paillier{}, run{}.

#ifndef DPAC_SERIALIZE_HPP
#define DPAC_SERIALIZE_HPP

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dpac/experiments.hpp"

namespace dpac::serialize {

using nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& block, const std::string& name,
                                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : block.items())
    if (!allowed.count(key))
      throw ValidationError("config: unknown key \"" + key + "\" in block \"" + name + "\"");
}

// sigma_eta can exceed double range (it scales like 1/(1-alpha)); emit such
// values as decimal strings.
inline json real_to_json(Real v) {
  if (std::isfinite(static_cast<double>(v))) return static_cast<double>(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.21Lg", v);
  return std::string(buf);
}

}  // namespace detail

inline json plan_to_json(const privacy::NoisePlan& plan, Real predicted_mse) {
  json out;
  out["family"] = privacy::to_string(plan.family);
  out["sigma_gamma"] = detail::real_to_json(plan.sigma_gamma);
  out["sigma_eta"] = detail::real_to_json(plan.sigma_eta);
  out["sigma_xi"] = detail::real_to_json(plan.sigma_xi);
  out["g_or_h"] = plan.design_param;
  out["predicted_mse"] = static_cast<double>(predicted_mse);
  if (plan.eta_clamped) out["eta_clamped"] = true;
  return out;
}

inline json config_to_json(const experiments::ExperimentConfig& c) {
  json graph{{"kind", net::to_string(c.graph.kind)}, {"n", c.graph.n}};
  if (c.graph.weight) graph["weight"] = *c.graph.weight;
  if (c.graph.kind == net::GraphKind::erdos_renyi) {
    graph["edge_prob"] = c.graph.edge_prob;
    graph["rho"] = c.graph.rho;
    graph["seed"] = c.graph.seed;
  }

  json data;
  if (!c.data.values.empty()) {
    data["values"] = c.data.values;
  } else {
    data["dist"] = "uniform";
    data["low"] = c.data.low;
    data["high"] = c.data.high;
  }
  if (c.data.force_mean) data["force_mean"] = *c.data.force_mean;

  json privacy_block{{"epsilon", c.budget.epsilon}, {"mu", c.budget.mu}};
  if (c.budget.delta > 0) privacy_block["delta"] = c.budget.delta;

  json algorithm{{"name", privacy::to_string(c.algorithm)}};
  if (c.algorithm == privacy::Algorithm::dishuf_gaussian) algorithm["g"] = c.design_param;
  if (c.algorithm == privacy::Algorithm::dishuf_laplace) {
    algorithm["h"] = c.design_param;
    algorithm["kstar"] = c.kstar + 1;  // config files use 1-based agents
  }
  if (c.is_dishuf()) algorithm["abar"] = static_cast<double>(c.abar);
  if (c.sigma_gamma_override) algorithm["sigma_gamma"] = *c.sigma_gamma_override;
  if (c.sigma_eta_override) algorithm["sigma_eta"] = *c.sigma_eta_override;
  if (c.sigma_xi_override) algorithm["sigma_xi"] = *c.sigma_xi_override;

  json paillier{{"key_bits", c.paillier.key_bits},
                {"fixed_point_bits", c.paillier.fixed_point_bits}};

  json run{{"trials", c.trials},
           {"seed", c.seed},
           {"max_iters", c.stop.max_iters},
           {"tol", c.stop.tol},
           {"reuse_keypairs", c.reuse_keypairs},
           {"threads", c.threads},
           {"limit_mode", experiments::to_string(c.limit_mode)},
           {"record_transcript", c.record_transcript}};
  if (c.stop.fixed_rounds >= 0) run["fixed_rounds"] = c.stop.fixed_rounds;
  if (c.thin > 0) run["thin"] = c.thin;

  return json{{"graph", graph},     {"data", data},         {"privacy", privacy_block},
              {"algorithm", algorithm}, {"paillier", paillier}, {"run", run}};
}

inline experiments::ExperimentConfig config_from_json(const json& root) {
  if (!root.is_object()) throw ValidationError("config: document must be a JSON object");
  detail::reject_unknown_keys(root, "top-level",
                              {"graph", "data", "privacy", "algorithm", "paillier", "run"});
  experiments::ExperimentConfig c;

  if (!root.contains("graph") || !root.contains("privacy") || !root.contains("algorithm"))
    throw ValidationError("config: blocks graph{}, privacy{}, algorithm{} are required");

  {
    const json& g = root.at("graph");
    detail::reject_unknown_keys(g, "graph", {"kind", "n", "weight", "edge_prob", "rho", "seed"});
    c.graph.kind = net::graph_kind_from_string(g.at("kind").get<std::string>());
    c.graph.n = g.at("n").get<int>();
    if (g.contains("weight")) c.graph.weight = g.at("weight").get<double>();
    if (g.contains("edge_prob")) c.graph.edge_prob = g.at("edge_prob").get<double>();
    if (g.contains("rho")) c.graph.rho = g.at("rho").get<double>();
    if (g.contains("seed")) c.graph.seed = g.at("seed").get<std::uint64_t>();
  }

  if (root.contains("data")) {
    const json& d = root.at("data");
    detail::reject_unknown_keys(d, "data", {"values", "dist", "low", "high", "force_mean"});
    if (d.contains("values")) {
      c.data.values = d.at("values").get<std::vector<double>>();
    } else {
      if (d.contains("dist") && d.at("dist").get<std::string>() != "uniform")
        throw ValidationError("config: only the uniform data distribution is supported");
      if (d.contains("low")) c.data.low = d.at("low").get<double>();
      if (d.contains("high")) c.data.high = d.at("high").get<double>();
    }
    if (d.contains("force_mean")) c.data.force_mean = d.at("force_mean").get<double>();
  }

  {
    const json& p = root.at("privacy");
    detail::reject_unknown_keys(p, "privacy", {"epsilon", "delta", "mu"});
    c.budget.epsilon = p.at("epsilon").get<double>();
    if (p.contains("delta")) c.budget.delta = p.at("delta").get<double>();
    c.budget.mu = p.at("mu").get<double>();
  }

  {
    const json& a = root.at("algorithm");
    detail::reject_unknown_keys(
        a, "algorithm",
        {"name", "g", "h", "kstar", "abar", "sigma_gamma", "sigma_eta", "sigma_xi"});
    c.algorithm = privacy::algorithm_from_string(a.at("name").get<std::string>());
    const bool dishuf = c.is_dishuf();
    if (!dishuf && (a.contains("g") || a.contains("h") || a.contains("abar") ||
                    a.contains("kstar")))
      throw ValidationError("config: g/h/abar/kstar apply to the dishuf algorithms only");
    if (c.algorithm == privacy::Algorithm::dishuf_gaussian) {
      if (!a.contains("g")) throw ValidationError("config: dishuf-gaussian requires g");
      c.design_param = a.at("g").get<double>();
    }
    if (c.algorithm == privacy::Algorithm::dishuf_laplace) {
      if (!a.contains("h")) throw ValidationError("config: dishuf-laplace requires h");
      c.design_param = a.at("h").get<double>();
      if (a.contains("kstar")) c.kstar = a.at("kstar").get<int>() - 1;
    }
    if (a.contains("abar")) c.abar = static_cast<long>(a.at("abar").get<double>());
    if (a.contains("sigma_gamma")) c.sigma_gamma_override = a.at("sigma_gamma").get<double>();
    if (a.contains("sigma_eta")) c.sigma_eta_override = a.at("sigma_eta").get<double>();
    if (a.contains("sigma_xi")) c.sigma_xi_override = a.at("sigma_xi").get<double>();
  }

  if (root.contains("paillier")) {
    const json& p = root.at("paillier");
    detail::reject_unknown_keys(p, "paillier", {"key_bits", "fixed_point_bits"});
    if (p.contains("key_bits")) c.paillier.key_bits = p.at("key_bits").get<unsigned>();
    if (p.contains("fixed_point_bits"))
      c.paillier.fixed_point_bits = p.at("fixed_point_bits").get<unsigned>();
  }

  if (root.contains("run")) {
    const json& r = root.at("run");
    detail::reject_unknown_keys(r, "run",
                                {"trials", "seed", "max_iters", "tol", "fixed_rounds",
                                 "reuse_keypairs", "threads", "limit_mode",
                                 "record_transcript", "thin"});
    if (r.contains("trials")) c.trials = r.at("trials").get<long>();
    if (r.contains("seed")) {
      c.seed = r.at("seed").get<std::uint64_t>();
      c.seed_explicit = true;
    }
    if (r.contains("max_iters")) c.stop.max_iters = r.at("max_iters").get<long>();
    if (r.contains("tol")) c.stop.tol = r.at("tol").get<double>();
    if (r.contains("fixed_rounds")) c.stop.fixed_rounds = r.at("fixed_rounds").get<long>();
    if (r.contains("reuse_keypairs")) c.reuse_keypairs = r.at("reuse_keypairs").get<bool>();
    if (r.contains("threads")) c.threads = r.at("threads").get<int>();
    if (r.contains("limit_mode"))
      c.limit_mode = experiments::limit_mode_from_string(r.at("limit_mode").get<std::string>());
    if (r.contains("record_transcript"))
      c.record_transcript = r.at("record_transcript").get<bool>();
    if (r.contains("thin")) c.thin = r.at("thin").get<long>();
  }

  return c;
}

inline experiments::ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot read " + path);
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: JSON parse error: ") + e.what());
  }
  return config_from_json(root);
}

inline json summary_to_json(const experiments::Summary& s) {
  return json{{"algorithm", privacy::to_string(s.config.algorithm)},
              {"trials", s.trials},
              {"dstar", s.dstar},
              {"mse_mean", s.mse_mean},
              {"mse_se", s.mse_se},
              {"mse_theory", s.mse_theory},
              {"network_error_mean", s.network_error_mean},
              {"iters_mean", s.iters_mean},
              {"unconverged", s.unconverged},
              {"exact_limit_trials", s.exact_limit_trials},
              {"per_trial", s.per_trial},
              {"config", config_to_json(s.config)}};
}

inline experiments::Summary summary_from_json(const json& j) {
  experiments::Summary s;
  s.config = config_from_json(j.at("config"));
  s.trials = j.at("trials").get<long>();
  s.dstar = j.at("dstar").get<double>();
  s.mse_mean = j.at("mse_mean").get<double>();
  s.mse_se = j.at("mse_se").get<double>();
  s.mse_theory = j.at("mse_theory").get<double>();
  s.network_error_mean = j.at("network_error_mean").get<double>();
  s.iters_mean = j.at("iters_mean").get<double>();
  s.unconverged = j.at("unconverged").get<long>();
  s.exact_limit_trials = j.at("exact_limit_trials").get<long>();
  s.per_trial = j.at("per_trial").get<std::vector<double>>();
  return s;
}

inline json sweep_to_json(const std::vector<experiments::SweepRow>& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json r{{"param_name", row.param_name}};
    r["param_value"] = std::isnan(row.param_value) ? json(nullptr) : json(row.param_value);
    if (row.summary) r["summary"] = summary_to_json(*row.summary);
    if (!row.error.empty()) r["error"] = row.error;
    out.push_back(std::move(r));
  }
  return json{{"rows", out}};
}

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Fixed column set; error rows keep the identifying columns and leave the
// numeric cells empty.
inline void emit_csv(const std::vector<experiments::SweepRow>& rows, std::ostream& out) {
  out << "algorithm,param_name,param_value,trials,mse_mean,mse_se,mse_theory,iters_mean\n";
  for (const auto& row : rows) {
    const std::string value = std::isnan(row.param_value) ? "" : csv_number(row.param_value);
    if (row.summary) {
      const auto& s = *row.summary;
      out << privacy::to_string(s.config.algorithm) << "," << row.param_name << "," << value
          << "," << s.trials << "," << csv_number(s.mse_mean) << "," << csv_number(s.mse_se)
          << "," << csv_number(s.mse_theory) << "," << csv_number(s.iters_mean) << "\n";
    } else {
      out << "," << row.param_name << "," << value << ",,,,,\n";
    }
  }
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace dpac::serialize

#endif  // DPAC_SERIALIZE_HPP
