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
// Undirected weighted communication graphs: connected, symmetric weights,
// zero diagonal, and row sums strictly below one, so that I - L is doubly
// stochastic with nonnegative entries and the consensus iteration contracts.

#ifndef DPAC_GRAPH_HPP
#define DPAC_GRAPH_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dpac/common.hpp"
#include "dpac/rng.hpp"

namespace dpac::net {

enum class GraphKind { cycle, path, complete, erdos_renyi };

inline std::string to_string(GraphKind k) {
  switch (k) {
    case GraphKind::cycle: return "cycle";
    case GraphKind::path: return "path";
    case GraphKind::complete: return "complete";
    case GraphKind::erdos_renyi: return "erdos-renyi";
  }
  return "?";
}

inline GraphKind graph_kind_from_string(const std::string& s) {
  if (s == "cycle") return GraphKind::cycle;
  if (s == "path") return GraphKind::path;
  if (s == "complete") return GraphKind::complete;
  if (s == "erdos-renyi") return GraphKind::erdos_renyi;
  throw ValidationError("unknown graph kind: " + s);
}

struct GraphSpec {
  GraphKind kind = GraphKind::cycle;
  int n = 2;
  // Fixed edge weight; if absent, random graphs use w = rho/(max degree + 1).
  std::optional<double> weight;
  double edge_prob = 0.5;  // erdos-renyi only
  double rho = 0.9;        // default weight rule parameter
  std::uint64_t seed = 0;
};

struct SpectralSummary {
  Eigen::VectorXd eigenvalues;  // ascending
  double beta = 0;              // max{|1-lambda_2|, |1-lambda_n|}
};

class WeightedGraph {
 public:
  WeightedGraph(int n, std::vector<std::pair<int, int>> edges, std::vector<double> weights)
      : n_(n), w_(Eigen::MatrixXd::Zero(n, n)) {
    if (n < 2) throw ValidationError("graph: need at least 2 agents");
    if (edges.size() != weights.size())
      throw ValidationError("graph: edge/weight count mismatch");
    for (size_t k = 0; k < edges.size(); ++k) {
      auto [i, j] = edges[k];
      if (i < 0 || j < 0 || i >= n || j >= n || i == j)
        throw ValidationError("graph: invalid edge endpoints");
      if (weights[k] <= 0) throw ValidationError("graph: edge weights must be positive");
      if (w_(i, j) != 0) throw ValidationError("graph: duplicate edge");
      w_(i, j) = w_(j, i) = weights[k];
    }
    build_adjacency();
    validate();
  }

  static WeightedGraph build(const GraphSpec& spec);

  int n() const { return n_; }
  double weight(int i, int j) const { return w_(i, j); }
  const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }  // i < j
  bool has_edge(int i, int j) const { return i != j && w_(i, j) > 0; }

  // [L]_ij = -w_ij off-diagonal, [L]_ii = sum_k w_ik.
  Eigen::MatrixXd laplacian() const {
    Eigen::MatrixXd l = -w_;
    for (int i = 0; i < n_; ++i) l(i, i) = w_.row(i).sum();
    return l;
  }

  SpectralSummary spectral() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian());
    if (solver.info() != Eigen::Success)
      throw NumericalError("graph: eigensolver failed to converge");
    SpectralSummary s;
    s.eigenvalues = solver.eigenvalues();
    const int n = n_;
    s.beta = std::max(std::abs(1.0 - s.eigenvalues(1)), std::abs(1.0 - s.eigenvalues(n - 1)));
    if (std::abs(s.eigenvalues(0)) > 1e-10)
      throw NumericalError("graph: smallest Laplacian eigenvalue not ~0");
    return s;
  }

  double contraction_factor() const { return spectral().beta; }

  std::string to_adjacency_text() const {
    std::ostringstream out;
    for (int i = 0; i < n_; ++i) {
      out << i << ":";
      for (int j : neighbors_[i]) out << " " << j << "(" << w_(i, j) << ")";
      out << "\n";
    }
    return out.str();
  }

 private:
  void build_adjacency() {
    neighbors_.assign(n_, {});
    edges_.clear();
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (w_(i, j) > 0) {
          neighbors_[i].push_back(j);
          if (i < j) edges_.emplace_back(i, j);
        }
  }

  void validate() const {
    for (int i = 0; i < n_; ++i) {
      const double row = w_.row(i).sum();
      if (row >= 1.0) {
        std::ostringstream msg;
        msg << "graph: row sum " << row << " at agent " << i
            << " violates sum_j w_ij < 1";
        throw ValidationError(msg.str());
      }
    }
    // Connectivity by BFS.
    std::vector<bool> seen(n_, false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    int visited = 1;
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int v : neighbors_[u])
        if (!seen[v]) {
          seen[v] = true;
          ++visited;
          frontier.push(v);
        }
    }
    if (visited != n_) throw ValidationError("graph: not connected");
  }

  int n_;
  Eigen::MatrixXd w_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::pair<int, int>> edges_;
};

namespace detail {

inline bool edges_connect(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (auto [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<bool> seen(n, false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int visited = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = true;
        ++visited;
        frontier.push(v);
      }
  }
  return visited == n;
}

}  // namespace detail

inline WeightedGraph WeightedGraph::build(const GraphSpec& spec) {
  using detail::edges_connect;
  const int n = spec.n;
  if (n < 2) throw ValidationError("graph: need at least 2 agents");
  std::vector<std::pair<int, int>> edges;
  switch (spec.kind) {
    case GraphKind::path:
      for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      break;
    case GraphKind::cycle:
      if (n < 3) {
        if (n != 2) throw ValidationError("graph: cycle needs n >= 2");
        edges.emplace_back(0, 1);  // a 2-cycle degenerates to a single edge
        break;
      }
      for (int i = 0; i < n; ++i) edges.emplace_back(std::min(i, (i + 1) % n),
                                                     std::max(i, (i + 1) % n));
      break;
    case GraphKind::complete:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
      break;
    case GraphKind::erdos_renyi: {
      Rng rng(spec.seed, {0x6772617068ull});
      bool connected = false;
      for (int attempt = 0; attempt < 100 && !connected; ++attempt) {
        edges.clear();
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            if (rng.uniform01() < spec.edge_prob) edges.emplace_back(i, j);
        connected = edges_connect(n, edges);
      }
      if (!connected)
        throw ValidationError("graph: no connected draw after 100 attempts");
      break;
    }
  }

  double w;
  if (spec.weight) {
    w = *spec.weight;
  } else {
    std::vector<int> degree(n, 0);
    for (auto [i, j] : edges) {
      ++degree[i];
      ++degree[j];
    }
    const int max_degree = *std::max_element(degree.begin(), degree.end());
    w = spec.rho / (max_degree + 1);
  }
  return WeightedGraph(n, edges, std::vector<double>(edges.size(), w));
}

}  // namespace dpac::net

#endif  // DPAC_GRAPH_HPP
