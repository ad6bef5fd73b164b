// Copyright 2026 The edgescale Authors
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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "edgescale/errors.hpp"
#include "edgescale/solver.hpp"

namespace edgescale {

namespace {

std::vector<char> reachable_from(const MarkovChain& chain, std::size_t start) {
  std::vector<char> seen(chain.size(), 0);
  std::vector<std::size_t> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    const std::size_t s = stack.back();
    stack.pop_back();
    for (std::uint32_t e = chain.row_offsets[s]; e < chain.row_offsets[s + 1]; ++e) {
      if (chain.prob[e] > 0.0 && !seen[chain.col[e]]) {
        seen[chain.col[e]] = 1;
        stack.push_back(chain.col[e]);
      }
    }
  }
  return seen;
}

// Iterative Tarjan over the sub-graph marked in `active`; returns the closed
// strongly connected components (no positive-probability edge leaves them).
std::vector<std::vector<std::size_t>> closed_classes(const MarkovChain& chain, const std::vector<char>& active) {
  const std::size_t n = chain.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::uint32_t edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (!active[root] || index[root] != kUnset) continue;
    std::vector<Frame> call{{root, chain.row_offsets[root]}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const std::size_t v = f.node;
      if (f.edge < chain.row_offsets[v + 1]) {
        const std::uint32_t e = f.edge++;
        if (chain.prob[e] <= 0.0) continue;
        const std::size_t w = chain.col[e];
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, chain.row_offsets[w]});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> members;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = components.size();
          members.push_back(w);
        } while (w != v);
        std::sort(members.begin(), members.end());
        components.push_back(std::move(members));
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().node;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }

  std::vector<std::vector<std::size_t>> closed;
  for (std::size_t c = 0; c < components.size(); ++c) {
    bool leaks = false;
    for (std::size_t s : components[c]) {
      for (std::uint32_t e = chain.row_offsets[s]; e < chain.row_offsets[s + 1] && !leaks; ++e) {
        leaks = chain.prob[e] > 0.0 && comp[chain.col[e]] != c;
      }
      if (leaks) break;
    }
    if (!leaks) closed.push_back(components[c]);
  }
  return closed;
}

std::vector<double> solve_closed_class(const MarkovChain& chain, const std::vector<std::size_t>& members) {
  const auto m = static_cast<Eigen::Index>(members.size());
  std::vector<Eigen::Index> local(chain.size(), -1);
  for (Eigen::Index i = 0; i < m; ++i) local[members[static_cast<std::size_t>(i)]] = i;

  // pi (P - I) = 0  <=>  (P - I)^T pi^T = 0, last equation replaced by sum(pi) = 1
  Eigen::MatrixXd a = -Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t s = members[static_cast<std::size_t>(i)];
    for (std::uint32_t e = chain.row_offsets[s]; e < chain.row_offsets[s + 1]; ++e) {
      a(local[chain.col[e]], i) += chain.prob[e];
    }
  }
  a.row(m - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  b(m - 1) = 1.0;
  const Eigen::VectorXd x = a.partialPivLu().solve(b);

  std::vector<double> pi(chain.size(), 0.0);
  for (Eigen::Index i = 0; i < m; ++i) pi[members[static_cast<std::size_t>(i)]] = std::max(0.0, x(i));
  double total = 0.0;
  for (double p : pi) total += p;
  for (double& p : pi) p /= total;
  return pi;
}

std::vector<double> power_iteration(const MarkovChain& chain, std::vector<double> x, const StationaryOptions& opt) {
  const std::size_t n = chain.size();
  std::vector<double> y(n);
  double residual = 0.0;
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double xs = x[s];
      if (xs == 0.0) continue;
      for (std::uint32_t e = chain.row_offsets[s]; e < chain.row_offsets[s + 1]; ++e) {
        y[chain.col[e]] += xs * chain.prob[e];
      }
    }
    residual = 0.0;
    double total = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      residual += std::abs(y[s] - x[s]);
      x[s] = 0.5 * (x[s] + y[s]);
      total += x[s];
    }
    for (double& p : x) p /= total;
    if (residual <= opt.tolerance) return x;
  }
  throw NonConvergence("stationary power iteration hit " + std::to_string(opt.max_iterations) + " iterations",
                       residual);
}

}  // namespace

StationaryDistribution stationary_distribution(const MarkovChain& chain, const StationaryOptions& options) {
  const std::size_t n = chain.size();
  if (options.initial_state >= n) throw ContractViolation("initial state out of range");

  StationaryMethod method = options.method;
  std::vector<std::vector<std::size_t>> closed;
  if (method != StationaryMethod::Power) {
    closed = closed_classes(chain, reachable_from(chain, options.initial_state));
    if (method == StationaryMethod::Auto) {
      const bool direct_ok = !options.initial_vector && closed.size() == 1 && closed.front().size() < options.direct_limit;
      method = direct_ok ? StationaryMethod::Direct : StationaryMethod::Power;
    } else if (closed.size() != 1) {
      throw ContractViolation("direct stationary solve needs exactly one reachable closed class, found " +
                              std::to_string(closed.size()));
    }
  }

  if (method == StationaryMethod::Direct) return {solve_closed_class(chain, closed.front())};

  std::vector<double> x;
  if (options.initial_vector) {
    x = *options.initial_vector;
    if (x.size() != n) throw ContractViolation("initial vector size differs from chain size");
    double total = 0.0;
    for (double p : x) {
      if (p < 0.0) throw ContractViolation("initial vector has a negative entry");
      total += p;
    }
    if (!(total > 0.0)) throw ContractViolation("initial vector sums to zero");
    for (double& p : x) p /= total;
  } else {
    x.assign(n, 0.0);
    x[options.initial_state] = 1.0;
  }
  return {power_iteration(chain, std::move(x), options)};
}

}  // namespace edgescale
