#include "symdiv/exactdiv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace symdiv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Common denominator for the integer flow problem.
constexpr std::int64_t kScale = std::int64_t{1} << 52;

std::vector<std::int64_t> integer_weights(const Eigen::VectorXd& w) {
  const int n = static_cast<int>(w.size());
  std::vector<std::int64_t> out(n);
  std::vector<std::pair<double, int>> frac(n);
  std::int64_t total = 0;
  for (int i = 0; i < n; ++i) {
    const double scaled = w(i) * static_cast<double>(kScale);
    out[i] = static_cast<std::int64_t>(std::floor(scaled));
    frac[i] = {scaled - static_cast<double>(out[i]), i};
    total += out[i];
  }
  std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::int64_t missing = kScale - total;
  // Largest remainders first; only states with positive weight absorb mass.
  for (int k = 0; missing > 0; k = (k + 1) % n) {
    const int i = frac[k].second;
    if (w(i) > 0.0) {
      ++out[i];
      --missing;
    }
  }
  for (int k = n - 1; missing < 0; k = (k + n - 1) % n) {
    const int i = frac[k].second;
    if (out[i] > 0) {
      --out[i];
      ++missing;
    }
  }
  return out;
}

struct TransportSolution {
  std::vector<std::vector<std::int64_t>> flow;
  // Node potentials: sources 0..n-1, sinks n..2n-1.
  std::vector<double> potential;
};

// Successive shortest paths on the complete bipartite graph, dense Dijkstra
// with reduced costs.
TransportSolution solve_transport(const std::vector<std::int64_t>& supply,
                                  const std::vector<std::int64_t>& demand,
                                  const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(supply.size());
  const int m = static_cast<int>(demand.size());
  std::vector<std::vector<std::int64_t>> flow(n, std::vector<std::int64_t>(m, 0));
  std::vector<std::int64_t> left = supply, need = demand;
  // Potentials for source nodes (0..n-1) and sink nodes (n..n+m-1).
  std::vector<double> pot(n + m, 0.0);
  {
    // Initial feasible potentials: pi(sink j) = min_i c_ij, sources 0.
    for (int j = 0; j < m; ++j) {
      double best = kInf;
      for (int i = 0; i < n; ++i) best = std::min(best, cost(i, j));
      pot[n + j] = best;
    }
  }
  const int nodes = n + m;
  std::vector<double> dist(nodes);
  std::vector<int> parent(nodes);
  std::vector<char> done(nodes);
  for (;;) {
    std::int64_t remaining = 0;
    for (auto v : left) remaining += v;
    if (remaining == 0) break;

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (int i = 0; i < n; ++i) {
      if (left[i] > 0) dist[i] = 0.0;
    }
    int target = -1;
    for (;;) {
      int u = -1;
      for (int v = 0; v < nodes; ++v) {
        if (!done[v] && dist[v] < kInf && (u < 0 || dist[v] < dist[u])) u = v;
      }
      if (u < 0) break;
      done[u] = 1;
      if (u >= n && need[u - n] > 0) {
        target = u;
        break;
      }
      if (u < n) {
        for (int j = 0; j < m; ++j) {
          const int v = n + j;
          if (done[v]) continue;
          const double rc = cost(u, j) + pot[u] - pot[v];
          const double nd = dist[u] + std::max(0.0, rc);
          if (nd < dist[v]) {
            dist[v] = nd;
            parent[v] = u;
          }
        }
      } else {
        const int j = u - n;
        for (int i = 0; i < n; ++i) {
          if (done[i] || flow[i][j] == 0) continue;
          const double rc = -cost(i, j) + pot[u] - pot[i];
          const double nd = dist[u] + std::max(0.0, rc);
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = u;
          }
        }
      }
    }
    if (target < 0) throw std::logic_error("wasserstein1: transport problem infeasible");
    const double dt = dist[target];
    for (int v = 0; v < nodes; ++v) {
      pot[v] += done[v] ? dist[v] : dt;
    }
    // Bottleneck along the path back to a source with supply left.
    std::int64_t amount = need[target - n];
    int v = target;
    while (parent[v] >= 0) {
      const int u = parent[v];
      if (u >= n) amount = std::min(amount, flow[v][u - n]);  // reverse arc sink->source
      v = u;
    }
    amount = std::min(amount, left[v]);
    v = target;
    while (parent[v] >= 0) {
      const int u = parent[v];
      if (u < n) flow[u][v - n] += amount;
      else flow[v][u - n] -= amount;
      v = u;
    }
    left[v] -= amount;
    need[target - n] -= amount;
  }
  return {std::move(flow), std::move(pot)};
}

// Bellman-Ford from a virtual root over the final residual graph.
std::vector<double> residual_potentials(const std::vector<std::vector<std::int64_t>>& flow,
                                        const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(flow.size());
  const int m = n == 0 ? 0 : static_cast<int>(flow.front().size());
  std::vector<double> pi(n + m, 0.0);
  for (int round = 0; round < n + m + 1; ++round) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        if (pi[i] + cost(i, j) < pi[n + j] - 1e-15) {
          pi[n + j] = pi[i] + cost(i, j);
          changed = true;
        }
        if (flow[i][j] > 0 && pi[n + j] - cost(i, j) < pi[i] - 1e-15) {
          pi[i] = pi[n + j] - cost(i, j);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return pi;
}

}  // namespace

DivergenceReport wasserstein1(const DiscreteMeasure& q, const DiscreteMeasure& p,
                              const MetricSpace& metric, double lipschitz) {
  if (q.size() != p.size() || q.size() != metric.size()) {
    throw std::invalid_argument("wasserstein1: size mismatch");
  }
  if (!(lipschitz > 0.0)) throw std::invalid_argument("wasserstein1: L must be positive");
  const int n = q.size();
  const auto supply = integer_weights(q.weights());
  const auto demand = integer_weights(p.weights());
  const Eigen::MatrixXd& d = metric.distances();
  const auto sol = solve_transport(supply, demand, d);

  DivergenceReport r;
  r.coupling = Eigen::MatrixXd::Zero(n, n);
  double primal = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (sol.flow[i][j] == 0) continue;
      const double mass = static_cast<double>(sol.flow[i][j]) / static_cast<double>(kScale);
      r.coupling(i, j) = mass;
      primal += mass * d(i, j);
    }
  }
  // pi_j - pi_i <= d_ij on every pair, equality on used arcs. The potential
  // h = -pi(sink) is c-concave-transformed into a 1-Lipschitz function.
  const auto pi = residual_potentials(sol.flow, d);
  Eigen::VectorXd g(n);
  for (int x = 0; x < n; ++x) {
    double best = kInf;
    for (int j = 0; j < n; ++j) best = std::min(best, -pi[n + j] + d(x, j));
    g(x) = best;
  }
  g.array() -= g.mean();
  r.witness = lipschitz * g;
  r.value = lipschitz * primal;
  r.dual_value = q.expect(r.witness) - p.expect(r.witness);
  r.gap = r.value - r.dual_value;
  return r;
}

}  // namespace symdiv
