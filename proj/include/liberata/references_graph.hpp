#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include <Eigen/Sparse>

#include "liberata/errors.hpp"
#include "liberata/shares_graph.hpp"

namespace liberata {

/* Row x of a references matrix holds the citation weights flowing into
   manuscript x; its sum is the manuscript's accumulated capital. */
inline double manuscript_capital_of_row(const SpMat& w, int x) {
  double acc = 0.0;
  for (int y = 0; y < w.outerSize(); ++y)
    for (SpMat::InnerIterator e(w, y); e; ++e)
      if (e.row() == x) acc += e.value();
  return acc;
}

inline Eigen::VectorXd row_sums(const SpMat& w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(w.rows());
  for (int y = 0; y < w.outerSize(); ++y)
    for (SpMat::InnerIterator e(w, y); e; ++e) out[e.row()] += e.value();
  return out;
}

inline Eigen::VectorXd column_sums(const SpMat& w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(w.cols());
  for (int y = 0; y < w.outerSize(); ++y)
    for (SpMat::InnerIterator e(w, y); e; ++e) out[y] += e.value();
  return out;
}

inline SpMat symmetrize(const SpMat& w) {
  SpMat t = SpMat(w.transpose());
  SpMat out = w + t;
  out.prune(0.0);
  return out;
}

inline SpMat matrix_power(const SpMat& w, int n) {
  if (n < 0) throw InvalidParams("matrix power wants a non-negative exponent");
  SpMat result(w.rows(), w.cols());
  result.setIdentity();
  SpMat base = w;
  int e = n;
  while (e > 0) {
    if (e & 1) result = (result * base).pruned();
    e >>= 1;
    if (e) base = (base * base).pruned();
  }
  result.makeCompressed();
  return result;
}

/* Gram matrix W^T W: diagonal carries (weighted) outgoing reference mass,
   off-diagonals bibliographic coupling. */
inline SpMat gram(const SpMat& w) {
  SpMat t = SpMat(w.transpose());
  return SpMat((t * w).pruned());
}

/* W W^T: diagonal carries (weighted) inbound citation mass, off-diagonals
   co-citation strength. */
inline SpMat transpose_gram(const SpMat& w) {
  SpMat t = SpMat(w.transpose());
  return SpMat((w * t).pruned());
}

/* Betweenness centrality: for every ordered pair (source, target) with
   source != v != target, the fraction of shortest paths through v. Paths run
   from citing manuscripts to the works they cite. Hop counting by default;
   with weighted lengths an edge of weight w costs 1/w. */
inline Eigen::VectorXd betweenness(const SpMat& w, bool weighted_lengths = false) {
  const int n = static_cast<int>(w.rows());
  std::vector<std::vector<std::pair<int, double>>> out_edges(n);
  for (int y = 0; y < w.outerSize(); ++y)
    for (SpMat::InnerIterator e(w, y); e; ++e)
      if (e.value() > 0.0) out_edges[y].push_back({static_cast<int>(e.row()), e.value()});

  Eigen::VectorXd centrality = Eigen::VectorXd::Zero(n);
  std::vector<double> dist(n);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  std::vector<std::vector<int>> pred(n);
  std::vector<int> order;
  order.reserve(n);

  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : pred) p.clear();
    order.clear();
    dist[s] = 0.0;
    sigma[s] = 1.0;

    if (!weighted_lengths) {
      std::queue<int> q;
      q.push(s);
      while (!q.empty()) {
        int u = q.front();
        q.pop();
        order.push_back(u);
        for (const auto& [v, wt] : out_edges[u]) {
          if (std::isinf(dist[v])) {
            dist[v] = dist[u] + 1.0;
            q.push(v);
          }
          if (dist[v] == dist[u] + 1.0) {
            sigma[v] += sigma[u];
            pred[v].push_back(u);
          }
        }
      }
    } else {
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
      std::vector<bool> settled(n, false);
      pq.push({0.0, s});
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (settled[u]) continue;
        settled[u] = true;
        order.push_back(u);
        for (const auto& [v, wt] : out_edges[u]) {
          double cand = dist[u] + 1.0 / wt;
          double tol = 1e-12 * std::max(1.0, std::abs(cand));
          if (cand < dist[v] - tol) {
            dist[v] = cand;
            sigma[v] = sigma[u];
            pred[v].assign(1, u);
            pq.push({cand, v});
          } else if (std::abs(cand - dist[v]) <= tol && !settled[v]) {
            sigma[v] += sigma[u];
            pred[v].push_back(u);
          }
        }
      }
    }

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int v = *it;
      for (int u : pred[v]) delta[u] += sigma[u] / sigma[v] * (1.0 + delta[v]);
      if (v != s) centrality[v] += delta[v];
    }
  }
  return centrality;
}

}  // namespace liberata
