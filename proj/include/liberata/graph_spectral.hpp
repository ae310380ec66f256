#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseQR>

#include "liberata/errors.hpp"
#include "liberata/shares_graph.hpp"
#include "liberata/util.hpp"

namespace liberata {

enum class SpectrumEnd { Smallest, Largest };

struct EigenResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns match values, orthonormal, sign-fixed
};

namespace spectral_detail {

constexpr double kSymTol = 1e-10;
constexpr long kDensePathSide = 512;

inline void check_symmetric(const SpMat& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("matrix is not square");
  SpMat d = SpMat(a - SpMat(a.transpose()));
  for (int k = 0; k < d.outerSize(); ++k)
    for (SpMat::InnerIterator it(d, k); it; ++it)
      if (std::abs(it.value()) > kSymTol) throw NotSymmetric();
}

inline void fix_signs(Eigen::MatrixXd& vectors) {
  for (long j = 0; j < vectors.cols(); ++j) {
    for (long i = 0; i < vectors.rows(); ++i) {
      if (std::abs(vectors(i, j)) > 1e-10) {
        if (vectors(i, j) < 0.0) vectors.col(j) = -vectors.col(j);
        break;
      }
    }
  }
}

inline EigenResult take_end(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors,
                            int k, SpectrumEnd end) {
  EigenResult r;
  r.values.resize(k);
  r.vectors.resize(vectors.rows(), k);
  long n = values.size();
  for (int i = 0; i < k; ++i) {
    long src = end == SpectrumEnd::Smallest ? i : n - k + i;
    r.values[i] = values[src];
    r.vectors.col(i) = vectors.col(src);
  }
  fix_signs(r.vectors);
  return r;
}

/* Lanczos with full reorthogonalization and seeded deterministic start
   vectors; breakdown triggers a restart inside the orthogonal complement. */
inline EigenResult lanczos(const SpMat& a, int k, SpectrumEnd end, double tol,
                           std::uint64_t seed) {
  const long n = a.rows();
  const long maxit = 10 * n;
  Rng rng(seed);

  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha, beta;  // beta[j] couples v_j and v_{j+1}
  auto fresh_vector = [&]() {
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) v[i] = rng.u01() - 0.5;
    for (const auto& b : basis) v -= b.dot(v) * b;
    double nrm = v.norm();
    if (nrm < 1e-12) return Eigen::VectorXd(Eigen::VectorXd::Zero(n));
    return Eigen::VectorXd(v / nrm);
  };

  Eigen::VectorXd v = fresh_vector();
  long steps = 0;
  while (true) {
    basis.push_back(v);
    Eigen::VectorXd w = a * v;
    double al = v.dot(w);
    alpha.push_back(al);
    w -= al * v;
    if (basis.size() > 1 && !beta.empty() && beta.back() != 0.0)
      w -= beta.back() * basis[basis.size() - 2];
    for (const auto& b : basis) w -= b.dot(w) * b;  // full reorthogonalization
    double bt = w.norm();
    ++steps;

    long m = static_cast<long>(basis.size());
    bool exhausted = m >= n;
    bool checkpoint =
        exhausted || bt < 1e-12 || steps >= maxit || (m >= k + 2 && m % 8 == 0);
    if (checkpoint) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (long i = 0; i < m; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < m && beta[i] != 0.0) {
          t(i, i + 1) = beta[i];
          t(i + 1, i) = beta[i];
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      long avail = std::min<long>(m, k);
      if (avail == k) {
        Eigen::MatrixXd vmat(n, m);
        for (long i = 0; i < m; ++i) vmat.col(i) = basis[i];
        EigenResult cand = take_end(es.eigenvalues(), vmat * es.eigenvectors(), k, end);
        bool ok = true;
        for (int i = 0; i < k && ok; ++i) {
          double resid = (a * cand.vectors.col(i) - cand.values[i] * cand.vectors.col(i)).norm();
          if (resid > tol * std::max(1.0, std::abs(cand.values[i]))) ok = false;
        }
        if (ok || exhausted) {
          for (int j = 0; j < k; ++j) cand.vectors.col(j).normalize();
          fix_signs(cand.vectors);
          return cand;
        }
      } else if (exhausted) {
        throw InvalidParams("requested more eigenpairs than the matrix side");
      }
      if (steps >= maxit)
        throw ConvergenceFailure("eigensolver hit the iteration cap of " +
                                 std::to_string(maxit));
    }
    if (exhausted) continue;  // unreachable; loop exits above when exhausted
    if (bt < 1e-12) {
      beta.push_back(0.0);
      v = fresh_vector();
      if (v.norm() == 0.0)
        throw ConvergenceFailure("could not expand the Krylov basis");
    } else {
      beta.push_back(bt);
      v = w / bt;
    }
  }
}

}  // namespace spectral_detail

/* k eigenpairs from the requested end of the spectrum of a symmetric sparse
   matrix. Small operators use a dense solve, large ones seeded Lanczos; both
   are deterministic, orthonormal to 1e-8, and sign-normalized so the first
   coordinate above 1e-10 is positive. */
inline EigenResult eigendecompose(const SpMat& a, int k, SpectrumEnd end,
                                  double tol = 1e-8, std::uint64_t seed = 12345) {
  spectral_detail::check_symmetric(a);
  if (k < 1 || k > a.rows()) throw InvalidParams("eigenpair count must lie in [1, side]");
  if (a.rows() <= spectral_detail::kDensePathSide) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(a)};
    if (es.info() != Eigen::Success) throw ConvergenceFailure("dense eigensolver failed");
    return spectral_detail::take_end(es.eigenvalues(), es.eigenvectors(), k, end);
  }
  return spectral_detail::lanczos(a, k, end, tol, seed);
}

/* ---- connected components ---- */

struct UnionFind {
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
  std::vector<int> parent;
};

struct ComponentsResult {
  int count = 0;
  std::vector<int> labels;               // component id by first appearance
  int zero_eigenvalue_multiplicity = 0;  // must agree with count
};

/* Component count from union-find, cross-checked against the multiplicity of
   the Laplacian's zero eigenvalue (dense spectrum for small graphs, sparse QR
   rank for large ones). */
inline ComponentsResult connected_components(const SpMat& adjacency) {
  spectral_detail::check_symmetric(adjacency);
  const int n = static_cast<int>(adjacency.rows());
  ComponentsResult r;
  if (n == 0) return r;
  UnionFind uf(n);
  for (int k = 0; k < adjacency.outerSize(); ++k)
    for (SpMat::InnerIterator it(adjacency, k); it; ++it)
      if (it.value() != 0.0) uf.unite(static_cast<int>(it.row()), static_cast<int>(it.col()));
  r.labels.assign(n, -1);
  int next = 0;
  std::vector<int> root_label(n, -1);
  for (int i = 0; i < n; ++i) {
    int root = uf.find(i);
    if (root_label[root] < 0) root_label[root] = next++;
    r.labels[i] = root_label[root];
  }
  r.count = next;

  SpMat l = laplacian(adjacency);
  if (n <= 4096) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(l),
                                                      Eigen::EigenvaluesOnly};
    int zeros = 0;
    for (long i = 0; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()[i]) <= 1e-8) ++zeros;
    r.zero_eigenvalue_multiplicity = zeros;
  } else {
    Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>> qr;
    SpMat lc = l;
    lc.makeCompressed();
    qr.setPivotThreshold(1e-8);
    qr.compute(lc);
    r.zero_eigenvalue_multiplicity = n - static_cast<int>(qr.rank());
  }
  if (r.zero_eigenvalue_multiplicity != r.count)
    throw ConvergenceFailure("component count disagreement: union-find says " +
                             std::to_string(r.count) + ", spectrum says " +
                             std::to_string(r.zero_eigenvalue_multiplicity));
  return r;
}

/* Second-smallest Laplacian eigenvector; first coordinate above 1e-10 made
   positive. Connected graphs only. */
inline Eigen::VectorXd fiedler_embedding(const SpMat& adjacency) {
  ComponentsResult comps = connected_components(adjacency);
  if (comps.count != 1)
    throw DisconnectedGraph("fiedler embedding needs a connected graph, found " +
                            std::to_string(comps.count) + " components");
  EigenResult er = eigendecompose(laplacian(adjacency), 2, SpectrumEnd::Smallest);
  return er.vectors.col(1);
}

/* ---- k-means over the spectral embedding ---- */

namespace spectral_detail {

inline std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed) {
  const long n = points.rows();
  Rng rng(seed);
  std::vector<long> centers_idx;
  centers_idx.push_back(static_cast<long>(rng.below(n)));
  Eigen::VectorXd dist2(n);
  for (long i = 0; i < n; ++i)
    dist2[i] = (points.row(i) - points.row(centers_idx[0])).squaredNorm();
  while (static_cast<int>(centers_idx.size()) < k) {
    double total = dist2.sum();
    long chosen = -1;
    if (total > 0.0) {
      double target = rng.u01() * total;
      double acc = 0.0;
      for (long i = 0; i < n; ++i) {
        acc += dist2[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
      if (chosen < 0) chosen = n - 1;
    } else {
      // all remaining points coincide with a center; fall back to index order
      chosen = static_cast<long>(centers_idx.size()) % n;
    }
    centers_idx.push_back(chosen);
    for (long i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], (points.row(i) - points.row(chosen)).squaredNorm());
  }

  Eigen::MatrixXd centers(k, points.cols());
  for (int j = 0; j < k; ++j) centers.row(j) = points.row(centers_idx[j]);
  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (long i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (points.row(i) - centers.row(0)).squaredNorm();
      for (int j = 1; j < k; ++j) {
        double d = (points.row(i) - centers.row(j)).squaredNorm();
        if (d < best_d - 1e-15) {
          best_d = d;
          best = j;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<long> counts(k, 0);
    for (long i = 0; i < n; ++i) {
      sums.row(assign[i]) += points.row(i);
      counts[assign[i]]++;
    }
    for (int j = 0; j < k; ++j)
      if (counts[j] > 0) centers.row(j) = sums.row(j) / static_cast<double>(counts[j]);
    if (!changed) break;
  }
  // canonical labels by first appearance
  std::vector<int> remap(k, -1);
  int next = 0;
  for (long i = 0; i < n; ++i) {
    if (remap[assign[i]] < 0) remap[assign[i]] = next++;
    assign[i] = remap[assign[i]];
  }
  return assign;
}

}  // namespace spectral_detail

/* Spectral clustering: k-means++ (seeded) on the k-dimensional Laplacian
   eigenvector embedding from the chosen spectrum end. */
inline std::vector<int> cluster(const SpMat& adjacency, int k,
                                SpectrumEnd end = SpectrumEnd::Smallest,
                                std::uint64_t seed = 42) {
  if (k < 1 || k > adjacency.rows()) throw InvalidParams("cluster count must lie in [1, side]");
  EigenResult er = eigendecompose(laplacian(adjacency), k, end);
  return spectral_detail::kmeans(er.vectors, k, seed);
}

/* ---- spanning tree counts and ratios ---- */

struct BipartiteShape {
  long n_left = 0;   // manuscript part
  long n_right = 0;  // contributor-role part
  double uniform_share = 1.0;
};

struct TreeCounts {
  std::optional<double> log_tau_c;   // complete bipartite reference count
  std::optional<double> log_tau_cw;  // same, uniform-share weighted
  double log_tau_k = -std::numeric_limits<double>::infinity();
  double log_tau_kw = -std::numeric_limits<double>::infinity();
  bool connected = false;
};

namespace spectral_detail {

/* log-determinant of a dense SPD-ish matrix via LU with partial pivoting;
   returns nullopt when the sign comes out non-positive. */
inline std::optional<double> log_det(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;  // empty minor: det of nothing is 1
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  double sign = static_cast<double>(lu.permutationP().determinant());
  double acc = 0.0;
  for (long i = 0; i < m.rows(); ++i) {
    double d = lu.matrixLU()(i, i);
    if (d < 0.0) sign = -sign;
    if (d == 0.0) return std::nullopt;
    acc += std::log(std::abs(d));
  }
  if (sign <= 0.0) return std::nullopt;
  return acc;
}

}  // namespace spectral_detail

/* Kirchhoff counts by Laplacian cofactor (log space), next to the closed-form
   complete-bipartite reference counts when the bipartite shape is supplied. */
inline TreeCounts spanning_tree_counts(const SpMat& weighted_adjacency,
                                       std::optional<BipartiteShape> shape = std::nullopt) {
  spectral_detail::check_symmetric(weighted_adjacency);
  TreeCounts out;
  const long n = weighted_adjacency.rows();
  if (shape) {
    double lc = (shape->n_right - 1) * std::log(static_cast<double>(shape->n_left)) +
                (shape->n_left - 1) * std::log(static_cast<double>(shape->n_right));
    out.log_tau_c = lc;
    out.log_tau_cw = (shape->n_left + shape->n_right - 1) * std::log(shape->uniform_share) + lc;
  }
  if (n == 0) return out;
  UnionFind uf(static_cast<int>(n));
  for (int k = 0; k < weighted_adjacency.outerSize(); ++k)
    for (SpMat::InnerIterator it(weighted_adjacency, k); it; ++it)
      if (it.value() != 0.0) uf.unite(static_cast<int>(it.row()), static_cast<int>(it.col()));
  int roots = 0;
  for (int i = 0; i < n; ++i)
    if (uf.find(i) == i) ++roots;
  out.connected = roots == 1;
  if (!out.connected) return out;

  SpMat binary = weighted_adjacency;
  for (int k = 0; k < binary.outerSize(); ++k)
    for (SpMat::InnerIterator it(binary, k); it; ++it)
      it.valueRef() = it.value() != 0.0 ? 1.0 : 0.0;
  Eigen::MatrixXd lk = Eigen::MatrixXd(laplacian(binary)).topLeftCorner(n - 1, n - 1);
  Eigen::MatrixXd lkw =
      Eigen::MatrixXd(laplacian(weighted_adjacency)).topLeftCorner(n - 1, n - 1);
  auto det_k = spectral_detail::log_det(lk);
  auto det_kw = spectral_detail::log_det(lkw);
  out.log_tau_k = det_k ? *det_k : -std::numeric_limits<double>::infinity();
  out.log_tau_kw = det_kw ? *det_kw : -std::numeric_limits<double>::infinity();
  return out;
}

inline std::optional<double> tau_value(double log_tau) {
  if (std::isinf(log_tau) && log_tau < 0) return 0.0;
  if (log_tau > 700.0) return std::nullopt;  // not representable as double
  return std::exp(log_tau);
}

struct TreeRatios {
  std::optional<double> str;
  std::optional<double> str_w;
  std::optional<double> rstr;
  std::string reason;  // set when something is absent
};

/* Ratios of log tree counts. A ratio is absent when its denominator log is
   zero (tau = 1) or the graph is disconnected (tau = 0). Cofactor logs carry
   floating-point noise, so "zero" is judged against a small tolerance. */
inline TreeRatios tree_ratios(const TreeCounts& c) {
  constexpr double kLogTauTol = 1e-9;
  TreeRatios r;
  if (!c.connected || std::isinf(c.log_tau_k)) {
    r.reason = "graph disconnected: tau_k = 0";
    return r;
  }
  if (!c.log_tau_c || !c.log_tau_cw) {
    r.reason = "no bipartite shape for the reference counts";
    return r;
  }
  if (std::abs(c.log_tau_k) <= kLogTauTol)
    r.reason = "tau_k = 1 zeroes the denominator log";
  else
    r.str = *c.log_tau_c / c.log_tau_k;
  if (std::isinf(c.log_tau_kw)) {
    r.reason = "tau_kw = 0";
  } else if (std::abs(c.log_tau_kw) <= kLogTauTol) {
    r.reason = "tau_kw = 1 zeroes the denominator log";
  } else {
    r.str_w = *c.log_tau_cw / c.log_tau_kw;
  }
  if (r.str && r.str_w && std::abs(*r.str) > kLogTauTol) r.rstr = *r.str_w / *r.str;
  return r;
}

/* Bipartite shape of a shares graph: manuscripts on the left, contributor-role
   columns carrying at least one edge on the right, and the naive uniform share
   1 / (mean contributors per manuscript). */
inline BipartiteShape bipartite_shape_of(const CondensedShares& g) {
  BipartiteShape s;
  s.n_left = g.n_m;
  long active = 0, edges = 0;
  for (int k = 0; k < g.mat.outerSize(); ++k) {
    SpMat::InnerIterator it(g.mat, k);
    if (it) ++active;
    for (; it; ++it) ++edges;
  }
  s.n_right = active;
  s.uniform_share = g.n_m > 0 && edges > 0
                        ? 1.0 / (static_cast<double>(edges) / static_cast<double>(g.n_m))
                        : 1.0;
  return s;
}

}  // namespace liberata
