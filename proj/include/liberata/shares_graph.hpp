#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "liberata/corpus.hpp"
#include "liberata/errors.hpp"

namespace liberata {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr long kDenseSideLimit = 20000;

/* Condensed shares matrix: manuscripts by contributor-role columns, with the
   three role blocks laid out side by side as [authors | reviewers | replicators].
   Contributor p's column for role r is p + r * n_c. */
struct CondensedShares {
  SpMat mat;
  int n_m = 0;
  int n_c = 0;

  int col_of(int contributor, Role role) const {
    return contributor + static_cast<int>(role) * n_c;
  }
};

inline CondensedShares build_condensed(const Corpus& c) {
  CondensedShares g;
  g.n_m = c.n_manuscripts();
  g.n_c = c.n_contributors();
  std::vector<Triplet> trips;
  for (int m = 0; m < g.n_m; ++m)
    for (const auto& s : c.m_shares[m])
      if (s.share > 0.0) trips.emplace_back(m, g.col_of(s.contributor, s.role), s.share);
  g.mat.resize(g.n_m, 3 * g.n_c);
  g.mat.setFromTriplets(trips.begin(), trips.end());
  g.mat.makeCompressed();
  return g;
}

/* Full symmetric shares graph over manuscript nodes followed by the three
   contributor-role blocks; manuscript-to-role edges mirrored below the
   diagonal, all role-role and manuscript-manuscript blocks zero. */
struct FullShares {
  SpMat mat;
  int n_m = 0;
  int n_c = 0;

  long side() const { return n_m + 3L * n_c; }
  long manuscript_node(int m) const { return m; }
  long contributor_node(int contributor, Role role) const {
    return n_m + contributor + static_cast<long>(role) * n_c;
  }
};

inline FullShares expand_full(const CondensedShares& g) {
  FullShares f;
  f.n_m = g.n_m;
  f.n_c = g.n_c;
  std::vector<Triplet> trips;
  trips.reserve(2 * g.mat.nonZeros());
  for (int k = 0; k < g.mat.outerSize(); ++k)
    for (SpMat::InnerIterator it(g.mat, k); it; ++it) {
      long row = it.row();
      long col = g.n_m + it.col();
      trips.emplace_back(row, col, it.value());
      trips.emplace_back(col, row, it.value());
    }
  f.mat.resize(f.side(), f.side());
  f.mat.setFromTriplets(trips.begin(), trips.end());
  f.mat.makeCompressed();
  return f;
}

inline Eigen::MatrixXd to_dense(const SpMat& m, long limit = kDenseSideLimit) {
  long side = std::max(m.rows(), m.cols());
  if (side > limit) throw ExpansionRefused(side);
  return Eigen::MatrixXd(m);
}

/* ---- fetch vectors ---- */

/* A selector is a set of node indices in full-graph space; fetching sums the
   selected rows of the symmetric graph, i.e. G * (sum of unit vectors). */
inline Eigen::VectorXd fetch(const FullShares& f, const std::vector<long>& nodes) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(f.side());
  for (long n : nodes) {
    if (n < 0 || n >= f.side()) throw DimensionMismatch("selector index out of range");
    v[n] = 1.0;
  }
  return f.mat * v;
}

inline std::string node_label(const Corpus& c, const FullShares& f, long node) {
  if (node < f.n_m) return c.manuscripts[node].id;
  long rest = node - f.n_m;
  int role = static_cast<int>(rest / f.n_c);
  int contributor = static_cast<int>(rest % f.n_c);
  return c.contributors[contributor].id + ":" + role_name(static_cast<Role>(role));
}

struct LabeledValue {
  std::string label;
  double value;
};

inline std::vector<LabeledValue> fetch_labeled(const Corpus& c, const FullShares& f,
                                               const std::vector<long>& nodes) {
  Eigen::VectorXd v = fetch(f, nodes);
  std::vector<LabeledValue> out;
  for (long i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) out.push_back({node_label(c, f, i), v[i]});
  return out;
}

/* ---- distribution statistics over fetched share values ---- */

struct DistributionStats {
  double mean = 0.0;
  double variance = 0.0;   // population
  double skewness = 0.0;   // standardized third moment, 0 when flat
  double median = 0.0;
  std::vector<double> modes;  // all maximal-frequency values, binned at 0.01
  double max = 0.0;
  double min = 0.0;
  std::size_t count = 0;
};

inline DistributionStats distribution_stats(std::vector<double> values) {
  if (values.empty()) throw EmptyDistribution();
  DistributionStats s;
  s.count = values.size();
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : values) {
    double d = v - s.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  s.variance = m2;
  double sigma = std::sqrt(m2);
  s.skewness = sigma > 0.0 ? m3 / (sigma * sigma * sigma) : 0.0;
  std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  std::map<long long, std::size_t> bins;
  for (double v : values) bins[std::llround(v * 100.0)]++;
  std::size_t best = 0;
  for (const auto& [bin, count] : bins) best = std::max(best, count);
  for (const auto& [bin, count] : bins)
    if (count == best) s.modes.push_back(static_cast<double>(bin) / 100.0);
  return s;
}

inline std::vector<double> nonzero_values(const Eigen::VectorXd& v) {
  std::vector<double> out;
  for (long i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) out.push_back(v[i]);
  return out;
}

/* ---- degree, Laplacian, two-step reachability ---- */

inline Eigen::VectorXd degree_vector(const SpMat& sym) {
  Eigen::VectorXd deg = Eigen::VectorXd::Zero(sym.rows());
  for (int k = 0; k < sym.outerSize(); ++k)
    for (SpMat::InnerIterator it(sym, k); it; ++it) deg[it.row()] += it.value();
  return deg;
}

inline SpMat laplacian(const SpMat& sym) {
  Eigen::VectorXd deg = degree_vector(sym);
  SpMat l = -sym;
  std::vector<Triplet> trips;
  for (long i = 0; i < deg.size(); ++i)
    if (deg[i] != 0.0) trips.emplace_back(i, i, deg[i]);
  SpMat d(sym.rows(), sym.cols());
  d.setFromTriplets(trips.begin(), trips.end());
  l += d;
  l.prune(0.0);
  return l;
}

struct TwoStep {
  SpMat sq;
  int n_m = 0;
  int n_c = 0;
};

inline TwoStep two_step(const FullShares& f) {
  TwoStep t;
  t.n_m = f.n_m;
  t.n_c = f.n_c;
  t.sq = (f.mat * f.mat).pruned();
  t.sq.makeCompressed();
  return t;
}

inline SpMat manuscript_block(const TwoStep& t) {
  return SpMat(t.sq.block(0, 0, t.n_m, t.n_m));
}

inline SpMat contributor_block(const TwoStep& t) {
  return SpMat(t.sq.block(t.n_m, t.n_m, 3L * t.n_c, 3L * t.n_c));
}

/* Role-to-role sub-block of the contributor block (n_c x n_c). */
inline SpMat role_block(const TwoStep& t, Role a, Role b) {
  long ra = t.n_m + static_cast<long>(a) * t.n_c;
  long rb = t.n_m + static_cast<long>(b) * t.n_c;
  return SpMat(t.sq.block(ra, rb, t.n_c, t.n_c));
}

/* Off-block of the two-step square coupling manuscripts to contributors;
   zero whenever the shares graph is bipartite. */
inline SpMat cross_block(const TwoStep& t) {
  return SpMat(t.sq.block(0, t.n_m, t.n_m, 3L * t.n_c));
}

}  // namespace liberata
