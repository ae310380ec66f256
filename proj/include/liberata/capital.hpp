#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Sparse>

#include "liberata/citation_weighting.hpp"
#include "liberata/corpus.hpp"
#include "liberata/references_graph.hpp"
#include "liberata/shares_graph.hpp"
#include "liberata/util.hpp"

namespace liberata {

/* Accumulated capital per manuscript: row sums of the weighted references
   matrix. Retracted manuscripts have empty rows by construction. */
inline Eigen::VectorXd capital_vector(const SpMat& w) { return row_sums(w); }

/* Capital flowing to each contributor through shares, all roles included. */
inline Eigen::VectorXd contributor_capital(const Corpus& c, const Eigen::VectorXd& ac) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(c.n_contributors());
  for (int p = 0; p < c.n_contributors(); ++p)
    for (const auto& h : c.c_shares[p]) out[p] += h.share * ac[h.manuscript];
  return out;
}

/* Condensed capital graph: each manuscript row of the shares matrix scaled by
   that manuscript's capital. */
inline CondensedShares capital_graph(const CondensedShares& shares, const Eigen::VectorXd& ac) {
  CondensedShares g = shares;
  for (int k = 0; k < g.mat.outerSize(); ++k)
    for (SpMat::InnerIterator e(g.mat, k); e; ++e) e.valueRef() *= ac[e.row()];
  g.mat.prune(0.0);
  return g;
}

/* ---- capital through time ---- */

/* AC vectors over a date grid, counting only citations from manuscripts
   published at or before each grid point. The configured pipeline is
   recomputed per grid point on the restricted corpus; the plain
   inverse-reference-count base has an exact fast path. */
inline std::vector<Eigen::VectorXd> capital_timeseries(const Corpus& c,
                                                       const WeightingPipeline& pipeline,
                                                       const std::vector<Date>& grid) {
  std::vector<Eigen::VectorXd> out(grid.size(), Eigen::VectorXd::Zero(c.n_manuscripts()));
  if (grid.empty()) return out;
  if (pipeline.modifiers.empty()) {
    // Base weights never depend on the citer subset, so a single pass over
    // citers sorted by publication date reproduces the per-point recompute.
    SpMat w = pipeline.base == WeightBase::Unweighted ? unweighted_matrix(c)
                                                      : base_weighted_matrix(c);
    std::vector<std::size_t> grid_order(grid.size());
    for (std::size_t i = 0; i < grid_order.size(); ++i) grid_order[i] = i;
    std::sort(grid_order.begin(), grid_order.end(),
              [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(c.n_manuscripts());
    int citer = 0;
    for (std::size_t gi : grid_order) {
      while (citer < c.n_manuscripts() && c.manuscripts[citer].published_at <= grid[gi]) {
        for (SpMat::InnerIterator e(w, citer); e; ++e) acc[e.row()] += e.value();
        ++citer;
      }
      out[gi] = acc;
    }
    return out;
  }
  parallel_for(grid.size(), [&](std::size_t gi) {
    Corpus sub = restrict_corpus(c, grid[gi]);
    Eigen::VectorXd ac = capital_vector(compute_references_matrix(sub, pipeline).w);
    for (int m = 0; m < sub.n_manuscripts(); ++m)
      out[gi][c.manuscript_index(sub.manuscripts[m].id)] = ac[m];
  });
  return out;
}

inline std::vector<Date> yearly_grid(int first_year, int last_year) {
  std::vector<Date> grid;
  for (int y = first_year; y <= last_year; ++y) grid.push_back(year_end(y));
  return grid;
}

inline std::pair<int, int> corpus_year_span(const Corpus& c) {
  if (c.manuscripts.empty()) return {0, 0};
  return {c.manuscripts.front().published_at.year(), c.manuscripts.back().published_at.year()};
}

/* ---- two-step capital flows ---- */

struct CollusionFlag {
  int author;      // contributor index
  int reviewer;    // contributor index
  int manuscript;  // where the flow concentrates
  double product;
};

struct TwoStepCapital {
  SpMat square;                       // full symmetric capital graph, squared
  std::vector<CollusionFlag> flags;   // author-reviewer products above threshold
  std::map<std::string, double> thresholds;  // per d3 discipline
};

/* Square of the full capital graph, plus flags for author-reviewer capital
   products that exceed the given percentile of nonzero products within the
   same d3 discipline. */
inline TwoStepCapital two_step_capital(const Corpus& c, const CondensedShares& capital,
                                       double percentile = 0.99) {
  TwoStepCapital out;
  FullShares full = expand_full(capital);
  out.square = (full.mat * full.mat).pruned();
  out.square.makeCompressed();

  std::map<std::string, std::vector<double>> products_by_field;
  std::vector<std::tuple<std::string, CollusionFlag>> candidates;
  for (int m = 0; m < c.n_manuscripts(); ++m) {
    const std::string& d3 = c.primary_tag(m, 3);
    for (const auto& a : c.m_shares[m]) {
      if (a.role != Role::Author) continue;
      double cap_a = 0.0;
      for (SpMat::InnerIterator e(capital.mat, capital.col_of(a.contributor, Role::Author)); e; ++e)
        if (e.row() == m) cap_a = e.value();
      if (cap_a <= 0.0) continue;
      for (const auto& p : c.m_shares[m]) {
        if (p.role != Role::PeerReviewer) continue;
        double cap_p = 0.0;
        for (SpMat::InnerIterator e(capital.mat, capital.col_of(p.contributor, Role::PeerReviewer));
             e; ++e)
          if (e.row() == m) cap_p = e.value();
        if (cap_p <= 0.0) continue;
        double prod = cap_a * cap_p;
        products_by_field[d3].push_back(prod);
        candidates.push_back({d3, {a.contributor, p.contributor, m, prod}});
      }
    }
  }
  for (auto& [d3, values] : products_by_field) {
    std::sort(values.begin(), values.end());
    // nearest-rank percentile
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(percentile * static_cast<double>(values.size())));
    rank = std::min(std::max<std::size_t>(rank, 1), values.size());
    out.thresholds[d3] = values[rank - 1];
  }
  for (const auto& [d3, flag] : candidates)
    if (flag.product > out.thresholds[d3]) out.flags.push_back(flag);
  return out;
}

}  // namespace liberata
