#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "liberata/corpus.hpp"
#include "liberata/errors.hpp"
#include "liberata/shares_graph.hpp"

namespace liberata {

/* Indicator space over every taxonomy node, indexed in sorted id order. */
struct TagSpace {
  std::vector<std::string> ids;
  std::unordered_map<std::string, int> index;
};

inline TagSpace tag_space(const Taxonomy& t) {
  TagSpace s;
  s.ids = t.sorted_ids();
  for (int i = 0; i < static_cast<int>(s.ids.size()); ++i) s.index[s.ids[i]] = i;
  return s;
}

/* 0/1 indicators: the manuscript's d1..d4 chain plus its extra tags. */
inline Eigen::VectorXd taxonomy_vector(const Corpus& c, const TagSpace& space, int m) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(space.ids.size());
  for (const auto& tag : c.manuscripts[m].primary_tags) {
    auto it = space.index.find(tag);
    if (it != space.index.end()) v[it->second] = 1.0;
  }
  for (const auto& tag : c.manuscripts[m].extra_tags) {
    auto it = space.index.find(tag);
    if (it != space.index.end()) v[it->second] = 1.0;
  }
  return v;
}

/* Weighted average of manuscript vectors; the zero vector when the weights
   sum to nothing. */
inline Eigen::VectorXd weighted_taxonomy_vector(
    const Corpus& c, const TagSpace& space,
    const std::vector<std::pair<int, double>>& weighted_manuscripts) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(space.ids.size());
  double total = 0.0;
  for (const auto& [m, w] : weighted_manuscripts) {
    if (w <= 0.0) continue;
    v += w * taxonomy_vector(c, space, m);
    total += w;
  }
  if (total > 0.0) v /= total;
  return v;
}

inline double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw DimensionMismatch("cosine wants equal-length vectors");
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

/* Pairwise cosine similarities; symmetric with unit diagonal for nonzero
   vectors. */
inline Eigen::MatrixXd cross_similarity(const std::vector<Eigen::VectorXd>& items) {
  const int n = static_cast<int>(items.size());
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = cosine_similarity(items[i], items[j]);
      g(i, j) = s;
      g(j, i) = s;
    }
  return g;
}

/* Cosine similarity of two manuscripts' inbound citation rows: how alike the
   works citing them are, weight for weight. */
inline double cocitation_relevance(const SpMat& w, int x, int y) {
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (int col = 0; col < w.outerSize(); ++col) {
    double vx = 0.0, vy = 0.0;
    for (SpMat::InnerIterator e(w, col); e; ++e) {
      if (e.row() == x) vx = e.value();
      if (e.row() == y) vy = e.value();
    }
    dot += vx * vy;
    nx += vx * vx;
    ny += vy * vy;
  }
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return dot / (std::sqrt(nx) * std::sqrt(ny));
}

struct TagSuggestion {
  std::string tag;
  double score;
};

/* Tag scores from the weighted average of the references' taxonomy vectors;
   suggestions are the tags scoring at or above the threshold. */
inline std::vector<TagSuggestion> infer_tags(const Corpus& c, const TagSpace& space,
                                             const SpMat& w, int m, double threshold = 0.9) {
  std::vector<std::pair<int, double>> refs;
  for (SpMat::InnerIterator e(w, m); e; ++e)
    if (e.value() > 0.0) refs.push_back({static_cast<int>(e.row()), e.value()});
  if (refs.empty()) throw MissingData("manuscript has no weighted references to infer from");
  Eigen::VectorXd v = weighted_taxonomy_vector(c, space, refs);
  std::vector<TagSuggestion> out;
  for (int i = 0; i < v.size(); ++i)
    if (v[i] >= threshold) out.push_back({space.ids[i], v[i]});
  std::sort(out.begin(), out.end(), [](const TagSuggestion& a, const TagSuggestion& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tag < b.tag;
  });
  return out;
}

/* Apply suggestions as extra tags (skipping tags already on the manuscript). */
inline int assign_tags(Corpus& c, int m, const std::vector<TagSuggestion>& suggestions) {
  int added = 0;
  Manuscript& ms = c.manuscripts[m];
  for (const auto& s : suggestions) {
    bool present = false;
    for (const auto& t : ms.primary_tags)
      if (t == s.tag) present = true;
    for (const auto& t : ms.extra_tags)
      if (t == s.tag) present = true;
    if (!present) {
      ms.extra_tags.push_back(s.tag);
      ++added;
    }
  }
  return added;
}

}  // namespace liberata
