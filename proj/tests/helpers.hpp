#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "liberata/corpus.hpp"
#include "liberata/shares_graph.hpp"

namespace testutil {

using liberata::Corpus;
using liberata::Date;
using liberata::Role;
using liberata::SpMat;

inline std::string fixture_dir() { return std::string(LIBERATA_FIXTURE_DIR) + "/fixture_a"; }

inline Corpus fixture() { return liberata::load_corpus(fixture_dir()); }

/* Assembles small in-memory corpora for synthetic test cases. The default
   taxonomy is a single four-level chain D1 -> D2 -> D3 -> T1; extra level-4
   tags can be hung off D3. */
struct CorpusBuilder {
  std::vector<liberata::TaxonomyNode> tax = {
      {"D1", 1, std::nullopt, "domain"},
      {"D2", 2, "D1", "department"},
      {"D3", 3, "D2", "discipline"},
      {"T1", 4, "D3", "direction"},
  };
  std::vector<liberata::Manuscript> manuscripts;
  std::vector<liberata::Contributor> contributors;
  std::vector<liberata::ShareAssignment> shares;
  std::vector<liberata::Transaction> transactions;

  CorpusBuilder& tag4(const std::string& id, const std::string& parent = "D3") {
    tax.push_back({id, 4, parent, id});
    return *this;
  }

  CorpusBuilder& tag(const std::string& id, int level, const std::string& parent) {
    tax.push_back({id, level, parent, id});
    return *this;
  }

  CorpusBuilder& man(const std::string& id, const std::string& published,
                     std::vector<std::string> refs = {}, const std::string& d4 = "T1") {
    liberata::Manuscript m;
    m.id = id;
    m.primary_tags[3] = d4;
    m.references = std::move(refs);
    m.published_at = Date::parse(published);
    manuscripts.push_back(std::move(m));
    return *this;
  }

  CorpusBuilder& started(const std::string& date) {
    manuscripts.back().work_started_at = Date::parse(date);
    return *this;
  }

  CorpusBuilder& fund(const std::string& source, std::optional<double> fraction,
                      std::optional<double> amount,
                      std::optional<std::string> contributor = std::nullopt) {
    liberata::FundingEntry e;
    e.source = source;
    e.fraction = fraction;
    e.amount = amount;
    e.contributor = std::move(contributor);
    manuscripts.back().funding.push_back(std::move(e));
    return *this;
  }

  CorpusBuilder& person(const std::string& id,
                        std::optional<std::string> region = std::nullopt,
                        std::vector<std::string> institutions = {}) {
    contributors.push_back({id, std::move(region), std::move(institutions)});
    return *this;
  }

  CorpusBuilder& share(const std::string& m, const std::string& c, Role role, double s) {
    shares.push_back({m, c, role, s});
    return *this;
  }

  CorpusBuilder& tx(const std::string& m, const std::string& provider, Role role, double paid,
                    const std::string& executed, std::optional<double> qc_days = std::nullopt,
                    std::optional<std::string> field = std::nullopt) {
    liberata::Transaction t;
    t.manuscript = m;
    t.provider = provider;
    t.role = role;
    t.shares_paid = paid;
    t.field = std::move(field);
    t.executed_at = Date::parse(executed);
    t.qc_duration_days = qc_days;
    transactions.push_back(std::move(t));
    return *this;
  }

  Corpus build() const {
    liberata::Taxonomy t;
    for (const auto& n : tax) t.add(n);
    return liberata::assemble_corpus(manuscripts, contributors, shares, transactions,
                                     std::move(t));
  }
};

/* ---- brute-force oracles ---- */

struct UnionFindOracle {
  std::vector<int> parent;
  explicit UnionFindOracle(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
  int components() {
    int n = 0;
    for (int i = 0; i < static_cast<int>(parent.size()); ++i)
      if (find(i) == i) ++n;
    return n;
  }
};

inline int component_count_oracle(const SpMat& sym) {
  UnionFindOracle uf(static_cast<int>(sym.rows()));
  for (int k = 0; k < sym.outerSize(); ++k)
    for (SpMat::InnerIterator it(sym, k); it; ++it)
      if (it.value() != 0.0) uf.unite(static_cast<int>(it.row()), static_cast<int>(it.col()));
  return uf.components();
}

/* Sum over all spanning trees of the product of tree-edge weights, by
   enumerating every (n-1)-subset of edges and union-find acyclicity. */
inline double spanning_tree_weight_oracle(const Eigen::MatrixXd& adj) {
  const int n = static_cast<int>(adj.rows());
  if (n == 0) return 0.0;
  if (n == 1) return 1.0;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (adj(i, j) != 0.0) edges.push_back({i, j});
  const int m = static_cast<int>(edges.size());
  if (m < n - 1) return 0.0;
  double total = 0.0;
  std::vector<int> pick(n - 1);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    UnionFindOracle uf(n);
    bool acyclic = true;
    double prod = 1.0;
    for (int e : pick) {
      auto [a, b] = edges[e];
      if (uf.find(a) == uf.find(b)) {
        acyclic = false;
        break;
      }
      uf.unite(a, b);
      prod *= adj(a, b);
    }
    if (acyclic && uf.components() == 1) total += prod;
    int i = n - 2;
    while (i >= 0 && pick[i] == m - (n - 1) + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < n - 1; ++j) pick[j] = pick[j - 1] + 1;
  }
  return total;
}

/* Dense two-hop path-weight sums: entry (i,j) = sum over k of w(i,k)*w(k,j). */
inline Eigen::MatrixXd two_hop_oracle(const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(w.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i, j) += w(i, k) * w(k, j);
  return out;
}

/* Betweenness by exhaustive shortest-path enumeration on a DAG (or any
   digraph small enough): hop-count shortest paths, fractional credit to
   interior nodes, endpoints excluded. */
inline Eigen::VectorXd betweenness_oracle(const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(w.rows());
  Eigen::VectorXd score = Eigen::VectorXd::Zero(n);
  // All simple paths from s by depth-first enumeration; keep the shortest per (s,t).
  for (int s = 0; s < n; ++s) {
    std::vector<std::vector<std::vector<int>>> best(n);  // t -> list of shortest paths
    std::vector<int> path = {s};
    std::vector<char> on_path(n, 0);
    on_path[s] = 1;
    struct Frame {
      int node;
      int next;
    };
    std::vector<Frame> stack = {{s, 0}};
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next >= n) {
        on_path[f.node] = 0;
        path.pop_back();
        stack.pop_back();
        continue;
      }
      int t = f.next++;
      if (on_path[t] || w(t, f.node) == 0.0) continue;  // edge node->t stored as w(t, node)
      path.push_back(t);
      on_path[t] = 1;
      auto& paths_to_t = best[t];
      if (paths_to_t.empty() || paths_to_t.front().size() > path.size()) {
        paths_to_t.clear();
        paths_to_t.push_back(path);
      } else if (paths_to_t.front().size() == path.size()) {
        paths_to_t.push_back(path);
      }
      stack.push_back({t, 0});
    }
    for (int t = 0; t < n; ++t) {
      if (t == s || best[t].empty()) continue;
      const double frac = 1.0 / static_cast<double>(best[t].size());
      for (const auto& p : best[t])
        for (std::size_t i = 1; i + 1 < p.size(); ++i) score[p[i]] += frac;
    }
  }
  return score;
}

/* Deterministic xorshift for test-local randomness, independent of the
   library's generator. */
struct TestRng {
  std::uint64_t state;
  explicit TestRng(std::uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next() {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545F4914F6CDD1DULL;
  }
  double u01() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

}  // namespace testutil
