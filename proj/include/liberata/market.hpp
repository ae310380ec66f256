#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "liberata/capital.hpp"
#include "liberata/corpus.hpp"
#include "liberata/errors.hpp"

namespace liberata {

namespace market_detail {

/* A transaction attributed to field f counts toward tag t when f sits at or
   below t in the taxonomy. */
inline bool field_matches(const Taxonomy& tax, const std::string& field, const std::string& tag,
                          int tag_level) {
  if (!tax.has(field)) return false;
  const TaxonomyNode* cur = &tax.node(field);
  if (cur->level < tag_level) return false;
  while (cur->level > tag_level && cur->parent) cur = &tax.node(*cur->parent);
  return cur->level == tag_level && cur->id == tag;
}

inline bool in_window(const Transaction& t, const std::optional<Date>& from,
                      const std::optional<Date>& to) {
  if (from && t.executed_at < *from) return false;
  if (to && *to < t.executed_at) return false;
  return true;
}

}  // namespace market_detail

/* Fair market price: mean shares paid per transaction for the given provider
   role within a field at any tag depth. */
inline double fmp(const Corpus& c, Role role, const std::string& d_tag,
                  std::optional<Date> from = std::nullopt,
                  std::optional<Date> to = std::nullopt) {
  if (role == Role::Author) throw InvalidParams("fair market price applies to provider roles");
  int tag_level = c.taxonomy.level_of(d_tag);
  double total = 0.0;
  int n = 0;
  for (const auto& t : c.transactions) {
    if (t.role != role || !t.field) continue;
    if (!market_detail::in_window(t, from, to)) continue;
    if (!market_detail::field_matches(c.taxonomy, *t.field, d_tag, tag_level)) continue;
    total += t.shares_paid;
    ++n;
  }
  if (n == 0) throw NoTransactions(std::string(role_name(role)) + " in " + d_tag);
  return total / n;
}

/* Mean shares paid above (positive) or below (negative) the field's fair
   market price by manuscripts any of the given authors hold author shares on. */
inline double risk_premium(const Corpus& c, const std::set<std::string>& author_ids, Role role,
                           const std::string& d_tag, std::optional<Date> from = std::nullopt,
                           std::optional<Date> to = std::nullopt) {
  double fair = fmp(c, role, d_tag, from, to);
  std::set<int> authors;
  for (const auto& id : author_ids) authors.insert(c.contributor_index(id));
  int tag_level = c.taxonomy.level_of(d_tag);
  double total = 0.0;
  int n = 0;
  for (const auto& t : c.transactions) {
    if (t.role != role || !t.field) continue;
    if (!market_detail::in_window(t, from, to)) continue;
    if (!market_detail::field_matches(c.taxonomy, *t.field, d_tag, tag_level)) continue;
    int m = c.manuscript_index(t.manuscript);
    bool ours = false;
    for (const auto& s : c.m_shares[m])
      if (s.role == Role::Author && authors.count(s.contributor)) ours = true;
    if (!ours) continue;
    total += t.shares_paid;
    ++n;
  }
  if (n == 0) throw NoTransactions("author set in " + d_tag);
  return total / n - fair;
}

/* ---- marketplace decision predicates ---- */

/* Authors accept quality control when the expected capital of their reduced
   post-transaction stake exceeds the expected capital of the current one. */
struct AuthorSide {
  double expected_w_post = 0.0;  // expected weighted citations after the service
  double expected_w_pre = 0.0;
  double author_share_post = 0.0;
  double author_share_pre = 0.0;
};

inline bool author_feasible(const AuthorSide& a) {
  return a.expected_w_post * a.author_share_post > a.expected_w_pre * a.author_share_pre;
}

/* Providers accept when the service costs them less time than earning the
   same stake by authoring their own work. */
struct ProviderSide {
  double provider_time = 0.0;   // time the review/replication takes
  double authoring_time = 0.0;  // time to author comparable work
  double provider_share = 0.0;
};

inline bool provider_feasible(const ProviderSide& p) {
  return p.provider_time < p.authoring_time * p.provider_share;
}

/* ---- return series ---- */

inline std::vector<double> manuscript_return_series(const std::vector<Eigen::VectorXd>& timeseries,
                                                    int m) {
  std::vector<double> r;
  for (std::size_t t = 1; t < timeseries.size(); ++t)
    r.push_back(timeseries[t][m] - timeseries[t - 1][m]);
  return r;
}

/* Per-period capital gain of the average manuscript in a field: the summed
   gains of the field's manuscripts over the count published by period end. */
inline std::vector<double> field_return_series(const Corpus& c,
                                               const std::vector<Eigen::VectorXd>& timeseries,
                                               const std::vector<Date>& grid,
                                               const std::string& d_tag) {
  int tag_level = c.taxonomy.level_of(d_tag);
  std::vector<int> members;
  for (int m = 0; m < c.n_manuscripts(); ++m)
    if (c.primary_tag(m, tag_level) == d_tag) members.push_back(m);
  std::vector<double> r;
  for (std::size_t t = 1; t < timeseries.size(); ++t) {
    double gain = 0.0;
    int published = 0;
    for (int m : members) {
      gain += timeseries[t][m] - timeseries[t - 1][m];
      if (!(grid[t] < c.manuscripts[m].published_at)) ++published;
    }
    r.push_back(published > 0 ? gain / published : 0.0);
  }
  return r;
}

/* ---- CAPM-style performance ---- */

struct CapmResult {
  std::optional<double> beta;                       // absent on zero field variance
  std::optional<double> alpha;                      // excess return over β·field
  std::optional<double> relative;                   // μ_m / μ_d, absent on zero μ_d
  std::optional<double> risk_adjusted_relative;     // α / μ_d
};

inline CapmResult capm(const std::vector<double>& r_m, const std::vector<double>& r_d) {
  if (r_m.size() != r_d.size()) throw DimensionMismatch("return series lengths differ");
  if (r_m.empty()) throw EmptyDistribution();
  const double n = static_cast<double>(r_m.size());
  double mu_m = 0.0, mu_d = 0.0;
  for (std::size_t i = 0; i < r_m.size(); ++i) {
    mu_m += r_m[i];
    mu_d += r_d[i];
  }
  mu_m /= n;
  mu_d /= n;
  double cov = 0.0, var_d = 0.0;
  for (std::size_t i = 0; i < r_m.size(); ++i) {
    cov += (r_m[i] - mu_m) * (r_d[i] - mu_d);
    var_d += (r_d[i] - mu_d) * (r_d[i] - mu_d);
  }
  cov /= n;
  var_d /= n;
  CapmResult r;
  if (var_d > 0.0) {
    r.beta = cov / var_d;
    r.alpha = mu_m - *r.beta * mu_d;
  }
  if (mu_d != 0.0) {
    r.relative = mu_m / mu_d;
    if (r.alpha) r.risk_adjusted_relative = *r.alpha / mu_d;
  }
  return r;
}

/* Share-weighted relative performance of a set of holdings; the risk-adjusted
   variant is the unweighted sum of per-manuscript α/μ_d terms. Requires every
   held manuscript's field mean return to be nonzero (and positive variance for
   the risk-adjusted form); absent otherwise. */
template <typename Holdings>
inline std::optional<double> portfolio_relative_performance(
    const Corpus& c, const Holdings& holdings, const std::vector<Eigen::VectorXd>& timeseries,
    const std::vector<Date>& grid, bool risk_adjusted) {
  std::map<int, double> shares_by_m;
  for (const auto& h : holdings) shares_by_m[h.manuscript] += h.share;
  if (shares_by_m.empty()) throw EmptyPortfolio();

  std::map<std::string, std::vector<double>> field_cache;
  double weighted = 0.0, share_total = 0.0, adjusted = 0.0;
  for (const auto& [m, s] : shares_by_m) {
    const std::string& d4 = c.primary_tag(m, 4);
    auto it = field_cache.find(d4);
    if (it == field_cache.end())
      it = field_cache.emplace(d4, field_return_series(c, timeseries, grid, d4)).first;
    CapmResult r = capm(manuscript_return_series(timeseries, m), it->second);
    if (!r.relative) return std::nullopt;
    if (risk_adjusted && !r.risk_adjusted_relative) return std::nullopt;
    weighted += s * *r.relative;
    if (risk_adjusted) adjusted += *r.risk_adjusted_relative;
    share_total += s;
  }
  if (risk_adjusted) return adjusted;
  if (share_total <= 0.0) return std::nullopt;
  return weighted / share_total;
}

}  // namespace liberata
