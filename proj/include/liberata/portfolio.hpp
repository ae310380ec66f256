#pragma once

#include <algorithm>
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

struct Holding {
  int manuscript;
  int contributor;
  Role role;
  double share;
};

/* Conjunctive holding filters; absent fields match everything. The tag filter
   accepts a node at any level and matches the manuscript's primary chain entry
   at that level or any of its extra tags. */
struct Selector {
  std::optional<std::set<std::string>> contributors;
  std::optional<std::set<std::string>> institutions;  // contributor affiliation
  std::optional<std::set<std::string>> regions;       // contributor region
  std::optional<std::set<Role>> roles;
  std::optional<std::string> tag;
  std::optional<Date> from;  // on published_at, inclusive
  std::optional<Date> to;
};

inline std::vector<Holding> build_portfolio(const Corpus& c, const Selector& sel) {
  int tag_level = 0;
  if (sel.tag) tag_level = c.taxonomy.level_of(*sel.tag);
  std::vector<Holding> out;
  for (int m = 0; m < c.n_manuscripts(); ++m) {
    const Manuscript& ms = c.manuscripts[m];
    if (sel.from && ms.published_at < *sel.from) continue;
    if (sel.to && *sel.to < ms.published_at) continue;
    if (sel.tag) {
      bool match = ms.primary_tags[tag_level - 1] == *sel.tag;
      if (!match)
        for (const auto& t : ms.extra_tags)
          if (t == *sel.tag) match = true;
      if (!match) continue;
    }
    for (const auto& s : c.m_shares[m]) {
      if (s.share <= 0.0) continue;
      if (sel.roles && !sel.roles->count(s.role)) continue;
      const Contributor& p = c.contributors[s.contributor];
      if (sel.contributors && !sel.contributors->count(p.id)) continue;
      if (sel.regions && (!p.region || !sel.regions->count(*p.region))) continue;
      if (sel.institutions) {
        bool match = false;
        for (const auto& inst : p.institutions)
          if (sel.institutions->count(inst)) match = true;
        if (!match) continue;
      }
      out.push_back({m, s.contributor, s.role, s.share});
    }
  }
  std::sort(out.begin(), out.end(), [](const Holding& a, const Holding& b) {
    if (a.manuscript != b.manuscript) return a.manuscript < b.manuscript;
    if (a.contributor != b.contributor) return a.contributor < b.contributor;
    return static_cast<int>(a.role) < static_cast<int>(b.role);
  });
  return out;
}

inline double portfolio_capital(const std::vector<Holding>& holdings, const Eigen::VectorXd& ac) {
  double total = 0.0;
  for (const auto& h : holdings) total += h.share * ac[h.manuscript];
  return total;
}

/* ---- mix ---- */

enum class MixAxis { FieldLevel, Role, Period };
enum class ValueBasis { Capital, Shares };

struct MixResult {
  std::map<std::string, double> weights;  // normalized when total > 0
  double total = 0.0;
};

inline MixResult portfolio_mix(const Corpus& c, const std::vector<Holding>& holdings,
                               const Eigen::VectorXd& ac, MixAxis axis, int field_level = 4,
                               ValueBasis basis = ValueBasis::Capital) {
  if (holdings.empty()) throw EmptyPortfolio();
  MixResult r;
  for (const auto& h : holdings) {
    double v = basis == ValueBasis::Capital ? h.share * ac[h.manuscript] : h.share;
    std::string key;
    switch (axis) {
      case MixAxis::FieldLevel: key = c.primary_tag(h.manuscript, field_level); break;
      case MixAxis::Role: key = role_name(h.role); break;
      case MixAxis::Period:
        key = std::to_string(c.manuscripts[h.manuscript].published_at.year());
        break;
    }
    r.weights[key] += v;
    r.total += v;
  }
  if (r.total > 0.0)
    for (auto& [key, v] : r.weights) v /= r.total;
  return r;
}

/* ---- returns ---- */

struct ReturnsSeries {
  std::vector<Date> grid;
  std::vector<double> levels;  // portfolio AC at each grid point
  std::vector<double> deltas;  // per-period AC changes
};

inline ReturnsSeries portfolio_returns(const Corpus& c, const std::vector<Holding>& holdings,
                                       const std::vector<Eigen::VectorXd>& timeseries,
                                       const std::vector<Date>& grid) {
  if (holdings.empty()) throw EmptyPortfolio();
  ReturnsSeries r;
  r.grid = grid;
  for (const auto& ac : timeseries) {
    double level = 0.0;
    for (const auto& h : holdings) level += h.share * ac[h.manuscript];
    r.levels.push_back(level);
  }
  for (std::size_t i = 1; i < r.levels.size(); ++i)
    r.deltas.push_back(r.levels[i] - r.levels[i - 1]);
  return r;
}

struct Moments {
  double mean = 0.0;
  std::optional<double> std_dev;  // population; absent for a single period
  double skewness = 0.0;          // standardized third moment; 0 when flat
};

inline Moments return_moments(const std::vector<double>& deltas) {
  if (deltas.empty()) throw EmptyDistribution();
  Moments m;
  double n = static_cast<double>(deltas.size());
  for (double d : deltas) m.mean += d;
  m.mean /= n;
  if (deltas.size() < 2) return m;
  double m2 = 0.0, m3 = 0.0;
  for (double d : deltas) {
    double e = d - m.mean;
    m2 += e * e;
    m3 += e * e * e;
  }
  m2 /= n;
  m3 /= n;
  m.std_dev = std::sqrt(m2);
  m.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return m;
}

struct RatioMetrics {
  std::optional<double> sharpe;  // mean return over volatility
  std::optional<double> arc;    // mean return over accumulated capital
};

inline RatioMetrics ratio_metrics(const Moments& m, double portfolio_ac) {
  RatioMetrics r;
  if (m.std_dev && *m.std_dev > 0.0) r.sharpe = m.mean / *m.std_dev;
  if (portfolio_ac != 0.0) r.arc = m.mean / portfolio_ac;
  return r;
}

/* ---- allocation weights and concentration ---- */

enum class WeightGrouping { Manuscript, TagLevel };

inline std::vector<std::pair<std::string, double>> allocation_weights(
    const Corpus& c, const std::vector<Holding>& holdings, const Eigen::VectorXd& ac,
    ValueBasis basis, WeightGrouping grouping, int tag_level = 4) {
  if (holdings.empty()) throw ZeroTotal("empty portfolio has no allocation weights");
  std::map<std::string, double> acc;
  double total = 0.0;
  for (const auto& h : holdings) {
    double v = basis == ValueBasis::Capital ? h.share * ac[h.manuscript] : h.share;
    std::string key = grouping == WeightGrouping::Manuscript
                          ? c.manuscripts[h.manuscript].id
                          : c.primary_tag(h.manuscript, tag_level);
    acc[key] += v;
    total += v;
  }
  if (total <= 0.0) throw ZeroTotal("allocation weights need a positive total");
  std::vector<std::pair<std::string, double>> out(acc.begin(), acc.end());
  for (auto& [key, v] : out) v /= total;
  return out;
}

struct Concentration {
  double hhi = 0.0;
  double gini = 0.0;
  double entropy = 0.0;  // normalized by log n; 0 for a single weight
};

inline Concentration concentration(const std::vector<double>& weights) {
  if (weights.empty()) throw EmptyDistribution();
  Concentration c;
  const double n = static_cast<double>(weights.size());
  for (double w : weights) c.hhi += w * w;
  double abs_diffs = 0.0;
  for (double a : weights)
    for (double b : weights) abs_diffs += std::abs(a - b);
  c.gini = abs_diffs / (2.0 * n);
  if (weights.size() > 1) {
    double h = 0.0;
    for (double w : weights)
      if (w > 0.0) h -= w * std::log(w);
    c.entropy = h / std::log(n);
  }
  return c;
}

/* Diversification ratio: allocation-weighted mean asset volatility over the
   portfolio's own volatility, on relative (per unit of capital) returns so the
   portfolio return is exactly the weighted sum of asset returns. Absent when
   the portfolio volatility vanishes. */
inline std::optional<double> diversification_ratio(
    const Corpus& c, const std::vector<Holding>& holdings,
    const std::vector<Eigen::VectorXd>& timeseries) {
  if (holdings.empty()) throw EmptyPortfolio();
  if (timeseries.size() < 2) return std::nullopt;
  const Eigen::VectorXd& final_ac = timeseries.back();
  std::map<int, double> shares_by_m;
  for (const auto& h : holdings) shares_by_m[h.manuscript] += h.share;

  double cap_total = 0.0;
  for (const auto& [m, s] : shares_by_m) cap_total += s * final_ac[m];
  if (cap_total <= 0.0) return std::nullopt;

  std::size_t periods = timeseries.size() - 1;
  std::vector<double> portfolio_r(periods, 0.0);
  double weighted_sigma = 0.0;
  for (const auto& [m, s] : shares_by_m) {
    if (final_ac[m] <= 0.0) continue;  // zero-capital assets contribute nothing
    double omega = s * final_ac[m] / cap_total;
    std::vector<double> r(periods);
    double mu = 0.0;
    for (std::size_t t = 0; t < periods; ++t) {
      r[t] = (timeseries[t + 1][m] - timeseries[t][m]) / final_ac[m];
      mu += r[t];
    }
    mu /= static_cast<double>(periods);
    double var = 0.0;
    for (std::size_t t = 0; t < periods; ++t) {
      var += (r[t] - mu) * (r[t] - mu);
      portfolio_r[t] += omega * r[t];
    }
    var /= static_cast<double>(periods);
    weighted_sigma += omega * std::sqrt(var);
  }
  double mu_p = 0.0;
  for (double v : portfolio_r) mu_p += v;
  mu_p /= static_cast<double>(periods);
  double var_p = 0.0;
  for (double v : portfolio_r) var_p += (v - mu_p) * (v - mu_p);
  var_p /= static_cast<double>(periods);
  double sigma_p = std::sqrt(var_p);
  if (sigma_p == 0.0) return std::nullopt;
  return weighted_sigma / sigma_p;
}

/* ---- efficiency ---- */

/* Effective funding split of a manuscript. Explicit fractions win; otherwise
   funds tied to authors are scaled by the author's share and split equally
   across that author's funds, then normalized. */
inline std::vector<std::pair<std::string, double>> effective_funding_fractions(const Corpus& c,
                                                                               int m) {
  const Manuscript& ms = c.manuscripts[m];
  std::map<std::string, double> acc;
  bool explicit_fractions = false;
  for (const auto& f : ms.funding)
    if (f.fraction) explicit_fractions = true;
  if (explicit_fractions) {
    for (const auto& f : ms.funding) acc[f.source] += f.fraction.value_or(0.0);
  } else {
    std::map<int, std::vector<const FundingEntry*>> funds_by_author;
    for (const auto& f : ms.funding) {
      if (!f.contributor) continue;
      funds_by_author[c.contributor_index(*f.contributor)].push_back(&f);
    }
    if (funds_by_author.empty()) {
      for (const auto& f : ms.funding) acc[f.source] += 1.0;
    } else {
      for (const auto& [author, funds] : funds_by_author) {
        double share = 0.0;
        for (const auto& s : c.m_shares[m])
          if (s.contributor == author) share = s.share;
        for (const auto* f : funds)
          acc[f->source] += share / static_cast<double>(funds.size());
      }
    }
  }
  double total = 0.0;
  for (const auto& [src, v] : acc) total += v;
  std::vector<std::pair<std::string, double>> out(acc.begin(), acc.end());
  if (total > 0.0)
    for (auto& [src, v] : out) v /= total;
  return out;
}

inline double funding_of(const Corpus& c, int m) {
  double total = 0.0;
  bool any = false;
  for (const auto& f : c.manuscripts[m].funding)
    if (f.amount) {
      total += *f.amount;
      any = true;
    }
  return any ? total : -1.0;
}

/* Capital per currency unit across the portfolio's distinct manuscripts. */
inline double funding_efficiency(const Corpus& c, const std::vector<Holding>& holdings,
                                 const Eigen::VectorXd& ac) {
  if (holdings.empty()) throw EmptyPortfolio();
  std::set<int> manuscripts;
  for (const auto& h : holdings) manuscripts.insert(h.manuscript);
  double cap = portfolio_capital(holdings, ac);
  double spend = 0.0;
  bool any = false;
  for (int m : manuscripts) {
    double f = funding_of(c, m);
    if (f >= 0.0) {
      spend += f;
      any = true;
    }
  }
  if (!any || spend <= 0.0)
    throw MissingData("no funding amounts recorded for the portfolio's manuscripts");
  return cap / spend;
}

/* Capital per year from the earliest work start (publication date when the
   start is unknown) to the latest publication. */
inline double time_efficiency(const Corpus& c, const std::vector<Holding>& holdings,
                              const Eigen::VectorXd& ac) {
  if (holdings.empty()) throw EmptyPortfolio();
  std::set<int> manuscripts;
  for (const auto& h : holdings) manuscripts.insert(h.manuscript);
  Date first = c.manuscripts[*manuscripts.begin()].published_at;
  Date last = first;
  for (int m : manuscripts) {
    const Manuscript& ms = c.manuscripts[m];
    Date start = ms.work_started_at.value_or(ms.published_at);
    first = std::min(first, start);
    last = std::max(last, ms.published_at);
  }
  double dt = years_between(first, last);
  if (dt <= 0.0) throw MissingData("portfolio spans no time");
  return portfolio_capital(holdings, ac) / dt;
}

/* ---- reliability ---- */

struct Reliability {
  std::optional<double> loss_ratio;  // retracted capital over remaining, same role
  std::optional<double> role_share;  // role capital over total capital
};

inline Reliability reliability(const Corpus& c, const WeightingPipeline& pipeline,
                               const std::string& contributor_id, Role role) {
  int p = c.contributor_index(contributor_id);
  Eigen::VectorXd ac_current = capital_vector(compute_references_matrix(c, pipeline).w);
  Corpus lifted = c;
  for (auto& m : lifted.manuscripts) m.retracted = false;
  Eigen::VectorXd ac_lifted = capital_vector(compute_references_matrix(lifted, pipeline).w);

  double lost = 0.0, remaining = 0.0, role_cap = 0.0, total_cap = 0.0;
  for (const auto& h : c.c_shares[p]) {
    bool retracted = c.manuscripts[h.manuscript].retracted;
    if (h.role == role) {
      if (retracted)
        lost += h.share * ac_lifted[h.manuscript];
      else
        remaining += h.share * ac_current[h.manuscript];
    }
    if (h.role == role) role_cap += h.share * ac_current[h.manuscript];
    total_cap += h.share * ac_current[h.manuscript];
  }
  Reliability r;
  if (remaining > 0.0) r.loss_ratio = lost / remaining;
  if (total_cap > 0.0) r.role_share = role_cap / total_cap;
  return r;
}

/* ---- quality-change impact ---- */

/* Ratio of capital-slope changes around an event: the manuscript's change in
   d(AC)/dt against its d4 field total's, with symmetric finite differences
   over half the window each side. */
inline std::optional<double> iqc(const Corpus& c, const WeightingPipeline& pipeline, int m,
                                 Date event, double window_years = 1.0) {
  long half_days = static_cast<long>(std::llround(window_years / 2.0 * Date::days_per_year));
  std::vector<Date> grid = {event.plus_days(-half_days), event, event.plus_days(half_days)};
  std::vector<Eigen::VectorXd> ts = capital_timeseries(c, pipeline, grid);
  double h = years_between(grid[0], grid[1]);
  const std::string& d4 = c.primary_tag(m, 4);
  auto field_total = [&](const Eigen::VectorXd& ac) {
    double t = 0.0;
    for (int i = 0; i < c.n_manuscripts(); ++i)
      if (c.primary_tag(i, 4) == d4) t += ac[i];
    return t;
  };
  double m_before = (ts[1][m] - ts[0][m]) / h;
  double m_after = (ts[2][m] - ts[1][m]) / h;
  double f_before = (field_total(ts[1]) - field_total(ts[0])) / h;
  double f_after = (field_total(ts[2]) - field_total(ts[1])) / h;
  double denom = f_after - f_before;
  if (denom == 0.0) return std::nullopt;
  return (m_after - m_before) / denom;
}

/* ---- collections ---- */

inline double journal_mean_capital(const Corpus& c, const Eigen::VectorXd& ac,
                                   const Collection& col) {
  double total = 0.0;
  int count = 0;
  for (int m = 0; m < c.n_manuscripts(); ++m)
    if (in_collection(c, m, col.tags)) {
      total += ac[m];
      ++count;
    }
  if (count == 0) throw EmptyCollection(col.name);
  return total / count;
}

}  // namespace liberata
