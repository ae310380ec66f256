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
#include "liberata/distribution.hpp"
#include "liberata/errors.hpp"
#include "liberata/market.hpp"
#include "liberata/portfolio.hpp"

namespace liberata {

/* ---- capital growth ---- */

/* Capital minted during (t−Δt, t]: every matrix entry accrues when its citing
   manuscript publishes, so the window's accrual is the summed outbound weight
   of citers published inside it. Windows therefore partition the total. */
inline double capital_growth_rate(const Corpus& c, const SpMat& w, Date t,
                                  double dt_years = 1.0) {
  long dt_days = static_cast<long>(std::llround(dt_years * Date::days_per_year));
  Date open = t.plus_days(-dt_days);
  Eigen::VectorXd outbound = column_sums(w);
  double total = 0.0;
  for (int m = 0; m < c.n_manuscripts(); ++m) {
    Date p = c.manuscripts[m].published_at;
    if (open < p && !(t < p)) total += outbound[m];
  }
  return total / dt_years;
}

struct GrowthPoint {
  Date window_end;
  double rate = 0.0;
};

/* One-year windows ending at each December 31 of the corpus span. */
inline std::vector<GrowthPoint> capital_growth_series(const Corpus& c, const SpMat& w) {
  auto [first, last] = corpus_year_span(c);
  std::vector<GrowthPoint> out;
  for (int y = first; y <= last; ++y) {
    Date end = year_end(y);
    out.push_back({end, capital_growth_rate(c, w, end, 1.0)});
  }
  return out;
}

/* ---- fair-market-price health ---- */

/* Global FMP at a window: per-field means summed across the d4 fields that
   traded during it. */
inline double global_fmp(const Corpus& c, Role role, std::optional<Date> from_excl,
                         std::optional<Date> to_incl) {
  std::map<std::string, std::pair<double, int>> by_field;
  for (const auto& t : c.transactions) {
    if (t.role != role || !t.field) continue;
    if (from_excl && !(*from_excl < t.executed_at)) continue;
    if (to_incl && *to_incl < t.executed_at) continue;
    std::string d4 = *t.field;
    if (c.taxonomy.has(d4) && c.taxonomy.level_of(d4) < 4) continue;  // not attributable at d4
    auto& [sum, n] = by_field[d4];
    sum += t.shares_paid;
    ++n;
  }
  if (by_field.empty())
    throw NoTransactions("no " + std::string(role_name(role)) + " transactions in window");
  double total = 0.0;
  for (const auto& [field, acc] : by_field) total += acc.first / acc.second;
  return total;
}

/* Year-over-year drop in global FMP (positive when prices fall). */
inline double fmp_shrinkage(const Corpus& c, Role role, Date t, double dt_years = 1.0) {
  long dt_days = static_cast<long>(std::llround(dt_years * Date::days_per_year));
  Date mid = t.plus_days(-dt_days);
  Date open = mid.plus_days(-dt_days);
  double now = global_fmp(c, role, mid, t);
  double before = global_fmp(c, role, open, mid);
  return -(now - before) / dt_years;
}

inline double weighted_shrinkage(double psi, double review_rate, double replication_rate) {
  if (!(psi > 0.0 && psi < 1.0)) throw InvalidParams("shrinkage weight must lie in (0,1)");
  return psi * review_rate + (1.0 - psi) * replication_rate;
}

/* Square-root-of-n scaled deviation of the global FMP over the n one-year
   windows ending at t. */
inline double fmp_volatility(const Corpus& c, Role role, int n, Date t) {
  if (n < 2) throw InsufficientHistory("volatility needs at least two periods");
  std::vector<double> series;
  for (int i = n - 1; i >= 0; --i) {
    Date end = t.plus_days(-static_cast<long>(std::llround(i * Date::days_per_year)));
    Date open = end.plus_days(-static_cast<long>(std::llround(Date::days_per_year)));
    try {
      series.push_back(global_fmp(c, role, open, end));
    } catch (const NoTransactions&) {
      throw InsufficientHistory("no transactions in the window ending " + end.to_string());
    }
  }
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= static_cast<double>(series.size());
  return std::sqrt(var * static_cast<double>(n));
}

/* ---- geographic capital ---- */

struct GeoCapital {
  double total = 0.0;                    // capital held by the region's contributors
  int contributor_count = 0;
  std::optional<double> per_capita;
  std::optional<double> per_contributor;
  std::optional<double> per_gdp;
  double field_hhi = 0.0;                // concentration across fields at the given depth
};

inline GeoCapital geo_capital(const Corpus& c, const Eigen::VectorXd& ac,
                              const std::map<std::string, RegionInfo>& regions,
                              const std::string& region_id, int field_level = 4) {
  auto it = regions.find(region_id);
  if (it == regions.end()) throw MissingRegionData(region_id);
  GeoCapital g;
  std::map<std::string, double> by_field;
  for (int p = 0; p < c.n_contributors(); ++p) {
    if (c.contributors[p].region != region_id) continue;
    ++g.contributor_count;
    for (const auto& h : c.c_shares[p]) {
      double v = h.share * ac[h.manuscript];
      g.total += v;
      by_field[c.primary_tag(h.manuscript, field_level)] += v;
    }
  }
  if (it->second.population > 0.0) g.per_capita = g.total / it->second.population;
  if (g.contributor_count > 0) g.per_contributor = g.total / g.contributor_count;
  if (it->second.gdp > 0.0) g.per_gdp = g.total / it->second.gdp;
  if (g.total > 0.0)
    for (const auto& [field, v] : by_field) g.field_hhi += (v / g.total) * (v / g.total);
  return g;
}

enum class GeoBasis { PerCapita, PerContributor, PerGdp };
enum class GiniFormula { Product, Standard };

/* Regional inequality. The Product formula sums |AC_y·w_y − AC_x·w_x| over
   all region pairs and divides by total capital, where w is the population,
   contributor count, or GDP — the weight multiplies the capital, so the
   result is not confined to [0,1]. The Standard formula is the conventional
   Gini of the AC/w ratios. The two are not rescalings of each other, so both
   are exposed. */
inline double geo_gini(const Corpus& c, const Eigen::VectorXd& ac,
                       const std::map<std::string, RegionInfo>& regions, GeoBasis basis,
                       GiniFormula formula) {
  std::map<std::string, double> region_ac;
  std::map<std::string, int> region_contributors;
  for (int p = 0; p < c.n_contributors(); ++p) {
    if (!c.contributors[p].region) continue;
    const std::string& r = *c.contributors[p].region;
    if (!regions.count(r)) continue;
    ++region_contributors[r];
    for (const auto& h : c.c_shares[p]) region_ac[r] += h.share * ac[h.manuscript];
  }
  std::vector<double> caps, weights;
  for (const auto& [id, info] : regions) {
    double w = 0.0;
    switch (basis) {
      case GeoBasis::PerCapita: w = info.population; break;
      case GeoBasis::PerContributor:
        w = region_contributors.count(id) ? region_contributors[id] : 0.0;
        break;
      case GeoBasis::PerGdp: w = info.gdp; break;
    }
    if (w <= 0.0) continue;  // basis undefined for this region
    caps.push_back(region_ac.count(id) ? region_ac[id] : 0.0);
    weights.push_back(w);
  }
  std::size_t n = caps.size();
  if (n < 2) throw MissingRegionData("need at least two regions with the chosen basis");
  if (formula == GiniFormula::Product) {
    double cap_total = 0.0;
    for (double v : caps) cap_total += v;
    if (cap_total <= 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        acc += std::abs(caps[y] * weights[y] - caps[x] * weights[x]);
    return acc / cap_total;
  }
  std::vector<double> values;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    values.push_back(caps[i] / weights[i]);
    mean += values.back();
  }
  mean /= static_cast<double>(n);
  if (mean <= 0.0) return 0.0;
  double acc = 0.0;
  for (double a : values)
    for (double b : values) acc += std::abs(a - b);
  return acc / (2.0 * static_cast<double>(n) * static_cast<double>(n) * mean);
}

/* ---- global efficiency ---- */

enum class EfficiencyBasis { Funding, Gdp, Ppp, Time };

struct GlobalFigures {
  std::optional<double> gdp;
  std::optional<double> ppp;
};

/* System-wide capital per currency unit, scaled by an economy figure, or per
   year of the corpus's working span. */
inline double global_efficiency(const Corpus& c, const Eigen::VectorXd& ac,
                                EfficiencyBasis basis, const GlobalFigures& figures = {}) {
  if (c.n_manuscripts() == 0) throw MissingData("corpus has no manuscripts");
  double cap = ac.sum();
  if (basis == EfficiencyBasis::Time) {
    Date first = c.manuscripts[0].published_at;
    Date last = first;
    for (const auto& m : c.manuscripts) {
      first = std::min(first, m.work_started_at.value_or(m.published_at));
      last = std::max(last, m.published_at);
    }
    double dt = years_between(first, last);
    if (dt <= 0.0) throw MissingData("corpus spans no time");
    return cap / dt;
  }
  double spend = 0.0;
  bool any = false;
  for (int m = 0; m < c.n_manuscripts(); ++m) {
    double f = funding_of(c, m);
    if (f >= 0.0) {
      spend += f;
      any = true;
    }
  }
  if (!any || spend <= 0.0) throw MissingData("no funding amounts recorded");
  double ratio = cap / spend;
  switch (basis) {
    case EfficiencyBasis::Funding: return ratio;
    case EfficiencyBasis::Gdp:
      if (!figures.gdp) throw MissingData("no global GDP figure supplied");
      return ratio * *figures.gdp;
    case EfficiencyBasis::Ppp:
      if (!figures.ppp) throw MissingData("no global PPP figure supplied");
      return ratio * *figures.ppp;
    default: return ratio;
  }
}

/* Same formulas over a single region's holdings; the portfolio of the
   region's contributors supplies both the capital and the time span. */
inline double regional_efficiency(const Corpus& c, const Eigen::VectorXd& ac,
                                  const std::string& region_id, EfficiencyBasis basis,
                                  const std::map<std::string, RegionInfo>& regions) {
  Selector sel;
  sel.regions = std::set<std::string>{region_id};
  std::vector<Holding> holdings = build_portfolio(c, sel);
  switch (basis) {
    case EfficiencyBasis::Funding: return funding_efficiency(c, holdings, ac);
    case EfficiencyBasis::Time: return time_efficiency(c, holdings, ac);
    case EfficiencyBasis::Gdp:
    case EfficiencyBasis::Ppp: {
      auto it = regions.find(region_id);
      if (it == regions.end()) throw MissingRegionData(region_id);
      double figure = basis == EfficiencyBasis::Gdp ? it->second.gdp : it->second.ppp;
      return funding_efficiency(c, holdings, ac) * figure;
    }
  }
  throw InvalidParams("unknown efficiency basis");
}

/* ---- quality-control activity ---- */

/* Count of positive reviewer and replicator share stakes on manuscripts
   published in (from, to]; open bounds widen to the whole corpus. */
inline long transaction_volume(const Corpus& c, std::optional<Date> from_excl = std::nullopt,
                               std::optional<Date> to_incl = std::nullopt) {
  long count = 0;
  for (int m = 0; m < c.n_manuscripts(); ++m) {
    Date p = c.manuscripts[m].published_at;
    if (from_excl && !(*from_excl < p)) continue;
    if (to_incl && *to_incl < p) continue;
    for (const auto& s : c.m_shares[m])
      if (s.role != Role::Author && s.share > 0.0) ++count;
  }
  return count;
}

struct QcTime {
  std::optional<double> review_days;       // mean summed review duration per reviewed manuscript
  std::optional<double> replication_days;
};

/* Mean total quality-control duration per manuscript in a field, per provider
   role, over the manuscripts that actually recorded such work. */
inline QcTime qc_time_efficiency(const Corpus& c, const std::string& d_tag) {
  std::vector<int> members = field_members(c, d_tag);
  if (members.empty()) throw MissingData("no manuscripts under tag " + d_tag);
  std::set<int> member_set(members.begin(), members.end());
  std::map<int, double> review_total, replication_total;
  for (const auto& t : c.transactions) {
    if (!t.qc_duration_days) continue;
    int m = c.manuscript_index(t.manuscript);
    if (!member_set.count(m)) continue;
    if (t.role == Role::PeerReviewer) review_total[m] += *t.qc_duration_days;
    if (t.role == Role::Replicator) replication_total[m] += *t.qc_duration_days;
  }
  QcTime q;
  if (!review_total.empty()) {
    double sum = 0.0;
    for (const auto& [m, v] : review_total) sum += v;
    q.review_days = sum / static_cast<double>(review_total.size());
  }
  if (!replication_total.empty()) {
    double sum = 0.0;
    for (const auto& [m, v] : replication_total) sum += v;
    q.replication_days = sum / static_cast<double>(replication_total.size());
  }
  return q;
}

/* Collection subscription ratio: subscribers per distinct author holding
   shares on the collection's manuscripts. */
inline double csr(const Corpus& c, const Collection& col) {
  std::set<int> authors;
  for (int m = 0; m < c.n_manuscripts(); ++m) {
    if (!in_collection(c, m, col.tags)) continue;
    for (const auto& s : c.m_shares[m])
      if (s.role == Role::Author && s.share > 0.0) authors.insert(s.contributor);
  }
  if (authors.empty()) throw ZeroAuthors(col.name);
  return static_cast<double>(col.subscribers) / static_cast<double>(authors.size());
}

}  // namespace liberata
