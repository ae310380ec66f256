#pragma once

#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "liberata/corpus.hpp"
#include "liberata/errors.hpp"
#include "liberata/shares_graph.hpp"

namespace liberata {

/* References matrices are manuscript-by-manuscript with entry (x, y) holding
   the weight of y's citation of x. Manuscript order is publication order, so
   the matrix is strictly upper triangular. Retracted manuscripts keep their
   outbound references but their inbound rows are dropped. */

enum class WeightBase { Unweighted, InverseReferenceCount };

enum class ModifierKind { PublicationRate, Acsm, Tmwc, Imwc };

struct Modifier {
  ModifierKind kind;
  int imwc_iterations = 4;

  friend bool operator==(const Modifier& a, const Modifier& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == ModifierKind::Imwc) return a.imwc_iterations == b.imwc_iterations;
    return true;
  }
};

struct WeightingPipeline {
  WeightBase base = WeightBase::InverseReferenceCount;
  std::vector<Modifier> modifiers;

  friend bool operator==(const WeightingPipeline& a, const WeightingPipeline& b) {
    return a.base == b.base && a.modifiers == b.modifiers;
  }
};

inline std::string format_pipeline(const WeightingPipeline& p) {
  std::string out = p.base == WeightBase::Unweighted ? "base=unweighted" : "base=inv_ref";
  for (const auto& m : p.modifiers) {
    switch (m.kind) {
      case ModifierKind::PublicationRate: out += ",pubrate"; break;
      case ModifierKind::Acsm: out += ",acsm"; break;
      case ModifierKind::Tmwc: out += ",tmwc"; break;
      case ModifierKind::Imwc: out += ",imwc:" + std::to_string(m.imwc_iterations); break;
    }
  }
  return out;
}

inline WeightingPipeline parse_pipeline(const std::string& spec) {
  WeightingPipeline p;
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : spec) {
    if (ch == ',') {
      tokens.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur += ch;
    }
  }
  tokens.push_back(cur);
  if (tokens.empty() || tokens[0].rfind("base=", 0) != 0)
    throw InvalidPipeline("pipeline must start with base=unweighted or base=inv_ref");
  std::string base = tokens[0].substr(5);
  if (base == "unweighted")
    p.base = WeightBase::Unweighted;
  else if (base == "inv_ref")
    p.base = WeightBase::InverseReferenceCount;
  else
    throw InvalidPipeline("unknown base: " + base);
  std::set<ModifierKind> seen;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    if (t.empty()) throw InvalidPipeline("empty pipeline token");
    Modifier m{ModifierKind::PublicationRate, 4};
    if (t == "pubrate") {
      m.kind = ModifierKind::PublicationRate;
    } else if (t == "acsm") {
      m.kind = ModifierKind::Acsm;
    } else if (t == "tmwc") {
      m.kind = ModifierKind::Tmwc;
    } else if (t == "imwc" || t.rfind("imwc:", 0) == 0) {
      m.kind = ModifierKind::Imwc;
      if (t != "imwc") {
        std::string arg = t.substr(5);
        if (arg.empty() || arg.find_first_not_of("0123456789") != std::string::npos)
          throw InvalidPipeline("imwc iteration count must be an integer: " + t);
        m.imwc_iterations = std::stoi(arg);
      }
      if (m.imwc_iterations < 1 || m.imwc_iterations > 4)
        throw InvalidPipeline("imwc iterations must lie in [1,4]");
    } else {
      throw InvalidPipeline("unknown modifier: " + t);
    }
    if (!seen.insert(m.kind).second)
      throw InvalidPipeline("modifier applied more than once: " + t);
    p.modifiers.push_back(m);
  }
  return p;
}

/* ---- base matrices ---- */

inline SpMat unweighted_matrix(const Corpus& c) {
  std::vector<Triplet> trips;
  for (int y = 0; y < c.n_manuscripts(); ++y)
    for (int x : c.refs_idx[y])
      if (!c.manuscripts[x].retracted) trips.emplace_back(x, y, 1.0);
  SpMat m(c.n_manuscripts(), c.n_manuscripts());
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

inline SpMat base_weighted_matrix(const Corpus& c) {
  std::vector<Triplet> trips;
  for (int y = 0; y < c.n_manuscripts(); ++y) {
    if (c.refs_idx[y].empty()) continue;
    double w = 1.0 / static_cast<double>(c.refs_idx[y].size());
    for (int x : c.refs_idx[y])
      if (!c.manuscripts[x].retracted) trips.emplace_back(x, y, w);
  }
  SpMat m(c.n_manuscripts(), c.n_manuscripts());
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

/* ---- field rates ---- */

struct FieldRates {
  std::map<std::string, double> rho;  // d4 -> manuscripts per year per active contributor
  std::map<std::string, double> t3;   // d3 -> mean years from work start to publication
};

inline FieldRates estimate_field_rates(const Corpus& c) {
  FieldRates r;
  // rho: per (d4, calendar year), manuscripts divided by distinct share holders.
  std::map<std::string, std::map<int, std::pair<int, std::set<int>>>> per_field;
  for (int m = 0; m < c.n_manuscripts(); ++m) {
    const std::string& d4 = c.primary_tag(m, 4);
    int year = c.manuscripts[m].published_at.year();
    auto& cell = per_field[d4][year];
    cell.first += 1;
    for (const auto& s : c.m_shares[m])
      if (s.share > 0.0) cell.second.insert(s.contributor);
  }
  for (const auto& [d4, years] : per_field) {
    double acc = 0.0;
    int n = 0;
    for (const auto& [year, cell] : years) {
      if (cell.second.empty()) continue;
      acc += static_cast<double>(cell.first) / static_cast<double>(cell.second.size());
      ++n;
    }
    if (n > 0) r.rho[d4] = acc / n;
  }
  std::map<std::string, std::pair<double, int>> spans;
  for (int m = 0; m < c.n_manuscripts(); ++m) {
    if (!c.manuscripts[m].work_started_at) continue;
    auto& cell = spans[c.primary_tag(m, 3)];
    cell.first += years_between(*c.manuscripts[m].work_started_at, c.manuscripts[m].published_at);
    cell.second += 1;
  }
  for (const auto& [d3, cell] : spans) r.t3[d3] = cell.first / cell.second;
  return r;
}

/* ---- modifiers ---- */

enum class MissingFieldPolicy { Throw, Skip };

/* Scale each citing column by the reciprocal publication rate of the citing
   manuscript's d4 field. */
inline SpMat apply_publication_rate(const SpMat& w, const Corpus& c, const FieldRates& rates,
                                    MissingFieldPolicy policy = MissingFieldPolicy::Throw,
                                    std::vector<std::string>* warnings = nullptr) {
  SpMat out = w;
  std::set<std::string> missing;
  for (int y = 0; y < out.outerSize(); ++y) {
    SpMat::InnerIterator probe(out, y);
    if (!probe) continue;
    const std::string& d4 = c.primary_tag(y, 4);
    auto it = rates.rho.find(d4);
    if (it == rates.rho.end() || it->second <= 0.0) {
      if (policy == MissingFieldPolicy::Throw)
        throw MissingData("no publication rate for field " + d4);
      missing.insert(d4);
      continue;
    }
    double factor = 1.0 / it->second;
    for (SpMat::InnerIterator e(out, y); e; ++e) e.valueRef() *= factor;
  }
  if (warnings)
    for (const auto& d4 : missing)
      warnings->push_back("pubrate skipped field without a rate: " + d4);
  return out;
}

/* Overlap of the two manuscripts' raw author-share vectors, taken over the
   union of their author sets. */
inline double author_similarity(const Corpus& c, int m_a, int m_b) {
  double dot = 0.0;
  for (const auto& sa : c.m_shares[m_a]) {
    if (sa.role != Role::Author || sa.share <= 0.0) continue;
    for (const auto& sb : c.m_shares[m_b]) {
      if (sb.role != Role::Author || sb.share <= 0.0) continue;
      if (sa.contributor == sb.contributor) dot += sa.share * sb.share;
    }
  }
  return dot;
}

/* Discount each citation by the author overlap between cited and citing
   manuscripts: w *= (1 - phi). */
inline SpMat apply_acsm(const SpMat& w, const Corpus& c) {
  SpMat out = w;
  for (int y = 0; y < out.outerSize(); ++y)
    for (SpMat::InnerIterator e(out, y); e; ++e)
      e.valueRef() *= 1.0 - author_similarity(c, static_cast<int>(e.row()), y);
  return out;
}

/* Scale each cited row by the mean time-to-publish of the row manuscript's
   d3 discipline. */
inline SpMat apply_tmwc(const SpMat& w, const Corpus& c, const FieldRates& rates,
                        MissingFieldPolicy policy = MissingFieldPolicy::Throw,
                        std::vector<std::string>* warnings = nullptr) {
  Eigen::VectorXd factor = Eigen::VectorXd::Ones(w.rows());
  std::vector<bool> has_entries(w.rows(), false);
  for (int y = 0; y < w.outerSize(); ++y)
    for (SpMat::InnerIterator e(w, y); e; ++e) has_entries[e.row()] = true;
  std::set<std::string> missing;
  for (int x = 0; x < w.rows(); ++x) {
    if (!has_entries[x]) continue;
    const std::string& d3 = c.primary_tag(x, 3);
    auto it = rates.t3.find(d3);
    if (it == rates.t3.end()) {
      if (policy == MissingFieldPolicy::Throw)
        throw MissingData("no time-to-publish rate for discipline " + d3);
      missing.insert(d3);
      continue;
    }
    factor[x] = it->second;
  }
  SpMat out = w;
  for (int y = 0; y < out.outerSize(); ++y)
    for (SpMat::InnerIterator e(out, y); e; ++e) e.valueRef() *= factor[e.row()];
  if (warnings)
    for (const auto& d3 : missing)
      warnings->push_back("tmwc skipped discipline without a rate: " + d3);
  return out;
}

/* Impact modifier: rows of the base matrix are scaled by
   iota(m) = log2(AC_m + 1), with AC recomputed from the previous iterate each
   round (not accumulated). The fixed-point iteration is truncated at four
   steps. */
inline SpMat apply_imwc(const SpMat& w, int iterations = 4) {
  if (iterations < 1 || iterations > 4)
    throw InvalidParams("imwc iterations must lie in [1,4]");
  SpMat current = w;
  for (int k = 0; k < iterations; ++k) {
    Eigen::VectorXd ac = Eigen::VectorXd::Zero(current.rows());
    for (int y = 0; y < current.outerSize(); ++y)
      for (SpMat::InnerIterator e(current, y); e; ++e) ac[e.row()] += e.value();
    SpMat next = w;
    for (int y = 0; y < next.outerSize(); ++y)
      for (SpMat::InnerIterator e(next, y); e; ++e)
        e.valueRef() *= std::log2(ac[e.row()] + 1.0);
    current = std::move(next);
  }
  current.prune(0.0);
  return current;
}

/* ---- pipeline runner ---- */

struct WeightedRefs {
  SpMat w;
  WeightingPipeline pipeline;
  FieldRates rates;
  std::vector<std::string> warnings;
};

inline WeightedRefs compute_references_matrix(const Corpus& c, const WeightingPipeline& p,
                                              MissingFieldPolicy policy = MissingFieldPolicy::Skip) {
  WeightedRefs out;
  out.pipeline = p;
  out.w = p.base == WeightBase::Unweighted ? unweighted_matrix(c) : base_weighted_matrix(c);
  bool needs_rates = false;
  for (const auto& m : p.modifiers)
    if (m.kind == ModifierKind::PublicationRate || m.kind == ModifierKind::Tmwc)
      needs_rates = true;
  if (needs_rates) out.rates = estimate_field_rates(c);
  for (const auto& m : p.modifiers) {
    switch (m.kind) {
      case ModifierKind::PublicationRate:
        out.w = apply_publication_rate(out.w, c, out.rates, policy, &out.warnings);
        break;
      case ModifierKind::Acsm:
        out.w = apply_acsm(out.w, c);
        break;
      case ModifierKind::Tmwc:
        out.w = apply_tmwc(out.w, c, out.rates, policy, &out.warnings);
        break;
      case ModifierKind::Imwc:
        out.w = apply_imwc(out.w, m.imwc_iterations);
        break;
    }
  }
  return out;
}

}  // namespace liberata
