#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "liberata/corpus.hpp"
#include "liberata/errors.hpp"

#include <Eigen/Core>

namespace liberata {

/* Sum of squared author shares, as recorded (reviewer and replicator shares
   are not renormalized away). */
inline double manuscript_author_hhi(const Corpus& c, int m) {
  double hhi = 0.0;
  bool any = false;
  for (const auto& s : c.m_shares[m])
    if (s.role == Role::Author) {
      hhi += s.share * s.share;
      any = true;
    }
  if (!any) throw ZeroAuthors(c.manuscripts[m].id);
  return hhi;
}

/* Mean manuscript author HHI over an arbitrary manuscript set. */
inline double author_hhi(const Corpus& c, const std::vector<int>& manuscripts) {
  if (manuscripts.empty()) throw EmptyDistribution();
  double total = 0.0;
  for (int m : manuscripts) total += manuscript_author_hhi(c, m);
  return total / static_cast<double>(manuscripts.size());
}

/* Manuscripts whose primary chain passes through the tag. */
inline std::vector<int> field_members(const Corpus& c, const std::string& d_tag) {
  int level = c.taxonomy.level_of(d_tag);
  std::vector<int> out;
  for (int m = 0; m < c.n_manuscripts(); ++m)
    if (c.primary_tag(m, level) == d_tag) out.push_back(m);
  return out;
}

inline double field_author_hhi(const Corpus& c, const std::string& d_tag) {
  return author_hhi(c, field_members(c, d_tag));
}

inline double hhid(double hhi_a, double hhi_b) { return std::abs(hhi_a - hhi_b); }

/* ---- population pyramids ---- */

struct Pyramid {
  std::vector<double> edges;   // bins + 1 edges over log10(AC + epsilon)
  std::vector<long> counts;    // per bin, contributors with positive AC
  long zero_count = 0;         // contributors with AC <= 0
};

inline constexpr double kPyramidEpsilon = 1e-9;

inline Pyramid population_pyramid(const std::vector<double>& contributor_ac, int bins) {
  if (bins < 1) throw InvalidParams("histogram needs at least one bin");
  Pyramid p;
  std::vector<double> logs;
  for (double ac : contributor_ac) {
    if (ac > 0.0)
      logs.push_back(std::log10(ac + kPyramidEpsilon));
    else
      ++p.zero_count;
  }
  p.counts.assign(bins, 0);
  if (logs.empty()) {
    p.edges.assign(bins + 1, 0.0);
    return p;
  }
  double lo = *std::min_element(logs.begin(), logs.end());
  double hi = *std::max_element(logs.begin(), logs.end());
  if (hi <= lo) hi = lo + 1.0;  // single value: give it a unit-wide bin
  for (int i = 0; i <= bins; ++i)
    p.edges.push_back(lo + (hi - lo) * static_cast<double>(i) / bins);
  for (double v : logs) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    if (b >= bins) b = bins - 1;  // top edge is inclusive
    ++p.counts[b];
  }
  return p;
}

inline Pyramid population_pyramid(const Corpus& c, const Eigen::VectorXd& contributor_capital,
                                  int bins) {
  std::vector<double> ac(contributor_capital.data(),
                         contributor_capital.data() + contributor_capital.size());
  return population_pyramid(ac, bins);
}

}  // namespace liberata
