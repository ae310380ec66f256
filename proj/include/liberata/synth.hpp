#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "liberata/corpus.hpp"
#include "liberata/errors.hpp"
#include "liberata/market.hpp"
#include "liberata/util.hpp"

namespace liberata {

enum class ShareProfile { Descending, Uniform, SupervisorHeavy };
enum class CitationModel { PreferentialAttachment, UniformRandom };

struct SynthParams {
  int manuscripts = 100;
  int contributors = 50;
  int fields = 4;  // number of finest-level tags
  int years = 5;
  ShareProfile share_profile = ShareProfile::Descending;
  CitationModel citation_model = CitationModel::PreferentialAttachment;
  double qc_rate = 0.3;  // chance a manuscript shops for each quality-control service
  std::uint64_t seed = 1;
};

inline ShareProfile parse_share_profile(const std::string& s) {
  if (s == "descending") return ShareProfile::Descending;
  if (s == "uniform") return ShareProfile::Uniform;
  if (s == "supervisor-heavy") return ShareProfile::SupervisorHeavy;
  throw InvalidParams("unknown share profile: " + s);
}

inline CitationModel parse_citation_model(const std::string& s) {
  if (s == "preferential") return CitationModel::PreferentialAttachment;
  if (s == "uniform") return CitationModel::UniformRandom;
  throw InvalidParams("unknown citation model: " + s);
}

namespace synth_detail {

inline std::string padded(const char* prefix, int i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, i);
  return buf;
}

/* Round shares to 9 decimals and absorb the residual into the largest stake
   so the total is exactly 1. */
inline void quantize_shares(std::vector<double>& shares) {
  double sum = 0.0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    shares[i] = std::round(shares[i] * 1e9) / 1e9;
    sum += shares[i];
    if (shares[i] > shares[largest]) largest = i;
  }
  shares[largest] += 1.0 - sum;
}

}  // namespace synth_detail

struct SynthOutput {
  Corpus corpus;
  std::map<std::string, RegionInfo> regions;
  std::vector<Collection> collections;
};

inline SynthOutput generate_corpus(const SynthParams& params) {
  if (params.manuscripts < 1) throw InvalidParams("need at least one manuscript");
  if (params.contributors < 1) throw InvalidParams("need at least one contributor");
  if (params.fields < 1) throw InvalidParams("need at least one field");
  if (params.years < 1) throw InvalidParams("need at least one year");
  if (params.qc_rate < 0.0 || params.qc_rate > 1.0)
    throw InvalidParams("qc rate must lie in [0,1]");

  Rng rng(params.seed);

  /* Taxonomy: a strict four-level tree narrowing toward the root. */
  std::vector<TaxonomyNode> nodes;
  int n4 = params.fields;
  int n3 = std::max(1, (n4 + 1) / 2);
  int n2 = std::max(1, (n3 + 1) / 2);
  int n1 = std::max(1, (n2 + 1) / 2);
  auto tag_id = [](int level, int i) {
    return synth_detail::padded(("d" + std::to_string(level) + "_").c_str(), i + 1, 3);
  };
  for (int i = 0; i < n1; ++i)
    nodes.push_back({tag_id(1, i), 1, std::nullopt, "Domain " + std::to_string(i + 1)});
  for (int i = 0; i < n2; ++i)
    nodes.push_back({tag_id(2, i), 2, tag_id(1, i % n1), "Department " + std::to_string(i + 1)});
  for (int i = 0; i < n3; ++i)
    nodes.push_back({tag_id(3, i), 3, tag_id(2, i % n2), "Discipline " + std::to_string(i + 1)});
  for (int i = 0; i < n4; ++i)
    nodes.push_back({tag_id(4, i), 4, tag_id(3, i % n3), "Direction " + std::to_string(i + 1)});

  /* Regions with invented economy figures. */
  const char* region_names[3] = {"alpha", "beta", "gamma"};
  std::map<std::string, RegionInfo> regions;
  for (int i = 0; i < 3; ++i) {
    RegionInfo r;
    r.population = 1e6 * static_cast<double>(1 + rng.below(50));
    r.gdp = 1e9 * static_cast<double>(1 + rng.below(20));
    r.ppp = r.gdp * (0.8 + 0.4 * rng.u01());
    regions[region_names[i]] = r;
  }

  /* Contributors. */
  int n_inst = std::max(2, params.contributors / 10);
  std::vector<Contributor> people;
  for (int i = 0; i < params.contributors; ++i) {
    Contributor p;
    p.id = synth_detail::padded("c", i + 1, 5);
    p.region = region_names[rng.below(3)];
    p.institutions.push_back(
        "inst-" + std::to_string(1 + rng.below(static_cast<std::uint64_t>(n_inst))));
    people.push_back(p);
  }

  std::vector<Manuscript> manuscripts;
  std::vector<ShareAssignment> shares;
  std::vector<Transaction> transactions;
  std::vector<int> inbound(params.manuscripts, 0);
  std::vector<Date> published(params.manuscripts, Date(0));
  Date start = Date::parse("2015-01-01");
  double span_days = params.years * Date::days_per_year;

  std::map<std::string, std::string> parent_of;
  for (const auto& n : nodes)
    if (n.parent) parent_of[n.id] = *n.parent;

  for (int i = 0; i < params.manuscripts; ++i) {
    Manuscript m;
    m.id = synth_detail::padded("m", i + 1, 5);
    m.title = "Synthetic study " + std::to_string(i + 1);
    published[i] = start.plus_days(
        static_cast<long>(std::floor(span_days * static_cast<double>(i) /
                                     static_cast<double>(params.manuscripts))));
    m.published_at = published[i];
    if (rng.u01() < 0.8)
      m.work_started_at = m.published_at.plus_days(-static_cast<long>(180 + rng.below(540)));

    std::string d4 = tag_id(4, static_cast<int>(rng.below(static_cast<std::uint64_t>(n4))));
    std::string d3 = parent_of[d4];
    std::string d2 = parent_of[d3];
    std::string d1 = parent_of[d2];
    m.primary_tags = {d1, d2, d3, d4};
    if (rng.u01() < 0.2) {
      std::string extra = tag_id(4, static_cast<int>(rng.below(static_cast<std::uint64_t>(n4))));
      if (extra != d4) m.extra_tags.push_back(extra);
    }

    /* References: sample distinct earlier manuscripts, preferentially by
       inbound count + 1 so citation mass accumulates on early successes. */
    std::vector<int> eligible;
    for (int j = 0; j < i; ++j)
      if (published[j] < published[i]) eligible.push_back(j);
    int want = static_cast<int>(rng.below(6));
    want = std::min<int>(want, static_cast<int>(eligible.size()));
    std::set<int> picked;
    for (int k = 0; k < want; ++k) {
      double total = 0.0;
      for (int j : eligible)
        if (!picked.count(j))
          total += params.citation_model == CitationModel::PreferentialAttachment
                       ? static_cast<double>(inbound[j] + 1)
                       : 1.0;
      if (total <= 0.0) break;
      double r = rng.u01() * total;
      int chosen = -1;
      for (int j : eligible) {
        if (picked.count(j)) continue;
        r -= params.citation_model == CitationModel::PreferentialAttachment
                 ? static_cast<double>(inbound[j] + 1)
                 : 1.0;
        if (r <= 0.0) {
          chosen = j;
          break;
        }
      }
      if (chosen < 0) break;
      picked.insert(chosen);
      ++inbound[chosen];
    }
    for (int j : picked) m.references.push_back(synth_detail::padded("m", j + 1, 5));
    std::sort(m.references.begin(), m.references.end());

    /* Authors and share split. */
    int n_authors = std::min<int>(1 + static_cast<int>(rng.below(4)), params.contributors);
    std::set<int> author_set;
    while (static_cast<int>(author_set.size()) < n_authors)
      author_set.insert(static_cast<int>(rng.below(static_cast<std::uint64_t>(params.contributors))));
    std::vector<int> authors(author_set.begin(), author_set.end());
    std::vector<double> split(authors.size(), 0.0);
    switch (params.share_profile) {
      case ShareProfile::Uniform:
        for (auto& s : split) s = 1.0 / static_cast<double>(split.size());
        break;
      case ShareProfile::Descending: {
        double total = 0.0;
        for (std::size_t a = 0; a < split.size(); ++a) {
          split[a] = rng.gamma(2.0 / static_cast<double>(a + 1)) + 1e-6;
          total += split[a];
        }
        for (auto& s : split) s /= total;
        break;
      }
      case ShareProfile::SupervisorHeavy: {
        if (split.size() == 1) {
          split[0] = 1.0;
        } else {
          split[0] = 0.5 + 0.2 * rng.u01();
          double total = 0.0;
          for (std::size_t a = 1; a < split.size(); ++a) {
            split[a] = rng.gamma(1.0) + 1e-6;
            total += split[a];
          }
          for (std::size_t a = 1; a < split.size(); ++a)
            split[a] = (1.0 - split[0]) * split[a] / total;
        }
        break;
      }
    }

    std::vector<std::pair<int, Role>> holders;
    for (int a : authors) holders.emplace_back(a, Role::Author);

    /* Quality control: a provider joins only when both marketplace predicates
       hold, mirroring how a real transaction would clear. */
    double believed_w = 0.5 + 2.5 * rng.u01();
    double author_total = 1.0;
    auto try_service = [&](Role role, double low, double high) {
      if (params.contributors <= static_cast<int>(holders.size())) return;
      if (rng.u01() >= params.qc_rate) return;
      double price = low + (high - low) * rng.u01();
      double boost = 1.1 + 0.4 * rng.u01();
      double provider_days = 5.0 + static_cast<double>(rng.below(40));
      double authoring_years = 0.5 + rng.u01();
      AuthorSide a{believed_w * boost, believed_w, author_total * (1.0 - price), author_total};
      ProviderSide p{provider_days / Date::days_per_year, authoring_years, price};
      if (!author_feasible(a) || !provider_feasible(p)) return;
      int provider = -1;
      for (int tries = 0; tries < 64 && provider < 0; ++tries) {
        int cand = static_cast<int>(rng.below(static_cast<std::uint64_t>(params.contributors)));
        bool taken = false;
        for (const auto& [held, held_role] : holders)
          if (held == cand) taken = true;
        if (!taken) provider = cand;
      }
      if (provider < 0) return;
      for (auto& s : split) s *= 1.0 - price;
      author_total *= 1.0 - price;
      split.push_back(price);
      holders.emplace_back(provider, role);
      believed_w *= boost;

      Transaction t;
      t.manuscript = m.id;
      t.provider = people[provider].id;
      t.role = role;
      t.shares_paid = std::round(price * 1e9) / 1e9;
      t.executed_at = m.published_at.plus_days(-static_cast<long>(1 + rng.below(90)));
      if (rng.u01() < 0.9) t.qc_duration_days = provider_days;
      transactions.push_back(t);
    };
    try_service(Role::PeerReviewer, 0.02, 0.15);
    try_service(Role::Replicator, 0.05, 0.25);

    synth_detail::quantize_shares(split);
    for (std::size_t h = 0; h < holders.size(); ++h) {
      ShareAssignment s;
      s.manuscript = m.id;
      s.contributor = people[holders[h].first].id;
      s.role = holders[h].second;
      s.share = split[h];
      shares.push_back(s);
    }

    /* Funding: a third with explicit split fractions, a third with amounts
       tied to an author, a third unfunded. */
    if (i % 3 == 0) {
      FundingEntry f1{"fund-" + std::to_string(1 + rng.below(8)), 0.6,
                      1000.0 * static_cast<double>(1 + rng.below(100)), std::nullopt};
      FundingEntry f2{"fund-" + std::to_string(1 + rng.below(8)), 0.4, std::nullopt, std::nullopt};
      m.funding = {f1, f2};
    } else if (i % 3 == 1) {
      FundingEntry f{"fund-" + std::to_string(1 + rng.below(8)), std::nullopt,
                     1000.0 * static_cast<double>(1 + rng.below(100)),
                     people[authors[0]].id};
      m.funding = {f};
    }

    manuscripts.push_back(m);
  }

  Taxonomy taxonomy;
  for (const auto& n : nodes) taxonomy.add(n);

  SynthOutput out;
  out.corpus = assemble_corpus(std::move(manuscripts), std::move(people), std::move(shares),
                               std::move(transactions), std::move(taxonomy));
  out.regions = regions;

  Collection col1;
  col1.name = "direction-one";
  col1.tags = {tag_id(4, 0)};
  col1.subscribers = static_cast<long>(10 + rng.below(90));
  Collection col2;
  col2.name = "whole-domain";
  col2.tags = {tag_id(1, 0)};
  col2.subscribers = static_cast<long>(10 + rng.below(90));
  out.collections = {col1, col2};
  return out;
}

inline void write_regions_json(const std::map<std::string, RegionInfo>& regions,
                               const std::string& path) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& [id, r] : regions) {
    nlohmann::ordered_json j;
    j["region_id"] = id;
    j["population"] = r.population;
    j["gdp"] = r.gdp;
    j["ppp"] = r.ppp;
    arr.push_back(j);
  }
  std::ofstream out(path);
  if (!out) throw Error("io_error", "cannot write " + path);
  out << arr.dump(2) << "\n";
}

inline void write_collections_json(const std::vector<Collection>& collections,
                                   const std::string& path) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : collections) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["tags"] = c.tags;
    j["subscribers"] = c.subscribers;
    arr.push_back(j);
  }
  std::ofstream out(path);
  if (!out) throw Error("io_error", "cannot write " + path);
  out << arr.dump(2) << "\n";
}

/* Generate and persist a full corpus directory. */
inline SynthOutput generate(const SynthParams& params, const std::string& out_dir) {
  SynthOutput out = generate_corpus(params);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("io_error", "cannot create " + out_dir + ": " + ec.message());
  save_corpus(out.corpus, out_dir);
  write_regions_json(out.regions, out_dir + "/regions.json");
  write_collections_json(out.collections, out_dir + "/collections.json");
  return out;
}

}  // namespace liberata
