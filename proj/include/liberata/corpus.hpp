#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "liberata/date.hpp"
#include "liberata/errors.hpp"

namespace liberata {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

enum class Role { Author, PeerReviewer, Replicator };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::Author: return "author";
    case Role::PeerReviewer: return "peer_reviewer";
    case Role::Replicator: return "replicator";
  }
  return "author";
}

inline Role parse_role(const std::string& s) {
  if (s == "author" || s == "Author") return Role::Author;
  if (s == "peer_reviewer" || s == "PeerReviewer" || s == "reviewer")
    return Role::PeerReviewer;
  if (s == "replicator" || s == "Replicator") return Role::Replicator;
  throw Error("bad_role", "unknown role: " + s);
}

constexpr int kRoleCount = 3;
constexpr double kShareSumTolerance = 1e-9;

struct FundingEntry {
  std::string source;
  std::optional<double> fraction;       // explicit split, in [0,1]
  std::optional<double> amount;         // currency units, enables $-efficiency
  std::optional<std::string> contributor;  // ties the fund to an author (fallback split)
};

struct Manuscript {
  std::string id;
  std::optional<std::string> title;
  std::array<std::string, 4> primary_tags;  // d1..d4, d1-d3 filled by inheritance
  std::vector<std::string> extra_tags;
  std::vector<std::string> references;
  Date published_at;
  std::optional<Date> work_started_at;
  std::vector<std::string> institutions;
  std::optional<std::string> region;
  std::vector<FundingEntry> funding;
  bool retracted = false;
  std::optional<std::string> version_parent;
};

struct Contributor {
  std::string id;
  std::optional<std::string> region;
  std::vector<std::string> institutions;
};

struct ShareAssignment {
  std::string manuscript;
  std::string contributor;
  Role role = Role::Author;
  double share = 0.0;
};

struct Transaction {
  std::string manuscript;
  std::string provider;
  Role role = Role::PeerReviewer;
  double shares_paid = 0.0;
  std::optional<std::string> field;  // d-tag; filled from the manuscript when absent
  Date executed_at;
  std::optional<double> qc_duration_days;
};

struct TaxonomyNode {
  std::string id;
  int level = 0;  // 1..4
  std::optional<std::string> parent;
  std::string label;
};

struct ValidationIssue {
  std::string invariant;
  std::string entity;
  std::string message;
};

class Taxonomy {
public:
  void add(TaxonomyNode n) { nodes_.emplace(n.id, std::move(n)); }

  bool has(const std::string& id) const { return nodes_.count(id) > 0; }

  const TaxonomyNode& node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw UnknownEntity(id);
    return it->second;
  }

  int level_of(const std::string& id) const { return node(id).level; }

  std::array<std::string, 4> chain_of(const std::string& d4) const {
    std::array<std::string, 4> chain;
    const TaxonomyNode* cur = &node(d4);
    if (cur->level != 4) throw Error("bad_tag_level", d4 + " is not a level-4 tag");
    for (int lvl = 4; lvl >= 1; --lvl) {
      chain[lvl - 1] = cur->id;
      if (lvl > 1) cur = &node(cur->parent.value());
    }
    return chain;
  }

  /* Ancestor of a level-4 tag at the requested level (identity at level 4). */
  std::string ancestor_at(const std::string& d4, int level) const {
    return chain_of(d4)[level - 1];
  }

  std::vector<std::string> sorted_ids() const {
    std::vector<std::string> out;
    out.reserve(nodes_.size());
    for (const auto& [id, n] : nodes_) out.push_back(id);
    return out;
  }

  const std::map<std::string, TaxonomyNode>& nodes() const { return nodes_; }

  void validate(std::vector<ValidationIssue>& issues) const {
    for (const auto& [id, n] : nodes_) {
      if (n.level < 1 || n.level > 4) {
        issues.push_back({"taxonomy_level_range", id,
                          "tag level must be 1..4, got " + std::to_string(n.level)});
        continue;
      }
      if (n.level == 1) {
        if (n.parent)
          issues.push_back({"taxonomy_root_parent", id, "level-1 tag must not have a parent"});
      } else {
        if (!n.parent) {
          issues.push_back({"taxonomy_parent_missing", id,
                            "tag at level " + std::to_string(n.level) + " needs a parent"});
        } else if (!has(*n.parent)) {
          issues.push_back({"taxonomy_parent_unknown", id, "parent not in taxonomy: " + *n.parent});
        } else if (nodes_.at(*n.parent).level != n.level - 1) {
          issues.push_back({"taxonomy_parent_level", id,
                            "parent must sit exactly one level up"});
        }
      }
    }
  }

private:
  std::map<std::string, TaxonomyNode> nodes_;
};

struct ShareRef {
  int contributor;
  Role role;
  double share;
};

struct HoldingRef {
  int manuscript;
  Role role;
  double share;
};

struct Corpus {
  std::vector<Manuscript> manuscripts;   // ascending (published_at, id)
  std::vector<Contributor> contributors; // ascending id
  std::vector<ShareAssignment> shares;   // canonical order
  std::vector<Transaction> transactions;
  Taxonomy taxonomy;

  std::unordered_map<std::string, int> m_index;
  std::unordered_map<std::string, int> c_index;
  std::vector<std::vector<int>> refs_idx;        // per manuscript: cited indices
  std::vector<std::vector<ShareRef>> m_shares;   // per manuscript
  std::vector<std::vector<HoldingRef>> c_shares; // per contributor

  int n_manuscripts() const { return static_cast<int>(manuscripts.size()); }
  int n_contributors() const { return static_cast<int>(contributors.size()); }

  int manuscript_index(const std::string& id) const {
    auto it = m_index.find(id);
    if (it == m_index.end()) throw UnknownEntity(id);
    return it->second;
  }

  int contributor_index(const std::string& id) const {
    auto it = c_index.find(id);
    if (it == c_index.end()) throw UnknownEntity(id);
    return it->second;
  }

  const std::string& primary_tag(int m, int level) const {
    return manuscripts[m].primary_tags[level - 1];
  }

  void set_retracted(const std::string& id, bool flag) {
    manuscripts[manuscript_index(id)].retracted = flag;
  }
};

/* ---- assembly: ordering, index building, and every corpus invariant ---- */

namespace detail {
inline void report(std::vector<ValidationIssue>* issues, const std::string& invariant,
                   const std::string& entity, const std::string& message) {
  if (issues)
    issues->push_back({invariant, entity, message});
  else
    throw ValidationError(invariant, entity, message);
}
}  // namespace detail

inline Corpus assemble_corpus(std::vector<Manuscript> manuscripts,
                              std::vector<Contributor> contributors,
                              std::vector<ShareAssignment> shares,
                              std::vector<Transaction> transactions,
                              Taxonomy taxonomy,
                              std::vector<ValidationIssue>* issues = nullptr) {
  using detail::report;
  Corpus c;
  c.taxonomy = std::move(taxonomy);
  {
    std::vector<ValidationIssue> tax_issues;
    c.taxonomy.validate(tax_issues);
    for (const auto& i : tax_issues) report(issues, i.invariant, i.entity, i.message);
  }

  std::sort(manuscripts.begin(), manuscripts.end(), [](const Manuscript& a, const Manuscript& b) {
    if (a.published_at != b.published_at) return a.published_at < b.published_at;
    return a.id < b.id;
  });
  std::sort(contributors.begin(), contributors.end(),
            [](const Contributor& a, const Contributor& b) { return a.id < b.id; });

  c.manuscripts = std::move(manuscripts);
  c.contributors = std::move(contributors);

  for (int i = 0; i < c.n_manuscripts(); ++i) {
    if (!c.m_index.emplace(c.manuscripts[i].id, i).second)
      report(issues, "duplicate_manuscript_id", c.manuscripts[i].id, "manuscript id repeats");
  }
  for (int i = 0; i < c.n_contributors(); ++i) {
    if (!c.c_index.emplace(c.contributors[i].id, i).second)
      report(issues, "duplicate_contributor_id", c.contributors[i].id, "contributor id repeats");
  }

  // Primary tags resolve to a level-4 node; the d1..d3 slots are inherited
  // from the taxonomy chain (explicit values must agree with the chain).
  for (auto& m : c.manuscripts) {
    const std::string& d4 = m.primary_tags[3];
    if (d4.empty()) {
      report(issues, "primary_tag_missing", m.id, "manuscript carries no d4 tag");
      continue;
    }
    if (!c.taxonomy.has(d4) || c.taxonomy.level_of(d4) != 4) {
      report(issues, "primary_tag_unknown", m.id, "d4 tag not in taxonomy: " + d4);
      continue;
    }
    std::array<std::string, 4> chain;
    try {
      chain = c.taxonomy.chain_of(d4);
    } catch (const Error& e) {
      report(issues, "primary_tag_chain_broken", m.id, e.what());
      continue;
    }
    for (int lvl = 1; lvl <= 3; ++lvl) {
      std::string& slot = m.primary_tags[lvl - 1];
      if (slot.empty())
        slot = chain[lvl - 1];
      else if (slot != chain[lvl - 1])
        report(issues, "primary_tag_chain_mismatch", m.id,
               "declared d" + std::to_string(lvl) + " tag " + slot +
                   " conflicts with taxonomy chain entry " + chain[lvl - 1]);
    }
    for (const auto& t : m.extra_tags)
      if (!c.taxonomy.has(t))
        report(issues, "extra_tag_unknown", m.id, "extra tag not in taxonomy: " + t);
  }

  // References resolve and point strictly backwards in time.
  c.refs_idx.assign(c.n_manuscripts(), {});
  for (int i = 0; i < c.n_manuscripts(); ++i) {
    const Manuscript& m = c.manuscripts[i];
    std::unordered_set<std::string> seen;
    for (const auto& ref : m.references) {
      if (ref == m.id) {
        report(issues, "reference_self", m.id, "manuscript references itself");
        continue;
      }
      if (!seen.insert(ref).second) {
        report(issues, "reference_duplicate", m.id, "duplicate reference: " + ref);
        continue;
      }
      auto it = c.m_index.find(ref);
      if (it == c.m_index.end()) {
        report(issues, "reference_unknown", m.id, "reference to unknown manuscript: " + ref);
        continue;
      }
      if (!(c.manuscripts[it->second].published_at < m.published_at)) {
        report(issues, "reference_temporal_order", m.id,
               "reference " + ref + " is not strictly earlier");
        continue;
      }
      c.refs_idx[i].push_back(it->second);
    }
    std::sort(c.refs_idx[i].begin(), c.refs_idx[i].end());
    if (m.version_parent && !c.m_index.count(*m.version_parent))
      report(issues, "version_parent_unknown", m.id,
             "version parent not in corpus: " + *m.version_parent);
    bool any_fraction = false, any_missing = false;
    for (const auto& f : m.funding) {
      if (f.fraction) {
        any_fraction = true;
        if (*f.fraction < 0.0 || *f.fraction > 1.0)
          report(issues, "funding_fraction_range", m.id,
                 "funding fraction outside [0,1] for source " + f.source);
      } else {
        any_missing = true;
      }
      if (f.contributor && !c.c_index.count(*f.contributor))
        report(issues, "funding_contributor_unknown", m.id,
               "funding tied to unknown contributor: " + *f.contributor);
    }
    if (any_fraction && any_missing)
      report(issues, "funding_fraction_partial", m.id,
             "funding entries mix explicit and missing fractions");
  }

  // Share assignments: known ids, shares in [0,1], one role per person per
  // manuscript, per-manuscript sums equal to one.
  std::sort(shares.begin(), shares.end(), [&](const ShareAssignment& a, const ShareAssignment& b) {
    if (a.manuscript != b.manuscript) return a.manuscript < b.manuscript;
    if (a.role != b.role) return static_cast<int>(a.role) < static_cast<int>(b.role);
    return a.contributor < b.contributor;
  });
  c.m_shares.assign(c.n_manuscripts(), {});
  c.c_shares.assign(c.n_contributors(), {});
  std::unordered_map<int, std::unordered_set<int>> person_on_manuscript;
  for (const auto& s : shares) {
    auto mi = c.m_index.find(s.manuscript);
    if (mi == c.m_index.end()) {
      report(issues, "share_manuscript_unknown", s.manuscript, "share row names unknown manuscript");
      continue;
    }
    auto ci = c.c_index.find(s.contributor);
    if (ci == c.c_index.end()) {
      report(issues, "share_contributor_unknown", s.contributor, "share row names unknown contributor");
      continue;
    }
    if (!(s.share >= 0.0 && s.share <= 1.0)) {
      report(issues, "share_out_of_range", s.manuscript,
             "share for " + s.contributor + " outside [0,1]");
      continue;
    }
    if (!person_on_manuscript[mi->second].insert(ci->second).second) {
      report(issues, "share_role_duplicate", s.manuscript,
             s.contributor + " holds more than one role on the manuscript");
      continue;
    }
    c.m_shares[mi->second].push_back({ci->second, s.role, s.share});
    c.c_shares[ci->second].push_back({mi->second, s.role, s.share});
    c.shares.push_back(s);
  }
  for (int i = 0; i < c.n_manuscripts(); ++i) {
    double total = 0.0;
    for (const auto& r : c.m_shares[i]) total += r.share;
    if (std::abs(total - 1.0) > kShareSumTolerance)
      report(issues, "share_sum_unity", c.manuscripts[i].id,
             "shares sum to " + std::to_string(total) + ", expected 1");
  }

  std::sort(transactions.begin(), transactions.end(),
            [](const Transaction& a, const Transaction& b) {
              if (a.executed_at != b.executed_at) return a.executed_at < b.executed_at;
              if (a.manuscript != b.manuscript) return a.manuscript < b.manuscript;
              return a.provider < b.provider;
            });
  for (auto& t : transactions) {
    auto mi = c.m_index.find(t.manuscript);
    if (mi == c.m_index.end()) {
      report(issues, "transaction_manuscript_unknown", t.manuscript,
             "transaction names unknown manuscript");
      continue;
    }
    if (!c.c_index.count(t.provider)) {
      report(issues, "transaction_provider_unknown", t.provider,
             "transaction names unknown provider");
      continue;
    }
    if (t.role == Role::Author) {
      report(issues, "transaction_role", t.manuscript,
             "transactions cover peer review and replication only");
      continue;
    }
    if (!(t.shares_paid >= 0.0 && t.shares_paid <= 1.0)) {
      report(issues, "transaction_shares_range", t.manuscript, "shares_paid outside [0,1]");
      continue;
    }
    if (t.field) {
      if (!c.taxonomy.has(*t.field)) {
        report(issues, "transaction_field_unknown", t.manuscript,
               "transaction field not in taxonomy: " + *t.field);
        continue;
      }
    } else {
      t.field = c.manuscripts[mi->second].primary_tags[3];
    }
    c.transactions.push_back(t);
  }

  return c;
}

/* ---- JSON Lines decode/encode ---- */

namespace detail {

inline std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

inline Manuscript manuscript_from_json(const json& j) {
  Manuscript m;
  m.id = j.at("id").get<std::string>();
  m.title = opt_string(j, "title");
  if (j.contains("primary_tags")) {
    const json& p = j.at("primary_tags");
    const char* keys[4] = {"d1", "d2", "d3", "d4"};
    for (int i = 0; i < 4; ++i)
      if (p.contains(keys[i])) m.primary_tags[i] = p.at(keys[i]).get<std::string>();
  }
  if (j.contains("extra_tags")) m.extra_tags = j.at("extra_tags").get<std::vector<std::string>>();
  if (j.contains("references")) m.references = j.at("references").get<std::vector<std::string>>();
  m.published_at = Date::parse(j.at("published_at").get<std::string>());
  if (auto w = opt_string(j, "work_started_at")) m.work_started_at = Date::parse(*w);
  if (j.contains("institutions"))
    m.institutions = j.at("institutions").get<std::vector<std::string>>();
  m.region = opt_string(j, "region");
  if (j.contains("funding")) {
    for (const auto& f : j.at("funding")) {
      FundingEntry e;
      e.source = f.at("source").get<std::string>();
      if (f.contains("fraction") && !f.at("fraction").is_null())
        e.fraction = f.at("fraction").get<double>();
      if (f.contains("amount") && !f.at("amount").is_null())
        e.amount = f.at("amount").get<double>();
      e.contributor = opt_string(f, "contributor");
      m.funding.push_back(std::move(e));
    }
  }
  if (j.contains("retracted")) m.retracted = j.at("retracted").get<bool>();
  m.version_parent = opt_string(j, "version_parent");
  return m;
}

inline ojson manuscript_to_json(const Manuscript& m) {
  ojson j;
  j["id"] = m.id;
  if (m.title) j["title"] = *m.title;
  ojson tags;
  tags["d4"] = m.primary_tags[3];
  j["primary_tags"] = tags;
  j["extra_tags"] = m.extra_tags;
  j["references"] = m.references;
  j["published_at"] = m.published_at.to_string();
  if (m.work_started_at) j["work_started_at"] = m.work_started_at->to_string();
  j["institutions"] = m.institutions;
  if (m.region) j["region"] = *m.region;
  ojson funding = ojson::array();
  for (const auto& f : m.funding) {
    ojson e;
    e["source"] = f.source;
    if (f.fraction) e["fraction"] = *f.fraction;
    if (f.amount) e["amount"] = *f.amount;
    if (f.contributor) e["contributor"] = *f.contributor;
    funding.push_back(std::move(e));
  }
  j["funding"] = std::move(funding);
  j["retracted"] = m.retracted;
  if (m.version_parent) j["version_parent"] = *m.version_parent;
  return j;
}

inline Contributor contributor_from_json(const json& j) {
  Contributor c;
  c.id = j.at("id").get<std::string>();
  c.region = opt_string(j, "region");
  if (j.contains("institutions"))
    c.institutions = j.at("institutions").get<std::vector<std::string>>();
  return c;
}

inline ojson contributor_to_json(const Contributor& c) {
  ojson j;
  j["id"] = c.id;
  if (c.region) j["region"] = *c.region;
  j["institutions"] = c.institutions;
  return j;
}

inline ShareAssignment share_from_json(const json& j) {
  ShareAssignment s;
  s.manuscript = j.at("manuscript").get<std::string>();
  s.contributor = j.at("contributor").get<std::string>();
  s.role = parse_role(j.at("role").get<std::string>());
  s.share = j.at("share").get<double>();
  return s;
}

inline ojson share_to_json(const ShareAssignment& s) {
  ojson j;
  j["manuscript"] = s.manuscript;
  j["contributor"] = s.contributor;
  j["role"] = role_name(s.role);
  j["share"] = s.share;
  return j;
}

inline Transaction transaction_from_json(const json& j) {
  Transaction t;
  t.manuscript = j.at("manuscript").get<std::string>();
  t.provider = j.at("provider").get<std::string>();
  t.role = parse_role(j.at("role").get<std::string>());
  t.shares_paid = j.at("shares_paid").get<double>();
  t.field = opt_string(j, "field");
  t.executed_at = Date::parse(j.at("executed_at").get<std::string>());
  if (j.contains("qc_duration") && !j.at("qc_duration").is_null())
    t.qc_duration_days = j.at("qc_duration").get<double>();
  return t;
}

inline ojson transaction_to_json(const Transaction& t) {
  ojson j;
  j["manuscript"] = t.manuscript;
  j["provider"] = t.provider;
  j["role"] = role_name(t.role);
  j["shares_paid"] = t.shares_paid;
  if (t.field) j["field"] = *t.field;
  j["executed_at"] = t.executed_at.to_string();
  if (t.qc_duration_days) j["qc_duration"] = *t.qc_duration_days;
  return j;
}

inline TaxonomyNode taxonomy_node_from_json(const json& j) {
  TaxonomyNode n;
  n.id = j.at("id").get<std::string>();
  n.level = j.at("level").get<int>();
  n.parent = opt_string(j, "parent");
  if (j.contains("label")) n.label = j.at("label").get<std::string>();
  return n;
}

inline ojson taxonomy_node_to_json(const TaxonomyNode& n) {
  ojson j;
  j["id"] = n.id;
  j["level"] = n.level;
  if (n.parent) j["parent"] = *n.parent;
  if (!n.label.empty()) j["label"] = n.label;
  return j;
}

template <typename Fn>
void read_jsonl(const std::string& path, Fn&& per_record,
                std::vector<ValidationIssue>* issues) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      per_record(json::parse(line));
    } catch (const std::exception& e) {
      if (issues)
        issues->push_back({"record_parse", path + ":" + std::to_string(lineno), e.what()});
      else
        throw ParseError(path, lineno, e.what());
    }
  }
}

}  // namespace detail

struct CorpusManifest {
  std::string manuscripts = "manuscripts.jsonl";
  std::string contributors = "contributors.jsonl";
  std::string shares = "shares.jsonl";
  std::string transactions = "transactions.jsonl";
  std::string taxonomy = "taxonomy.jsonl";
};

inline Corpus load_corpus(const std::string& dir,
                          std::vector<ValidationIssue>* issues = nullptr) {
  std::string manifest_path = dir + "/corpus.json";
  std::ifstream in(manifest_path);
  if (!in) throw ParseError(manifest_path, 0, "cannot open corpus manifest");
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const std::exception& e) {
    throw ParseError(manifest_path, 0, e.what());
  }
  if (!manifest.contains("format_version") || manifest.at("format_version").get<int>() != 1)
    detail::report(issues, "manifest_format_version", manifest_path,
                   "manifest format_version must be 1");

  CorpusManifest files;
  auto file_of = [&](const char* key, const std::string& fallback) {
    return manifest.contains(key) ? manifest.at(key).get<std::string>() : fallback;
  };
  files.manuscripts = file_of("manuscripts", files.manuscripts);
  files.contributors = file_of("contributors", files.contributors);
  files.shares = file_of("shares", files.shares);
  files.transactions = file_of("transactions", files.transactions);
  files.taxonomy = file_of("taxonomy", files.taxonomy);

  std::vector<Manuscript> manuscripts;
  std::vector<Contributor> contributors;
  std::vector<ShareAssignment> shares;
  std::vector<Transaction> transactions;
  Taxonomy taxonomy;

  detail::read_jsonl(dir + "/" + files.taxonomy,
                     [&](const json& j) { taxonomy.add(detail::taxonomy_node_from_json(j)); },
                     issues);
  detail::read_jsonl(dir + "/" + files.manuscripts,
                     [&](const json& j) { manuscripts.push_back(detail::manuscript_from_json(j)); },
                     issues);
  detail::read_jsonl(dir + "/" + files.contributors,
                     [&](const json& j) { contributors.push_back(detail::contributor_from_json(j)); },
                     issues);
  detail::read_jsonl(dir + "/" + files.shares,
                     [&](const json& j) { shares.push_back(detail::share_from_json(j)); },
                     issues);
  detail::read_jsonl(dir + "/" + files.transactions,
                     [&](const json& j) { transactions.push_back(detail::transaction_from_json(j)); },
                     issues);

  return assemble_corpus(std::move(manuscripts), std::move(contributors), std::move(shares),
                         std::move(transactions), std::move(taxonomy), issues);
}

inline std::vector<ValidationIssue> validate_corpus_dir(const std::string& dir) {
  std::vector<ValidationIssue> issues;
  load_corpus(dir, &issues);
  return issues;
}

inline void save_corpus(const Corpus& c, const std::string& dir) {
  auto write_lines = [&](const std::string& name, auto&& each) {
    std::ofstream out(dir + "/" + name);
    if (!out) throw Error("io_error", "cannot write " + dir + "/" + name);
    each(out);
  };
  write_lines("taxonomy.jsonl", [&](std::ofstream& out) {
    for (const auto& [id, n] : c.taxonomy.nodes())
      out << detail::taxonomy_node_to_json(n).dump() << "\n";
  });
  write_lines("manuscripts.jsonl", [&](std::ofstream& out) {
    for (const auto& m : c.manuscripts) out << detail::manuscript_to_json(m).dump() << "\n";
  });
  write_lines("contributors.jsonl", [&](std::ofstream& out) {
    for (const auto& p : c.contributors) out << detail::contributor_to_json(p).dump() << "\n";
  });
  write_lines("shares.jsonl", [&](std::ofstream& out) {
    for (const auto& s : c.shares) out << detail::share_to_json(s).dump() << "\n";
  });
  write_lines("transactions.jsonl", [&](std::ofstream& out) {
    for (const auto& t : c.transactions) out << detail::transaction_to_json(t).dump() << "\n";
  });
  ojson manifest;
  manifest["format_version"] = 1;
  manifest["manuscripts"] = "manuscripts.jsonl";
  manifest["contributors"] = "contributors.jsonl";
  manifest["shares"] = "shares.jsonl";
  manifest["transactions"] = "transactions.jsonl";
  manifest["taxonomy"] = "taxonomy.jsonl";
  std::ofstream out(dir + "/corpus.json");
  if (!out) throw Error("io_error", "cannot write " + dir + "/corpus.json");
  out << manifest.dump(2) << "\n";
}

/* Sub-corpus of everything published on or before the cutoff; contributors
   and taxonomy are kept whole so entity indexing stays meaningful. */
inline Corpus restrict_corpus(const Corpus& c, Date cutoff) {
  std::vector<Manuscript> manuscripts;
  std::unordered_set<std::string> kept;
  for (const auto& m : c.manuscripts)
    if (m.published_at <= cutoff) {
      manuscripts.push_back(m);
      kept.insert(m.id);
    }
  std::vector<ShareAssignment> shares;
  for (const auto& s : c.shares)
    if (kept.count(s.manuscript)) shares.push_back(s);
  std::vector<Transaction> transactions;
  for (const auto& t : c.transactions)
    if (kept.count(t.manuscript) && t.executed_at <= cutoff) transactions.push_back(t);
  return assemble_corpus(std::move(manuscripts), c.contributors, std::move(shares),
                         std::move(transactions), c.taxonomy);
}

/* ---- side-car configuration files ---- */

struct RegionInfo {
  double population = 0.0;
  double gdp = 0.0;
  double ppp = 0.0;
};

inline std::map<std::string, RegionInfo> load_regions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open regions file");
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw ParseError(path, 0, e.what());
  }
  std::map<std::string, RegionInfo> out;
  for (const auto& r : j) {
    RegionInfo info;
    info.population = r.at("population").get<double>();
    info.gdp = r.at("gdp").get<double>();
    info.ppp = r.at("ppp").get<double>();
    out[r.at("region_id").get<std::string>()] = info;
  }
  return out;
}

struct Collection {
  std::string name;
  std::vector<std::string> tags;
  long subscribers = 0;
};

inline std::vector<Collection> load_collections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open collections file");
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw ParseError(path, 0, e.what());
  }
  std::vector<Collection> out;
  for (const auto& c : j) {
    Collection col;
    col.name = c.at("name").get<std::string>();
    col.tags = c.at("tags").get<std::vector<std::string>>();
    col.subscribers = c.at("subscribers").get<long>();
    out.push_back(std::move(col));
  }
  return out;
}

/* A manuscript belongs to a collection when its tag set (primary chain plus
   extra tags) contains every collection tag. */
inline bool in_collection(const Corpus& c, int m, const std::vector<std::string>& tags) {
  const Manuscript& ms = c.manuscripts[m];
  for (const auto& t : tags) {
    bool found = false;
    for (const auto& p : ms.primary_tags)
      if (p == t) { found = true; break; }
    if (!found)
      for (const auto& e : ms.extra_tags)
        if (e == t) { found = true; break; }
    if (!found) return false;
  }
  return true;
}

}  // namespace liberata
