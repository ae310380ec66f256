#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "liberata/capital.hpp"
#include "liberata/citation_weighting.hpp"
#include "liberata/corpus.hpp"
#include "liberata/distribution.hpp"
#include "liberata/errors.hpp"
#include "liberata/graph_spectral.hpp"
#include "liberata/health.hpp"
#include "liberata/market.hpp"
#include "liberata/matrix_market.hpp"
#include "liberata/portfolio.hpp"
#include "liberata/references_graph.hpp"
#include "liberata/shares_graph.hpp"
#include "liberata/synth.hpp"
#include "liberata/taxonomy_relevancy.hpp"

namespace {

using namespace liberata;
using ojson = nlohmann::ordered_json;

/* ---- output plumbing ---- */

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<ojson>> rows;

  void add(std::vector<ojson> row) { rows.push_back(std::move(row)); }
};

std::string csv_cell(const ojson& v) {
  std::string s;
  if (v.is_null())
    return "";
  else if (v.is_string())
    s = v.get<std::string>();
  else if (v.is_number_float())
    s = format_number(v.get<double>());
  else
    s = v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    quoted += '"';
    return quoted;
  }
  return s;
}

void emit_table(const Table& t, std::ostream& out, bool as_json) {
  if (as_json) {
    for (const auto& row : t.rows) {
      ojson obj;
      for (std::size_t i = 0; i < t.header.size() && i < row.size(); ++i)
        obj[t.header[i]] = row[i];
      out << obj.dump() << "\n";
    }
    return;
  }
  for (std::size_t i = 0; i < t.header.size(); ++i)
    out << (i ? "," : "") << csv_cell(ojson(t.header[i]));
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << "\n";
  }
}

/* Either --out or stdout. */
struct Sink {
  std::unique_ptr<std::ofstream> file;
  std::ostream* os = &std::cout;

  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file = std::make_unique<std::ofstream>(path);
    if (!*file) throw UsageError("cannot open output path: " + path);
    os = file.get();
  }
  std::ostream& stream() { return *os; }
};

ojson opt_cell(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

/* ---- shared state ---- */

struct GlobalOpts {
  std::string corpus_dir = ".";
  std::string weighting = "base=inv_ref";
  std::string out_path;
  bool as_json = false;
  std::uint64_t seed = 1;
};

Corpus load(const GlobalOpts& g) { return load_corpus(g.corpus_dir); }

SpMat weighted_matrix(const GlobalOpts& g, const Corpus& c) {
  return compute_references_matrix(c, parse_pipeline(g.weighting)).w;
}

Role parse_role_flag(const std::string& s) {
  if (s == "review" || s == "peer_reviewer" || s == "reviewer") return Role::PeerReviewer;
  if (s == "replication" || s == "replicator") return Role::Replicator;
  if (s == "author") return Role::Author;
  throw UsageError("unknown role: " + s);
}

std::optional<Date> parse_date_flag(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return Date::parse(s);
}

/* ---- validate ---- */

int cmd_validate(const GlobalOpts& g) {
  std::vector<ValidationIssue> issues = validate_corpus_dir(g.corpus_dir);
  ojson report;
  report["valid"] = issues.empty();
  report["issues"] = ojson::array();
  for (const auto& i : issues) {
    ojson o;
    o["invariant"] = i.invariant;
    o["entity"] = i.entity;
    o["message"] = i.message;
    report["issues"].push_back(o);
  }
  Sink sink(g.out_path);
  sink.stream() << report.dump(2) << "\n";
  return issues.empty() ? 0 : 2;
}

/* ---- shares ---- */

int cmd_shares(const GlobalOpts& g, const std::string& action, const std::string& format,
               bool full) {
  Corpus c = load(g);
  CondensedShares condensed = build_condensed(c);
  Sink sink(g.out_path);
  if (action == "export") {
    if (format != "mtx") throw UsageError("unsupported export format: " + format);
    if (full)
      write_matrix_market(sink.stream(), expand_full(condensed).mat);
    else
      write_matrix_market(sink.stream(), condensed.mat);
    return 0;
  }
  if (action != "stats") throw UsageError("unknown shares action: " + action);
  std::vector<double> values;
  for (int k = 0; k < condensed.mat.outerSize(); ++k)
    for (SpMat::InnerIterator it(condensed.mat, k); it; ++it) values.push_back(it.value());
  DistributionStats s = distribution_stats(values);
  BipartiteShape shape = bipartite_shape_of(condensed);
  Table t;
  t.header = {"metric", "value"};
  t.add({"manuscripts", ojson(condensed.n_m)});
  t.add({"contributors", ojson(condensed.n_c)});
  t.add({"stakes", ojson(static_cast<long>(s.count))});
  t.add({"active_columns", ojson(shape.n_right)});
  t.add({"uniform_share", ojson(shape.uniform_share)});
  t.add({"mean", ojson(s.mean)});
  t.add({"variance", ojson(s.variance)});
  t.add({"skewness", ojson(s.skewness)});
  t.add({"median", ojson(s.median)});
  t.add({"min", ojson(s.min)});
  t.add({"max", ojson(s.max)});
  std::string modes;
  for (std::size_t i = 0; i < s.modes.size(); ++i)
    modes += (i ? ";" : "") + format_number(s.modes[i]);
  t.add({"modes", ojson(modes)});
  emit_table(t, sink.stream(), g.as_json);
  return 0;
}

/* ---- refs ---- */

int cmd_refs(const GlobalOpts& g, const std::string& op, bool weighted_paths) {
  Corpus c = load(g);
  SpMat w = weighted_matrix(g, c);
  Sink sink(g.out_path);
  if (op == "capital") {
    Eigen::VectorXd ac = capital_vector(w);
    Table t;
    t.header = {"manuscript", "capital"};
    for (int m = 0; m < c.n_manuscripts(); ++m) t.add({ojson(c.manuscripts[m].id), ojson(ac[m])});
    emit_table(t, sink.stream(), g.as_json);
    return 0;
  }
  if (op == "centrality") {
    Eigen::VectorXd b = betweenness(w, weighted_paths);
    Table t;
    t.header = {"manuscript", "betweenness"};
    for (int m = 0; m < c.n_manuscripts(); ++m) t.add({ojson(c.manuscripts[m].id), ojson(b[m])});
    emit_table(t, sink.stream(), g.as_json);
    return 0;
  }
  if (op == "gram") {
    write_matrix_market(sink.stream(), gram(w));
    return 0;
  }
  if (op == "cocite") {
    write_matrix_market(sink.stream(), transpose_gram(w));
    return 0;
  }
  if (op.rfind("power:", 0) == 0) {
    int n = 0;
    try {
      n = std::stoi(op.substr(6));
    } catch (const std::exception&) {
      throw UsageError("bad power op: " + op);
    }
    write_matrix_market(sink.stream(), matrix_power(w, n));
    return 0;
  }
  throw UsageError("unknown refs op: " + op);
}

/* ---- capital ---- */

int cmd_capital(const GlobalOpts& g, const std::string& who, const std::string& by) {
  Corpus c = load(g);
  Eigen::VectorXd ac = capital_vector(weighted_matrix(g, c));
  std::map<std::pair<std::string, std::string>, double> acc;
  auto bucket_of = [&](int m, Role role) -> std::string {
    if (by == "field") return c.primary_tag(m, 4);
    if (by == "role") return role_name(role);
    if (by == "year") return std::to_string(c.manuscripts[m].published_at.year());
    if (by.empty()) return "total";
    throw UsageError("unknown split: " + by);
  };
  for (int p = 0; p < c.n_contributors(); ++p) {
    const Contributor& person = c.contributors[p];
    for (const auto& h : c.c_shares[p]) {
      double v = h.share * ac[h.manuscript];
      std::string bucket = bucket_of(h.manuscript, h.role);
      if (who == "contributor") {
        acc[{person.id, bucket}] += v;
      } else if (who == "institution") {
        for (const auto& inst : person.institutions) acc[{inst, bucket}] += v;
      } else if (who == "region") {
        acc[{person.region.value_or("(none)"), bucket}] += v;
      } else if (who == "tag") {
        acc[{c.primary_tag(h.manuscript, 4), bucket}] += v;
      } else {
        throw UsageError("unknown grouping: " + who);
      }
    }
  }
  Table t;
  t.header = {who, by.empty() ? "bucket" : by, "capital"};
  for (const auto& [key, v] : acc) t.add({ojson(key.first), ojson(key.second), ojson(v)});
  Sink sink(g.out_path);
  emit_table(t, sink.stream(), g.as_json);
  return 0;
}

/* ---- cluster ---- */

int cmd_cluster(const GlobalOpts& g, const std::string& graph, int k, const std::string& end) {
  Corpus c = load(g);
  SpectrumEnd se = end == "large" ? SpectrumEnd::Largest : SpectrumEnd::Smallest;
  if (end != "small" && end != "large") throw UsageError("end must be small or large");
  Table t;
  t.header = {"node", "cluster"};
  if (graph == "refs") {
    SpMat sym = symmetrize(weighted_matrix(g, c));
    std::vector<int> labels = cluster(sym, k, se);
    for (int m = 0; m < c.n_manuscripts(); ++m)
      t.add({ojson(c.manuscripts[m].id), ojson(labels[m])});
  } else if (graph == "shares" || graph == "capital") {
    CondensedShares condensed = build_condensed(c);
    if (graph == "capital")
      condensed = capital_graph(condensed, capital_vector(weighted_matrix(g, c)));
    FullShares f = expand_full(condensed);
    std::vector<int> labels = cluster(f.mat, k, se);
    for (long n = 0; n < f.side(); ++n) t.add({ojson(node_label(c, f, n)), ojson(labels[n])});
  } else {
    throw UsageError("unknown graph: " + graph);
  }
  Sink sink(g.out_path);
  emit_table(t, sink.stream(), g.as_json);
  return 0;
}

/* ---- similar ---- */

int cmd_similar(const GlobalOpts& g, const std::string& to, const std::string& by, int top) {
  Corpus c = load(g);
  int target = c.manuscript_index(to);
  std::vector<std::pair<double, std::string>> scored;
  if (by == "tags") {
    TagSpace space = tag_space(c.taxonomy);
    Eigen::VectorXd mine = taxonomy_vector(c, space, target);
    for (int m = 0; m < c.n_manuscripts(); ++m) {
      if (m == target) continue;
      scored.emplace_back(cosine_similarity(mine, taxonomy_vector(c, space, m)),
                          c.manuscripts[m].id);
    }
  } else if (by == "cocite") {
    SpMat w = weighted_matrix(g, c);
    for (int m = 0; m < c.n_manuscripts(); ++m) {
      if (m == target) continue;
      scored.emplace_back(cocitation_relevance(w, target, m), c.manuscripts[m].id);
    }
  } else {
    throw UsageError("unknown similarity basis: " + by);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (top > 0 && static_cast<std::size_t>(top) < scored.size()) scored.resize(top);
  Table t;
  t.header = {"rank", "manuscript", "score"};
  for (std::size_t i = 0; i < scored.size(); ++i)
    t.add({ojson(static_cast<long>(i + 1)), ojson(scored[i].second), ojson(scored[i].first)});
  Sink sink(g.out_path);
  emit_table(t, sink.stream(), g.as_json);
  return 0;
}

/* ---- portfolio ---- */

struct PortfolioFlags {
  std::vector<std::string> contributors, institutions, regions, roles;
  std::string tag, from, to;
  std::vector<std::string> metrics{"capital"};
  std::string mix_by = "field";
  int level = 4;
  std::string weights_basis = "capital";
  std::string weights_by = "manuscript";
  std::string reliability_contributor, reliability_role = "author";
  std::string iqc_manuscript, iqc_event;
  double iqc_window = 1.0;
  std::string collection;
  std::string hist;
  int bins = 10;
};

Selector make_selector(const Corpus& c, const PortfolioFlags& f) {
  Selector sel;
  if (!f.contributors.empty())
    sel.contributors = std::set<std::string>(f.contributors.begin(), f.contributors.end());
  if (!f.institutions.empty())
    sel.institutions = std::set<std::string>(f.institutions.begin(), f.institutions.end());
  if (!f.regions.empty()) sel.regions = std::set<std::string>(f.regions.begin(), f.regions.end());
  if (!f.roles.empty()) {
    std::set<Role> roles;
    for (const auto& r : f.roles) roles.insert(parse_role_flag(r));
    sel.roles = roles;
  }
  if (!f.tag.empty()) sel.tag = f.tag;
  if (!f.from.empty()) sel.from = Date::parse(f.from);
  if (!f.to.empty()) sel.to = Date::parse(f.to);
  (void)c;
  return sel;
}

int cmd_portfolio(const GlobalOpts& g, const PortfolioFlags& f) {
  Corpus c = load(g);
  WeightingPipeline pipeline = parse_pipeline(g.weighting);
  SpMat w = compute_references_matrix(c, pipeline).w;
  Eigen::VectorXd ac = capital_vector(w);
  std::vector<Holding> holdings = build_portfolio(c, make_selector(c, f));

  Table t;
  t.header = {"metric", "key", "value"};
  auto single = [&](const std::string& name, const ojson& v) { t.add({name, "total", v}); };

  std::vector<Date> grid;
  std::vector<Eigen::VectorXd> ts;
  auto need_series = [&]() {
    if (!grid.empty()) return;
    auto [first, last] = corpus_year_span(c);
    grid = yearly_grid(first, last);
    ts = capital_timeseries(c, pipeline, grid);
  };

  if (!f.hist.empty()) {
    if (f.hist != "log-ac") throw UsageError("unknown histogram axis: " + f.hist);
    std::set<int> people;
    for (const auto& h : holdings) people.insert(h.contributor);
    Eigen::VectorXd call = contributor_capital(c, ac);
    std::vector<double> values;
    for (int p : people) values.push_back(call[p]);
    Pyramid pyr = population_pyramid(values, f.bins);
    Table h;
    h.header = {"bin_low", "bin_high", "count"};
    for (std::size_t i = 0; i < pyr.counts.size(); ++i)
      h.add({ojson(pyr.edges[i]), ojson(pyr.edges[i + 1]), ojson(pyr.counts[i])});
    h.add({ojson(nullptr), ojson(nullptr), ojson(pyr.zero_count)});
    Sink sink(g.out_path);
    emit_table(h, sink.stream(), g.as_json);
    return 0;
  }

  for (const std::string& metric : f.metrics) {
    if (metric == "capital") {
      single("capital", ojson(portfolio_capital(holdings, ac)));
    } else if (metric == "mix") {
      MixAxis axis = f.mix_by == "role"   ? MixAxis::Role
                     : f.mix_by == "year" ? MixAxis::Period
                                          : MixAxis::FieldLevel;
      if (f.mix_by != "role" && f.mix_by != "year" && f.mix_by != "field")
        throw UsageError("unknown mix axis: " + f.mix_by);
      MixResult mix = portfolio_mix(c, holdings, ac, axis, f.level);
      for (const auto& [key, v] : mix.weights) t.add({"mix", key, ojson(v)});
    } else if (metric == "moments" || metric == "sharpe" || metric == "arc") {
      need_series();
      ReturnsSeries r = portfolio_returns(c, holdings, ts, grid);
      Moments m = return_moments(r.deltas);
      if (metric == "moments") {
        single("mean_return", ojson(m.mean));
        single("return_volatility", opt_cell(m.std_dev));
        single("return_skewness", ojson(m.skewness));
      } else {
        RatioMetrics ratios = ratio_metrics(m, portfolio_capital(holdings, ac));
        if (metric == "sharpe") single("sharpe", opt_cell(ratios.sharpe));
        if (metric == "arc") single("arc", opt_cell(ratios.arc));
      }
    } else if (metric == "weights" || metric == "concentration") {
      ValueBasis basis = f.weights_basis == "shares" ? ValueBasis::Shares : ValueBasis::Capital;
      WeightGrouping grouping =
          f.weights_by == "tag" ? WeightGrouping::TagLevel : WeightGrouping::Manuscript;
      auto weights = allocation_weights(c, holdings, ac, basis, grouping, f.level);
      if (metric == "weights") {
        for (const auto& [key, v] : weights) t.add({"weight", key, ojson(v)});
      } else {
        std::vector<double> wv;
        for (const auto& [key, v] : weights) wv.push_back(v);
        Concentration conc = concentration(wv);
        single("hhi", ojson(conc.hhi));
        single("gini", ojson(conc.gini));
        single("entropy", ojson(conc.entropy));
      }
    } else if (metric == "dr") {
      need_series();
      single("diversification_ratio", opt_cell(diversification_ratio(c, holdings, ts)));
    } else if (metric == "efficiency") {
      try {
        single("funding_efficiency", ojson(funding_efficiency(c, holdings, ac)));
      } catch (const MissingData&) {
        single("funding_efficiency", ojson(nullptr));
      }
      try {
        single("time_efficiency", ojson(time_efficiency(c, holdings, ac)));
      } catch (const MissingData&) {
        single("time_efficiency", ojson(nullptr));
      }
    } else if (metric == "reliability") {
      if (f.reliability_contributor.empty())
        throw UsageError("reliability needs --reliability-contributor");
      Reliability r =
          reliability(c, pipeline, f.reliability_contributor, parse_role_flag(f.reliability_role));
      single("loss_ratio", opt_cell(r.loss_ratio));
      single("role_share", opt_cell(r.role_share));
    } else if (metric == "iqc") {
      if (f.iqc_manuscript.empty() || f.iqc_event.empty())
        throw UsageError("iqc needs --iqc-manuscript and --iqc-event");
      single("iqc", opt_cell(iqc(c, pipeline, c.manuscript_index(f.iqc_manuscript),
                                 Date::parse(f.iqc_event), f.iqc_window)));
    } else if (metric == "journal") {
      if (f.collection.empty()) throw UsageError("journal needs --collection");
      auto collections = load_collections(g.corpus_dir + "/collections.json");
      bool found = false;
      for (const auto& col : collections)
        if (col.name == f.collection) {
          single("journal_mean_capital", ojson(journal_mean_capital(c, ac, col)));
          found = true;
        }
      if (!found) throw UsageError("no such collection: " + f.collection);
    } else {
      throw UsageError("unknown portfolio metric: " + metric);
    }
  }
  Sink sink(g.out_path);
  emit_table(t, sink.stream(), g.as_json);
  return 0;
}

/* ---- market ---- */

struct MarketFlags {
  bool do_fmp = false, do_premium = false, do_capm = false;
  std::string role = "review";
  std::string tag;
  int depth = 0;
  std::vector<std::string> authors;
  std::string manuscript;
  std::string feasibility;  // author | provider
  double w_pre = 0, w_post = 0, s_pre = 0, s_post = 0;
  double t_provider = 0, t_author = 0, provider_share = 0;
};

int cmd_market(const GlobalOpts& g, const MarketFlags& f) {
  Table t;
  t.header = {"metric", "key", "value"};
  if (!f.feasibility.empty()) {
    if (f.feasibility == "author") {
      AuthorSide a{f.w_post, f.w_pre, f.s_post, f.s_pre};
      t.add({"author_feasible", "predicate", ojson(author_feasible(a))});
    } else if (f.feasibility == "provider") {
      ProviderSide p{f.t_provider, f.t_author, f.provider_share};
      t.add({"provider_feasible", "predicate", ojson(provider_feasible(p))});
    } else {
      throw UsageError("feasibility side must be author or provider");
    }
    Sink sink(g.out_path);
    emit_table(t, sink.stream(), g.as_json);
    return 0;
  }

  Corpus c = load(g);
  auto tag_at_depth = [&](const std::string& tag, int depth) {
    if (depth <= 0) return tag;
    const TaxonomyNode* cur = &c.taxonomy.node(tag);
    if (cur->level < depth)
      throw UsageError("tag " + tag + " is shallower than depth " + std::to_string(depth));
    while (cur->level > depth) cur = &c.taxonomy.node(cur->parent.value());
    return cur->id;
  };
  if (f.do_fmp) {
    if (f.tag.empty()) throw UsageError("--fmp needs --tag");
    std::string eff = tag_at_depth(f.tag, f.depth);
    t.add({"fmp", eff, ojson(fmp(c, parse_role_flag(f.role), eff))});
  }
  if (f.do_premium) {
    if (f.tag.empty() || f.authors.empty()) throw UsageError("--premium needs --tag and --authors");
    std::string eff = tag_at_depth(f.tag, f.depth);
    std::set<std::string> authors(f.authors.begin(), f.authors.end());
    t.add({"risk_premium", eff, ojson(risk_premium(c, authors, parse_role_flag(f.role), eff))});
  }
  if (f.do_capm) {
    if (f.manuscript.empty()) throw UsageError("--capm needs --manuscript");
    WeightingPipeline pipeline = parse_pipeline(g.weighting);
    auto [first, last] = corpus_year_span(c);
    std::vector<Date> grid = yearly_grid(first, last);
    std::vector<Eigen::VectorXd> ts = capital_timeseries(c, pipeline, grid);
    int m = c.manuscript_index(f.manuscript);
    CapmResult r = capm(manuscript_return_series(ts, m),
                        field_return_series(c, ts, grid, c.primary_tag(m, 4)));
    t.add({"beta", f.manuscript, opt_cell(r.beta)});
    t.add({"alpha", f.manuscript, opt_cell(r.alpha)});
    t.add({"relative_performance", f.manuscript, opt_cell(r.relative)});
    t.add({"risk_adjusted_relative", f.manuscript, opt_cell(r.risk_adjusted_relative)});
  }
  if (t.rows.empty()) throw UsageError("market needs --fmp, --premium, --capm, or --feasibility");
  Sink sink(g.out_path);
  emit_table(t, sink.stream(), g.as_json);
  return 0;
}

/* ---- distribution ---- */

int cmd_distribution(const GlobalOpts& g, const std::string& tag, const std::string& manuscript,
                     bool pyramid, int bins) {
  Corpus c = load(g);
  Sink sink(g.out_path);
  if (pyramid) {
    Eigen::VectorXd call = contributor_capital(c, capital_vector(weighted_matrix(g, c)));
    Pyramid p = population_pyramid(c, call, bins);
    Table t;
    t.header = {"bin_low", "bin_high", "count"};
    for (std::size_t i = 0; i < p.counts.size(); ++i)
      t.add({ojson(p.edges[i]), ojson(p.edges[i + 1]), ojson(p.counts[i])});
    t.add({ojson(nullptr), ojson(nullptr), ojson(p.zero_count)});
    emit_table(t, sink.stream(), g.as_json);
    return 0;
  }
  Table t;
  t.header = {"metric", "key", "value"};
  std::optional<double> field_hhi, m_hhi;
  if (!tag.empty()) {
    field_hhi = field_author_hhi(c, tag);
    t.add({"author_hhi", tag, ojson(*field_hhi)});
  }
  if (!manuscript.empty()) {
    m_hhi = manuscript_author_hhi(c, c.manuscript_index(manuscript));
    t.add({"author_hhi", manuscript, ojson(*m_hhi)});
  }
  if (field_hhi && m_hhi) t.add({"hhid", tag + "|" + manuscript, ojson(hhid(*field_hhi, *m_hhi))});
  if (t.rows.empty()) throw UsageError("distribution needs --tag, --manuscript, or --pyramid");
  emit_table(t, sink.stream(), g.as_json);
  return 0;
}

/* ---- health ---- */

struct HealthFlags {
  std::string metric;
  std::string at, from, to;
  double dt = 1.0;
  std::string role = "review";
  double psi = 0.5;
  int n = 2;
  std::string region;
  std::string basis = "funding";
  std::string formula = "standard";
  std::string tag;
  std::string collection;
  int level = 4;
  double gdp = 0.0, ppp = 0.0;
};

int cmd_health(const GlobalOpts& g, const HealthFlags& f) {
  Corpus c = load(g);
  SpMat w = weighted_matrix(g, c);
  Eigen::VectorXd ac = capital_vector(w);
  Date at = f.at.empty() ? year_end(corpus_year_span(c).second) : Date::parse(f.at);
  Table t;
  t.header = {"metric", "key", "value"};
  Sink sink(g.out_path);

  if (f.metric == "growth") {
    t.add({"growth", at.to_string(), ojson(capital_growth_rate(c, w, at, f.dt))});
  } else if (f.metric == "growth-series") {
    for (const auto& p : capital_growth_series(c, w))
      t.add({"growth", p.window_end.to_string(), ojson(p.rate)});
  } else if (f.metric == "shrinkage") {
    t.add({"fmp_shrinkage", f.role,
           ojson(fmp_shrinkage(c, parse_role_flag(f.role), at, f.dt))});
  } else if (f.metric == "weighted-shrinkage") {
    double p = fmp_shrinkage(c, Role::PeerReviewer, at, f.dt);
    double r = fmp_shrinkage(c, Role::Replicator, at, f.dt);
    t.add({"weighted_shrinkage", format_number(f.psi), ojson(weighted_shrinkage(f.psi, p, r))});
  } else if (f.metric == "volatility") {
    t.add({"fmp_volatility", f.role,
           ojson(fmp_volatility(c, parse_role_flag(f.role), f.n, at))});
  } else if (f.metric == "geo") {
    if (f.region.empty()) throw UsageError("geo needs --region");
    auto regions = load_regions(g.corpus_dir + "/regions.json");
    GeoCapital geo = geo_capital(c, ac, regions, f.region, f.level);
    t.add({"geo_capital", f.region, ojson(geo.total)});
    t.add({"contributors", f.region, ojson(geo.contributor_count)});
    t.add({"per_capita", f.region, opt_cell(geo.per_capita)});
    t.add({"per_contributor", f.region, opt_cell(geo.per_contributor)});
    t.add({"per_gdp", f.region, opt_cell(geo.per_gdp)});
    t.add({"field_hhi", f.region, ojson(geo.field_hhi)});
  } else if (f.metric == "geo-gini") {
    auto regions = load_regions(g.corpus_dir + "/regions.json");
    GeoBasis basis = f.basis == "per-capita"        ? GeoBasis::PerCapita
                     : f.basis == "per-contributor" ? GeoBasis::PerContributor
                     : f.basis == "per-gdp"         ? GeoBasis::PerGdp
                                                    : throw UsageError("unknown basis: " + f.basis);
    GiniFormula formula = f.formula == "product"    ? GiniFormula::Product
                          : f.formula == "standard" ? GiniFormula::Standard
                                                    : throw UsageError("unknown formula: " +
                                                                       f.formula);
    t.add({"geo_gini", f.basis + "|" + f.formula, ojson(geo_gini(c, ac, regions, basis, formula))});
  } else if (f.metric == "efficiency") {
    EfficiencyBasis basis = f.basis == "funding" ? EfficiencyBasis::Funding
                            : f.basis == "gdp"   ? EfficiencyBasis::Gdp
                            : f.basis == "ppp"   ? EfficiencyBasis::Ppp
                            : f.basis == "time"
                                ? EfficiencyBasis::Time
                                : throw UsageError("unknown basis: " + f.basis);
    GlobalFigures figures;
    if (f.gdp > 0.0) figures.gdp = f.gdp;
    if (f.ppp > 0.0) figures.ppp = f.ppp;
    if (f.region.empty()) {
      t.add({"efficiency", f.basis, ojson(global_efficiency(c, ac, basis, figures))});
    } else {
      auto regions = load_regions(g.corpus_dir + "/regions.json");
      t.add({"efficiency", f.basis + "|" + f.region,
             ojson(regional_efficiency(c, ac, f.region, basis, regions))});
    }
  } else if (f.metric == "volume") {
    t.add({"transaction_volume", f.from + ".." + f.to,
           ojson(transaction_volume(c, parse_date_flag(f.from), parse_date_flag(f.to)))});
  } else if (f.metric == "qc-time") {
    if (f.tag.empty()) throw UsageError("qc-time needs --tag");
    QcTime q = qc_time_efficiency(c, f.tag);
    t.add({"qc_review_days", f.tag, opt_cell(q.review_days)});
    t.add({"qc_replication_days", f.tag, opt_cell(q.replication_days)});
  } else if (f.metric == "csr") {
    if (f.collection.empty()) throw UsageError("csr needs --collection");
    auto collections = load_collections(g.corpus_dir + "/collections.json");
    bool found = false;
    for (const auto& col : collections)
      if (col.name == f.collection) {
        t.add({"csr", col.name, ojson(csr(c, col))});
        found = true;
      }
    if (!found) throw UsageError("no such collection: " + f.collection);
  } else {
    throw UsageError("unknown health metric: " + f.metric);
  }
  emit_table(t, sink.stream(), g.as_json);
  return 0;
}

/* ---- synth ---- */

struct SynthFlags {
  int manuscripts = 100;
  int contributors = 50;
  int fields = 4;
  int years = 5;
  std::string share_profile = "descending";
  std::string citation_model = "preferential";
  double qc_rate = 0.3;
  std::uint64_t seed = 0;  // 0: fall back to the global seed
  std::string out_dir;
};

int cmd_synth(const GlobalOpts& g, const SynthFlags& f) {
  SynthParams params;
  params.manuscripts = f.manuscripts;
  params.contributors = f.contributors;
  params.fields = f.fields;
  params.years = f.years;
  params.share_profile = parse_share_profile(f.share_profile);
  params.citation_model = parse_citation_model(f.citation_model);
  params.qc_rate = f.qc_rate;
  params.seed = f.seed ? f.seed : g.seed;
  if (f.out_dir.empty()) throw UsageError("synth needs --out DIR");
  SynthOutput out = generate(params, f.out_dir);
  Table t;
  t.header = {"metric", "value"};
  t.add({"manuscripts", ojson(out.corpus.n_manuscripts())});
  t.add({"contributors", ojson(out.corpus.n_contributors())});
  t.add({"transactions", ojson(static_cast<long>(out.corpus.transactions.size()))});
  Sink sink(g.out_path);
  emit_table(t, sink.stream(), g.as_json);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"share-based scientometrics over manuscript corpora"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--corpus", g.corpus_dir, "corpus directory");
  app.add_option("--weighting", g.weighting, "citation weighting pipeline spec");
  app.add_option("--out", g.out_path, "write output to this path instead of stdout");
  app.add_flag("--json", g.as_json, "emit one JSON object per line instead of CSV");
  app.add_option("--seed", g.seed, "random seed for generation");

  auto* validate = app.add_subcommand("validate", "check a corpus directory");

  auto* shares = app.add_subcommand("shares", "shares-graph statistics and export");
  std::string shares_action = "stats";
  std::string shares_format = "mtx";
  bool shares_full = false;
  shares->add_option("action", shares_action, "stats or export");
  shares->add_option("--format", shares_format, "export format (mtx)");
  shares->add_flag("--full", shares_full, "export the symmetric full graph");

  auto* refs = app.add_subcommand("refs", "references-graph operations");
  std::string refs_op = "capital";
  bool refs_weighted_paths = false;
  refs->add_option("--op", refs_op, "capital | gram | cocite | centrality | power:n");
  refs->add_flag("--weighted-paths", refs_weighted_paths,
                 "centrality over inverse-weight path lengths");

  auto* capital_cmd = app.add_subcommand("capital", "capital by holder grouping");
  std::string cap_who = "contributor";
  std::string cap_by;
  capital_cmd->add_option("--who", cap_who, "contributor | institution | region | tag");
  capital_cmd->add_option("--by", cap_by, "split: field | role | year");

  auto* cluster_cmd = app.add_subcommand("cluster", "spectral clustering");
  std::string cluster_graph = "refs";
  int cluster_k = 2;
  std::string cluster_end = "small";
  cluster_cmd->add_option("--graph", cluster_graph, "shares | refs | capital");
  cluster_cmd->add_option("--k", cluster_k, "cluster count");
  cluster_cmd->add_option("--end", cluster_end, "small | large spectrum end");

  auto* similar = app.add_subcommand("similar", "rank manuscripts by similarity");
  std::string sim_to, sim_by = "tags";
  int sim_top = 10;
  similar->add_option("--to", sim_to, "target manuscript id")->required();
  similar->add_option("--by", sim_by, "tags | cocite");
  similar->add_option("--top", sim_top, "result count");

  auto* portfolio = app.add_subcommand("portfolio", "portfolio metrics over selected holdings");
  PortfolioFlags pf;
  portfolio->add_option("--contributors", pf.contributors, "contributor ids")->delimiter(',');
  portfolio->add_option("--institutions", pf.institutions, "institutions")->delimiter(',');
  portfolio->add_option("--regions", pf.regions, "regions")->delimiter(',');
  portfolio->add_option("--roles", pf.roles, "roles")->delimiter(',');
  portfolio->add_option("--tag", pf.tag, "taxonomy tag filter");
  portfolio->add_option("--from", pf.from, "publication date lower bound");
  portfolio->add_option("--to", pf.to, "publication date upper bound");
  portfolio->add_option("--metrics", pf.metrics,
                        "capital,mix,moments,sharpe,arc,weights,concentration,dr,efficiency,"
                        "reliability,iqc,journal")
      ->delimiter(',');
  portfolio->add_option("--mix-by", pf.mix_by, "field | role | year");
  portfolio->add_option("--level", pf.level, "tag depth for mix/weights");
  portfolio->add_option("--weights-basis", pf.weights_basis, "capital | shares");
  portfolio->add_option("--weights-by", pf.weights_by, "manuscript | tag");
  portfolio->add_option("--reliability-contributor", pf.reliability_contributor,
                        "contributor for reliability");
  portfolio->add_option("--reliability-role", pf.reliability_role, "role for reliability");
  portfolio->add_option("--iqc-manuscript", pf.iqc_manuscript, "manuscript for iqc");
  portfolio->add_option("--iqc-event", pf.iqc_event, "event date for iqc");
  portfolio->add_option("--iqc-window", pf.iqc_window, "iqc window in years");
  portfolio->add_option("--collection", pf.collection, "collection name for journal metric");
  portfolio->add_option("--hist", pf.hist, "log-ac: emit population pyramid instead");
  portfolio->add_option("--bins", pf.bins, "histogram bins");

  auto* market_cmd = app.add_subcommand("market", "marketplace metrics");
  MarketFlags mf;
  market_cmd->add_flag("--fmp", mf.do_fmp, "fair market price");
  market_cmd->add_flag("--premium", mf.do_premium, "risk premium");
  market_cmd->add_flag("--capm", mf.do_capm, "beta/alpha/relative performance");
  market_cmd->add_option("--role", mf.role, "review | replication");
  market_cmd->add_option("--tag", mf.tag, "field tag");
  market_cmd->add_option("--depth", mf.depth, "aggregate at this tag depth (1..4)");
  market_cmd->add_option("--authors", mf.authors, "author ids for premium")->delimiter(',');
  market_cmd->add_option("--manuscript", mf.manuscript, "manuscript for capm");
  market_cmd->add_option("--feasibility", mf.feasibility, "author | provider predicate");
  market_cmd->add_option("--w-pre", mf.w_pre, "expected citations before");
  market_cmd->add_option("--w-post", mf.w_post, "expected citations after");
  market_cmd->add_option("--s-pre", mf.s_pre, "author share before");
  market_cmd->add_option("--s-post", mf.s_post, "author share after");
  market_cmd->add_option("--t-provider", mf.t_provider, "provider time");
  market_cmd->add_option("--t-author", mf.t_author, "authoring time");
  market_cmd->add_option("--provider-share", mf.provider_share, "provider share");

  auto* distribution_cmd = app.add_subcommand("distribution", "author-share distributions");
  std::string dist_tag, dist_manuscript;
  bool dist_pyramid = false;
  int dist_bins = 10;
  distribution_cmd->add_option("--tag", dist_tag, "field tag for author HHI");
  distribution_cmd->add_option("--manuscript", dist_manuscript, "manuscript for author HHI");
  distribution_cmd->add_flag("--pyramid", dist_pyramid, "contributor capital histogram");
  distribution_cmd->add_option("--bins", dist_bins, "histogram bins");

  auto* health = app.add_subcommand("health", "system health metrics");
  HealthFlags hf;
  health->add_option("--metric", hf.metric,
                     "growth | growth-series | shrinkage | weighted-shrinkage | volatility | geo "
                     "| geo-gini | efficiency | volume | qc-time | csr")
      ->required();
  health->add_option("--at", hf.at, "window end date (default: last corpus year end)");
  health->add_option("--from", hf.from, "window open (exclusive)");
  health->add_option("--to", hf.to, "window close (inclusive)");
  health->add_option("--dt", hf.dt, "window length in years");
  health->add_option("--role", hf.role, "review | replication");
  health->add_option("--psi", hf.psi, "review weight for weighted shrinkage");
  health->add_option("--n", hf.n, "periods for volatility");
  health->add_option("--region", hf.region, "region id");
  health->add_option("--basis", hf.basis,
                     "gini: per-capita|per-contributor|per-gdp; efficiency: funding|gdp|ppp|time");
  health->add_option("--formula", hf.formula, "geo-gini: product | standard");
  health->add_option("--tag", hf.tag, "field tag for qc-time");
  health->add_option("--collection", hf.collection, "collection name for csr");
  health->add_option("--level", hf.level, "tag depth for geo field HHI");
  health->add_option("--gdp", hf.gdp, "global GDP figure");
  health->add_option("--ppp", hf.ppp, "global PPP figure");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  SynthFlags sf;
  synth->add_option("--manuscripts", sf.manuscripts, "manuscript count");
  synth->add_option("--contributors", sf.contributors, "contributor count");
  synth->add_option("--fields", sf.fields, "finest-level tag count");
  synth->add_option("--years", sf.years, "corpus span in years");
  synth->add_option("--share-profile", sf.share_profile, "descending | uniform | supervisor-heavy");
  synth->add_option("--citation-model", sf.citation_model, "preferential | uniform");
  synth->add_option("--qc-rate", sf.qc_rate, "quality-control shopping rate");
  synth->add_option("--seed", sf.seed, "generator seed (default: global --seed)");
  synth->add_option("--out", sf.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(validate)) return cmd_validate(g);
    if (app.got_subcommand(shares)) return cmd_shares(g, shares_action, shares_format, shares_full);
    if (app.got_subcommand(refs)) return cmd_refs(g, refs_op, refs_weighted_paths);
    if (app.got_subcommand(capital_cmd)) return cmd_capital(g, cap_who, cap_by);
    if (app.got_subcommand(cluster_cmd)) return cmd_cluster(g, cluster_graph, cluster_k, cluster_end);
    if (app.got_subcommand(similar)) return cmd_similar(g, sim_to, sim_by, sim_top);
    if (app.got_subcommand(portfolio)) return cmd_portfolio(g, pf);
    if (app.got_subcommand(market_cmd)) return cmd_market(g, mf);
    if (app.got_subcommand(distribution_cmd))
      return cmd_distribution(g, dist_tag, dist_manuscript, dist_pyramid, dist_bins);
    if (app.got_subcommand(health)) return cmd_health(g, hf);
    if (app.got_subcommand(synth)) return cmd_synth(g, sf);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const ValidationError& e) {
    ojson report;
    report["valid"] = false;
    report["issues"] = ojson::array();
    ojson issue;
    issue["invariant"] = e.invariant();
    issue["entity"] = e.entity();
    issue["message"] = e.what();
    report["issues"].push_back(issue);
    std::cout << report.dump(2) << "\n";
    return 2;
  } catch (const ParseError& e) {
    ojson report;
    report["valid"] = false;
    report["issues"] = ojson::array();
    ojson issue;
    issue["invariant"] = "parse_error";
    issue["entity"] = e.file();
    issue["message"] = e.what();
    report["issues"].push_back(issue);
    std::cout << report.dump(2) << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
