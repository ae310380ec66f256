#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "liberata/citation_weighting.hpp"
#include "liberata/errors.hpp"
#include "liberata/taxonomy_relevancy.hpp"

using namespace liberata;

namespace {

/* Corpus with two disjoint four-level chains: D1..T1 and E1..U1. mA sits in
   the first, mB in the second, mC in the first plus one extra tag from the
   second chain's discipline. */
Corpus two_chain_corpus() {
  testutil::CorpusBuilder b;
  b.tax.push_back({"E1", 1, std::nullopt, "E1"});
  b.tag("E2", 2, "E1").tag("E3", 3, "E2").tag4("U1", "E3");
  b.person("p");
  b.man("mA", "2020-01-01");
  b.man("mB", "2020-02-01", {}, "U1");
  b.man("mC", "2020-03-01");
  b.manuscripts.back().extra_tags.push_back("E3");
  b.share("mA", "p", Role::Author, 1.0);
  b.share("mB", "p", Role::Author, 1.0);
  b.share("mC", "p", Role::Author, 1.0);
  return b.build();
}

}  // namespace

TEST_CASE("tag space enumerates the taxonomy in sorted id order") {
  Corpus c = testutil::fixture();
  TagSpace space = tag_space(c.taxonomy);
  CHECK(space.ids == std::vector<std::string>{"D1", "D2", "D3", "T1"});
  CHECK(space.index.at("D3") == 2);
}

TEST_CASE("taxonomy vectors are indicators over the chain plus extra tags") {
  Corpus c = two_chain_corpus();
  TagSpace space = tag_space(c.taxonomy);
  REQUIRE(space.ids.size() == 8);

  Eigen::VectorXd va = taxonomy_vector(c, space, c.manuscript_index("mA"));
  CHECK(va.sum() == 4.0);
  CHECK(va[space.index.at("D1")] == 1.0);
  CHECK(va[space.index.at("T1")] == 1.0);
  CHECK(va[space.index.at("E1")] == 0.0);

  Eigen::VectorXd vc = taxonomy_vector(c, space, c.manuscript_index("mC"));
  CHECK(vc.sum() == 5.0);  // the chain plus the extra discipline tag
  CHECK(vc[space.index.at("E3")] == 1.0);
}

TEST_CASE("cosine similarity of taxonomy vectors") {
  Corpus c = two_chain_corpus();
  TagSpace space = tag_space(c.taxonomy);
  Eigen::VectorXd va = taxonomy_vector(c, space, c.manuscript_index("mA"));
  Eigen::VectorXd vb = taxonomy_vector(c, space, c.manuscript_index("mB"));
  Eigen::VectorXd vc = taxonomy_vector(c, space, c.manuscript_index("mC"));

  CHECK(cosine_similarity(va, va) == Catch::Approx(1.0));
  CHECK(cosine_similarity(va, vb) == Catch::Approx(0.0));  // disjoint chains
  CHECK(cosine_similarity(va, vc) == Catch::Approx(4.0 / (2.0 * std::sqrt(5.0))));

  CHECK(cosine_similarity(Eigen::VectorXd::Zero(8), va) == 0.0);
  CHECK_THROWS_AS(cosine_similarity(Eigen::VectorXd::Zero(3), va), DimensionMismatch);
}

TEST_CASE("weighted taxonomy vectors average by positive weights") {
  Corpus c = two_chain_corpus();
  TagSpace space = tag_space(c.taxonomy);
  int ma = c.manuscript_index("mA");
  int mb = c.manuscript_index("mB");

  Eigen::VectorXd mix = weighted_taxonomy_vector(c, space, {{ma, 2.0}, {mb, 2.0}});
  CHECK(mix[space.index.at("D1")] == Catch::Approx(0.5));
  CHECK(mix[space.index.at("E1")] == Catch::Approx(0.5));

  Eigen::VectorXd skewed = weighted_taxonomy_vector(c, space, {{ma, 3.0}, {mb, 1.0}});
  CHECK(skewed[space.index.at("D1")] == Catch::Approx(0.75));
  CHECK(skewed[space.index.at("E1")] == Catch::Approx(0.25));

  // Non-positive weights are ignored; nothing positive yields the zero vector.
  Eigen::VectorXd zero = weighted_taxonomy_vector(c, space, {{ma, 0.0}, {mb, -1.0}});
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cross similarity is symmetric with a unit diagonal") {
  Corpus c = two_chain_corpus();
  TagSpace space = tag_space(c.taxonomy);
  std::vector<Eigen::VectorXd> items;
  for (int m = 0; m < c.n_manuscripts(); ++m)
    items.push_back(taxonomy_vector(c, space, m));
  Eigen::MatrixXd g = cross_similarity(items);
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 3; ++i) CHECK(g(i, i) == Catch::Approx(1.0));
  CHECK(g(0, 1) == Catch::Approx(0.0));
  CHECK(g(0, 2) == Catch::Approx(4.0 / (2.0 * std::sqrt(5.0))));
}

TEST_CASE("cocitation relevance compares inbound citation rows") {
  Corpus c = testutil::fixture();
  SpMat w = base_weighted_matrix(c);
  // Rows: m1 = (0, 1, 0.5), m2 = (0, 0, 0.5); cosine = 0.25 / (sqrt(1.25) * 0.5).
  CHECK(cocitation_relevance(w, 0, 1) == Catch::Approx(0.4472135955).epsilon(1e-9));
  CHECK(cocitation_relevance(w, 0, 2) == 0.0);  // m3 is never cited
  CHECK(cocitation_relevance(w, 0, 0) == Catch::Approx(1.0));
  CHECK(cocitation_relevance(w, 1, 0) == Catch::Approx(cocitation_relevance(w, 0, 1)));
}

TEST_CASE("tag inference averages the references' taxonomy vectors") {
  Corpus c = testutil::fixture();
  SpMat w = base_weighted_matrix(c);
  TagSpace space = tag_space(c.taxonomy);

  // m3 cites m1 and m2, both fully inside the single chain: every tag scores 1.
  std::vector<TagSuggestion> tags = infer_tags(c, space, w, 2);
  REQUIRE(tags.size() == 4);
  CHECK(tags[0].tag == "D1");  // equal scores fall back to id order
  CHECK(tags[3].tag == "T1");
  for (const auto& t : tags) CHECK(t.score == Catch::Approx(1.0));

  CHECK_THROWS_AS(infer_tags(c, space, w, 0), MissingData);  // m1 cites nothing
}

TEST_CASE("tag inference thresholds mixed-field reference sets") {
  Corpus c = two_chain_corpus();
  testutil::CorpusBuilder b;
  b.tax.push_back({"E1", 1, std::nullopt, "E1"});
  b.tag("E2", 2, "E1").tag("E3", 3, "E2").tag4("U1", "E3");
  b.person("p");
  b.man("mA", "2020-01-01");
  b.man("mB", "2020-02-01", {}, "U1");
  b.man("mX", "2021-01-01", {"mA", "mB"});
  b.share("mA", "p", Role::Author, 1.0);
  b.share("mB", "p", Role::Author, 1.0);
  b.share("mX", "p", Role::Author, 1.0);
  Corpus mixed = b.build();

  TagSpace space = tag_space(mixed.taxonomy);
  SpMat w = base_weighted_matrix(mixed);
  int mx = mixed.manuscript_index("mX");

  // Each chain carries weight 0.5, below the default 0.9 threshold.
  CHECK(infer_tags(mixed, space, w, mx).empty());
  std::vector<TagSuggestion> loose = infer_tags(mixed, space, w, mx, 0.5);
  CHECK(loose.size() == 8);
  for (const auto& t : loose) CHECK(t.score == Catch::Approx(0.5));
}

TEST_CASE("assigning suggestions appends only genuinely new tags") {
  Corpus c = two_chain_corpus();
  int ma = c.manuscript_index("mA");
  std::vector<TagSuggestion> tags = {{"D1", 1.0}, {"E3", 0.95}, {"U1", 0.92}};
  CHECK(assign_tags(c, ma, tags) == 2);  // D1 is already on the primary chain
  const auto& extra = c.manuscripts[ma].extra_tags;
  REQUIRE(extra.size() == 2);
  CHECK(extra[0] == "E3");
  CHECK(extra[1] == "U1");
  CHECK(assign_tags(c, ma, tags) == 0);  // idempotent
}
