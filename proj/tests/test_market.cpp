#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "liberata/capital.hpp"
#include "liberata/market.hpp"
#include "liberata/portfolio.hpp"

using namespace liberata;

TEST_CASE("fair market price averages shares paid per provider role and field") {
  Corpus c = testutil::fixture();
  CHECK(fmp(c, Role::PeerReviewer, "T1") == Catch::Approx(0.1));
  // The transaction's field sits below every ancestor tag.
  CHECK(fmp(c, Role::PeerReviewer, "D3") == Catch::Approx(0.1));
  CHECK(fmp(c, Role::PeerReviewer, "D1") == Catch::Approx(0.1));

  CHECK_THROWS_AS(fmp(c, Role::Author, "T1"), InvalidParams);
  CHECK_THROWS_AS(fmp(c, Role::Replicator, "T1"), NoTransactions);
}

TEST_CASE("fair market price respects the date window") {
  Corpus c = testutil::fixture();  // executed 2022-05-15
  CHECK(fmp(c, Role::PeerReviewer, "T1", Date::parse("2022-01-01"),
            Date::parse("2022-05-15")) == Catch::Approx(0.1));
  CHECK_THROWS_AS(fmp(c, Role::PeerReviewer, "T1", Date::parse("2022-06-01"), std::nullopt),
                  NoTransactions);
  CHECK_THROWS_AS(fmp(c, Role::PeerReviewer, "T1", std::nullopt, Date::parse("2022-05-14")),
                  NoTransactions);
}

TEST_CASE("coarser tags average over all descendant transactions") {
  testutil::CorpusBuilder b;
  b.tag4("T2");
  b.person("p").person("r");
  b.man("m1", "2020-01-01").share("m1", "p", Role::Author, 0.8);
  b.share("m1", "r", Role::PeerReviewer, 0.2);
  b.man("m2", "2020-02-01", {}, "T2").share("m2", "p", Role::Author, 0.6);
  b.share("m2", "r", Role::PeerReviewer, 0.4);
  b.tx("m1", "r", Role::PeerReviewer, 0.2, "2019-12-01");
  b.tx("m2", "r", Role::PeerReviewer, 0.4, "2019-12-02");
  // A transaction recorded at discipline depth is invisible to d4 queries.
  b.man("m3", "2020-03-01").share("m3", "p", Role::Author, 0.5);
  b.share("m3", "r", Role::PeerReviewer, 0.5);
  b.tx("m3", "r", Role::PeerReviewer, 0.6, "2019-12-03", std::nullopt, "D3");
  Corpus c = b.build();

  CHECK(fmp(c, Role::PeerReviewer, "T1") == Catch::Approx(0.2));
  CHECK(fmp(c, Role::PeerReviewer, "T2") == Catch::Approx(0.4));
  CHECK(fmp(c, Role::PeerReviewer, "D3") == Catch::Approx((0.2 + 0.4 + 0.6) / 3.0));
  CHECK(fmp(c, Role::PeerReviewer, "D1") == Catch::Approx(0.4));
}

TEST_CASE("risk premium compares an author set's paid shares against the field") {
  Corpus c = testutil::fixture();
  // c3 authors m3, whose single transaction sits exactly at the field mean.
  CHECK(risk_premium(c, {"c3"}, Role::PeerReviewer, "T1") == Catch::Approx(0.0));
  // c2 holds no author share on any transacted manuscript.
  CHECK_THROWS_AS(risk_premium(c, {"c2"}, Role::PeerReviewer, "T1"), NoTransactions);

  testutil::CorpusBuilder b;
  b.person("rich").person("poor").person("r");
  b.man("m1", "2020-01-01").share("m1", "rich", Role::Author, 0.7);
  b.share("m1", "r", Role::PeerReviewer, 0.3);
  b.man("m2", "2020-02-01").share("m2", "poor", Role::Author, 0.9);
  b.share("m2", "r", Role::PeerReviewer, 0.1);
  b.tx("m1", "r", Role::PeerReviewer, 0.3, "2019-12-01");
  b.tx("m2", "r", Role::PeerReviewer, 0.1, "2019-12-02");
  Corpus paid = b.build();
  // Field mean 0.2; rich pays 0.3, poor pays 0.1.
  CHECK(risk_premium(paid, {"rich"}, Role::PeerReviewer, "T1") == Catch::Approx(0.1));
  CHECK(risk_premium(paid, {"poor"}, Role::PeerReviewer, "T1") == Catch::Approx(-0.1));
  CHECK(risk_premium(paid, {"rich", "poor"}, Role::PeerReviewer, "T1") ==
        Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("author feasibility wants strictly more expected stake capital") {
  CHECK(author_feasible({2.0, 1.0, 0.8, 1.0}));        // 1.6 > 1.0
  CHECK_FALSE(author_feasible({1.0, 1.0, 0.8, 1.0}));  // giving up shares for nothing
  CHECK_FALSE(author_feasible({1.25, 1.0, 0.8, 1.0})); // boundary: equal is not better
  CHECK(author_feasible({1.26, 1.0, 0.8, 1.0}));
}

TEST_CASE("provider feasibility compares service time against authoring time") {
  CHECK(provider_feasible({5.0, 10.0, 0.6}));        // 5 < 6
  CHECK_FALSE(provider_feasible({6.0, 10.0, 0.6}));  // boundary: equal is not faster
  CHECK_FALSE(provider_feasible({7.0, 10.0, 0.6}));
  CHECK_FALSE(provider_feasible({1.0, 10.0, 0.0}));  // no stake, no deal
}

TEST_CASE("raising the expected post gain never breaks author feasibility") {
  testutil::TestRng rng(13);
  for (int i = 0; i < 2000; ++i) {
    AuthorSide a;
    a.expected_w_pre = rng.u01() * 10.0;
    a.expected_w_post = rng.u01() * 10.0;
    a.author_share_pre = rng.u01();
    a.author_share_post = rng.u01() * a.author_share_pre;
    bool before = author_feasible(a);
    AuthorSide raised = a;
    raised.expected_w_post += rng.u01() * 5.0;
    if (before) CHECK(author_feasible(raised));
  }
}

TEST_CASE("manuscript and field return series") {
  Corpus c = testutil::fixture();
  WeightingPipeline base = parse_pipeline("base=inv_ref");
  std::vector<Date> grid = yearly_grid(2020, 2022);
  std::vector<Eigen::VectorXd> ts = capital_timeseries(c, base, grid);

  std::vector<double> m1 = manuscript_return_series(ts, 0);
  REQUIRE(m1.size() == 2);
  CHECK(m1[0] == Catch::Approx(1.0));
  CHECK(m1[1] == Catch::Approx(0.5));

  // Field gain divided by manuscripts published at each period's end.
  std::vector<double> t1 = field_return_series(c, ts, grid, "T1");
  REQUIRE(t1.size() == 2);
  CHECK(t1[0] == Catch::Approx(0.5));        // +1.0 over two manuscripts
  CHECK(t1[1] == Catch::Approx(1.0 / 3.0));  // +1.0 over three

  // Identical membership at ancestor depths.
  CHECK(field_return_series(c, ts, grid, "D1") == t1);
}

TEST_CASE("capm decomposes a return series against its field") {
  Corpus c = testutil::fixture();
  WeightingPipeline base = parse_pipeline("base=inv_ref");
  std::vector<Date> grid = yearly_grid(2020, 2022);
  std::vector<Eigen::VectorXd> ts = capital_timeseries(c, base, grid);
  std::vector<double> r_d = field_return_series(c, ts, grid, "T1");

  CapmResult m1 = capm(manuscript_return_series(ts, 0), r_d);
  CHECK(m1.beta.value() == Catch::Approx(3.0));
  CHECK(m1.alpha.value() == Catch::Approx(-0.5));
  CHECK(m1.relative.value() == Catch::Approx(1.8));
  CHECK(m1.risk_adjusted_relative.value() == Catch::Approx(-1.2));

  CapmResult m2 = capm(manuscript_return_series(ts, 1), r_d);
  CHECK(m2.beta.value() == Catch::Approx(-3.0));
  CHECK(m2.alpha.value() == Catch::Approx(1.5));
  CHECK(m2.relative.value() == Catch::Approx(0.6));

  CHECK_THROWS_AS(capm({1.0}, {1.0, 2.0}), DimensionMismatch);
  CHECK_THROWS_AS(capm({}, {}), EmptyDistribution);

  CapmResult flat_field = capm({1.0, 2.0}, {0.5, 0.5});
  CHECK_FALSE(flat_field.beta.has_value());  // zero field variance
  CHECK(flat_field.relative.value() == Catch::Approx(3.0));

  CapmResult zero_mean = capm({1.0, 2.0}, {-0.5, 0.5});
  CHECK(zero_mean.beta.has_value());
  CHECK_FALSE(zero_mean.relative.has_value());  // zero field mean
}

TEST_CASE("portfolio relative performance weights holdings by share") {
  Corpus c = testutil::fixture();
  WeightingPipeline base = parse_pipeline("base=inv_ref");
  std::vector<Date> grid = yearly_grid(2020, 2022);
  std::vector<Eigen::VectorXd> ts = capital_timeseries(c, base, grid);
  std::vector<Holding> all = build_portfolio(c, {});

  // Per-manuscript relatives 1.8, 0.6, 0.0 with unit total shares each.
  std::optional<double> rel = portfolio_relative_performance(c, all, ts, grid, false);
  CHECK(rel.value() == Catch::Approx(0.8));

  // Risk-adjusted variant sums alpha over field-mean terms: -1.2 + 3.6 + 0.
  std::optional<double> adj = portfolio_relative_performance(c, all, ts, grid, true);
  CHECK(adj.value() == Catch::Approx(2.4));

  CHECK_THROWS_AS(
      portfolio_relative_performance(c, std::vector<Holding>{}, ts, grid, false),
      EmptyPortfolio);
}

TEST_CASE("relative performance is absent when a field never moves") {
  testutil::CorpusBuilder b;
  b.person("p");
  b.man("m1", "2020-01-01").share("m1", "p", Role::Author, 1.0);
  b.man("m2", "2021-01-01").share("m2", "p", Role::Author, 1.0);  // nobody cites anybody
  Corpus c = b.build();
  WeightingPipeline base = parse_pipeline("base=inv_ref");
  std::vector<Date> grid = yearly_grid(2020, 2021);
  std::vector<Eigen::VectorXd> ts = capital_timeseries(c, base, grid);
  std::vector<Holding> all = build_portfolio(c, {});
  CHECK_FALSE(portfolio_relative_performance(c, all, ts, grid, false).has_value());
}
