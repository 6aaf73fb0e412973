#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/QR>

#include "metaphor/analysis.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/registry.hpp"
#include "metaphor/rng.hpp"
#include "metaphor/text.hpp"
#include "support.hpp"

using namespace metaphor;

namespace {

// Corpus with both ideology groups and a score table over the default concepts.
struct AnalysisFixture {
  std::vector<Document> docs;
  ScoreTable scores;
};

AnalysisFixture analysis_fixture(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  AnalysisFixture f;
  const auto names = default_registry().names();
  for (std::size_t i = 0; i < n; ++i) {
    Document d = testing::make_doc("d" + std::to_string(i), "post " + std::string(1 + rng.uniform_index(40), 'x'),
                                   rng.normal(0.0, 1.2));
    if (*d.ideal_point == 0.0) d.ideal_point = 0.5;
    d.has_hashtag = rng.bernoulli(0.3);
    d.has_mention = rng.bernoulli(0.3);
    d.has_url = rng.bernoulli(0.4);
    d.is_quote = rng.bernoulli(0.2);
    d.is_reply = rng.bernoulli(0.2);
    d.verified = rng.bernoulli(0.1);
    d.follower_count = static_cast<std::int64_t>(std::exp(rng.normal(5, 2)));
    d.following_count = static_cast<std::int64_t>(std::exp(rng.normal(5, 1)));
    d.status_count = static_cast<std::int64_t>(std::exp(rng.normal(8, 1)));
    d.favorite_count = static_cast<std::int64_t>(std::exp(rng.normal(1, 1)));
    d.retweet_count = static_cast<std::int64_t>(std::exp(rng.normal(0.5, 1)));
    d.created_at = testing::at("2014-01-01T00:00:00Z") + std::chrono::hours(24 * rng.uniform_index(2000));
    f.docs.push_back(d);
    for (const auto& c : names) f.scores.add(d.id, c, rng.bernoulli(0.6) ? 0.0 : rng.uniform01(), rng.uniform01() - 0.3);
  }
  return f;
}

double mean(const Eigen::VectorXd& v) { return v.mean(); }

double sample_sd(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x / static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Row-wise counterfactual oracle for the average marginal effect.
double brute_force_ame(const FittedModel& m, const DesignMatrix& d, const std::string& var, bool binary) {
  const auto col = d.require(var);
  double total = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (binary) {
      total += d.counterfactual_row(i, col, 1.0).dot(m.coefficients) - d.counterfactual_row(i, col, 0.0).dot(m.coefficients);
    } else {
      const double v = d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col));
      total += d.counterfactual_row(i, col, v + 1.0).dot(m.coefficients) - d.counterfactual_row(i, col, v).dot(m.coefficients);
    }
  }
  return total / static_cast<double>(d.rows());
}

// v continuous, w continuous, g binary group; y with interactions.
DesignMatrix interaction_design(Rng& rng, std::size_t n, double b_vw, double b_vg) {
  Eigen::MatrixXd X(n, 7);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double v = rng.normal();
    const double w = rng.normal(1.0 + g, 1.0);
    const double b = rng.bernoulli(0.4) ? 1.0 : 0.0;
    X.row(static_cast<Eigen::Index>(i)) << 1.0, v, w, g, b, v * w, v * g;
    y(static_cast<Eigen::Index>(i)) = 1.0 + 0.5 * v - 0.3 * w + 0.2 * g + 0.7 * b + b_vw * v * w + b_vg * v * g + rng.normal(0, 0.5);
  }
  return DesignMatrix::from_columns(X, y, {"Constant", "v", "w", "ideology", "b", "v:w", "v:ideology"});
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("ideology, strength and their interaction give four columns") {
    auto f = analysis_fixture(50, 1);
    DesignSpec spec;
    spec.outcome = "water";
    spec.fixed_effects = {"ideology", "strength"};
    spec.interactions = {{"ideology", "strength"}};
    const auto d = build_design_matrix(Corpus(f.docs), f.scores, spec);
    CHECK(d.columns == std::vector<std::string>{"Constant", "ideology", "strength", "ideology:strength"});
    CHECK(d.X.cols() == 4);
    CHECK(d.rows() == 50);
  }

  TEST_CASE("missing and zero ideal points are dropped and counted") {
    auto f = analysis_fixture(30, 2);
    f.docs[3].ideal_point.reset();
    DesignSpec spec;
    spec.outcome = "water";
    spec.fixed_effects = {"ideology", "strength"};
    auto d = build_design_matrix(Corpus(f.docs), f.scores, spec);
    CHECK(d.dropped == 1);
    CHECK(d.drop_reasons.at("ideal_point missing") == 1);
    CHECK(d.rows() == 29);
    f.docs[4].ideal_point = 0.0;
    d = build_design_matrix(Corpus(f.docs), f.scores, spec);
    CHECK(d.dropped == 2);
    CHECK(d.drop_reasons.at("ideal_point zero") == 1);
  }

  TEST_CASE("engagement spec columns match the engagement table rows") {
    auto f = analysis_fixture(200, 3);
    const auto spec = engagement_spec("favorites", default_registry().names());
    const auto d = build_design_matrix(Corpus(f.docs), f.scores, spec);
    const std::set<std::string> expected{
        "ideology", "strength", "ideology:strength", "animal", "commodity", "parasite", "pressure", "vermin", "war",
        "water", "animal:ideology", "commodity:ideology", "parasite:ideology", "pressure:ideology", "vermin:ideology",
        "war:ideology", "water:ideology", "hashtag", "mention", "url", "quote status", "reply", "verified",
        "log chars", "log followers", "log following", "log statuses", "year:month", "Constant"};
    CHECK(std::set<std::string>(d.columns.begin(), d.columns.end()) == expected);
    CHECK(d.columns.size() == expected.size());
    CHECK(d.outcome == "favorites");
  }

  TEST_CASE("design transforms") {
    auto f = analysis_fixture(120, 4);
    const Corpus corpus(f.docs);
    const auto d = build_design_matrix(corpus, f.scores, engagement_spec("retweets", default_registry().names()));
    for (std::size_t i = 0; i < d.rows(); ++i) {
      const auto* doc = corpus.find(d.doc_ids[i]);
      const auto r = static_cast<Eigen::Index>(i);
      CHECK(d.y(r) == doctest::Approx(std::log1p(static_cast<double>(doc->retweet_count))));
      CHECK(d.X(r, static_cast<Eigen::Index>(d.require("log followers"))) ==
            doctest::Approx(std::log1p(static_cast<double>(doc->follower_count))));
      CHECK(d.X(r, static_cast<Eigen::Index>(d.require("ideology"))) == (*doc->ideal_point > 0 ? 1.0 : 0.0));
      CHECK(d.X(r, static_cast<Eigen::Index>(d.require("year:month"))) == year_month_of(doc->created_at).linear_index());
    }
    // Concept scores are z-scored over the analysis rows.
    std::vector<double> water;
    for (std::size_t i = 0; i < d.rows(); ++i) water.push_back(d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d.require("water"))));
    double m = 0;
    for (double x : water) m += x / static_cast<double>(water.size());
    CHECK(std::abs(m) < 1e-12);
    CHECK(sample_sd(water) == doctest::Approx(1.0).epsilon(1e-12));

    // Strength: |ip| centered within each ideology group, then z-scored.
    std::vector<double> raw, groups;
    for (const auto& id : d.doc_ids) {
      const double ip = *corpus.find(id)->ideal_point;
      raw.push_back(std::abs(ip));
      groups.push_back(ip > 0 ? 1.0 : 0.0);
    }
    double mg[2] = {0, 0}, ng[2] = {0, 0};
    for (std::size_t i = 0; i < raw.size(); ++i) {
      mg[static_cast<int>(groups[i])] += raw[i];
      ng[static_cast<int>(groups[i])] += 1;
    }
    std::vector<double> centered;
    for (std::size_t i = 0; i < raw.size(); ++i) centered.push_back(raw[i] - mg[static_cast<int>(groups[i])] / ng[static_cast<int>(groups[i])]);
    const double sd = sample_sd(centered);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      CHECK(d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d.require("strength"))) ==
            doctest::Approx(centered[i] / sd).epsilon(1e-12));
    }
  }

  TEST_CASE("design errors") {
    auto f = analysis_fixture(20, 5);
    DesignSpec spec;
    spec.outcome = "water";
    spec.fixed_effects = {"ideology", "hashtag", "hashtag"};
    CHECK_THROWS(build_design_matrix(Corpus(f.docs), f.scores, spec));
    for (auto& d : f.docs) d.ideal_point.reset();
    spec.fixed_effects = {"ideology"};
    CHECK_THROWS_AS(build_design_matrix(Corpus(f.docs), f.scores, spec), ModelError);
    spec.fixed_effects = {"banana"};
    CHECK_THROWS_AS(spec.validate(default_registry().names()), ArgumentError);
    DesignSpec bad;
    bad.outcome = "water";
    bad.fixed_effects = {"ideology"};
    bad.interactions = {{"ideology", "strength"}};
    CHECK_THROWS_AS(bad.validate(default_registry().names()), ArgumentError);
  }

  TEST_CASE("identical columns are named in the error") {
    auto f = analysis_fixture(40, 6);
    for (auto& d : f.docs) d.has_mention = d.has_hashtag;
    DesignSpec spec;
    spec.outcome = "water";
    spec.fixed_effects = {"ideology", "hashtag", "mention"};
    try {
      build_design_matrix(Corpus(f.docs), f.scores, spec);
      FAIL("expected an error");
    } catch (const ModelError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("hashtag") != std::string::npos);
      CHECK(msg.find("mention") != std::string::npos);
    }
  }

  TEST_CASE("design spec json round-trip") {
    const auto spec = engagement_spec("favorites", {"water", "war"}, {"economic"});
    CHECK(DesignSpec::from_json(spec.to_json()).to_json() == spec.to_json());
  }

  TEST_CASE("exact fit gives zero residual error and unit R2") {
    Eigen::MatrixXd X(20, 3);
    Eigen::VectorXd y(20);
    Rng rng(7);
    for (int i = 0; i < 20; ++i) {
      X.row(i) << 1.0, rng.normal(), rng.normal();
      y(i) = 1.0 + 2.0 * X(i, 1) - 0.5 * X(i, 2);
    }
    const auto m = ols_fit(X, y, {"Constant", "a", "b"});
    CHECK(m.residual_se == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.r_squared == doctest::Approx(1.0));
    CHECK(m.coef("a") == doctest::Approx(2.0));
  }

  TEST_CASE("y = 2 + 3x + noise recovers the coefficients") {
    Rng rng(8);
    Eigen::MatrixXd X(1000, 2);
    Eigen::VectorXd y(1000);
    for (int i = 0; i < 1000; ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = rng.normal();
      y(i) = 2.0 + 3.0 * X(i, 1) + rng.normal(0.0, 0.1);
    }
    const auto m = ols_fit(X, y, {"Constant", "x"});
    CHECK(std::abs(m.coef("Constant") - 2.0) < 3 * m.se("Constant"));
    CHECK(std::abs(m.coef("x") - 3.0) < 3 * m.se("x"));
    CHECK(m.residual_se == doctest::Approx(0.1).epsilon(0.1));
    CHECK(m.df_residual == 998);
  }

  TEST_CASE("orthonormal design gives covariance sigma^2 I") {
    Rng rng(9);
    Eigen::MatrixXd A(200, 4);
    for (int i = 0; i < 200; ++i)
      for (int j = 0; j < 4; ++j) A(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(200, 4);
    Eigen::VectorXd y(200);
    for (int i = 0; i < 200; ++i) y(i) = rng.normal();
    const auto m = ols_fit(Q, y, {"q1", "q2", "q3", "q4"});
    const double s2 = m.residual_se * m.residual_se;
    CHECK((m.covariance - s2 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-9);
  }

  TEST_CASE("fit statistics against direct formulas") {
    Rng rng(10);
    const std::size_t n = 300;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      X.row(r) << 1.0, rng.normal(), rng.uniform01();
      y(r) = 0.5 + X(r, 1) + 2.0 * X(r, 2) * X(r, 2) + rng.normal(0, 0.3 + X(r, 2));
    }
    const auto m = ols_fit(X, y, {"Constant", "a", "b"});
    const Eigen::MatrixXd XtXi = (X.transpose() * X).inverse();
    const Eigen::VectorXd beta = XtXi * X.transpose() * y;
    const Eigen::VectorXd e = y - X * beta;
    const double ssr = e.squaredNorm();
    const double sst = (y.array() - y.mean()).square().sum();
    CHECK((m.coefficients - beta).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(m.r_squared == doctest::Approx(1 - ssr / sst).epsilon(1e-12));
    CHECK(m.adj_r_squared == doctest::Approx(1 - (ssr / (n - 3)) / (sst / (n - 1))).epsilon(1e-12));
    CHECK(m.f_statistic == doctest::Approx(((sst - ssr) / 2) / (ssr / (n - 3))).epsilon(1e-10));
    CHECK((m.covariance - ssr / (n - 3) * XtXi).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(m.p_values(1) < 1e-10);

    OlsOptions robust;
    robust.robust = true;
    const auto r = ols_fit(X, y, {"Constant", "a", "b"}, robust);
    const Eigen::MatrixXd meat = X.transpose() * e.array().square().matrix().asDiagonal() * X;
    const Eigen::MatrixXd hc1 = XtXi * meat * XtXi * (static_cast<double>(n) / (n - 3));
    CHECK((r.covariance - hc1).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(r.robust);
  }

  TEST_CASE("coefficients are invariant under column reordering") {
    Rng rng(11);
    Eigen::MatrixXd X(150, 4);
    Eigen::VectorXd y(150);
    for (int i = 0; i < 150; ++i) {
      X.row(i) << 1.0, rng.normal(), rng.normal(), rng.uniform01();
      y(i) = X.row(i).sum() + rng.normal();
    }
    const auto a = ols_fit(X, y, {"Constant", "a", "b", "c"});
    Eigen::MatrixXd P(150, 4);
    P << X.col(3), X.col(1), X.col(0), X.col(2);
    const auto b = ols_fit(P, y, {"c", "a", "Constant", "b"});
    for (const auto* name : {"Constant", "a", "b", "c"}) {
      CHECK(std::abs(a.coef(name) - b.coef(name)) <= 1e-8);
      CHECK(std::abs(a.se(name) - b.se(name)) <= 1e-8);
    }
  }

  TEST_CASE("rank deficiency names the dependent columns") {
    Rng rng(12);
    Eigen::MatrixXd X(50, 4);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) {
      const double a = rng.normal();
      X.row(i) << 1.0, a, rng.normal(), 2.0 * a + 1.0;
      y(i) = rng.normal();
    }
    try {
      ols_fit(X, y, {"Constant", "a", "b", "twice_a"});
      FAIL("expected an error");
    } catch (const ModelError& e) {
      const std::string msg = e.what();
      CHECK((msg.find("twice_a") != std::string::npos || msg.find("a") != std::string::npos));
    }
    CHECK_THROWS_AS(ols_fit(X.topRows(3), y.head(3), {"Constant", "a", "b", "twice_a"}), ArgumentError);
    CHECK_THROWS_AS(ols_fit(X, y.head(10), {"Constant", "a", "b", "twice_a"}), ArgumentError);
  }

  TEST_CASE("holm hand-worked fixtures") {
    const std::vector<double> p1{0.01, 0.04};
    auto h = holm_bonferroni(p1);
    CHECK(h.adjusted == std::vector<double>{0.02, 0.04});
    CHECK(h.reject == std::vector<bool>{true, true});

    const std::vector<double> p2{0.03, 0.04};
    h = holm_bonferroni(p2);
    CHECK(h.reject == std::vector<bool>{false, false});
    CHECK(h.adjusted == std::vector<double>{0.06, 0.06});

    for (double p : {0.001, 0.049, 0.05, 0.051, 0.9}) {
      const std::vector<double> one{p};
      h = holm_bonferroni(one);
      CHECK(h.adjusted[0] == p);
      CHECK(h.reject[0] == (p <= 0.05));
    }

    // Input order is preserved; step-down stops at the first failure.
    const std::vector<double> p3{0.04, 0.001, 0.03, 0.012};
    h = holm_bonferroni(p3);
    CHECK(h.reject == std::vector<bool>{false, true, false, true});
    CHECK(h.adjusted[1] == doctest::Approx(0.004));
    CHECK(h.adjusted[3] == doctest::Approx(0.036));
    CHECK(h.adjusted[2] == doctest::Approx(0.06));
    CHECK(h.adjusted[0] == doctest::Approx(0.06));

    const std::vector<double> invalid{1.5};
    CHECK_THROWS_AS(holm_bonferroni(invalid), ArgumentError);
    CHECK_THROWS_AS(holm_bonferroni(p1, 0.0), ArgumentError);
  }

  TEST_CASE("property: bonferroni rejections are a subset of holm rejections") {
    Rng rng(13);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<double> p(1 + rng.uniform_index(12));
      for (auto& x : p) x = std::pow(rng.uniform01(), 3.0);
      const auto h = holm_bonferroni(p);
      const auto b = bonferroni(p);
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (b.reject[i]) CHECK(h.reject[i]);
        CHECK(h.adjusted[i] <= b.adjusted[i] + 1e-15);
        CHECK(h.adjusted[i] >= p[i]);
        CHECK(h.adjusted[i] <= 1.0);
      }
    }
  }

  TEST_CASE("ame without interactions equals the coefficient") {
    Rng rng(14);
    Eigen::MatrixXd X(300, 3);
    Eigen::VectorXd y(300);
    for (int i = 0; i < 300; ++i) {
      X.row(i) << 1.0, rng.normal(), rng.bernoulli(0.5) ? 1.0 : 0.0;
      y(i) = 1 + 0.4 * X(i, 1) + 0.2 * X(i, 2) + rng.normal();
    }
    const auto d = DesignMatrix::from_columns(X, y, {"Constant", "v", "ideology"});
    const auto m = ols_fit(d);
    const auto ame = average_marginal_effect(m, d, "v");
    CHECK(ame.estimate == m.coef("v"));
    CHECK(ame.std_error == doctest::Approx(m.se("v")).epsilon(1e-12));
    const auto groups = group_average_marginal_effects(m, d, "v");
    CHECK(groups[0].estimate == ame.estimate);
    CHECK(groups[1].estimate == ame.estimate);
    CHECK(average_marginal_effect(m, d, "ideology").binary);
    CHECK(average_marginal_effect(m, d, "ideology").estimate == doctest::Approx(m.coef("ideology")).epsilon(1e-12));
    CHECK_THROWS_AS(average_marginal_effect(m, d, "nope"), ArgumentError);
  }

  TEST_CASE("ame with a product term equals b1 + b3 mean(w) and the brute-force average") {
    Rng rng(15);
    for (int trial = 0; trial < 10; ++trial) {
      const auto d = interaction_design(rng, 400, 0.3, -0.4);
      const auto m = ols_fit(d);
      const auto ame = average_marginal_effect(m, d, "v");
      const double analytic = m.coef("v") + m.coef("v:w") * mean(d.X.col(2)) + m.coef("v:ideology") * mean(d.X.col(3));
      CHECK(std::abs(ame.estimate - analytic) <= 1e-8);
      CHECK(std::abs(ame.estimate - brute_force_ame(m, d, "v", false)) <= 1e-8);
      const auto g = average_marginal_effect(m, d, "ideology");
      CHECK(g.binary);
      CHECK(std::abs(g.estimate - brute_force_ame(m, d, "ideology", true)) <= 1e-8);
    }
  }

  TEST_CASE("group ames differ by the interaction times the moderator gap") {
    Rng rng(16);
    const auto d = interaction_design(rng, 600, 0.3, -0.4);
    const auto m = ols_fit(d);
    const auto groups = group_average_marginal_effects(m, d, "v");
    const auto lib = scope_rows(d, EffectScope::liberal);
    const auto con = scope_rows(d, EffectScope::conservative);
    double wl = 0, wc = 0;
    for (auto i : lib) wl += d.X(static_cast<Eigen::Index>(i), 2) / static_cast<double>(lib.size());
    for (auto i : con) wc += d.X(static_cast<Eigen::Index>(i), 2) / static_cast<double>(con.size());
    const double expected = m.coef("v:ideology") + m.coef("v:w") * (wc - wl);
    CHECK(std::abs((groups[1].estimate - groups[0].estimate) - expected) <= 1e-9);
    CHECK(groups[0].scope == EffectScope::liberal);
    CHECK(groups[0].n == lib.size());

    // A single-group subset matches the plain AME on that subset.
    const auto on_lib = average_marginal_effect(m, d, "v", lib, EffectScope::liberal);
    CHECK(on_lib.estimate == doctest::Approx(groups[0].estimate).epsilon(1e-14));
    CHECK_THROWS_AS(average_marginal_effect(m, d, "v", {}, EffectScope::all), ArgumentError);
  }

  TEST_CASE("identical covariate distributions give equal group effects") {
    Rng rng(17);
    const std::size_t half = 200;
    Eigen::MatrixXd X(2 * half, 5);
    Eigen::VectorXd y(2 * half);
    for (std::size_t i = 0; i < half; ++i) {
      const double v = rng.normal(), w = rng.normal();
      for (int g = 0; g < 2; ++g) {
        const auto r = static_cast<Eigen::Index>(i + g * half);
        X.row(r) << 1.0, v, w, static_cast<double>(g), v * w;
        y(r) = v + w + 0.5 * v * w + rng.normal();
      }
    }
    const auto d = DesignMatrix::from_columns(X, y, {"Constant", "v", "w", "ideology", "v:w"});
    const auto m = ols_fit(d);
    const auto groups = group_average_marginal_effects(m, d, "v");
    CHECK(std::abs(groups[0].estimate - groups[1].estimate) <= 1e-9);
  }

  TEST_CASE("ame standard error is the delta method") {
    Rng rng(18);
    const auto d = interaction_design(rng, 300, 0.2, 0.1);
    const auto m = ols_fit(d);
    const auto ame = average_marginal_effect(m, d, "v");
    Eigen::VectorXd g = Eigen::VectorXd::Zero(7);
    g(1) = 1.0;
    g(5) = mean(d.X.col(2));
    g(6) = mean(d.X.col(3));
    CHECK(ame.std_error == doctest::Approx(std::sqrt(g.dot(m.covariance * g))).epsilon(1e-12));
  }

  TEST_CASE("percent change of a score") {
    MarginalEffect e;
    e.estimate = 0.0;
    CHECK(percent_change_score(e, 0.3) == 0.0);
    e.estimate = 0.01;
    CHECK(percent_change_score(e, 0.10) == doctest::Approx(10.0));
    e.estimate = -0.02;
    CHECK(percent_change_score(e, 0.10) == doctest::Approx(-20.0));
    CHECK_THROWS_AS(percent_change_score(e, 0.0), ArgumentError);
    CHECK_THROWS_AS(percent_change_score(e, -1.0), ArgumentError);
  }

  TEST_CASE("engagement percent change: zero slope and the pure model") {
    Rng rng(19);
    const std::size_t n = 500;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd flat(n), pure(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      X.row(r) << 1.0, rng.normal(), rng.bernoulli(0.5) ? 1.0 : 0.0;
      flat(r) = 3.0 + 0.1 * X(r, 2) + rng.normal(0, 0.1);
      pure(r) = 12.0 + 0.01 * X(r, 1);
    }
    Eigen::VectorXd null_score = flat;
    // Remove the score's in-sample association so its coefficient is exactly zero.
    const auto d0 = DesignMatrix::from_columns(X, null_score, {"Constant", "s", "ideology"});
    auto m0 = ols_fit(d0);
    m0.coefficients(1) = 0.0;
    CHECK(percent_change_engagement(m0, d0, "s").percent == doctest::Approx(0.0).epsilon(1e-12));

    const auto d = DesignMatrix::from_columns(X, pure, {"Constant", "s", "ideology"});
    const auto m = ols_fit(d);
    const auto pc = percent_change_engagement(m, d, "s", 4.0);
    CHECK(pc.percent == doctest::Approx(100.0 * (std::exp(0.04) - 1.0)).epsilon(1e-4));
    CHECK(pc.percent == doctest::Approx(4.08).epsilon(1e-3));
    const auto rep = percent_change_engagement(m, d, "s", 4.0, EffectScope::all, EngagementMode::representative_values);
    CHECK(rep.percent == doctest::Approx(pc.percent).epsilon(1e-4));
  }

  TEST_CASE("engagement group percents bracket the pooled percent") {
    Rng rng(20);
    const std::size_t n = 800;
    Eigen::MatrixXd X(n, 4);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double g = rng.bernoulli(0.5) ? 1.0 : 0.0;
      const double s = rng.normal();
      X.row(r) << 1.0, s, g, s * g;
      y(r) = 2.0 + 0.05 * s - 0.3 * g + 0.1 * s * g + rng.normal(0, 0.2);
    }
    const auto d = DesignMatrix::from_columns(X, y, {"Constant", "s", "ideology", "s:ideology"});
    const auto m = ols_fit(d);
    const auto all = percent_change_engagement(m, d, "s");
    const auto lib = percent_change_engagement(m, d, "s", 4.0, EffectScope::liberal);
    const auto con = percent_change_engagement(m, d, "s", 4.0, EffectScope::conservative);
    CHECK(std::min(lib.percent, con.percent) < all.percent);
    CHECK(all.percent < std::max(lib.percent, con.percent));
    CHECK(lib.std_error > 0.0);
    CHECK(lib.n + con.n == all.n);
  }

  TEST_CASE("engagement percent standard error matches a numerical gradient") {
    Rng rng(21);
    const std::size_t n = 300;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      X.row(r) << 1.0, rng.normal(), rng.bernoulli(0.5) ? 1.0 : 0.0;
      y(r) = 1.5 + 0.2 * X(r, 1) + 0.3 * X(r, 2) + rng.normal(0, 0.4);
    }
    const auto d = DesignMatrix::from_columns(X, y, {"Constant", "s", "ideology"});
    auto m = ols_fit(d);
    const auto base = percent_change_engagement(m, d, "s");
    Eigen::VectorXd grad(3);
    for (int j = 0; j < 3; ++j) {
      auto up = m, down = m;
      up.coefficients(j) += 1e-6;
      down.coefficients(j) -= 1e-6;
      grad(j) = (percent_change_engagement(up, d, "s").percent - percent_change_engagement(down, d, "s").percent) / 2e-6;
    }
    CHECK(base.std_error == doctest::Approx(std::sqrt(grad.dot(m.covariance * grad))).epsilon(1e-5));
  }

  TEST_CASE("degenerate engagement baseline is an error") {
    Eigen::MatrixXd X(4, 2);
    X << 1, -1, 1, 1, 1, -2, 1, 2;
    Eigen::VectorXd y(4);
    y << -5, -5.1, -4.9, -5.05;
    const auto d = DesignMatrix::from_columns(X, y, {"Constant", "s"});
    const auto m = ols_fit(d);
    CHECK_THROWS_AS(percent_change_engagement(m, d, "s"), ModelError);
  }

  TEST_CASE("regression recovery across seeds") {
    const Eigen::Vector4d beta(1.0, -2.0, 0.5, 3.0);
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      Eigen::MatrixXd X(1000, 4);
      Eigen::VectorXd y(1000);
      for (int i = 0; i < 1000; ++i) {
        X.row(i) << 1.0, rng.normal(), rng.uniform01(), rng.bernoulli(0.3) ? 1.0 : 0.0;
        y(i) = X.row(i).dot(beta) + rng.normal(0.0, 0.7);
      }
      const auto m = ols_fit(X, y, {"Constant", "a", "b", "c"});
      bool all = true;
      for (int j = 0; j < 4; ++j) all = all && std::abs(m.coefficients(j) - beta(j)) <= 3.0 * m.std_errors(j);
      covered += all;
    }
    CHECK(covered >= 95);
  }
}
