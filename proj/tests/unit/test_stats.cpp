#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "scenmap/error.hpp"
#include "scenmap/stats.hpp"

namespace scenmap::stats {
namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::io;
}

TEST(Pearson, PerfectPositive) {
  const std::vector<double> x{1, 2, 3}, y{2, 4, 6};
  const auto r = pearson(x, y);
  EXPECT_NEAR(r.r, 1.0, 1e-15);
  EXPECT_EQ(r.n, 3);
  EXPECT_EQ(r.df, 1);
  EXPECT_EQ(r.p, 0.0);
}

TEST(Pearson, PairwiseDeletion) {
  const Column x{1.0, 2.0, std::nullopt, 4.0, 5.0};
  const Column y{2.0, 1.0, 3.0, std::nullopt, 4.0};
  const auto r = pearson(x, y);
  EXPECT_EQ(r.n, 3);
  // pairs (1,2) (2,1) (5,4)
  const auto direct = pearson(std::vector<double>{1, 2, 5}, std::vector<double>{2, 1, 4});
  EXPECT_DOUBLE_EQ(r.r, direct.r);
}

TEST(Pearson, Errors) {
  EXPECT_EQ(kind_of([] { pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}); }), ErrorKind::invalid_input);
  EXPECT_EQ(kind_of([] { pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}); }), ErrorKind::degenerate);
  EXPECT_THROW(pearson(Column{1.0, 2.0}, Column{1.0}), Error);
}

TEST(Pearson, TStatisticAgainstIntegratedDensity) {
  // r = 0.5 on 12 pairs: t = 0.5 * sqrt(10 / 0.75)
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::vector<double> y(12);
  // Construct y with correlation exactly 0.5: y = 0.5 z(x) + sqrt(0.75) z(e), e orthogonal to x.
  std::vector<double> e{1, -1, -1, 1, 1, -1, -1, 1, 1, -1, -1, 1};
  // centre e and remove its projection on x
  double me = 0, mx = 6.5;
  for (double v : e) me += v / 12;
  double exx = 0, exe = 0;
  for (int i = 0; i < 12; ++i) {
    e[i] -= me;
    exx += (x[i] - mx) * (x[i] - mx);
    exe += (x[i] - mx) * e[i];
  }
  for (int i = 0; i < 12; ++i) e[i] -= exe / exx * (x[i] - mx);
  double ee = 0;
  for (double v : e) ee += v * v;
  for (int i = 0; i < 12; ++i) y[i] = 0.5 * (x[i] - mx) / std::sqrt(exx) + std::sqrt(0.75) * e[i] / std::sqrt(ee);
  const auto r = pearson(x, y);
  EXPECT_NEAR(r.r, 0.5, 1e-12);
  EXPECT_NEAR(r.t, 1.82574185835055, 1e-9);
  EXPECT_NEAR(r.p, 0.0978546142578125, 1e-9);
  EXPECT_NEAR(r.p, testing::simpson_two_tailed_p(r.t, 10), 1e-9);
}

TEST(Pearson, PValueMatchesQuadratureAcrossDf) {
  for (double df : {1.0, 3.0, 10.0, 18.0, 50.0}) {
    for (double t : {0.1, 0.9, 2.1, 3.7}) {
      EXPECT_NEAR(student_t_two_tailed_p(t, df), testing::simpson_two_tailed_p(t, df), 1e-9) << df << " " << t;
      EXPECT_DOUBLE_EQ(student_t_two_tailed_p(-t, df), student_t_two_tailed_p(t, df));
    }
  }
}

TEST(Pearson, SymmetryAndAffineInvariance) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(0.1, 10.0), shift(-5, 5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(20), y(20);
    for (int i = 0; i < 20; ++i) {
      x[i] = g(rng);
      y[i] = 0.3 * x[i] + g(rng);
    }
    const auto a = pearson(x, y), b = pearson(y, x);
    EXPECT_NEAR(a.r, b.r, 1e-14);
    EXPECT_GE(a.r, -1.0);
    EXPECT_LE(a.r, 1.0);
    const double s = scale(rng), c = shift(rng);
    std::vector<double> x2 = x;
    for (auto& v : x2) v = s * v + c;
    EXPECT_NEAR(pearson(x2, y).r, a.r, 1e-12);
    for (auto& v : x2) v = -v;
    EXPECT_NEAR(pearson(x2, y).r, -a.r, 1e-12);
  }
}

TEST(Ols, ExactLine) {
  const auto r = ols(to_column(std::vector<double>{3, 5, 7, 9}), {to_column(std::vector<double>{0, 1, 2, 3})});
  EXPECT_NEAR(r.intercept, 3.0, 1e-12);
  EXPECT_NEAR(r.coefficients[0], 2.0, 1e-12);
  EXPECT_NEAR(r.r_squared, 1.0, 1e-12);
  EXPECT_EQ(r.predictors[0], "x1");
  EXPECT_EQ(r.n, 4);
}

TEST(Ols, OrthogonalPredictors) {
  const Column y{1.0, 2.0, 3.0, 4.0}, x1{1.0, 1.0, -1.0, -1.0}, x2{1.0, -1.0, 1.0, -1.0};
  const auto r = ols(y, {x1, x2}, {"a", "b"});
  EXPECT_NEAR(r.intercept, 2.5, 1e-12);
  EXPECT_NEAR(r.coefficients[0], -1.0, 1e-12);
  EXPECT_NEAR(r.coefficients[1], -0.5, 1e-12);
  EXPECT_NEAR(r.r_squared, 1.0, 1e-12);
}

TEST(Ols, ListwiseDeletion) {
  const Column y{3.0, 5.0, std::nullopt, 9.0, 100.0}, x{0.0, 1.0, 2.0, 3.0, std::nullopt};
  const auto r = ols(y, {x});
  EXPECT_EQ(r.n, 3);
  EXPECT_NEAR(r.coefficients[0], 2.0, 1e-12);
}

TEST(Ols, RankDeficiencyNamesPredictor) {
  const Column y{1.0, 2.0, 4.0, 3.0}, x1{1.0, 2.0, 3.0, 4.0}, x2{2.0, 4.0, 6.0, 8.0};
  try {
    ols(y, {x1, x2}, {"risk", "risk2"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::rank_deficient);
    EXPECT_NE(std::string(e.what()).find("risk2"), std::string::npos);
  }
  EXPECT_THROW(ols(y, {Column{5.0, 5.0, 5.0, 5.0}}, {"constant"}), Error);
}

TEST(Ols, TooFewRowsAndConstantOutcome) {
  EXPECT_THROW(ols(Column{1.0, 2.0}, {Column{1.0, 2.0}}), Error);
  EXPECT_THROW(ols(Column{1.0, 1.0, 1.0}, {Column{1.0, 2.0, 3.0}}), Error);
}

TEST(Ols, ResidualOrthogonalityAndReconstruction) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 8 + trial % 20;
    const int p = 1 + trial % 3;
    Column y(n);
    std::vector<Column> X(p, Column(n));
    for (int i = 0; i < n; ++i) {
      double v = 0.5;
      for (int j = 0; j < p; ++j) {
        X[j][i] = g(rng);
        v += (j + 1) * *X[j][i];
      }
      y[i] = v + g(rng);
    }
    const auto r = ols(y, X);
    double sum_res = 0;
    for (int i = 0; i < n; ++i) {
      double fit = r.intercept;
      for (int j = 0; j < p; ++j) fit += r.coefficients[j] * *X[j][i];
      EXPECT_NEAR(fit, r.fitted[i], 1e-9);
      EXPECT_NEAR(*y[i], r.fitted[i] + r.residuals[i], 1e-9);
      sum_res += r.residuals[i];
    }
    EXPECT_NEAR(sum_res, 0.0, 1e-9);
    for (int j = 0; j < p; ++j) {
      double dot = 0;
      for (int i = 0; i < n; ++i) dot += r.residuals[i] * *X[j][i];
      EXPECT_NEAR(dot, 0.0, 1e-8);
    }
    EXPECT_GE(r.r_squared, 0.0);
    EXPECT_LE(r.r_squared, 1.0);
  }
}

TEST(Ols, RSquaredNeverDropsWithExtraPredictor) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    Column y(15), a(15), b(15);
    for (int i = 0; i < 15; ++i) {
      a[i] = g(rng);
      b[i] = g(rng);
      y[i] = *a[i] + g(rng);
    }
    EXPECT_GE(ols(y, {a, b}).r_squared, ols(y, {a}).r_squared - 1e-12);
  }
}

TEST(Ols, SingleStandardizedSlopeIsPearson) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    Column x(12), y(12);
    for (int i = 0; i < 12; ++i) {
      x[i] = g(rng);
      y[i] = -0.7 * *x[i] + g(rng);
    }
    const auto r = ols(y, {x});
    const auto c = pearson(x, y);
    EXPECT_NEAR(r.betas[0], c.r, 1e-12);
    EXPECT_NEAR(r.r_squared, c.r * c.r, 1e-12);
  }
}

RatingMatrix matrix(const std::vector<std::vector<double>>& rows) {
  RatingMatrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t t = 0; t < rows[r].size(); ++t) m.at(r, t) = rows[r][t];
  return m;
}

TEST(Icc, PerfectAgreement) {
  const auto m = matrix({{0.5, -0.5, 1.0}, {0.5, -0.5, 1.0}});
  for (auto model : {IccModel::oneway, IccModel::twoway_consistency, IccModel::twoway_agreement}) {
    const auto r = icc(m, model);
    EXPECT_NEAR(r.single, 1.0, 1e-9);
    EXPECT_NEAR(r.average, 1.0, 1e-9);
  }
}

TEST(Icc, ConstantMatrixIsDegenerate) {
  const auto m = matrix({{0.3, 0.3, 0.3}, {0.3, 0.3, 0.3}});
  EXPECT_EQ(kind_of([&] { icc(m); }), ErrorKind::degenerate);
}

TEST(Icc, HandWorkedFixture) {
  // Raters in rows, topics in columns.
  const auto m = matrix({{1, 3, 2, 6}, {2, 4, 2, 7}, {1, 5, 4, 6}});
  const auto a = icc(m, IccModel::twoway_agreement);
  EXPECT_NEAR(a.mean_squares.between_targets, 13.6388888888889, 1e-9);
  EXPECT_NEAR(a.mean_squares.between_raters, 1.08333333333333, 1e-9);
  EXPECT_NEAR(a.mean_squares.residual, 0.638888888888891, 1e-9);
  EXPECT_NEAR(a.mean_squares.within_targets, 0.75, 1e-9);
  EXPECT_NEAR(a.single, 0.852459016393442, 1e-9);
  EXPECT_NEAR(a.average, 0.945454545454545, 1e-9);
  const auto c = icc(m, IccModel::twoway_consistency);
  EXPECT_NEAR(c.single, 0.871508379888268, 1e-9);
  EXPECT_NEAR(c.average, 0.95315682281059, 1e-9);
  const auto o = icc(m, IccModel::oneway);
  EXPECT_NEAR(o.single, 0.85137614678899, 1e-9);
  EXPECT_NEAR(o.average, 0.945010183299389, 1e-9);
  EXPECT_EQ(a.raters, 3);
  EXPECT_EQ(a.targets, 4);
}

TEST(Icc, RaterPermutationInvariance) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> v(1, 7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> rows(4, std::vector<double>(6));
    for (auto& row : rows)
      for (auto& x : row) x = v(rng);
    const auto a = icc(matrix(rows));
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto b = icc(matrix(rows));
    EXPECT_NEAR(a.single, b.single, 1e-12);
    EXPECT_NEAR(a.average, b.average, 1e-12);
  }
}

TEST(Icc, ListwiseDeletionOfRaters) {
  auto m = matrix({{1, 3, 2, 6}, {2, 4, 2, 7}, {1, 5, 4, 6}, {7, 1, 1, 1}});
  m.at(3, 2) = std::nullopt;
  const auto r = icc(m);
  EXPECT_EQ(r.raters, 3);
  EXPECT_NEAR(r.single, 0.852459016393442, 1e-9);
}

TEST(Icc, ModelNames) {
  for (auto model : {IccModel::oneway, IccModel::twoway_consistency, IccModel::twoway_agreement})
    EXPECT_EQ(parse_icc_model(to_string(model)), model);
  EXPECT_THROW(parse_icc_model("icc9"), Error);
}

TEST(SampleSize, TextbookCases) {
  EXPECT_EQ(required_sample_size(CriticalZ{1.96}, 1.0, 0.5).n, 16);
  EXPECT_EQ(required_sample_size(CriticalZ{1.96}, 0.5, 0.5).n, 4);
  EXPECT_EQ(required_sample_size(CriticalZ{1.0}, 1.0, 0.6).n, 3);
  // sigma chosen so the raw value is exactly 100 up to rounding noise
  EXPECT_EQ(required_sample_size(CriticalZ{1.96}, 2.5 / 1.96, 0.25).n, 100);
}

TEST(SampleSize, ConfidenceOverloadUsesNormalQuantile) {
  EXPECT_NEAR(critical_z(Confidence{0.95}), 1.959963984540054, 1e-12);
  const auto plan = required_sample_size(Confidence{0.95}, 1.276, 0.25);
  EXPECT_NEAR(plan.raw, 100.07, 0.01);
  EXPECT_EQ(plan.n, 101);
  EXPECT_NEAR(achieved_margin(100, 1.276, Confidence{0.95}), 0.250091, 1e-6);
  EXPECT_THROW(critical_z(Confidence{1.0}), Error);
  EXPECT_THROW(critical_z(Confidence{0.0}), Error);
}

TEST(SampleSize, InvalidArguments) {
  EXPECT_THROW(required_sample_size(CriticalZ{1.96}, 0.0, 0.25), Error);
  EXPECT_THROW(required_sample_size(CriticalZ{1.96}, 1.0, 0.0), Error);
  EXPECT_THROW(achieved_margin(0, 1.0, CriticalZ{1.96}), Error);
}

TEST(SampleSize, MonotoneAndConsistentWithAchievedMargin) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> sig(0.2, 3.0), mar(0.05, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double s = sig(rng), e = mar(rng);
    const auto plan = required_sample_size(CriticalZ{1.96}, s, e);
    EXPECT_GE(required_sample_size(CriticalZ{1.96}, s * 1.1, e).n, plan.n);
    EXPECT_LE(required_sample_size(CriticalZ{1.96}, s, e * 1.1).n, plan.n);
    EXPECT_LE(achieved_margin(plan.n, s, CriticalZ{1.96}), e * (1 + 1e-9));
    if (plan.n > 1) {
      EXPECT_GT(achieved_margin(plan.n - 1, s, CriticalZ{1.96}), e * (1 - 1e-9));
    }
  }
}

TEST(Descriptives, Basics) {
  const Column v{1.0, std::nullopt, 3.0, 2.0};
  EXPECT_EQ(*mean(v), 2.0);
  EXPECT_EQ(*median(v), 2.0);
  EXPECT_DOUBLE_EQ(*sample_sd(v), 1.0);
  EXPECT_FALSE(mean(Column{std::nullopt}));
  EXPECT_FALSE(sample_sd(Column{1.0}));
}

TEST(Json, StableFieldNames) {
  const auto j = to_json(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}));
  for (const char* key : {"\"r\"", "\"n\"", "\"df\"", "\"t\"", "\"p\""}) EXPECT_NE(j.find(key), std::string::npos) << key;
  EXPECT_NE(to_json(required_sample_size(CriticalZ{1.96}, 1.0, 0.5)).find("\"n\": 16"), std::string::npos);
}

}  // namespace
}  // namespace scenmap::stats
