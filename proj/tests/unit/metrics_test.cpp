#include "dicnet/core/error.hpp"
#include "dicnet/metrics/metrics.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <numeric>

namespace dicnet {
namespace {

using namespace dicnet::testing;

Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()),
           static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : values) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

// ---- hand-computed cases -------------------------------------------------------------

TEST(MetricsHand, AveragePrecision) {
  // Positives at ranks 1 and 3: (1/1 + 2/3) / 2.
  const MetricValue ap = average_precision(rows({{0.9, 0.8, 0.7}}), rows({{1, 0, 1}}));
  EXPECT_NEAR(ap.value, 5.0 / 6.0, 1e-15);
  EXPECT_EQ(ap.skipped, 0u);
}

TEST(MetricsHand, RankingLoss) {
  EXPECT_NEAR(ranking_loss(rows({{0.9, 0.8, 0.7}}), rows({{1, 0, 1}})).value, 0.5, 1e-15);
  // A tie counts one half.
  EXPECT_NEAR(ranking_loss(rows({{0.4, 0.4}}), rows({{1, 0}})).value, 0.5, 1e-15);
}

TEST(MetricsHand, HammingLoss) {
  EXPECT_NEAR(hamming_loss(rows({{1, 1, 0}}), rows({{1, 0, 1}})), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(hamming_loss(rows({{1, 0}, {0, 1}}), rows({{1, 0}, {0, 1}})), 0.0);
}

TEST(MetricsHand, Auc) {
  // Pairs (0.9,0.6) (0.9,0.2) (0.4,0.6) (0.4,0.2): three of four ordered.
  const MetricValue auc = auc_adapted(rows({{0.9}, {0.4}, {0.6}, {0.2}}), rows({{1}, {1}, {0}, {0}}));
  EXPECT_NEAR(auc.value, 0.75, 1e-15);
  EXPECT_NEAR(auc_adapted(rows({{0.5}, {0.5}}), rows({{1}, {0}})).value, 0.5, 1e-15);
}

TEST(MetricsHand, SinglePositiveRankedLastGivesOneOverC) {
  for (int c : {2, 5, 10}) {
    Matrix scores(1, c), truth = Matrix::Zero(1, c);
    for (int j = 0; j < c; ++j) scores(0, j) = 1.0 - 0.05 * j;
    truth(0, c - 1) = 1.0;
    EXPECT_NEAR(average_precision(scores, truth).value, 1.0 / c, 1e-15);
    EXPECT_NEAR(ranking_loss(scores, truth).value, 1.0, 1e-15);
  }
}

TEST(MetricsHand, AveragePrecisionTiesFollowLabelIndex) {
  EXPECT_NEAR(average_precision(rows({{0.5, 0.5}}), rows({{0, 1}})).value, 0.5, 1e-15);
  EXPECT_NEAR(average_precision(rows({{0.5, 0.5}}), rows({{1, 0}})).value, 1.0, 1e-15);
}

// ---- oracle agreement ----------------------------------------------------------------

class MetricOracle : public ::testing::TestWithParam<int> {};

TEST_P(MetricOracle, AgreesWithBruteForce) {
  std::mt19937_64 gen(static_cast<std::uint64_t>(GetParam()));
  std::uniform_int_distribution<int> size(1, 12);
  const Eigen::Index n = size(gen) + 2, c = size(gen) + 1;
  const bool tied = GetParam() % 2 == 0;
  const Matrix scores = tied ? random_tied_scores(gen, n, c) : random_matrix(gen, n, c, 0.0, 1.0);
  Matrix truth = random_binary(gen, n, c, 0.4);
  truth(0, 0) = 1.0;  // at least one scorable row and label
  truth(1, 0) = 0.0;
  if (c > 1) truth(0, 1) = 0.0;
  const Matrix binary = (scores.array() >= 0.5).cast<double>().matrix();

  EXPECT_NEAR(average_precision(scores, truth).value, oracle_average_precision(scores, truth), 1e-12);
  if (c > 1) {
    EXPECT_NEAR(ranking_loss(scores, truth).value, oracle_ranking_loss(scores, truth), 1e-12);
  }
  EXPECT_NEAR(hamming_loss(binary, truth), oracle_hamming_loss(binary, truth), 1e-12);
  EXPECT_NEAR(auc_adapted(scores, truth).value, oracle_auc(scores, truth), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Random, MetricOracle, ::testing::Range(0, 200));

// ---- invariants ---------------------------------------------------------------------

TEST(MetricsProperty, InvariantUnderStrictlyIncreasingTransform) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix scores = random_tied_scores(gen, 20, 6);
    const Matrix truth = random_binary(gen, 20, 6, 0.4);
    const Matrix moved = (scores.array().cube() * 7.0 + 3.0).matrix();
    EXPECT_NEAR(average_precision(scores, truth).value, average_precision(moved, truth).value, 1e-12);
    EXPECT_NEAR(ranking_loss(scores, truth).value, ranking_loss(moved, truth).value, 1e-12);
    EXPECT_NEAR(auc_adapted(scores, truth).value, auc_adapted(moved, truth).value, 1e-12);
  }
}

TEST(MetricsProperty, InvariantUnderSamplePermutation) {
  std::mt19937_64 gen(18);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix scores = random_matrix(gen, 15, 5, 0.0, 1.0);
    const Matrix truth = random_binary(gen, 15, 5, 0.4);
    std::vector<int> order(15);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), gen);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(15);
    for (int i = 0; i < 15; ++i) perm.indices()(i) = order[static_cast<std::size_t>(i)];
    const Matrix ps = perm * scores, pt = perm * truth;
    EXPECT_NEAR(average_precision(scores, truth).value, average_precision(ps, pt).value, 1e-12);
    EXPECT_NEAR(ranking_loss(scores, truth).value, ranking_loss(ps, pt).value, 1e-12);
    EXPECT_NEAR(auc_adapted(scores, truth).value, auc_adapted(ps, pt).value, 1e-12);
  }
}

TEST(MetricsProperty, ValuesStayInUnitInterval) {
  std::mt19937_64 gen(19);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix scores = random_tied_scores(gen, 10, 4);
    Matrix truth = random_binary(gen, 10, 4, 0.5);
    truth(0, 0) = 1.0;
    truth(0, 1) = 0.0;
    truth(1, 0) = 0.0;
    for (double v : {average_precision(scores, truth).value, ranking_loss(scores, truth).value,
                     auc_adapted(scores, truth).value}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

// ---- degenerate rows and labels -------------------------------------------------------

TEST(MetricsDegenerate, SkipCounts) {
  const Matrix scores = rows({{0.9, 0.1}, {0.3, 0.6}, {0.2, 0.8}});
  const Matrix truth = rows({{1, 0}, {0, 0}, {1, 1}});
  EXPECT_EQ(average_precision(scores, truth).skipped, 1u);  // row 1 has no positive
  EXPECT_EQ(ranking_loss(scores, truth).skipped, 2u);       // rows 1 and 2
  EXPECT_EQ(auc_adapted(scores, truth).skipped, 0u);
  EXPECT_EQ(auc_adapted(scores, rows({{1, 0}, {1, 0}, {1, 1}})).skipped, 1u);  // label 0 all positive
}

TEST(MetricsDegenerate, AllSkippedIsAnError) {
  const Matrix scores = rows({{0.9, 0.1}, {0.3, 0.6}});
  EXPECT_THROW(average_precision(scores, Matrix::Zero(2, 2)), ValidationError);
  EXPECT_THROW(ranking_loss(scores, Matrix::Ones(2, 2)), ValidationError);
  EXPECT_THROW(auc_adapted(scores, Matrix::Ones(2, 2)), ValidationError);
}

TEST(MetricsErrors, ShapesAndValues) {
  EXPECT_THROW(average_precision(Matrix::Zero(2, 2), Matrix::Zero(2, 3)), ShapeError);
  EXPECT_THROW(auc_adapted(Matrix::Zero(2, 2), Matrix::Constant(2, 2, 0.5)), ValidationError);
  EXPECT_THROW(hamming_loss(Matrix::Constant(2, 2, 0.3), Matrix::Zero(2, 2)), ValidationError);
}

// ---- reports and aggregation --------------------------------------------------------

TEST(EvalReportTest, CombinesMetricsAndSerialises) {
  const Matrix scores = rows({{0.9, 0.8, 0.7}, {0.2, 0.6, 0.4}});
  const Matrix truth = rows({{1, 0, 1}, {0, 1, 0}});
  const Matrix binary = (scores.array() >= 0.5).cast<double>().matrix();
  const EvalReport r = evaluate_all(scores, binary, truth);
  EXPECT_NEAR(r.average_precision, average_precision(scores, truth).value, 0.0);
  EXPECT_NEAR(r.one_minus_hamming, 1.0 - hamming_loss(binary, truth), 0.0);
  EXPECT_NEAR(r.one_minus_ranking, 1.0 - ranking_loss(scores, truth).value, 0.0);
  EXPECT_EQ(r.n_test, 2u);
  EXPECT_EQ(r.c, 3u);
  const auto j = nlohmann::json::parse(r.to_json());
  for (const char* key : {"ap", "auc", "one_minus_hl", "one_minus_rl", "n_test", "c", "ap_skipped",
                          "rl_skipped", "auc_skipped"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Aggregate, SampleStandardDeviation) {
  const MetricSummary s = summarize({0.1, 0.3});
  EXPECT_NEAR(s.mean, 0.2, 1e-15);
  EXPECT_NEAR(s.std, std::sqrt(0.02), 1e-15);
  EXPECT_EQ(summarize({0.7}).std, 0.0);

  EvalReport a, b;
  a.average_precision = 0.8;
  b.average_precision = 0.9;
  const AggregateReport agg = aggregate({a, b}, {1, 2});
  EXPECT_NEAR(agg.average_precision.mean, 0.85, 1e-15);
  EXPECT_EQ(agg.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_TRUE(nlohmann::json::parse(agg.to_json()).is_object());
  EXPECT_THROW(aggregate({}, {}), ValidationError);
  EXPECT_THROW(aggregate({a}, {1, 2}), ValidationError);
}

}  // namespace
}  // namespace dicnet
