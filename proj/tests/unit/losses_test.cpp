#include "dicnet/core/error.hpp"
#include "dicnet/data/dataset.hpp"
#include "dicnet/diffcore/gradcheck.hpp"
#include "dicnet/losses/losses.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace dicnet {
namespace {

using namespace dicnet::testing;

constexpr double kOracleTolerance = 1e-10;

Matrix row(std::initializer_list<double> values) {
  Matrix m(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index j = 0;
  for (double v : values) m(0, j++) = v;
  return m;
}

std::vector<Var> constants(Graph& g, const std::vector<Matrix>& ms) {
  std::vector<Var> out;
  for (const Matrix& m : ms) out.push_back(g.constant(m));
  return out;
}

double contrastive_value(const std::vector<Matrix>& z, const Matrix& w, double tau) {
  Graph g;
  return g.forward(contrastive_loss(constants(g, z), w, tau))(0, 0);
}

double pair_value(const std::vector<Matrix>& z, std::size_t v, std::size_t u, const Matrix& w,
                  double tau) {
  Graph g;
  auto vars = constants(g, z);
  return g.forward(contrastive_pair_loss(vars[v], vars[u], v, u, w, tau))(0, 0);
}

// ---- reconstruction --------------------------------------------------------------

TEST(Reconstruction, PerfectReconstructionIsZero) {
  std::mt19937_64 gen(1);
  const std::vector<Matrix> x{random_matrix(gen, 4, 3), random_matrix(gen, 4, 5)};
  Graph g;
  auto in = constants(g, x);
  EXPECT_EQ(g.forward(reconstruction_loss(in, in, Matrix::Ones(4, 2)))(0, 0), 0.0);
}

TEST(Reconstruction, HandValueUnderPerFeatureScaling) {
  Graph g;
  std::vector<Var> x{g.constant(row({1, 0}))}, xh{g.constant(row({0, 0}))};
  EXPECT_EQ(g.forward(reconstruction_loss(x, xh, Matrix::Ones(1, 1),
                                          ReconstructionScale::kPerFeature))(0, 0),
            0.5);
}

TEST(Reconstruction, MatchesOracleInBothScalings) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 7, l = 1 + trial % 3;
    std::vector<Matrix> x, xh;
    for (Eigen::Index v = 0; v < l; ++v) {
      x.push_back(random_matrix(gen, n, 2 + v));
      xh.push_back(random_matrix(gen, n, 2 + v));
    }
    const Matrix w = random_view_mask(gen, n, l);
    for (bool per_sample : {false, true}) {
      Graph g;
      const double got = g.forward(reconstruction_loss(
          constants(g, x), constants(g, xh), w,
          per_sample ? ReconstructionScale::kPerFeaturePerSample
                     : ReconstructionScale::kPerFeature))(0, 0);
      EXPECT_NEAR(got, oracle_reconstruction(x, xh, w, per_sample), 1e-12);
    }
  }
}

TEST(Reconstruction, MaskedCellsDoNotMatter) {
  std::mt19937_64 gen(3);
  std::vector<Matrix> x{random_matrix(gen, 5, 3), random_matrix(gen, 5, 3)};
  std::vector<Matrix> xh{random_matrix(gen, 5, 3), random_matrix(gen, 5, 3)};
  Matrix w = Matrix::Ones(5, 2);
  w(2, 1) = 0.0;
  Graph g1;
  const double before = g1.forward(reconstruction_loss(constants(g1, x), constants(g1, xh), w))(0, 0);
  xh[1].row(2).setConstant(1e6);
  x[1].row(2).setConstant(-7.0);
  Graph g2;
  EXPECT_EQ(g2.forward(reconstruction_loss(constants(g2, x), constants(g2, xh), w))(0, 0), before);
}

TEST(Reconstruction, Errors) {
  Graph g;
  std::vector<Var> a{g.constant(Matrix::Zero(2, 3))}, b{g.constant(Matrix::Zero(2, 4))};
  EXPECT_THROW((void)reconstruction_loss(a, b, Matrix::Ones(2, 1)), ShapeError);
  Matrix half = Matrix::Ones(2, 1);
  half(0, 0) = 0.5;
  EXPECT_THROW((void)reconstruction_loss(a, a, half), ValidationError);
  EXPECT_THROW((void)reconstruction_loss(a, a, Matrix::Ones(2, 2)), ShapeError);
}

// ---- cosine similarity -------------------------------------------------------------

TEST(Cosine, Examples) {
  const std::vector<double> a{1, 0}, b{1, 1}, c{0, 3}, z{0, 0};
  EXPECT_EQ(cosine_similarity(a, b), 0.7071067811865475);
  EXPECT_EQ(cosine_similarity(b, b), 1.0);
  EXPECT_EQ(cosine_similarity(a, c), 0.0);
  EXPECT_EQ(cosine_similarity(a, z), 0.0);
  EXPECT_THROW((void)cosine_similarity(a, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(Cosine, SymmetricAndMatrixFormAgrees) {
  std::mt19937_64 gen(4);
  const Matrix a = random_matrix(gen, 5, 3), b = random_matrix(gen, 4, 3);
  Graph g;
  const Matrix s = g.forward(cosine_similarity_matrix(g.constant(a), g.constant(b)));
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      const std::vector<double> ai(a.row(i).data(), a.row(i).data() + 3);
      const std::vector<double> bj(b.row(j).data(), b.row(j).data() + 3);
      EXPECT_EQ(cosine_similarity(ai, bj), cosine_similarity(bj, ai));
      EXPECT_NEAR(s(i, j), cosine_similarity(ai, bj), 1e-15);
      EXPECT_NEAR(s(i, j), oracle_cosine(a, i, b, j), 1e-15);
    }
  }
}

// ---- contrastive ---------------------------------------------------------------

TEST(Contrastive, NoAvailablePairsGivesZero) {
  std::mt19937_64 gen(5);
  const std::vector<Matrix> z{random_matrix(gen, 4, 3), random_matrix(gen, 4, 3)};
  Matrix w(4, 2);
  w << 1, 0, 0, 1, 1, 0, 0, 1;
  EXPECT_EQ(pair_value(z, 0, 1, w, 0.5), 0.0);
}

TEST(Contrastive, TwoByTwoIdentityMatchesOracle) {
  const Matrix eye = Matrix::Identity(2, 2);
  const std::vector<Matrix> z{eye, eye};
  const Matrix w = Matrix::Ones(2, 2);
  EXPECT_NEAR(pair_value(z, 0, 1, w, 0.5), oracle_contrastive_pair(z, 0, 1, w, 0.5),
              kOracleTolerance);
  // Hand value: positive e^2, negatives e^0 from each view.
  EXPECT_NEAR(pair_value(z, 0, 1, w, 0.5), -std::log(std::exp(2.0) / (std::exp(2.0) + 2.0)),
              1e-14);
}

TEST(Contrastive, TwoViewsExpandToHalfOfOrderedPairs) {
  std::mt19937_64 gen(6);
  const std::vector<Matrix> z{random_matrix(gen, 5, 3), random_matrix(gen, 5, 3)};
  const Matrix w = random_view_mask(gen, 5, 2);
  EXPECT_NEAR(contrastive_value(z, w, 0.5),
              0.5 * (pair_value(z, 0, 1, w, 0.5) + pair_value(z, 1, 0, w, 0.5)), 1e-14);
}

TEST(Contrastive, SingleViewIsZero) {
  std::mt19937_64 gen(7);
  EXPECT_EQ(contrastive_value({random_matrix(gen, 4, 3)}, Matrix::Ones(4, 1), 0.5), 0.0);
}

TEST(Contrastive, RandomInstancesMatchOracle) {
  std::mt19937_64 gen(8);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + trial % 8, l = 1 + trial % 3, d = 1 + trial % 4;
    std::vector<Matrix> z;
    for (Eigen::Index v = 0; v < l; ++v) z.push_back(random_matrix(gen, n, d));
    const Matrix w = random_view_mask(gen, n, l);
    const double tau = 0.2 + 0.1 * (trial % 9);
    worst = std::max(worst, std::abs(contrastive_value(z, w, tau) -
                                     oracle_contrastive_total(z, w, tau)));
    for (std::size_t v = 0; v < z.size(); ++v) {
      for (std::size_t u = 0; u < z.size(); ++u) {
        if (u == v) continue;
        worst = std::max(worst, std::abs(pair_value(z, v, u, w, tau) -
                                         oracle_contrastive_pair(z, v, u, w, tau)));
      }
    }
  }
  EXPECT_LT(worst, kOracleTolerance);
}

TEST(Contrastive, ThreeViewsFourSamples) {
  std::mt19937_64 gen(9);
  std::vector<Matrix> z;
  for (int v = 0; v < 3; ++v) z.push_back(random_matrix(gen, 4, 3));
  const Matrix w = Matrix::Ones(4, 3);
  EXPECT_NEAR(contrastive_value(z, w, 0.5), oracle_contrastive_total(z, w, 0.5), kOracleTolerance);
}

TEST(Contrastive, ZeroEmbeddingRowIsFinite) {
  std::mt19937_64 gen(10);
  std::vector<Matrix> z{random_matrix(gen, 4, 3), random_matrix(gen, 4, 3)};
  z[0].row(1).setZero();
  const Matrix w = Matrix::Ones(4, 2);
  const double value = contrastive_value(z, w, 0.5);
  EXPECT_TRUE(std::isfinite(value));
  EXPECT_NEAR(value, oracle_contrastive_total(z, w, 0.5), kOracleTolerance);
}

TEST(Contrastive, InvariantToPositiveRowScaling) {
  std::mt19937_64 gen(11);
  std::vector<Matrix> z{random_matrix(gen, 6, 4), random_matrix(gen, 6, 4)};
  const Matrix w = random_view_mask(gen, 6, 2);
  const double before = contrastive_value(z, w, 0.5);
  for (Matrix& m : z) m *= 3.75;
  EXPECT_NEAR(contrastive_value(z, w, 0.5), before, 1e-13);
}

TEST(Contrastive, UnavailableNegativesDoNotMatter) {
  std::mt19937_64 gen(12);
  std::vector<Matrix> z{random_matrix(gen, 5, 3), random_matrix(gen, 5, 3)};
  Matrix w = Matrix::Ones(5, 2);
  w(3, 1) = 0.0;
  const double before = pair_value(z, 0, 1, w, 0.5);
  z[1].row(3) = random_matrix(gen, 1, 3);
  EXPECT_EQ(pair_value(z, 0, 1, w, 0.5), before);
}

TEST(Contrastive, Errors) {
  Graph g;
  Var a = g.constant(Matrix::Ones(3, 2)), b = g.constant(Matrix::Ones(3, 2));
  const Matrix w = Matrix::Ones(3, 2);
  EXPECT_THROW((void)contrastive_pair_loss(a, b, 0, 1, w, 0.0), ValidationError);
  EXPECT_THROW((void)contrastive_pair_loss(a, b, 0, 1, w, -1.0), ValidationError);
  EXPECT_THROW((void)contrastive_pair_loss(a, b, 1, 1, w, 0.5), ValidationError);
  EXPECT_THROW((void)contrastive_pair_loss(a, g.constant(Matrix::Ones(3, 3)), 0, 1, w, 0.5),
               ShapeError);
  std::vector<Var> zs{a, b};
  EXPECT_THROW((void)contrastive_loss(zs, Matrix::Ones(3, 3), 0.5), ShapeError);
}

// ---- classification ----------------------------------------------------------------

TEST(Classification, FullyUnlabeledIsZero) {
  std::mt19937_64 gen(13);
  Graph g;
  Var p = g.constant(random_matrix(gen, 3, 4, 0.01, 0.99));
  EXPECT_EQ(g.forward(classification_loss(p, random_binary(gen, 3, 4), Matrix::Zero(3, 4)))(0, 0),
            0.0);
}

TEST(Classification, HalfProbabilityGivesLn2) {
  Graph g;
  Var p = g.constant(row({0.5}));
  EXPECT_NEAR(g.forward(classification_loss(p, row({1}), row({1})))(0, 0), 0.6931471805599453,
              1e-16);
}

TEST(Classification, MatchesOracleAndIgnoresHiddenLabels) {
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix p = random_matrix(gen, 5, 4, 0.0, 1.0);
    Matrix y = random_binary(gen, 5, 4);
    const Matrix gm = random_binary(gen, 5, 4, 0.7);
    Graph g1;
    const double v1 = g1.forward(classification_loss(g1.constant(p), y, gm))(0, 0);
    EXPECT_NEAR(v1, oracle_bce(p, y, gm), 1e-13);
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      if (gm.data()[k] == 0.0) y.data()[k] = 1.0 - y.data()[k];
    }
    Graph g2;
    EXPECT_EQ(g2.forward(classification_loss(g2.constant(p), y, gm))(0, 0), v1);
  }
}

TEST(Classification, SaturatedPredictionsStayFinite) {
  Graph g;
  Matrix p(1, 2);
  p << 0.0, 1.0;
  const double v = g.forward(classification_loss(g.constant(p), row({1, 0}), row({1, 1})))(0, 0);
  EXPECT_NEAR(v, -std::log(1e-12), 1e-9);
}

TEST(Classification, Errors) {
  Graph g;
  Var p = g.constant(Matrix::Constant(2, 2, 0.5));
  EXPECT_THROW((void)classification_loss(p, Matrix::Zero(2, 3), Matrix::Ones(2, 3)), ShapeError);
  Matrix y = Matrix::Zero(2, 2);
  y(0, 0) = 0.5;
  EXPECT_THROW((void)classification_loss(p, y, Matrix::Ones(2, 2)), ValidationError);
  EXPECT_THROW((void)classification_loss(p, Matrix::Zero(2, 2), y), ValidationError);
}

// ---- total ---------------------------------------------------------------------------

TEST(Total, Arithmetic) {
  const LossBreakdown b = total_loss(1.0, 2.0, 3.0, {0.5, 0.1, 0.5});
  EXPECT_NEAR(b.total, 2.3, 1e-15);
  // Recomposition in the same order is exact; the subtracted form only up to rounding.
  EXPECT_EQ(b.total, b.classification + 0.5 * b.contrastive + 0.1 * b.reconstruction);
  EXPECT_NEAR(b.total - b.classification - 0.5 * b.contrastive - 0.1 * b.reconstruction, 0.0,
              4 * std::numeric_limits<double>::epsilon() * b.total);
  EXPECT_EQ(total_loss(0.7, 5.0, 9.0, {0.0, 0.0, 0.5}).total, 0.7);
}

TEST(Total, GraphAndScalarFormsAgreeBitwise) {
  std::mt19937_64 gen(15);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix v = random_matrix(gen, 1, 3, 0.0, 5.0);
    const LossWeights w{v(0, 0) / 7.0, v(0, 1) / 3.0, 0.5};
    Graph g;
    Var t = total_loss(g.constant(v.block(0, 0, 1, 1)), g.constant(v.block(0, 1, 1, 1)),
                       g.constant(v.block(0, 2, 1, 1)), w);
    EXPECT_EQ(g.forward(t)(0, 0), total_loss(v(0, 0), v(0, 1), v(0, 2), w).total);
  }
}

TEST(Total, WeightValidation) {
  EXPECT_THROW((LossWeights{-1.0, 0.1, 0.5}.validate()), ValidationError);
  EXPECT_THROW((LossWeights{0.1, -0.1, 0.5}.validate()), ValidationError);
  EXPECT_THROW((LossWeights{0.1, 0.1, 0.0}.validate()), ValidationError);
}

// ---- gradients of each term --------------------------------------------------------

class LossGradients : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 gen(16);
    n_ = 6;
    for (int v = 0; v < 3; ++v) {
      params_.add("z" + std::to_string(v), random_matrix(gen, n_, 4));
      params_.add("xh" + std::to_string(v), random_matrix(gen, n_, 3));
      x_.push_back(random_matrix(gen, n_, 3));
    }
    params_.add("logits", random_matrix(gen, n_, 5));
    w_ = random_view_mask(gen, n_, 3);
    y_ = random_binary(gen, n_, 5);
    g_ = random_binary(gen, n_, 5, 0.7);
  }

  std::vector<Var> bind(Graph& g, const ParamStore& ps, const std::string& prefix) const {
    std::vector<Var> out;
    for (int v = 0; v < 3; ++v) {
      const std::string name = prefix + std::to_string(v);
      out.push_back(g.parameter(name, ps.at(name)));
    }
    return out;
  }

  Eigen::Index n_;
  ParamStore params_;
  std::vector<Matrix> x_;
  Matrix w_, y_, g_;
};

TEST_F(LossGradients, EachTermPassesFiniteDifferences) {
  const LossBuilder fr = [&](Graph& g, const ParamStore& ps) {
    return reconstruction_loss(constants(g, x_), bind(g, ps, "xh"), w_);
  };
  const LossBuilder ic = [&](Graph& g, const ParamStore& ps) {
    return contrastive_loss(bind(g, ps, "z"), w_, 0.5);
  };
  const LossBuilder mc = [&](Graph& g, const ParamStore& ps) {
    return classification_loss(sigmoid(g.parameter("logits", ps.at("logits"))), y_, g_);
  };
  for (const LossBuilder& build : {fr, ic, mc}) {
    ParamStore subset;
    Graph probe;
    Var root = build(probe, params_);
    probe.forward(root);
    probe.backward(root);
    for (const auto& [name, grad] : probe.parameter_gradients()) {
      subset.add(name, params_.at(name));
    }
    const GradCheckReport report = finite_diff_check(build, subset, {});
    EXPECT_TRUE(report.all_passed()) << report.max_relative_error();
  }
}

TEST_F(LossGradients, MaskedRowsReceiveExactlyZeroGradient) {
  Graph g;
  auto z = bind(g, params_, "z");
  auto xh = bind(g, params_, "xh");
  Var total = reconstruction_loss(constants(g, x_), xh, w_) + contrastive_loss(z, w_, 0.5);
  g.forward(total);
  g.backward(total);
  for (int v = 0; v < 3; ++v) {
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (w_(i, v) != 0.0) continue;
      EXPECT_TRUE(g.grad(z[v]).row(i).isZero(0.0));
      EXPECT_TRUE(g.grad(xh[v]).row(i).isZero(0.0));
    }
  }
}

// ---- cross-module: zero fill does not change any loss -------------------------------

TEST(ZeroFillEquivalence, LossesUnchangedByFilling) {
  std::mt19937_64 gen(17);
  const Eigen::Index n = 6;
  std::vector<Matrix> x{random_matrix(gen, n, 3), random_matrix(gen, n, 2)};
  const Matrix w = random_view_mask(gen, n, 2, 0.5);
  const Matrix y = random_binary(gen, n, 3), gm = random_binary(gen, n, 3, 0.6);
  const MultiViewDataset raw(x, y, w, gm);
  const MultiViewDataset filled = zero_fill(raw);
  const std::vector<Matrix> xh{random_matrix(gen, n, 3), random_matrix(gen, n, 2)};
  const Matrix p = random_matrix(gen, n, 3, 0.05, 0.95);
  auto losses = [&](const MultiViewDataset& ds) {
    Graph g;
    Var fr = reconstruction_loss(constants(g, ds.views()), constants(g, xh), ds.view_mask());
    Var mc = classification_loss(g.constant(p), ds.labels(), ds.label_mask());
    return std::pair{g.forward(fr)(0, 0), g.forward(mc)(0, 0)};
  };
  EXPECT_EQ(losses(raw), losses(filled));
}

}  // namespace
}  // namespace dicnet
