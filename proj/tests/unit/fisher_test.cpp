// Copyright 2026 The pibnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "pib/data/synthetic.hpp"
#include "pib/fisher/bootstrap_oracle.hpp"
#include "pib/fisher/fim.hpp"
#include "pib/fisher/hessian.hpp"
#include "pib/fisher/influence.hpp"
#include "pib/fisher/objectives.hpp"
#include "pib_oracles/checks.hpp"
#include "pib_oracles/oracles.hpp"

namespace pib {
namespace {

using oracle::random_matrix;
using oracle::random_vector;

// l_i(theta) = |theta - z_i|^2 / 2: a quadratic whose Hessian does not depend
// on which samples are kept, so first-order influence is exact whenever the
// weights sum to n.
struct LocationObjective {
  Matrix z;  // n x D

  Index num_params() const { return z.cols(); }
  Index num_samples() const { return z.rows(); }
  LossGrad value_and_grad(const Vector& theta, std::span<const double> w = {}) const {
    LossGrad out{0.0, Vector::Zero(theta.size())};
    for (Index i = 0; i < z.rows(); ++i) {
      const double wi = w.empty() ? 1.0 : w[static_cast<std::size_t>(i)];
      const Vector r = theta - z.row(i).transpose();
      out.loss += 0.5 * wi * r.squaredNorm();
      out.grad += wi * r;
    }
    out.loss /= static_cast<double>(z.rows());
    out.grad /= static_cast<double>(z.rows());
    return out;
  }
  Matrix per_sample_grads(const Vector& theta) const {
    return (-z).rowwise() + theta.transpose();
  }
};
static_assert(Objective<LocationObjective>);

TEST(FimTest, SingleGradientOuterProduct) {
  Matrix g(1, 3);
  g << 1, 2, -1;
  EXPECT_LE((empirical_fim_dense(g) - g.transpose() * g).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FimTest, OrthonormalRowsGiveScaledIdentity) {
  Rng rng = make_rng(1);
  const Eigen::HouseholderQR<Matrix> qr(random_matrix(6, 6, rng));
  const Matrix q = qr.householderQ();
  EXPECT_LE((empirical_fim_dense(q) - Matrix::Identity(6, 6) / 6.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FimTest, RandomFisherIsPositiveSemidefinite) {
  Rng rng = make_rng(2);
  const Matrix f = empirical_fim_dense(random_matrix(5, 12, rng));
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(f);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);
}

TEST(FimTest, DenseMatchesLoopReference) {
  Rng rng = make_rng(3);
  const Matrix g = random_matrix(30, 7, rng);
  EXPECT_LE((empirical_fim_dense(g) - oracle::dense_fim_loops(g)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(FimTest, GuardExceededIsCapacityError) {
  EXPECT_THROW(empirical_fim_dense(Matrix::Zero(1, 11), 10), CapacityError);
}

TEST(FimTest, VectorProductMatchesDense) {
  Rng rng = make_rng(4);
  const Matrix g = random_matrix(100, 40, rng);
  GradientBuffer buf(100, 40);
  buf.push_rows(g);
  const Vector v = random_vector(40, rng);
  const Vector dense = oracle::dense_fim_loops(g) * v;
  EXPECT_LE((fim_vector_product(buf, v) - dense).cwiseAbs().maxCoeff(), 1e-12 * dense.norm());
}

TEST(FimTest, VectorProductEdgeCases) {
  GradientBuffer buf(2, 3);
  EXPECT_THROW(fim_vector_product(buf, Vector::Zero(3)), ConfigError);
  Vector g(3);
  g << 1, 2, 0;
  buf.push(g);
  Vector orth(3);
  orth << 2, -1, 5;
  EXPECT_EQ(fim_vector_product(buf, orth), Vector::Zero(3));
  EXPECT_LE((fim_vector_product(buf, g) - g * g.squaredNorm()).norm(), 1e-15);
}

TEST(HessianTest, QuadraticGivesIdentity) {
  Rng rng = make_rng(5);
  const LocationObjective obj{random_matrix(7, 4, rng)};
  const auto h = hessian_with_defect(obj, random_vector(4, rng));
  EXPECT_LE((h.hessian - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(h.asymmetry, 1e-6);
}

TEST(HessianTest, OneDimensionalLogisticMatchesAnalytic) {
  LogisticRegressionObjective obj{Matrix(4, 1), Vector(4), 0.0};
  obj.x << 0.5, -1.0, 2.0, 1.5;
  obj.y << 1, 0, 1, 0;
  Vector theta(1);
  theta << 0.3;
  double ref = 0.0;
  for (Index i = 0; i < 4; ++i) {
    const double s = 1.0 / (1.0 + std::exp(-obj.x(i, 0) * theta[0]));
    ref += s * (1.0 - s) * obj.x(i, 0) * obj.x(i, 0);
  }
  EXPECT_NEAR(hessian_exact(obj, theta)(0, 0), ref / 4.0, 1e-6);
}

TEST(HessianTest, NetworkHessianIsSymmetricBeforeSymmetrization) {
  Rng rng = make_rng(6);
  const Dataset data = synthetic_blobs(20, 3, 3, 2.0, rng);
  const NetworkSpec spec{{3, 4, 3}, Activation::tanh};
  const NetworkObjective obj{spec, &data, 0.0, std::nullopt};
  const auto h = hessian_with_defect(obj, init_params(spec, rng));
  EXPECT_LE(h.asymmetry, 1e-6);
}

TEST(InfluenceTest, ZeroGradientGivesZero) {
  EXPECT_EQ(influence(Matrix::Identity(3, 3), Vector::Zero(3)), Vector::Zero(3));
}

TEST(InfluenceTest, SingularHessianIsNumericError) {
  EXPECT_THROW(influence(Matrix::Zero(2, 2), Vector::Ones(2)), NumericError);
  EXPECT_NO_THROW(influence(Matrix::Zero(2, 2), Vector::Ones(2), 1e-3));
}

TEST(InfluenceTest, RidgeLeaveOneOutMatchesClosedForm) {
  EXPECT_TRUE(oracle::check_ridge_loo(2).pass);
}

TEST(InfluenceTest, LogisticLeaveOneOutCorrelatesWithRetraining) {
  EXPECT_TRUE(oracle::check_logistic_influence(2).pass);
}

TEST(InfluenceTest, QuadraticMultinomialReweightingIsExact) {
  Rng rng = make_rng(7);
  const LocationObjective obj{random_matrix(40, 3, rng)};
  const Vector theta = obj.z.colwise().mean().transpose();
  const InfluenceSet psi = influence_set(obj, theta, Matrix::Identity(3, 3));
  const BootstrapWeights xi = multinomial_bootstrap(40, rng);
  const Vector refit = fit_gradient_descent(obj, xi.span(), theta).theta;
  EXPECT_LE((perturbed_shift(psi, xi) - (refit - theta)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(InfluenceTest, PerturbedShiftSpecialCases) {
  Rng rng = make_rng(8);
  const InfluenceSet psi{random_matrix(5, 3, rng)};
  BootstrapWeights ones{BootstrapKind::multinomial, std::vector<double>(5, 1.0)};
  EXPECT_EQ(perturbed_shift(psi, ones), Vector::Zero(3));
  BootstrapWeights bump = ones;
  bump.xi[2] = 2.0;
  EXPECT_LE((perturbed_shift(psi, bump) - psi.psi.row(2).transpose() / 5.0).norm(), 1e-15);
  BootstrapWeights wrong{BootstrapKind::poisson, std::vector<double>(4, 1.0)};
  EXPECT_THROW(perturbed_shift(psi, wrong), ShapeError);
}

TEST(InfluenceTest, RidgeReweightingCorrelatesWithRefits) {
  Rng rng = make_rng(9);
  const Index n = 300;
  LinearRegressionObjective obj{random_matrix(n, 4, rng), Vector(), 0.05};
  obj.y = obj.x * random_vector(4, rng) + random_vector(n, rng, 0.3);
  const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  const Vector theta = oracle::ridge_weighted_solution(obj.x, obj.y, obj.l2, ones);
  const InfluenceSet psi = influence_set(obj, theta, obj.hessian());
  std::vector<double> predicted, actual;
  for (int k = 0; k < 10; ++k) {
    const BootstrapWeights xi = poisson_weights(n, rng);
    const Vector p = perturbed_shift(psi, xi);
    const Vector a = oracle::ridge_weighted_solution(obj.x, obj.y, obj.l2, xi.xi) - theta;
    for (Index j = 0; j < 4; ++j) {
      predicted.push_back(p[j]);
      actual.push_back(a[j]);
    }
  }
  EXPECT_GE(oracle::pearson(predicted, actual), 0.95);
}

TEST(InfluenceTest, ColumnSumsVanishAtMinimizer) {
  Rng rng = make_rng(17);
  LinearRegressionObjective obj{random_matrix(50, 3, rng), random_vector(50, rng), 0.0};
  const std::vector<double> ones(50, 1.0);
  const Vector theta = oracle::ridge_weighted_solution(obj.x, obj.y, 0.0, ones);
  const InfluenceSet psi = influence_set(obj, theta, obj.hessian());
  EXPECT_LE(psi.psi.colwise().sum().norm(), 1e-10 * psi.psi.norm());
}

TEST(BootstrapOracleTest, DegenerateDataGivesZeroCovariance) {
  const LocationObjective obj{Matrix::Ones(10, 2)};
  Rng rng = make_rng(10);
  const Matrix cov = bootstrap_covariance_oracle(obj, Vector::Ones(2), 20, rng);
  EXPECT_LE(cov.cwiseAbs().maxCoeff(), 1e-18);
}

TEST(BootstrapOracleTest, FixedSeedIsReproducible) {
  const auto obj = oracle::make_logistic_problem(4);
  const Vector theta = fit_gradient_descent(obj, {}, Vector::Zero(obj.num_params())).theta;
  Rng a = make_rng(11), b = make_rng(11);
  EXPECT_EQ(bootstrap_covariance_oracle(obj, theta, 10, a),
            bootstrap_covariance_oracle(obj, theta, 10, b));
}

TEST(BootstrapOracleTest, NonConvergenceListsResamples) {
  const auto obj = oracle::make_logistic_problem(4);
  struct Stalling {
    FitResult operator()(const LogisticRegressionObjective&, std::span<const double>,
                         const Vector& init) const {
      return {init, 1.0, 0, false};
    }
  };
  Rng rng = make_rng(12);
  try {
    bootstrap_covariance_oracle(obj, Vector::Zero(obj.num_params()), 3, rng, Stalling{});
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("0,1,2"), std::string::npos);
  }
  EXPECT_THROW(bootstrap_covariance_oracle(obj, Vector::Zero(10), 1, rng), ConfigError);
}

TEST(BootstrapOracleTest, DiagonalTracksFisherPriorCovariance) {
  EXPECT_TRUE(oracle::check_bootstrap_pipeline(2, 200).pass);
}

TEST(PriorCovarianceTest, IdentityFisher) {
  EXPECT_LE((prior_cov_fisher(Matrix::Identity(3, 3), 10, 0.0) - 0.1 * Matrix::Identity(3, 3))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
}

TEST(PriorCovarianceTest, ScalingAndSandwichForm) {
  Rng rng = make_rng(15);
  const Matrix f = oracle::random_spd(4, rng);
  const Matrix base = prior_cov_fisher(f, 7, 0.0);
  EXPECT_LE((prior_cov_fisher(2.5 * f, 7, 0.0) - base / 2.5).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix hinv = f.inverse();
  EXPECT_LE((hinv * f * hinv / 7.0 - base).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LogDetTest, GramPathMatchesDenseEigen) {
  EXPECT_TRUE(oracle::check_log_det(3).pass);
}

TEST(LogDetTest, RankDeficientBufferMatchesDense) {
  Rng rng = make_rng(16);
  const Matrix g = random_matrix(10, 30, rng);
  GradientBuffer buf(10, 30);
  buf.push_rows(g);
  EXPECT_NEAR(log_det_prior_cov(buf, 1e-2, 50), oracle::dense_log_det_prior_cov(g, 1e-2, 50), 1e-8);
}

TEST(LogDetTest, IdentityFisherUnitSampleIsZero) {
  GradientBuffer buf(4, 4);
  buf.push_rows(2.0 * Matrix::Identity(4, 4));  // (1/4) sum g g^T = I
  EXPECT_NEAR(log_det_prior_cov(buf, 1e-14, 1), 0.0, 1e-12);
}

TEST(LogDetTest, NonPositiveDampingIsConfigError) {
  GradientBuffer buf(1, 2);
  buf.push(Vector::Ones(2));
  EXPECT_THROW(log_det_prior_cov(buf, 0.0, 1), ConfigError);
}

TEST(HessianFisherGapTest, InterpolatingSoftmaxRegression) {
  const auto r = oracle::hessian_fisher_gaps(2);
  EXPECT_LT(r.train_loss, 1e-3);
  EXPECT_LT(r.model_gap, 0.2);
}

TEST(HessianFisherGapTest, ZeroResidualQuadratic) {
  // Squared loss at zero residual: H equals the Gauss-Newton matrix.
  LinearRegressionObjective obj{Matrix(3, 2), Vector(3), 0.0};
  obj.x << 1, 2, -1, 0.5, 0.3, 1;
  const Vector theta = Vector::Ones(2);
  obj.y = obj.x * theta;  // zero residual
  const Matrix h = hessian_exact(obj, theta);
  const Matrix gn = obj.x.transpose() * obj.x / 3.0;
  EXPECT_LE((h - gn).norm() / gn.norm(), 1e-8);
}

}  // namespace
}  // namespace pib
