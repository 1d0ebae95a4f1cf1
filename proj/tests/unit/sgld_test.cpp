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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "pib/data/synthetic.hpp"
#include "pib/fisher/fim.hpp"
#include "pib/nn/optimizer.hpp"
#include "pib/sgld/checkpoint.hpp"
#include "pib/sgld/pib_training.hpp"
#include "pib/sgld/prior.hpp"
#include "pib/sgld/sampler.hpp"
#include "pib/sgld/schedule.hpp"
#include "pib_oracles/checks.hpp"

namespace pib {
namespace {

using oracle::random_matrix;
using oracle::random_vector;

PriorSpec make_prior(const Matrix& grads, const Vector& theta0, double damping, Index n) {
  auto buf = std::make_shared<GradientBuffer>(grads.rows(), grads.cols());
  buf->push_rows(grads);
  PriorSpec p;
  p.theta0 = theta0;
  p.fim = buf;
  p.damping = damping;
  p.n = n;
  return p;
}

TEST(PriorTest, GradientVanishesAtMean) {
  Rng rng = make_rng(1);
  const Vector theta0 = random_vector(6, rng);
  const PriorSpec p = make_prior(random_matrix(4, 6, rng), theta0, 1e-3, 100);
  EXPECT_EQ(prior_neg_log_grad(theta0, p), Vector::Zero(6));
}

TEST(PriorTest, DampingOnlyPrior) {
  Rng rng = make_rng(2);
  PriorSpec p;
  p.theta0 = random_vector(5, rng);
  p.damping = 0.3;
  p.n = 20;
  const Vector w = random_vector(5, rng);
  EXPECT_LE((prior_neg_log_grad(w, p) - 2.0 * 20 * 0.3 * (w - p.theta0)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(PriorTest, MatchesDensePrecision) {
  Rng rng = make_rng(3);
  const Matrix g = random_matrix(8, 5, rng);
  const Vector theta0 = random_vector(5, rng);
  const PriorSpec p = make_prior(g, theta0, 0.01, 50);
  const Vector w = random_vector(5, rng);
  const Matrix precision = 50.0 * (oracle::dense_fim_loops(g) + 0.01 * Matrix::Identity(5, 5));
  const Vector ref = 2.0 * precision * (w - theta0);
  EXPECT_LE((prior_neg_log_grad(w, p) - ref).cwiseAbs().maxCoeff(), 1e-10 * ref.norm());
  EXPECT_NEAR(prior_quadratic(w, p), (w - theta0).dot(precision * (w - theta0)), 1e-10);
}

TEST(PriorTest, UninitializedOrMismatchedPriorIsRejected) {
  PriorSpec p;
  EXPECT_THROW(prior_neg_log_grad(Vector::Zero(2), p), ConfigError);
  Rng rng = make_rng(4);
  const PriorSpec q = make_prior(random_matrix(2, 3, rng), Vector::Zero(3), 1.0, 1);
  EXPECT_THROW(prior_neg_log_grad(Vector::Zero(4), q), ShapeError);
}

class EnergyGradTest : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng = make_rng(5);
    data = synthetic_blobs(64, 3, 3, 2.0, rng);
    params = init_params(spec, rng);
    const Vector theta0 = params + random_vector(params.size(), rng, 0.1);
    prior = make_prior(per_sample_grads(spec, theta0, data), theta0, 1e-2, data.size());
  }
  NetworkSpec spec{{3, 5, 3}, Activation::tanh};
  Dataset data;
  ParamVector params;
  PriorSpec prior;
};

TEST_F(EnergyGradTest, ZeroTemperatureIsScaledDataGradient) {
  const Vector g = loss_and_grad(spec, params, data).grad;
  EXPECT_EQ(energy_grad(spec, params, data, prior, 0.0, 64, LikelihoodScaling::standard), g);
  const double s = 64.0 * 64.0 / 64.0;
  EXPECT_LE((energy_grad(spec, params, data, prior, 0.0, 64) - s * g).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(EnergyGradTest, LinearInTemperature) {
  const auto at = [&](double beta) {
    return energy_grad(spec, params, data, prior, beta, 64, LikelihoodScaling::standard);
  };
  const Vector slope = at(1.0) - at(0.0);
  EXPECT_LE((at(0.25) - at(0.0) - 0.25 * slope).cwiseAbs().maxCoeff(), 1e-12 * slope.norm());
  EXPECT_THROW(at(-1.0), ConfigError);
}

TEST_F(EnergyGradTest, FullBatchEqualsWholeDataGradient) {
  // B = n: the scaled minibatch gradient is n times the mean gradient.
  const Vector g = energy_grad(spec, params, data, prior, 0.0, data.size());
  const Vector ref = static_cast<double>(data.size()) * loss_and_grad(spec, params, data).grad;
  EXPECT_LE((g - ref).cwiseAbs().maxCoeff(), 1e-12 * ref.norm());
}

TEST(SgldStepTest, ZeroTemperatureMatchesSgd) {
  Rng rng = make_rng(6);
  ParamVector a = random_vector(10, rng);
  ParamVector b = a;
  const Vector g = random_vector(10, rng);
  OptimizerState opt({OptimizerKind::sgd, 0.05}, 10);
  optimizer_step(opt, a, g);
  Rng noise = make_rng(7);
  const Rng before = noise;
  sgld_step(b, g, 0.05, 0.0, noise);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(noise == before);
}

TEST(SgldStepTest, NoiseHasRequestedScale) {
  // eta = 1e-2, beta = 0.5: std sqrt(2 eta beta) = 0.1.
  const Index d = 1000000;
  ParamVector w = ParamVector::Zero(d);
  Rng rng = make_rng(8);
  sgld_step(w, Vector::Zero(d), 1e-2, 0.5, rng);
  const double sd = std::sqrt(w.squaredNorm() / static_cast<double>(d));
  EXPECT_NEAR(sd, 0.1, 1e-3);
  EXPECT_NEAR(w.mean(), 0.0, 5e-4);
}

TEST(SgldStepTest, LengthMismatchIsShapeError) {
  ParamVector w = ParamVector::Zero(3);
  Rng rng = make_rng(9);
  EXPECT_THROW(sgld_step(w, Vector::Zero(2), 0.1, 0.0, rng), ShapeError);
}

TEST(ScheduleTest, Values) {
  EXPECT_DOUBLE_EQ(schedule(2.0, 0, 100, DecayKind::cosine), 2.0);
  EXPECT_NEAR(schedule(2.0, 50, 100, DecayKind::cosine), 1.0, 1e-15);
  EXPECT_NEAR(schedule(2.0, 100, 100, DecayKind::cosine), 0.0, 1e-15);
  EXPECT_NEAR(schedule(2.0, 500, 100, DecayKind::cosine, 0.1), 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(schedule(2.0, 77, 100, DecayKind::constant), 2.0);
  EXPECT_DOUBLE_EQ(schedule(2.0, 3, 100, DecayKind::inverse_sqrt), 1.0);
  EXPECT_EQ(parse_decay("inverse_sqrt"), DecayKind::inverse_sqrt);
  EXPECT_THROW(parse_decay("linear"), ConfigError);
}

TEST(SgldConfigTest, Validation) {
  SgldConfig c;
  c.iterations = 10;
  EXPECT_NO_THROW(c.validate());
  c.burn_in = 10;
  EXPECT_THROW(c.validate(), ConfigError);
  c.burn_in = 0;
  c.eta0 = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(PosteriorPredictTest, Averaging) {
  Rng rng = make_rng(10);
  const NetworkSpec spec{{4, 3}, Activation::linear};
  const Dataset data = synthetic_blobs(12, 4, 3, 1.0, rng);
  const ParamVector w1 = init_params(spec, rng);
  const ParamVector w2 = init_params(spec, rng);
  const Matrix p1 = softmax(forward(spec, w1, data.inputs));
  const Matrix p2 = softmax(forward(spec, w2, data.inputs));
  EXPECT_LE((posterior_predict({{w1, 1, 0.0}}, spec, data.inputs) - p1).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((posterior_predict({{w1, 1, 0.0}, {w1, 2, 0.0}}, spec, data.inputs) - p1).cwiseAbs().maxCoeff(),
            1e-15);
  EXPECT_LE((posterior_predict({{w1, 1, 0.0}, {w2, 2, 0.0}}, spec, data.inputs) - 0.5 * (p1 + p2))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
  EXPECT_THROW(posterior_predict({}, spec, data.inputs), ConfigError);
}

TEST(CheckpointTest, RoundTripAndTruncation) {
  const auto dir = std::filesystem::temp_directory_path() / "pibnet_ckpt_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "c.bin").string();
  Rng rng = make_rng(11);
  const Checkpoint c{random_vector(17, rng), 12345};
  write_checkpoint(path, c);
  EXPECT_EQ(std::filesystem::file_size(path), 8u + 17u * 8u + 8u);
  const Checkpoint r = read_checkpoint(path);
  EXPECT_EQ(r.params, c.params);
  EXPECT_EQ(r.iteration, 12345u);
  std::filesystem::resize_file(path, 40);
  EXPECT_THROW(read_checkpoint(path), ParseError);
  std::filesystem::remove_all(dir);
}

TEST(RunSgldTest, QuadraticStationaryMoments) {
  const auto stats = oracle::sgld_quadratic_stats(3, 20000, 200);
  EXPECT_LE(stats.mean.cwiseAbs().maxCoeff(), 0.1);
  EXPECT_LE((stats.variance.array() - 1.0).abs().maxCoeff(), 0.1);
}

TEST(RunSgldTest, BurnInAndStride) {
  SgldConfig cfg;
  cfg.iterations = 100;
  cfg.burn_in = 40;
  cfg.sample_stride = 20;
  EnergyFn zero = [](const ParamVector& w, long, double, Rng&) {
    return EnergyEval{0.0, Vector::Zero(w.size())};
  };
  Rng a = make_rng(12), b = make_rng(13);
  const SgldRun run = run_sgld(zero, ParamVector::Zero(2), cfg, a, b);
  ASSERT_EQ(run.samples.size(), 3u);
  EXPECT_EQ(run.samples[0].iter, 60);
  EXPECT_EQ(run.samples[2].iter, 100);
}

TEST(RunSgldTest, NonFiniteEnergyIsNumericError) {
  SgldConfig cfg;
  cfg.iterations = 5;
  EnergyFn bad = [](const ParamVector& w, long t, double, Rng&) {
    return EnergyEval{t == 3 ? std::nan("") : 0.0, Vector::Zero(w.size())};
  };
  Rng a = make_rng(14), b = make_rng(15);
  EXPECT_THROW(run_sgld(bad, ParamVector::Zero(2), cfg, a, b), NumericError);
}

class PibTrainingTest : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng = make_rng(16);
    train = synthetic_blobs(256, 4, 3, 5.0, rng);
    test = synthetic_blobs(128, 4, 3, 5.0, rng);
    cfg.sgld.iterations = 300;
    cfg.sgld.burn_in = 150;
    cfg.sgld.sample_stride = 10;
    cfg.sgld.batch_size = 32;
    cfg.sgld.eta0 = 0.05;
    cfg.sgld.beta0 = 1e-4;
    cfg.warmup_optimizer = {OptimizerKind::sgd, 0.05};
    cfg.prior_fisher_samples = 32;
    cfg.damping = 0.1;
    cfg.fisher_samples = 64;
    cfg.log_interval = 50;
  }
  NetworkSpec spec{{4, 8, 3}, Activation::relu};
  Dataset train, test;
  PibConfig cfg;
};

TEST_F(PibTrainingTest, FixedSeedIsDeterministic) {
  const PibResult a = run_pib_training(spec, train, &test, cfg, 7);
  const PibResult b = run_pib_training(spec, train, &test, cfg, 7);
  EXPECT_EQ(a.params, b.params);
  ASSERT_EQ(a.metrics.size(), b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) EXPECT_EQ(a.metrics[i].iiw, b.metrics[i].iiw);
  EXPECT_EQ(a.samples.size(), 15u);
  EXPECT_EQ(a.metrics.size(), 6u);
}

TEST_F(PibTrainingTest, AnnealedTemperatureFitsSeparableBlobs) {
  cfg.sgld.decay_beta = DecayKind::cosine;
  const PibResult r = run_pib_training(spec, train, &test, cfg, 8);
  ASSERT_FALSE(r.diverged) << r.diagnostic;
  EXPECT_GE(posterior_accuracy(r.samples, spec, test), 0.9);
  EXPECT_GE(r.metrics.back().train_acc, 0.9);
  EXPECT_LT(r.metrics.back().temperature, r.metrics.front().temperature);
  EXPECT_TRUE(std::isfinite(r.log_det_prior));
}

TEST_F(PibTrainingTest, DivergenceIsReportedWithCheckpoint) {
  cfg.sgld.eta0 = 1e6;
  const PibResult r = run_pib_training(spec, train, &test, cfg, 9);
  EXPECT_TRUE(r.diverged);
  EXPECT_FALSE(r.diagnostic.empty());
  EXPECT_TRUE(r.last_stable.params.allFinite());
}

}  // namespace
}  // namespace pib
