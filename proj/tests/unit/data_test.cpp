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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <gtest/gtest.h>

#include "pib/data/batcher.hpp"
#include "pib/data/bootstrap.hpp"
#include "pib/data/dataset.hpp"
#include "pib/data/idx.hpp"
#include "pib/data/synthetic.hpp"

namespace pib {
namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pibnet_data_test_" + name);
}

TEST(DatasetTest, RejectsMismatchedRows) {
  EXPECT_THROW(Dataset(RowMatrix::Zero(3, 2), {0, 1}, 2), ShapeError);
}

TEST(DatasetTest, RejectsLabelOutOfRange) {
  EXPECT_THROW(Dataset(RowMatrix::Zero(2, 2), {0, 2}, 2), ConfigError);
  EXPECT_THROW(Dataset(RowMatrix::Zero(2, 2), {0, -1}, 2), ConfigError);
}

TEST(DatasetTest, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(Dataset(RowMatrix::Zero(0, 2), {}, 2), ConfigError);
  RowMatrix x = RowMatrix::Zero(2, 2);
  x(1, 1) = std::nan("");
  EXPECT_THROW(Dataset(x, {0, 1}, 2), NumericError);
}

TEST(DatasetTest, SubsetAndHistogram) {
  RowMatrix x(4, 1);
  x << 0, 1, 2, 3;
  const Dataset d(x, {0, 1, 1, 2}, 3);
  const std::vector<Index> rows = {3, 1};
  const Dataset s = d.subset(rows);
  EXPECT_EQ(s.size(), 2);
  EXPECT_EQ(s.inputs(0, 0), 3.0);
  EXPECT_EQ(s.labels[1], 1);
  EXPECT_EQ(d.class_histogram(), (std::vector<int>{1, 2, 1}));
}

TEST(IdxTest, RoundTripsImagesAndLabelsThroughGzip) {
  IdxArray images{kIdxImagesMagic, {3, 2, 2}, {0, 255, 128, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
  IdxArray labels{kIdxLabelsMagic, {3}, {0, 9, 4}};
  const auto ip = temp_path("img.gz"), lp = temp_path("lbl");
  write_idx(ip.string(), images);
  write_idx(lp.string(), labels);
  const IdxArray back = read_idx(ip.string());
  EXPECT_EQ(back.dims, images.dims);
  EXPECT_EQ(back.payload, images.payload);
  const Dataset d = load_idx(ip.string(), lp.string());
  EXPECT_EQ(d.size(), 3);
  EXPECT_EQ(d.dim(), 4);
  EXPECT_DOUBLE_EQ(d.inputs(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(d.inputs(0, 2), 128.0 / 255.0);
  EXPECT_EQ(d.labels, (std::vector<int>{0, 9, 4}));
  std::filesystem::remove(ip);
  std::filesystem::remove(lp);
}

TEST(IdxTest, TruncatedPayloadIsParseError) {
  const auto p = temp_path("trunc");
  {
    std::ofstream out(p, std::ios::binary);
    const unsigned char header[] = {0, 0, 8, 1, 0, 0, 0, 5, 1, 2};
    out.write(reinterpret_cast<const char*>(header), sizeof header);
  }
  EXPECT_THROW(read_idx(p.string()), ParseError);
  std::filesystem::remove(p);
}

TEST(IdxTest, CountMismatchAndBadLabelAreParseErrors) {
  const auto ip = temp_path("img2"), lp = temp_path("lbl2");
  write_idx(ip.string(), {kIdxImagesMagic, {2, 1, 1}, {1, 2}});
  write_idx(lp.string(), {kIdxLabelsMagic, {3}, {0, 1, 2}});
  EXPECT_THROW(load_idx(ip.string(), lp.string()), ParseError);
  write_idx(lp.string(), {kIdxLabelsMagic, {2}, {0, 10}});
  EXPECT_THROW(load_idx(ip.string(), lp.string()), ParseError);
  std::filesystem::remove(ip);
  std::filesystem::remove(lp);
}

TEST(IdxTest, BundledMnistLoads) {
  const std::string dir = std::string(PIBNET_DATA_DIR) + "/mnist/";
  const Dataset d = load_idx(dir + "test-images-idx3-ubyte.gz", dir + "test-labels-idx1-ubyte.gz");
  EXPECT_EQ(d.dim(), 784);
  EXPECT_EQ(d.num_classes, 10);
  EXPECT_GE(d.size(), 2048);
  for (int c : d.class_histogram()) EXPECT_GT(c, 0);
}

TEST(SyntheticTest, CorruptLabelsFlipsExactCount) {
  Rng rng = make_rng(3);
  const Dataset d = synthetic_blobs(100, 5, 4, 3.0, rng);
  const Dataset c = corrupt_labels(d, 0.25, rng);
  int changed = 0;
  for (Index i = 0; i < d.size(); ++i) changed += d.labels[i] != c.labels[i];
  EXPECT_EQ(changed, 25);
  EXPECT_EQ(corrupt_labels(d, 0.0, rng).labels, d.labels);
}

TEST(SyntheticTest, BlobsAreBalanced) {
  Rng rng = make_rng(4);
  const Dataset d = synthetic_blobs(40, 3, 4, 5.0, rng);
  EXPECT_EQ(d.class_histogram(), (std::vector<int>{10, 10, 10, 10}));
}

TEST(BootstrapTest, MultinomialCountsSumToN) {
  Rng rng = make_rng(5);
  const auto w = multinomial_bootstrap(1000, rng);
  EXPECT_DOUBLE_EQ(w.total(), 1000.0);
}

TEST(BootstrapTest, PoissonWeightsAreReproducible) {
  Rng a = make_rng(6), b = make_rng(6);
  EXPECT_EQ(poisson_weights(50, a).xi, poisson_weights(50, b).xi);
}

TEST(BatcherTest, EpochCoversEverySampleOnce) {
  MinibatchSampler s(10, 5, make_rng(7));
  std::vector<Index> seen;
  for (int k = 0; k < 2; ++k) {
    const auto b = s.next();
    EXPECT_EQ(b.size(), 5u);
    seen.insert(seen.end(), b.begin(), b.end());
  }
  std::sort(seen.begin(), seen.end());
  std::vector<Index> all(10);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(seen, all);
}

}  // namespace
}  // namespace pib
