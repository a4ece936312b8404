#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "sgdg2/dataset.hpp"
#include "sgdg2/error.hpp"
#include "sgdg2/idx.hpp"
#include "sgdg2/mlp.hpp"
#include "sgdg2/optimizer.hpp"
#include "sgdg2/schedule.hpp"

namespace sgdg2 {
namespace {

std::vector<std::uint8_t> header(std::uint32_t magic, std::initializer_list<std::uint32_t> dims) {
  std::vector<std::uint8_t> bytes;
  auto put = [&](std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) bytes.push_back(static_cast<std::uint8_t>(v >> shift));
  };
  put(magic);
  for (auto d : dims) put(d);
  return bytes;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::invalid_argument;
}

TEST(IdxImages, HandBuiltFixture) {
  auto bytes = header(0x00000803, {2, 2, 2});
  for (std::uint8_t b : {0, 255, 128, 0, 1, 2, 3, 4}) bytes.push_back(b);
  const FeatureMatrix m = parse_idx_images(bytes);
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 4);
  EXPECT_DOUBLE_EQ(m(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(m(0, 2), 128.0 / 255.0);
  EXPECT_DOUBLE_EQ(m(0, 3), 0.0);
  for (int j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(m(1, j), (j + 1) / 255.0);
}

TEST(IdxImages, Errors) {
  auto labels_magic = header(0x00000801, {2, 2, 2});
  labels_magic.resize(labels_magic.size() + 8, 0);
  EXPECT_EQ(code_of([&] { parse_idx_images(labels_magic); }), ErrorCode::format_error);

  auto short_payload = header(0x00000803, {2, 2, 2});
  short_payload.resize(short_payload.size() + 7, 0);
  EXPECT_EQ(code_of([&] { parse_idx_images(short_payload); }), ErrorCode::truncated);

  auto long_payload = header(0x00000803, {1, 1, 1});
  long_payload.resize(long_payload.size() + 2, 0);
  EXPECT_EQ(code_of([&] { parse_idx_images(long_payload); }), ErrorCode::truncated);

  const std::vector<std::uint8_t> stub{0, 0, 8};
  EXPECT_EQ(code_of([&] { parse_idx_images(stub); }), ErrorCode::truncated);

  EXPECT_EQ(code_of([] { load_idx_images("/nonexistent/train-images-idx3-ubyte"); }),
            ErrorCode::io_error);
}

TEST(IdxImages, EmptySet) {
  const FeatureMatrix m = parse_idx_images(header(0x00000803, {0, 28, 28}));
  EXPECT_EQ(m.rows(), 0);
}

TEST(IdxLabels, HandBuiltFixture) {
  auto bytes = header(0x00000801, {3});
  for (std::uint8_t b : {7, 0, 9}) bytes.push_back(b);
  EXPECT_EQ(parse_idx_labels(bytes), (std::vector<int>{7, 0, 9}));
  EXPECT_EQ(code_of([&] { parse_idx_labels(bytes, 5); }), ErrorCode::format_error);
}

TEST(IdxLabels, Errors) {
  auto truncated = header(0x00000801, {3});
  truncated.push_back(1);
  EXPECT_EQ(code_of([&] { parse_idx_labels(truncated); }), ErrorCode::truncated);
  auto wrong = header(0x00000803, {1});
  wrong.push_back(1);
  EXPECT_EQ(code_of([&] { parse_idx_labels(wrong); }), ErrorCode::format_error);
  EXPECT_TRUE(parse_idx_labels(header(0x00000801, {0})).empty());
}

TEST(IdxProperty, RoundTrip) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> extent(0, 7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto count = static_cast<std::uint32_t>(extent(rng));
    const auto rows = static_cast<std::uint32_t>(extent(rng) + 1);
    const auto cols = static_cast<std::uint32_t>(extent(rng) + 1);
    std::vector<std::uint8_t> pixels(count * rows * cols);
    for (auto& p : pixels) p = static_cast<std::uint8_t>(byte(rng));
    const FeatureMatrix m = parse_idx_images(encode_idx_images(count, rows, cols, pixels));
    ASSERT_EQ(m.rows(), count);
    ASSERT_EQ(m.cols(), rows * cols);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      EXPECT_EQ(std::lround(m.data()[i] * 255.0), pixels[i]);
    }
    if (m.size() > 0) {
      EXPECT_GE(m.minCoeff(), 0.0);
      EXPECT_LE(m.maxCoeff(), 1.0);
    }

    std::vector<std::uint8_t> labels(count);
    for (auto& l : labels) l = static_cast<std::uint8_t>(byte(rng) % 10);
    const auto decoded = parse_idx_labels(encode_idx_labels(labels));
    EXPECT_TRUE(std::equal(decoded.begin(), decoded.end(), labels.begin(), labels.end()));
  }
}

TEST(IdxDataset, LoadsFromDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "sgdg2_idx_test";
  std::filesystem::create_directories(dir);
  const std::vector<std::uint8_t> pixels{0, 51, 102, 255, 10, 20};
  const std::vector<std::uint8_t> labels{1, 0, 1};
  auto write = [](const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  };
  write(dir / "images", encode_idx_images(3, 1, 2, pixels));
  write(dir / "labels", encode_idx_labels(labels));
  const LabeledDataset ds = load_idx_dataset(dir / "images", dir / "labels", 2);
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.input_dim(), 2u);
  EXPECT_DOUBLE_EQ(ds.features(0, 1), 0.2);
  EXPECT_EQ(ds.labels, (std::vector<int>{1, 0, 1}));

  write(dir / "labels", encode_idx_labels(std::vector<std::uint8_t>{1, 0}));
  EXPECT_THROW(load_idx_dataset(dir / "images", dir / "labels", 2), Error);
  std::filesystem::remove_all(dir);
}

TEST(EpochSchedule, PartitionsEachEpoch) {
  EpochSchedule schedule(4, 2, 7);
  EXPECT_EQ(schedule.batches_per_epoch(), 2u);
  for (int epoch = 1; epoch <= 5; ++epoch) {
    const MiniBatch a = schedule.next_batch();
    const MiniBatch b = schedule.next_batch();
    EXPECT_EQ(schedule.epoch(), static_cast<std::size_t>(epoch));
    std::set<std::size_t> seen(a.indices().begin(), a.indices().end());
    seen.insert(b.indices().begin(), b.indices().end());
    EXPECT_EQ(a.size() + b.size(), 4u);
    EXPECT_EQ(seen, (std::set<std::size_t>{1, 2, 3, 4}));
  }
}

TEST(EpochSchedule, FullBatchMode) {
  EpochSchedule schedule(5, 5, 1);
  const MiniBatch first = schedule.next_batch();
  std::vector<std::size_t> batch(first.indices().begin(), first.indices().end());
  std::sort(batch.begin(), batch.end());
  EXPECT_EQ(batch, (std::vector<std::size_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(EpochSchedule(5, 50, 1).batch_size(), 5u);
  EXPECT_THROW(EpochSchedule(0, 1, 1), Error);
  EXPECT_THROW(EpochSchedule(3, 0, 1), Error);
}

TEST(EpochSchedule, DeterministicReplay) {
  EpochSchedule a(37, 8, 1234);
  EpochSchedule b(37, 8, 1234);
  EpochSchedule c(37, 8, 1235);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const MiniBatch x = a.next_batch();
    const MiniBatch y = b.next_batch();
    const MiniBatch z = c.next_batch();
    EXPECT_TRUE(std::ranges::equal(x.indices(), y.indices()));
    differs |= !std::ranges::equal(x.indices(), z.indices());
  }
  EXPECT_TRUE(differs);
}

TEST(EpochScheduleProperty, EveryEpochVisitsEverySampleOnce) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> size(1, 60);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = size(rng);
    const std::size_t m = size(rng);
    EpochSchedule schedule(n, m, rng());
    for (int epoch = 0; epoch < 3; ++epoch) {
      std::vector<std::size_t> visited;
      for (std::size_t k = 0; k < schedule.batches_per_epoch(); ++k) {
        const MiniBatch batch = schedule.next_batch();
        EXPECT_LE(batch.size(), std::min(n, m));
        visited.insert(visited.end(), batch.indices().begin(), batch.indices().end());
      }
      std::sort(visited.begin(), visited.end());
      std::vector<std::size_t> expected(n);
      std::iota(expected.begin(), expected.end(), 1);
      EXPECT_EQ(visited, expected);
    }
  }
}

double nearest_centroid_accuracy(const LabeledDataset& ds) {
  Matrix centroids = Matrix::Zero(ds.class_count, static_cast<Eigen::Index>(ds.input_dim()));
  std::vector<double> counts(static_cast<std::size_t>(ds.class_count), 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    centroids.row(ds.labels[i]) += ds.features.row(static_cast<Eigen::Index>(i));
    counts[static_cast<std::size_t>(ds.labels[i])] += 1.0;
  }
  for (int c = 0; c < ds.class_count; ++c) centroids.row(c) /= counts[static_cast<std::size_t>(c)];
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    Eigen::Index best = 0;
    (centroids.rowwise() - ds.features.row(static_cast<Eigen::Index>(i))).rowwise().squaredNorm().minCoeff(&best);
    correct += best == ds.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

TEST(GaussianBlobs, ShapeAndDeterminism) {
  const LabeledDataset a = make_gaussian_blobs(4, 30, 20, 0.8, 11);
  EXPECT_EQ(a.size(), 120u);
  EXPECT_EQ(a.input_dim(), 20u);
  EXPECT_EQ(a.class_count, 4);
  EXPECT_NO_THROW(a.validate());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.labels[i], static_cast<int>(i % 4));
  const LabeledDataset b = make_gaussian_blobs(4, 30, 20, 0.8, 11);
  EXPECT_EQ(a.features, b.features);
  EXPECT_NE(a.features, make_gaussian_blobs(4, 30, 20, 0.8, 12).features);
  EXPECT_GE(a.features.minCoeff(), 0.0);
  EXPECT_LE(a.features.maxCoeff(), 1.0);
  EXPECT_THROW(make_gaussian_blobs(1, 30, 20, 0.8, 11), Error);
}

TEST(GaussianBlobs, ZeroSeparationIsUninformative) {
  const LabeledDataset ds = make_gaussian_blobs(4, 500, 10, 0.0, 3);
  // Held-out accuracy of a centroid rule fitted on the other half.
  const auto [train, test] = split_tail(ds, 1000);
  Matrix centroids = Matrix::Zero(4, 10);
  for (std::size_t i = 0; i < train.size(); ++i) centroids.row(train.labels[i]) += train.features.row(static_cast<Eigen::Index>(i));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    Eigen::Index best = 0;
    ((centroids / 250.0).rowwise() - Eigen::RowVectorXd(test.features.row(static_cast<Eigen::Index>(i))))
        .rowwise().squaredNorm().minCoeff(&best);
    correct += best == test.labels[i];
  }
  EXPECT_NEAR(static_cast<double>(correct) / 1000.0, 0.25, 0.06);
}

TEST(GaussianBlobs, LargeSeparationIsLinearlySeparable) {
  const LabeledDataset ds = make_gaussian_blobs(4, 50, 20, 0.8, 5);
  EXPECT_DOUBLE_EQ(nearest_centroid_accuracy(ds), 1.0);

  // Logistic regression trained full-batch to convergence.
  auto shared = std::make_shared<LabeledDataset>(ds);
  const MlpObjective objective(MlpModel({20, 4}), shared);
  ParamVector x = ParamVector::Zero(static_cast<Eigen::Index>(objective.dimension()));
  const MiniBatch all = MiniBatch::full(ds.size());
  for (int step = 0; step < 300; ++step) x = sgd_step(x, 1.0, objective.evaluate(x, all).gradient);
  EXPECT_DOUBLE_EQ(score_dataset(objective.model(), x, *shared).accuracy, 1.0);
}

TEST(SplitTail, Splits) {
  const LabeledDataset ds = make_gaussian_blobs(2, 5, 3, 0.5, 1);
  const auto [head, tail] = split_tail(ds, 4);
  EXPECT_EQ(head.size(), 6u);
  EXPECT_EQ(tail.size(), 4u);
  EXPECT_EQ(tail.features.row(0), ds.features.row(6));
  EXPECT_EQ(tail.labels[3], ds.labels[9]);
  EXPECT_THROW(split_tail(ds, 11), Error);
}

}  // namespace
}  // namespace sgdg2
