/*
 * Copyright 2026 The FedDCL Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "feddcl/datahub.hpp"
#include "oracles.hpp"

namespace dh = feddcl::datahub;
using feddcl::numkit::Mat;

namespace {

std::string source_dir() {
  const char* s = std::getenv("FEDDCL_SOURCE_DIR");
  return s ? s : ".";
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::path(testing::TempDir()) / name).string();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream(path) << body;
}

dh::LabeledTable counting_table(std::size_t n) {
  Mat x(n, 2), y(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = -static_cast<double>(i);
    y(i, 0) = static_cast<double>(i) * 0.5;
  }
  return {x, y, dh::Task::regression(), {"a", "b"}, {}};
}

}  // namespace

TEST(LoadCsv, RegressionColumns) {
  const auto path = temp_path("reg.csv");
  write_file(path, "f1,f2,target\n1,2,3\n4,5,6\n7.5,-8,9\n1e-3,0,1\n");
  auto t = dh::load_csv(path, {{"target"}, {}, dh::TaskKind::kRegression, {}});
  EXPECT_EQ(t.x.rows(), 4u);
  EXPECT_EQ(t.x.cols(), 2u);
  EXPECT_EQ(t.y.cols(), 1u);
  EXPECT_DOUBLE_EQ(t.x(2, 1), -8.0);
  EXPECT_DOUBLE_EQ(t.x(3, 0), 1e-3);
  EXPECT_DOUBLE_EQ(t.y(1, 0), 6.0);
  EXPECT_EQ(t.feature_names, (std::vector<std::string>{"f1", "f2"}));
}

TEST(LoadCsv, LabelsBecomeOneHot) {
  const auto path = temp_path("cls.csv");
  write_file(path, "x,label\n0.1,a\n0.2,b\n0.3,a\n");
  auto t = dh::load_csv(path, {{"label"}, {}, dh::TaskKind::kClassification, {}});
  EXPECT_EQ(t.task, dh::Task::classification(2));
  EXPECT_EQ(t.y, (Mat{{1, 0}, {0, 1}, {1, 0}}));
  EXPECT_NO_THROW(t.validate());
}

TEST(LoadCsv, NumericLabelsSortNumerically) {
  const auto path = temp_path("num_labels.csv");
  write_file(path, "x,rating\n1,10\n2,2\n3,0\n");
  auto t = dh::load_csv(path, {{"rating"}, {}, dh::TaskKind::kClassification, {}});
  EXPECT_EQ(t.class_labels, (std::vector<std::string>{"0", "2", "10"}));
  EXPECT_EQ(t.y(0, 2), 1.0);
}

TEST(LoadCsv, BatteryTableFixture) {
  auto t = dh::load_csv(source_dir() + "/tests/data/battery_table1.csv",
                        {{"SOC"}, {"user"}, dh::TaskKind::kRegression, {}});
  EXPECT_EQ(t.x.cols(), 5u);
  EXPECT_EQ(t.x.rows(), 16u);
  EXPECT_EQ(t.feature_names, (std::vector<std::string>{"V", "I", "Temp", "V_avg", "I_avg"}));
}

TEST(LoadCsv, UnknownLabelAtTestTime) {
  const auto path = temp_path("test_labels.csv");
  write_file(path, "x,label\n0.1,a\n0.2,c\n");
  try {
    dh::load_csv(path, {{"label"}, {}, dh::TaskKind::kClassification, {"a", "b"}});
    FAIL() << "expected DataError";
  } catch (const feddcl::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'c'"), std::string::npos);
  }
}

TEST(LoadCsv, ParseErrorCarriesPosition) {
  const auto path = temp_path("bad.csv");
  write_file(path, "a,b,y\n1,2,3\n4,oops,6\n");
  try {
    dh::load_csv(path, {{"y"}, {}, dh::TaskKind::kRegression, {}});
    FAIL() << "expected ParseError";
  } catch (const feddcl::ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.col(), 2u);
  }
}

TEST(LoadCsv, MissingFile) {
  EXPECT_THROW(dh::load_csv(temp_path("nope.csv"), {{"y"}, {}, dh::TaskKind::kRegression, {}}),
               feddcl::IoError);
}

TEST(LoadCsv, RoundTripThroughSave) {
  auto t = counting_table(7);
  const auto path = temp_path("round.csv");
  dh::save_csv(t, path);
  auto back = dh::load_csv(path, {{"y0"}, {}, dh::TaskKind::kRegression, {}});
  EXPECT_EQ(back.x, t.x);
  EXPECT_EQ(back.y, t.y);
}

class IdxFixture : public testing::Test {
 protected:
  void write(std::size_t n) {
    pixels_.assign(n * 784, 0);
    labels_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels_[i] = static_cast<unsigned char>(i % 10);
      if (i > 0)
        for (std::size_t p = 0; p < 784; ++p) pixels_[i * 784 + p] = static_cast<unsigned char>((p * i) % 256);
    }
    pixels_[784 + 5] = 255;
    dh::save_idx_images(images_, labels_path_, pixels_, labels_, 28, 28);
  }
  std::string images_ = temp_path("img.idx");
  std::string labels_path_ = temp_path("lab.idx");
  std::vector<unsigned char> pixels_, labels_;
};

TEST_F(IdxFixture, TenImages) {
  write(10);
  auto t = dh::load_idx_images(images_, labels_path_);
  EXPECT_EQ(t.x.rows(), 10u);
  EXPECT_EQ(t.x.cols(), 784u);
  EXPECT_EQ(t.task, dh::Task::classification(10));
  EXPECT_EQ(t.y(3, 3), 1.0);
  EXPECT_NO_THROW(t.validate());
  // image 0 is all zero
  EXPECT_EQ(feddcl::numkit::max_abs(t.x.row_block(0, 1)), 0.0);
  EXPECT_EQ(t.x(1, 5), 1.0);
  EXPECT_DOUBLE_EQ(t.x(2, 3), 6.0 / 255.0);
}

TEST_F(IdxFixture, BadMagic) {
  write(2);
  // swap the files: label magic where image magic is expected
  EXPECT_THROW(dh::load_idx_images(labels_path_, images_), feddcl::FormatError);
}

TEST_F(IdxFixture, CountMismatch) {
  write(3);
  std::vector<unsigned char> two(labels_.begin(), labels_.begin() + 2);
  const auto other = temp_path("lab2.idx");
  const auto other_img = temp_path("img2.idx");
  std::vector<unsigned char> px(2 * 784, 0);
  dh::save_idx_images(other_img, other, px, two, 28, 28);
  EXPECT_THROW(dh::load_idx_images(images_, other), feddcl::FormatError);
}

TEST_F(IdxFixture, TruncatedPayload) {
  write(4);
  std::filesystem::resize_file(images_, 16 + 784 * 3);
  EXPECT_THROW(dh::load_idx_images(images_, labels_path_), feddcl::FormatError);
}

TEST(PartitionIid, PaperShape) {
  auto t = counting_table(1400);
  dh::PartitionSpec spec{{2, 2}, 100, {}, 0};
  auto p = dh::partition_iid(t, spec, 42);
  ASSERT_EQ(p.num_groups(), 2u);
  EXPECT_EQ(p.num_institutions(), 4u);
  for (const auto& g : p.groups)
    for (const auto& b : g) EXPECT_EQ(b.rows(), 100u);
  EXPECT_EQ(p.holdout.rows(), 1000u);
}

TEST(PartitionIid, BlocksAndHoldoutCoverSource) {
  auto t = counting_table(530);
  dh::PartitionSpec spec{{3, 1, 2}, 0, {{10, 20, 30}, {40}, {50, 60}}, 0};
  auto p = dh::partition_iid(t, spec, 9);
  std::multiset<std::size_t> seen;
  for (const auto& g : p.groups)
    for (const auto& b : g) {
      for (std::size_t i = 0; i < b.rows(); ++i) {
        const auto src = b.source_rows[i];
        EXPECT_EQ(b.x(i, 0), static_cast<double>(src));
        seen.insert(src);
      }
    }
  for (std::size_t i = 0; i < p.holdout.rows(); ++i)
    seen.insert(static_cast<std::size_t>(p.holdout.x(i, 0)));
  EXPECT_EQ(seen.size(), 530u);
  EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), 530u);
  EXPECT_EQ(p.groups[2][1].rows(), 60u);
}

TEST(PartitionIid, SingleBlockIsShuffledTable) {
  auto t = counting_table(50);
  auto p = dh::partition_iid(t, {{1}, 50, {}, 0}, 3);
  const auto& b = p.groups[0][0];
  EXPECT_EQ(b.rows(), 50u);
  EXPECT_EQ(p.holdout.rows(), 0u);
  std::vector<std::size_t> sorted = b.source_rows;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_NE(sorted, b.source_rows);
}

TEST(PartitionIid, DeterministicInSeed) {
  auto t = counting_table(300);
  dh::PartitionSpec spec{{2, 2}, 50, {}, 0};
  auto a = dh::partition_iid(t, spec, 77);
  auto b = dh::partition_iid(t, spec, 77);
  auto c = dh::partition_iid(t, spec, 78);
  EXPECT_EQ(a.groups[1][0].source_rows, b.groups[1][0].source_rows);
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), c.fingerprint());
}

TEST(PartitionIid, InsufficientRows) {
  auto t = counting_table(399);
  try {
    dh::partition_iid(t, {{2, 2}, 100, {}, 0}, 1);
    FAIL() << "expected ParameterError";
  } catch (const feddcl::ParameterError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("400"), std::string::npos);
    EXPECT_NE(msg.find("399"), std::string::npos);
  }
}

TEST(PartitionIid, HoldoutLimit) {
  auto t = counting_table(3000);
  auto p = dh::partition_iid(t, {{2, 2}, 100, {}, 1000}, 5);
  EXPECT_EQ(p.holdout.rows(), 1000u);
}

TEST(FeatureRanges, BatteryTableVoltage) {
  auto t = dh::load_csv(source_dir() + "/tests/data/battery_table1.csv",
                        {{"SOC"}, {"user"}, dh::TaskKind::kRegression, {}});
  // users (1,1), (1,2), (2,1), (2,2) hold four rows each, in file order
  dh::PartitionedDataset p;
  p.task = t.task;
  p.groups.resize(2);
  for (std::size_t u = 0; u < 4; ++u) {
    std::vector<std::size_t> idx{4 * u, 4 * u + 1, 4 * u + 2, 4 * u + 3};
    p.groups[u / 2].push_back({t.x.select_rows(idx), t.y.select_rows(idx), idx});
  }
  auto r = dh::feature_ranges(p);
  ASSERT_EQ(r.size(), 5u);
  EXPECT_EQ(r[0], (dh::FeatureRange{0.299, 0.978}));
  EXPECT_EQ(r[2], (dh::FeatureRange{0.026, 0.955}));
}

TEST(FeatureRanges, ConstantFeature) {
  dh::PartitionedDataset p;
  p.groups = {{{Mat{{2.5}, {2.5}}, Mat{{0}, {1}}, {0, 1}}}, {{Mat{{2.5}}, Mat{{0}}, {2}}}};
  auto r = dh::feature_ranges(p);
  EXPECT_EQ(r[0], (dh::FeatureRange{2.5, 2.5}));
  auto a = dh::generate_anchor(r, 20, 1);
  for (double v : a.a.data()) EXPECT_EQ(v, 2.5);
}

TEST(FeatureRanges, Empty) {
  EXPECT_THROW(dh::feature_ranges(dh::PartitionedDataset{}), feddcl::ParameterError);
}

TEST(Anchor, DefaultSizeAndRanges) {
  std::vector<dh::FeatureRange> ranges{{0.299, 0.978}, {-3, 4}, {10, 10.5}};
  auto a = dh::generate_anchor(ranges, dh::kDefaultAnchorRows, 11);
  EXPECT_EQ(a.rows(), 2000u);
  EXPECT_EQ(a.a.cols(), 3u);
  for (std::size_t s = 0; s < a.rows(); ++s)
    for (std::size_t t = 0; t < 3; ++t) {
      EXPECT_GE(a.a(s, t), ranges[t].min);
      EXPECT_LE(a.a(s, t), ranges[t].max);
    }
}

TEST(Anchor, ZeroRanges) {
  auto a = dh::generate_anchor({{0, 0}, {0, 0}}, 5, 3);
  EXPECT_EQ(a.a, Mat(5, 2));
}

TEST(Anchor, LargeSampleMean) {
  auto a = dh::generate_anchor({{2, 5}}, 10000, 8);
  const double mean = feddcl::numkit::column_means(a.a)[0];
  EXPECT_NEAR(mean, 3.5, 0.05);
}

TEST(Anchor, SameInputsSameMatrix) {
  std::vector<dh::FeatureRange> ranges{{0, 1}, {1, 2}};
  EXPECT_EQ(dh::generate_anchor(ranges, 100, 4).a, dh::generate_anchor(ranges, 100, 4).a);
  EXPECT_NE(dh::generate_anchor(ranges, 100, 4).a, dh::generate_anchor(ranges, 100, 5).a);
}

TEST(Anchor, BadArguments) {
  EXPECT_THROW(dh::generate_anchor({{0, 1}}, 0, 1), feddcl::ParameterError);
  EXPECT_THROW(dh::generate_anchor({{1, 0}}, 3, 1), feddcl::ParameterError);
}
