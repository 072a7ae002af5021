#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "glbandit/replay.hpp"

using namespace glb;

namespace {

const char* kHeader = "Pregnancies,Glucose,BloodPressure,SkinThickness,Insulin,BMI,DiabetesPedigreeFunction,Age,Outcome\n";

ReplayDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_replay_csv(in);
}

std::string small_csv() {
  return std::string(kHeader) +
         "6,148,72,35,0,33.6,0.627,50,1\n"
         "1,85,66,29,0,26.6,0.351,31,0\n"
         "8,183,64,0,0,23.3,0.672,32,1\n"
         "1,89,66,23,94,28.1,0.167,21,0\n"
         "0,137,40,35,168,43.1,2.288,33,1\n";
}

}  // namespace

TEST(ReplayCsv, ParsesAndStandardizes) {
  const ReplayDataset ds = parse(small_csv());
  EXPECT_EQ(ds.rows(), 5);
  EXPECT_EQ(ds.positives.size(), 3u);
  EXPECT_EQ(ds.negatives.size(), 2u);
  EXPECT_EQ(ds.columns.front(), "Pregnancies");
  for (int j = 0; j < kReplayFeatures; ++j) {
    EXPECT_NEAR(ds.standardized.col(j).mean(), 0.0, 1e-9);
    EXPECT_NEAR(ds.standardized.col(j).squaredNorm() / ds.rows(), 1.0, 1e-9);
  }
  const Vector a = ds.arm(0);
  EXPECT_EQ(a.size(), 9);
  EXPECT_EQ(a[8], 1.0);
  EXPECT_NEAR(a[1], (148 - ds.mean[1]) / ds.stddev[1], 1e-12);
  EXPECT_GE(ds.max_arm_norm(), a.norm());
}

TEST(ReplayCsv, Errors) {
  EXPECT_THROW(parse(""), MalformedCsv);
  EXPECT_THROW(parse("a,b,c\n1,2,3\n"), MissingColumns);
  EXPECT_THROW(parse(std::string(kHeader) + "1,2,3,4,5,6,7,8\n"), MalformedCsv);
  EXPECT_THROW(parse(std::string(kHeader) + "1,2,,4,5,6,7,8,1\n"), MalformedCsv);
  EXPECT_THROW(parse(std::string(kHeader) + "1,2,x,4,5,6,7,8,1\n"), MalformedCsv);
  EXPECT_THROW(parse(std::string(kHeader) + "1,2,3,4,5,6,7,8,2\n2,3,4,5,6,7,8,9,0\n"), MalformedCsv);
  EXPECT_THROW(parse(std::string(kHeader)), MalformedCsv);
  // constant column
  EXPECT_THROW(parse(std::string(kHeader) + "1,2,3,4,5,6,7,8,1\n2,3,4,5,5,7,8,9,0\n"), ZeroVarianceColumn);
  try {
    parse(small_csv() + "1,2,3\n");
    FAIL();
  } catch (const MalformedCsv& e) {
    EXPECT_NE(std::string(e.what()).find("row 6"), std::string::npos);
  }
  EXPECT_THROW(load_replay_dataset("/nonexistent/file.csv"), IoError);
}

TEST(ReplayCsv, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "glbandit_replay_test.csv";
  std::ofstream(path) << small_csv();
  EXPECT_EQ(load_replay_dataset(path.string()).rows(), 5);
  std::filesystem::remove(path);
}

TEST(ReplayRound, InversionFlipsTheRewardedArm) {
  const ReplayDataset ds = parse(small_csv());
  Rng rng = make_rng(1, 3);
  for (int rep = 0; rep < 50; ++rep) {
    const ReplayRound r = replay_round(ds, 999, 1000, rng);
    EXPECT_NE(ds.labels[r.rows[0]], ds.labels[r.rows[1]]);
    EXPECT_EQ(ds.labels[r.rows[r.diabetic_index]], 1);
    EXPECT_EQ(rewarded_arm(ds, r.rows, 1001, 1000), 1 - r.diabetic_index);
    EXPECT_EQ(rewarded_arm(ds, r.rows, 1000, 1000), r.diabetic_index);
    EXPECT_EQ(r.actions[0].size(), kReplayDim);
  }
}

TEST(ReplayRound, BothOrdersOccur) {
  const ReplayDataset ds = parse(small_csv());
  Rng rng = make_rng(2, 3);
  int first = 0;
  for (int rep = 0; rep < 1000; ++rep) first += replay_round(ds, 1, 1000, rng).diabetic_index == 0;
  EXPECT_GT(first, 400);
  EXPECT_LT(first, 600);
}

TEST(SyntheticReplay, ShapeAndDeterminism) {
  const std::string a = synthetic_replay_csv(30, 50, 1.0, 5);
  EXPECT_EQ(a, synthetic_replay_csv(30, 50, 1.0, 5));
  EXPECT_NE(a, synthetic_replay_csv(30, 50, 1.0, 6));
  const ReplayDataset ds = parse(a);
  EXPECT_EQ(ds.positives.size(), 30u);
  EXPECT_EQ(ds.negatives.size(), 50u);
  // classes separate along every feature
  for (int j = 0; j < kReplayFeatures; ++j) {
    double pos = 0, neg = 0;
    for (auto i : ds.positives) pos += ds.raw(i, j);
    for (auto i : ds.negatives) neg += ds.raw(i, j);
    EXPECT_GT(pos / 30 - neg / 50, 0.4) << j;
  }
}
