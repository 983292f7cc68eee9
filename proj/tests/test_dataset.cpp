#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include "eitvent/dataset.hpp"
#include "eitvent/errors.hpp"
#include "eitvent/util.hpp"

using namespace eitvent;

namespace {

std::filesystem::path temp_dir() {
  static const auto dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("eitvent_dataset_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("feature CSV round trip with missing cells") {
  FeatureDataset ds;
  ds.feature_names = {"ratio_right_left", "GI_global"};
  Sample a;
  a.subject_id = "H1";
  a.recording_id = "rec1";
  a.breath_index = 0;
  a.label = Label::kHealthy;
  a.features.values = {1.25, 0.3};
  Sample b;
  b.subject_id = "NH1";
  b.recording_id = "rec2";
  b.breath_index = 3;
  b.label = Label::kNonHealthy;
  b.features.values = {missing_value(), 0.75};
  ds.samples = {a, b};

  const auto path = temp_dir() / "features.csv";
  write_feature_csv(ds, path);
  const std::string text = read_file(path);
  CHECK(text.find("subject_id,recording_id,breath_index,label,ratio_right_left,"
                  "GI_global") == 0);
  CHECK(text.find("NH1,rec2,3,non-healthy,,0.75") != std::string::npos);

  const FeatureDataset back = read_feature_csv(path);
  REQUIRE(back.samples.size() == 2);
  CHECK(back.feature_names == ds.feature_names);
  CHECK(back.samples[0].features.values[0] == 1.25);
  CHECK(is_missing(back.samples[1].features.values[0]));
  CHECK(back.samples[1].label == Label::kNonHealthy);
}

TEST_CASE("duplicate sample keys are rejected") {
  const auto path = temp_dir() / "dup.csv";
  atomic_write_file(path,
                    "subject_id,recording_id,breath_index,label,f\n"
                    "s1,r1,0,healthy,1\n"
                    "s1,r1,0,healthy,2\n");
  CHECK_THROWS_AS(read_feature_csv(path), FormatError);
}

TEST_CASE("a subject with two labels in a feature file is rejected") {
  const auto path = temp_dir() / "twolabel.csv";
  atomic_write_file(path,
                    "subject_id,recording_id,breath_index,label,f\n"
                    "s1,r1,0,healthy,1\n"
                    "s1,r2,0,non-healthy,2\n");
  CHECK_THROWS_AS(read_feature_csv(path), FormatError);
}

TEST_CASE("column count mismatches carry the line number") {
  const auto path = temp_dir() / "short.csv";
  atomic_write_file(path,
                    "subject_id,recording_id,breath_index,label,f1,f2\n"
                    "s1,r1,0,healthy,1\n");
  try {
    read_feature_csv(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
