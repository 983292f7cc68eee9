#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unistd.h>

#include "eitvent/errors.hpp"
#include "eitvent/frame_sequence.hpp"
#include "eitvent/manifest.hpp"
#include "eitvent/rng.hpp"
#include "eitvent/util.hpp"

using namespace eitvent;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() /
             ("eitvent_core_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

FrameSequence small_sequence() {
  return FrameSequence(2, 2, 33.0, {1.0, 2.0, 3.0, 4.0});
}

}  // namespace

TEST_CASE("EITF identity round-trip for a known tiny file") {
  const auto path = temp_dir() / "tiny.eitf";
  write_recording(small_sequence(), path);
  const FrameSequence back = read_recording(path);
  CHECK(back.width() == 2);
  CHECK(back.height() == 2);
  CHECK(back.fps() == doctest::Approx(33.0));
  REQUIRE(back.frame_count() == 1);
  CHECK(back.at(0, 0, 0) == 1.0);
  CHECK(back.at(0, 0, 1) == 2.0);
  CHECK(back.at(0, 1, 0) == 3.0);
  CHECK(back.at(0, 1, 1) == 4.0);
}

TEST_CASE("EITF byte layout: one 2x2 frame is header plus 16 bytes") {
  const auto bytes = encode_eitf(small_sequence());
  CHECK(bytes.size() == 4 + 2 + 2 + 2 + 4 + 4 + 16);
}

TEST_CASE("write is deterministic") {
  const auto a = encode_eitf(small_sequence());
  const auto b = encode_eitf(small_sequence());
  CHECK(a == b);
}

TEST_CASE("file-level round-trip law: write(read(f)) is byte-identical") {
  Rng rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> data;
    const int frames = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < frames * 16; ++i) {
      // f32-representable values, as any on-disk recording holds.
      data.push_back(static_cast<double>(static_cast<float>(rng.normal() * 10)));
    }
    const FrameSequence seq(4, 4, 33.0, std::move(data));
    const auto path = temp_dir() / "roundtrip.eitf";
    write_recording(seq, path);
    const std::string original = read_file(path);
    const FrameSequence decoded = read_recording(path);
    CHECK(decoded == seq);
    const auto path2 = temp_dir() / "roundtrip2.eitf";
    write_recording(decoded, path2);
    CHECK(read_file(path2) == original);
  }
}

TEST_CASE("bad magic is a format error naming the offset") {
  const auto path = temp_dir() / "bad_magic.eitf";
  atomic_write_file(path, "XXXXsome more bytes to get past the header length");
  CHECK_THROWS_AS(read_recording(path), FormatError);
  try {
    read_recording(path);
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("byte 0") != std::string::npos);
  }
}

TEST_CASE("truncated frame payload is rejected") {
  const auto path = temp_dir() / "truncated.eitf";
  auto bytes = encode_eitf(small_sequence());
  bytes.resize(bytes.size() - 3);
  atomic_write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                           bytes.size()));
  CHECK_THROWS_AS(read_recording(path), FormatError);
}

TEST_CASE("non-finite pixels in the payload are rejected with a byte offset") {
  auto bytes = encode_eitf(small_sequence());
  const float inf = std::numeric_limits<float>::infinity();
  std::memcpy(bytes.data() + 18 + 4, &inf, sizeof(float));
  const auto path = temp_dir() / "nonfinite.eitf";
  atomic_write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                           bytes.size()));
  try {
    read_recording(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("byte 22") != std::string::npos);
  }
}

TEST_CASE("frame sequence invariants") {
  CHECK_THROWS_AS(FrameSequence(0, 2, 33.0, {1.0, 2.0}), DataError);
  CHECK_THROWS_AS(FrameSequence(2, 2, 0.0, {1.0, 2.0, 3.0, 4.0}), DataError);
  CHECK_THROWS_AS(FrameSequence(2, 2, 33.0, {1.0, 2.0, 3.0}), DataError);
  CHECK_THROWS_AS(FrameSequence(2, 2, 33.0, {}), DataError);
  CHECK_THROWS_AS(
      FrameSequence(2, 2, 33.0, {1.0, std::numeric_limits<double>::quiet_NaN(),
                                 3.0, 4.0}),
      DataError);
}

TEST_CASE("CSV frame format round-trips values exactly") {
  Rng rng(77);
  std::vector<double> data;
  for (int i = 0; i < 32; ++i) {
    data.push_back(static_cast<double>(static_cast<float>(rng.normal())));
  }
  const FrameSequence seq(4, 4, 16.5, std::move(data));
  const auto path = temp_dir() / "frames.csv";
  write_recording_csv(seq, path);
  const FrameSequence back = read_recording(path);
  CHECK(back == seq);
}

TEST_CASE("CSV frame format rejects short rows with a line number") {
  const auto path = temp_dir() / "bad.csv";
  atomic_write_file(path, "# 2,2,33\n1,2,3\n");
  try {
    read_recording(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("unrecognized container is reported") {
  const auto path = temp_dir() / "mystery.bin";
  atomic_write_file(path, "not a recording at all");
  CHECK_THROWS_AS(read_recording(path), FormatError);
}

TEST_CASE("manifest: 16 subjects with the 5/11 class split") {
  std::string csv = "subject_id,label,recording_path,annotation_path\n";
  for (int i = 1; i <= 5; ++i) {
    csv += "H" + std::to_string(i) + ",healthy,r" + std::to_string(i) + ".eitf,\n";
  }
  for (int i = 1; i <= 11; ++i) {
    csv += "NH" + std::to_string(i) + ",Non-Healthy,r" + std::to_string(i + 5) +
           ".eitf,\n";
  }
  const auto path = temp_dir() / "manifest.csv";
  atomic_write_file(path, csv);
  const CohortManifest manifest = read_manifest(path);
  CHECK(manifest.entries.size() == 16);
  CHECK(manifest.subject_ids().size() == 16);
  int healthy = 0;
  for (const auto& e : manifest.entries) {
    if (e.label == Label::kHealthy) ++healthy;
  }
  CHECK(healthy == 5);
  // Relative paths resolve against the manifest directory.
  CHECK(manifest.entries[0].recording_path == temp_dir() / "r1.eitf");
  CHECK(manifest.entries[0].annotation_path.empty());
}

TEST_CASE("manifest: a subject with two labels is rejected at parse time") {
  const auto path = temp_dir() / "conflict.csv";
  atomic_write_file(path,
                    "subject_id,label,recording_path,annotation_path\n"
                    "s1,healthy,a.eitf,\n"
                    "s2,non-healthy,b.eitf,\n"
                    "s1,non-healthy,c.eitf,\n");
  CHECK_THROWS_AS(read_manifest(path), FormatError);
}

TEST_CASE("manifest: unknown label token and missing column are rejected") {
  const auto bad_label = temp_dir() / "bad_label.csv";
  atomic_write_file(bad_label,
                    "subject_id,label,recording_path,annotation_path\n"
                    "s1,sick,a.eitf,\n");
  CHECK_THROWS_AS(read_manifest(bad_label), FormatError);

  const auto missing_col = temp_dir() / "missing_col.csv";
  atomic_write_file(missing_col,
                    "subject_id,label,recording_path,annotation_path\n"
                    "s1,healthy\n");
  CHECK_THROWS_AS(read_manifest(missing_col), FormatError);
}

TEST_CASE("manifest round-trip through write_manifest") {
  CohortManifest manifest;
  manifest.entries.push_back({"s1", Label::kHealthy, "rec/a.eitf", "rec/a.csv"});
  manifest.entries.push_back({"s2", Label::kNonHealthy, "rec/b.eitf", ""});
  const auto path = temp_dir() / "rt_manifest.csv";
  write_manifest(manifest, path);
  const CohortManifest back = read_manifest(path);
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].subject_id == "s1");
  CHECK(back.entries[1].label == Label::kNonHealthy);
  CHECK(back.entries[1].annotation_path.empty());
}
