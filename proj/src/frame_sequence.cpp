#include "eitvent/frame_sequence.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <string>
#include <type_traits>

#include "eitvent/errors.hpp"
#include "eitvent/util.hpp"

namespace eitvent {

namespace {

void append_bytes(std::vector<std::byte>& out, const void* src, std::size_t n) {
  const auto* p = static_cast<const std::byte*>(src);
  out.insert(out.end(), p, p + n);
}

template <class T>
void append_le(std::vector<std::byte>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  // Little-endian host assumed; asserted once below.
  append_bytes(out, &value, sizeof(T));
}

template <class T>
T read_le(std::span<const std::byte> bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

constexpr std::size_t kHeaderSize = 4 + 2 + 2 + 2 + 4 + 4;

bool host_is_little_endian() {
  const std::uint16_t probe = 1;
  std::uint8_t first;
  std::memcpy(&first, &probe, 1);
  return first == 1;
}

}  // namespace

FrameSequence::FrameSequence(int width, int height, double fps,
                             std::vector<double> data)
    : width_(width), height_(height), fps_(fps), data_(std::move(data)) {
  if (width_ < 2 || height_ < 2) {
    throw DataError("frame grid must be at least 2x2, got " +
                    std::to_string(width_) + "x" + std::to_string(height_));
  }
  if (!(fps_ > 0.0) || !std::isfinite(fps_)) {
    throw DataError("fps must be positive and finite");
  }
  const std::size_t ppf = pixels_per_frame();
  if (data_.empty() || data_.size() % ppf != 0) {
    throw DataError("frame data size " + std::to_string(data_.size()) +
                    " is not a positive multiple of " + std::to_string(ppf));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw DataError("non-finite pixel value at flat index " + std::to_string(i));
    }
  }
}

std::vector<std::byte> encode_eitf(const FrameSequence& seq) {
  if (!host_is_little_endian()) {
    throw FormatError("EITF writer requires a little-endian host");
  }
  if (seq.width() > 0xFFFF || seq.height() > 0xFFFF) {
    throw DataError("EITF grid dimensions exceed 16-bit range");
  }
  std::vector<std::byte> out;
  out.reserve(kHeaderSize + seq.data().size() * sizeof(float));
  append_bytes(out, "EITF", 4);
  append_le<std::uint16_t>(out, static_cast<std::uint16_t>(kEitfVersion));
  append_le<std::uint16_t>(out, static_cast<std::uint16_t>(seq.width()));
  append_le<std::uint16_t>(out, static_cast<std::uint16_t>(seq.height()));
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(seq.frame_count()));
  append_le<float>(out, static_cast<float>(seq.fps()));
  for (const double v : seq.data()) {
    append_le<float>(out, static_cast<float>(v));
  }
  return out;
}

FrameSequence decode_eitf(std::span<const std::byte> bytes,
                          const std::string& origin) {
  if (!host_is_little_endian()) {
    throw FormatError("EITF reader requires a little-endian host");
  }
  if (bytes.size() < kHeaderSize) {
    throw FormatError(origin + ": truncated EITF header (" +
                      std::to_string(bytes.size()) + " bytes, need " +
                      std::to_string(kHeaderSize) + ")");
  }
  if (std::memcmp(bytes.data(), "EITF", 4) != 0) {
    char magic[5] = {};
    std::memcpy(magic, bytes.data(), 4);
    throw FormatError(origin + ": bad magic '" + magic + "' at byte 0");
  }
  const auto version = read_le<std::uint16_t>(bytes, 4);
  if (version != kEitfVersion) {
    throw FormatError(origin + ": unsupported EITF version " +
                      std::to_string(version) + " at byte 4");
  }
  const auto width = read_le<std::uint16_t>(bytes, 6);
  const auto height = read_le<std::uint16_t>(bytes, 8);
  const auto n_frames = read_le<std::uint32_t>(bytes, 10);
  const float fps = read_le<float>(bytes, 14);

  const std::size_t n_pixels = static_cast<std::size_t>(width) *
                               static_cast<std::size_t>(height) *
                               static_cast<std::size_t>(n_frames);
  const std::size_t expected = kHeaderSize + n_pixels * sizeof(float);
  if (bytes.size() != expected) {
    throw FormatError(origin + ": expected " + std::to_string(expected) +
                      " bytes for " + std::to_string(n_frames) + " frames, got " +
                      std::to_string(bytes.size()));
  }

  std::vector<double> data(n_pixels);
  for (std::size_t i = 0; i < n_pixels; ++i) {
    const std::size_t off = kHeaderSize + i * sizeof(float);
    const float v = read_le<float>(bytes, off);
    if (!std::isfinite(v)) {
      throw FormatError(origin + ": non-finite pixel at byte " +
                        std::to_string(off));
    }
    data[i] = static_cast<double>(v);
  }
  try {
    return FrameSequence(width, height, static_cast<double>(fps), std::move(data));
  } catch (const DataError& e) {
    throw FormatError(origin + ": " + e.what());
  }
}

namespace {

FrameSequence read_recording_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(origin + ": empty file");
  }
  if (line.empty() || line[0] != '#') {
    throw FormatError(origin + ": line 1: expected '# width,height,fps' header");
  }
  auto header = split_csv_line(std::string_view(line).substr(1));
  if (header.size() != 3) {
    throw FormatError(origin + ": line 1: header needs width,height,fps");
  }
  for (auto& f : header) {
    while (!f.empty() && f.front() == ' ') f.erase(f.begin());
  }
  const int width = parse_int(header[0], origin + ": line 1");
  const int height = parse_int(header[1], origin + ": line 1");
  const double fps = parse_double(header[2], origin + ": line 1");

  std::vector<double> data;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (static_cast<long long>(fields.size()) !=
        static_cast<long long>(width) * height) {
      throw FormatError(origin + ": line " + std::to_string(line_no) + ": got " +
                        std::to_string(fields.size()) + " values, expected " +
                        std::to_string(width * height));
    }
    for (const auto& f : fields) {
      const double v =
          parse_double(f, origin + ": line " + std::to_string(line_no));
      if (!std::isfinite(v)) {
        throw FormatError(origin + ": line " + std::to_string(line_no) +
                          ": non-finite pixel value");
      }
      data.push_back(v);
    }
  }
  if (data.empty()) {
    throw FormatError(origin + ": no frames after header");
  }
  try {
    return FrameSequence(width, height, fps, std::move(data));
  } catch (const DataError& e) {
    throw FormatError(origin + ": " + e.what());
  }
}

}  // namespace

FrameSequence read_recording(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  if (text.size() >= 4 && text.compare(0, 4, "EITF") == 0) {
    return decode_eitf(
        std::span(reinterpret_cast<const std::byte*>(text.data()), text.size()),
        path.string());
  }
  if (!text.empty() && text[0] == '#') {
    return read_recording_csv(text, path.string());
  }
  throw FormatError(path.string() +
                    ": unrecognized format at byte 0 (expected EITF magic or "
                    "'#' CSV header)");
}

void write_recording(const FrameSequence& seq, const std::filesystem::path& path) {
  const auto bytes = encode_eitf(seq);
  atomic_write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                           bytes.size()));
}

void write_recording_csv(const FrameSequence& seq,
                         const std::filesystem::path& path) {
  std::string out;
  out.reserve(seq.data().size() * 16);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "# %d,%d,%.17g\n", seq.width(), seq.height(),
                seq.fps());
  out += buf;
  const std::size_t ppf = seq.pixels_per_frame();
  for (int t = 0; t < seq.frame_count(); ++t) {
    const auto frame = seq.frame(t);
    for (std::size_t i = 0; i < ppf; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", frame[i]);
      out += buf;
      out += (i + 1 == ppf) ? '\n' : ',';
    }
  }
  atomic_write_file(path, out);
}

}  // namespace eitvent
