#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace eitvent {

/// Time-ordered stack of reconstructed impedance-change frames.
///
/// Values are relative impedance changes in arbitrary units. Frames are
/// kept as doubles in memory; the EITF container stores them as
/// little-endian 32-bit floats, so sequences read from disk round-trip
/// bit-exactly while in-memory values of higher precision are narrowed
/// on write.
class FrameSequence {
 public:
  static constexpr int kDefaultWidth = 32;
  static constexpr int kDefaultHeight = 32;
  static constexpr double kDefaultFps = 33.0;

  /// `data` is time-major, row-major within each frame and must hold a
  /// whole number of width*height frames. Throws DataError on invalid
  /// dimensions or non-finite values.
  FrameSequence(int width, int height, double fps, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  double fps() const { return fps_; }
  int frame_count() const {
    return static_cast<int>(data_.size() / pixels_per_frame());
  }
  std::size_t pixels_per_frame() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::span<const double> frame(int t) const {
    return {data_.data() + static_cast<std::size_t>(t) * pixels_per_frame(),
            pixels_per_frame()};
  }
  double at(int t, int row, int col) const {
    return data_[static_cast<std::size_t>(t) * pixels_per_frame() +
                 static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(col)];
  }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const FrameSequence&) const = default;

 private:
  int width_;
  int height_;
  double fps_;
  std::vector<double> data_;
};

/// EITF container version understood by this library.
inline constexpr int kEitfVersion = 1;

/// Reads a recording in either supported container: the binary EITF
/// format (magic "EITF") or the CSV frame format (leading '#' header
/// line). Errors name the byte or line offset.
FrameSequence read_recording(const std::filesystem::path& path);

/// Writes canonical little-endian EITF bytes. Deterministic.
void write_recording(const FrameSequence& seq, const std::filesystem::path& path);

/// Serializes to EITF bytes without touching the filesystem.
std::vector<std::byte> encode_eitf(const FrameSequence& seq);
FrameSequence decode_eitf(std::span<const std::byte> bytes,
                          const std::string& origin);

/// CSV frame format: header `# width,height,fps`, one frame per line.
/// Values are printed with enough digits to round-trip exactly.
void write_recording_csv(const FrameSequence& seq,
                         const std::filesystem::path& path);

}  // namespace eitvent
