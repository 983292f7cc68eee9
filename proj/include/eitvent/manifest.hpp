#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eitvent {

enum class Label : std::uint8_t { kHealthy = 0, kNonHealthy = 1 };

/// Canonical label tokens: "healthy" / "non-healthy".
const char* label_token(Label label);
/// Case-insensitive parse of the canonical tokens. Throws DataError.
Label parse_label(std::string_view token);

struct ManifestEntry {
  std::string subject_id;
  Label label = Label::kHealthy;
  std::filesystem::path recording_path;
  std::filesystem::path annotation_path;  // empty: no annotations, auto-detect
};

struct CohortManifest {
  std::vector<ManifestEntry> entries;

  std::vector<std::string> subject_ids() const;  // distinct, in first-seen order
};

/// Reads `subject_id,label,recording_path,annotation_path` CSV. Relative
/// paths are resolved against the manifest's directory. Rejects unknown
/// label tokens and subjects that appear with two labels.
CohortManifest read_manifest(const std::filesystem::path& path);

/// Paths are written exactly as stored.
void write_manifest(const CohortManifest& manifest,
                    const std::filesystem::path& path);

}  // namespace eitvent
