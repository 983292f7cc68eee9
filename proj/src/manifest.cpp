#include "eitvent/manifest.hpp"

#include <map>
#include <sstream>

#include "eitvent/errors.hpp"
#include "eitvent/util.hpp"

namespace eitvent {

const char* label_token(Label label) {
  return label == Label::kHealthy ? "healthy" : "non-healthy";
}

Label parse_label(std::string_view token) {
  const std::string t = to_lower(token);
  if (t == "healthy") return Label::kHealthy;
  if (t == "non-healthy") return Label::kNonHealthy;
  throw DataError("unknown label token '" + std::string(token) +
                  "' (expected healthy/non-healthy)");
}

std::vector<std::string> CohortManifest::subject_ids() const {
  std::vector<std::string> ids;
  for (const auto& e : entries) {
    bool seen = false;
    for (const auto& id : ids) {
      if (id == e.subject_id) {
        seen = true;
        break;
      }
    }
    if (!seen) ids.push_back(e.subject_id);
  }
  return ids;
}

CohortManifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(path.string() + ": empty manifest");
  }
  const auto header = split_csv_line(line);
  const std::vector<std::string> expected = {"subject_id", "label",
                                             "recording_path", "annotation_path"};
  if (header.size() != expected.size()) {
    throw FormatError(path.string() + ": line 1: expected header " +
                      "subject_id,label,recording_path,annotation_path");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (to_lower(header[i]) != expected[i]) {
      throw FormatError(path.string() + ": line 1: column " +
                        std::to_string(i + 1) + " must be '" + expected[i] +
                        "', got '" + header[i] + "'");
    }
  }

  const std::filesystem::path base =
      path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  auto resolve = [&base](const std::string& p) -> std::filesystem::path {
    if (p.empty()) return {};
    std::filesystem::path candidate(p);
    return candidate.is_absolute() ? candidate : base / candidate;
  };

  CohortManifest manifest;
  std::map<std::string, Label> label_by_subject;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    const std::string where = path.string() + ": line " + std::to_string(line_no);
    if (fields.size() < 3 || fields.size() > 4) {
      throw FormatError(where + ": expected 4 columns, got " +
                        std::to_string(fields.size()));
    }
    ManifestEntry entry;
    entry.subject_id = fields[0];
    if (entry.subject_id.empty()) {
      throw FormatError(where + ": empty subject_id");
    }
    try {
      entry.label = parse_label(fields[1]);
    } catch (const DataError& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (fields[2].empty()) {
      throw FormatError(where + ": missing recording_path");
    }
    entry.recording_path = resolve(fields[2]);
    entry.annotation_path = fields.size() == 4 ? resolve(fields[3])
                                               : std::filesystem::path{};

    const auto it = label_by_subject.find(entry.subject_id);
    if (it == label_by_subject.end()) {
      label_by_subject.emplace(entry.subject_id, entry.label);
    } else if (it->second != entry.label) {
      throw FormatError(where + ": subject '" + entry.subject_id +
                        "' appears with two labels");
    }
    manifest.entries.push_back(std::move(entry));
  }
  if (manifest.entries.empty()) {
    throw FormatError(path.string() + ": manifest has no entries");
  }
  return manifest;
}

void write_manifest(const CohortManifest& manifest,
                    const std::filesystem::path& path) {
  std::string out = "subject_id,label,recording_path,annotation_path\n";
  for (const auto& e : manifest.entries) {
    out += e.subject_id;
    out += ',';
    out += label_token(e.label);
    out += ',';
    out += e.recording_path.generic_string();
    out += ',';
    out += e.annotation_path.generic_string();
    out += '\n';
  }
  atomic_write_file(path, out);
}

}  // namespace eitvent
