#include "eitvent/dataset.hpp"

#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "eitvent/errors.hpp"
#include "eitvent/util.hpp"

namespace eitvent {

int FeatureDataset::feature_index(std::string_view name) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    if (feature_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> FeatureDataset::subject_ids() const {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& s : samples) {
    if (seen.insert(s.subject_id).second) ids.push_back(s.subject_id);
  }
  return ids;
}

std::size_t FeatureDataset::count_label(Label label) const {
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (s.label == label) ++n;
  }
  return n;
}

void FeatureDataset::validate() const {
  std::set<std::tuple<std::string, std::string, int>> keys;
  std::map<std::string, Label> label_by_subject;
  for (const auto& s : samples) {
    if (s.subject_id.empty()) throw DataError("sample with empty subject_id");
    if (s.features.values.size() != feature_names.size()) {
      throw DataError("sample (" + s.subject_id + "," + s.recording_id + "," +
                      std::to_string(s.breath_index) + ") has " +
                      std::to_string(s.features.values.size()) +
                      " values, expected " + std::to_string(feature_names.size()));
    }
    if (!keys.emplace(s.subject_id, s.recording_id, s.breath_index).second) {
      throw DataError("duplicate sample key (" + s.subject_id + "," +
                      s.recording_id + "," + std::to_string(s.breath_index) + ")");
    }
    const auto it = label_by_subject.find(s.subject_id);
    if (it == label_by_subject.end()) {
      label_by_subject.emplace(s.subject_id, s.label);
    } else if (it->second != s.label) {
      throw DataError("subject '" + s.subject_id + "' carries two labels");
    }
  }
}

FeatureDataset read_feature_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(path.string() + ": empty feature file");
  }
  const auto header = split_csv_line(line);
  if (header.size() < 5 || header[0] != "subject_id" ||
      header[1] != "recording_id" || header[2] != "breath_index" ||
      header[3] != "label") {
    throw FormatError(path.string() +
                      ": line 1: expected subject_id,recording_id,breath_index,"
                      "label,<features...>");
  }
  FeatureDataset ds;
  ds.feature_names.assign(header.begin() + 4, header.end());

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    const std::string where = path.string() + ": line " + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw FormatError(where + ": expected " + std::to_string(header.size()) +
                        " columns, got " + std::to_string(fields.size()));
    }
    Sample s;
    s.subject_id = fields[0];
    s.recording_id = fields[1];
    s.breath_index = parse_int(fields[2], where);
    try {
      s.label = parse_label(fields[3]);
    } catch (const DataError& e) {
      throw FormatError(where + ": " + e.what());
    }
    s.features.values.reserve(ds.feature_names.size());
    for (std::size_t i = 4; i < fields.size(); ++i) {
      if (fields[i].empty()) {
        s.features.values.push_back(missing_value());
      } else {
        s.features.values.push_back(parse_double(fields[i], where));
      }
    }
    ds.samples.push_back(std::move(s));
  }
  try {
    ds.validate();
  } catch (const DataError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return ds;
}

void write_feature_csv(const FeatureDataset& dataset,
                       const std::filesystem::path& path) {
  std::string out = "subject_id,recording_id,breath_index,label";
  for (const auto& name : dataset.feature_names) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (const auto& s : dataset.samples) {
    out += s.subject_id;
    out += ',';
    out += s.recording_id;
    out += ',';
    out += std::to_string(s.breath_index);
    out += ',';
    out += label_token(s.label);
    for (const double v : s.features.values) {
      out += ',';
      if (!is_missing(v)) out += format_double(v);
    }
    out += '\n';
  }
  atomic_write_file(path, out);
}

}  // namespace eitvent
