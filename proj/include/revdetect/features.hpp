#pragma once

// Extracted feature tables: `id,label,<8 marker columns>,extractor`.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "revdetect/corpus.hpp"
#include "revdetect/error.hpp"
#include "revdetect/extraction.hpp"
#include "revdetect/markers.hpp"
#include "revdetect/model.hpp"

namespace revdetect {

struct FeatureRecord {
  std::string id;
  std::optional<Label> label;
  MarkerVector markers;
  Provenance extractor = Provenance::Rule;
  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

inline std::vector<std::string> feature_header() {
  std::vector<std::string> h{"id", "label"};
  for (auto n : kMarkerNames) h.emplace_back(n);
  h.emplace_back("extractor");
  return h;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_features_csv(const std::vector<FeatureRecord>& rows, std::ostream& out) {
  const auto header = feature_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    out << csv::quote(r.id) << ',' << (r.label ? std::to_string(static_cast<int>(*r.label)) : "");
    for (double v : r.markers.values()) out << ',' << format_double(v);
    out << ',' << to_string(r.extractor) << '\n';
  }
}

inline void write_features_csv(const std::vector<FeatureRecord>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_features_csv(rows, out);
}

inline bool is_feature_header(const std::vector<std::string>& fields) { return fields == feature_header(); }

inline std::vector<FeatureRecord> load_features_csv(std::istream& in) {
  const auto records = csv::read_records(in);
  if (records.empty() || !is_feature_header(records.front().fields))
    throw SchemaError("feature table header must be: id,label,<8 markers>,extractor");
  std::vector<FeatureRecord> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.fields.size() != kNumMarkers + 3) throw RowError(rec.line, "expected 11 fields");
    FeatureRecord r;
    r.id = rec.fields[0];
    if (rec.fields[1] == "0") r.label = Label::Human;
    else if (rec.fields[1] == "1") r.label = Label::AiGenerated;
    else if (!rec.fields[1].empty()) throw RowError(rec.line, "label must be 0, 1 or empty");
    std::array<double, kNumMarkers> v{};
    for (std::size_t j = 0; j < kNumMarkers; ++j) {
      try {
        std::size_t used = 0;
        v[j] = std::stod(rec.fields[2 + j], &used);
        if (used != rec.fields[2 + j].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw RowError(rec.line, "marker '" + std::string(kMarkerNames[j]) + "' is not a number");
      }
    }
    r.markers = MarkerVector(v);
    auto p = parse_provenance(rec.fields.back());
    if (!p) throw RowError(rec.line, "unknown extractor '" + rec.fields.back() + "'");
    r.extractor = *p;
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<FeatureRecord> load_features_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return load_features_csv(in);
}

// Rows with labels only, as a training matrix.
struct TrainingSet {
  std::vector<FeatureRow> X;
  std::vector<int> y;
};

inline TrainingSet to_training_set(const std::vector<FeatureRecord>& rows) {
  TrainingSet t;
  for (const auto& r : rows) {
    if (!r.label) throw DataError("review '" + r.id + "' has no label");
    t.X.push_back(r.markers.values());
    t.y.push_back(static_cast<int>(*r.label));
  }
  return t;
}

}  // namespace revdetect
