#pragma once

// Labeled review corpus: ingestion, CSV persistence and stratified splitting.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "revdetect/error.hpp"
#include "revdetect/text.hpp"

namespace revdetect {

enum class Label : int { Human = 0, AiGenerated = 1 };

enum class Source {
  PeerReadIclr,
  PeerReadAcl,
  PeerReadConll,
  GenReviewNeutral,
  AdversarialA,
  AdversarialB,
  External,
};

inline constexpr std::array<std::pair<Source, std::string_view>, 7> kSourceNames{{
    {Source::PeerReadIclr, "PeerRead-ICLR"},
    {Source::PeerReadAcl, "PeerRead-ACL"},
    {Source::PeerReadConll, "PeerRead-CoNLL"},
    {Source::GenReviewNeutral, "GenReviewNeutral"},
    {Source::AdversarialA, "AdversarialA"},
    {Source::AdversarialB, "AdversarialB"},
    {Source::External, "External"},
}};

inline std::string_view to_string(Source s) {
  for (const auto& [src, name] : kSourceNames)
    if (src == s) return name;
  return "External";
}

inline std::optional<Source> parse_source(std::string_view name) {
  for (const auto& [src, name_] : kSourceNames)
    if (name_ == name) return src;
  return std::nullopt;
}

inline std::string_view to_string(Label l) { return l == Label::Human ? "Human" : "AI-Generated"; }

// Minimum review length, counted in unicode scalar values of the raw text.
inline constexpr std::size_t kMinReviewChars = 50;

struct Review {
  std::string id;
  std::string text;
  std::optional<Label> label;
  Source source = Source::External;
  std::optional<std::string> paper_id;

  friend bool operator==(const Review&, const Review&) = default;
};

struct Dataset {
  std::vector<Review> reviews;
  std::uint64_t seed = 0;

  std::size_t size() const { return reviews.size(); }
  bool empty() const { return reviews.empty(); }
};

struct ClassCounts {
  std::size_t human = 0;
  std::size_t ai = 0;
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

inline ClassCounts class_counts(const Dataset& data) {
  ClassCounts counts;
  for (const auto& r : data.reviews) {
    if (!r.label) throw DataError("review '" + r.id + "' has no label");
    (*r.label == Label::Human ? counts.human : counts.ai) += 1;
  }
  return counts;
}

inline void check_unique_ids(const Dataset& data) {
  std::unordered_set<std::string_view> seen;
  for (const auto& r : data.reviews)
    if (!seen.insert(r.id).second) throw DataError("duplicate review id '" + r.id + "'");
}

// Parses one PeerRead venue file. Each `comments` entry becomes a Human-labeled
// review; entries shorter than kMinReviewChars are dropped. Ids are
// `<id_prefix>-<paper id or file position>-<review position>`.
inline std::vector<Review> parse_peerread_file(std::string_view raw, Source source,
                                               std::string_view id_prefix = "peerread") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed PeerRead document: ") + e.what(), e.byte);
  }
  if (!doc.is_object() || !doc.contains("reviews") || !doc["reviews"].is_array())
    throw SchemaError("PeerRead document has no 'reviews' array");

  std::optional<std::string> paper_id;
  if (auto it = doc.find("id"); it != doc.end()) {
    if (it->is_string()) paper_id = it->get<std::string>();
    else if (it->is_number_integer()) paper_id = std::to_string(it->get<long long>());
  }

  std::vector<Review> out;
  std::size_t position = 0;
  for (const auto& entry : doc["reviews"]) {
    ++position;
    if (!entry.is_object()) continue;
    auto it = entry.find("comments");
    if (it == entry.end() || !it->is_string()) continue;
    auto comments = it->get<std::string>();
    if (text::codepoint_count(comments) < kMinReviewChars) continue;
    Review r;
    r.id = std::string(id_prefix) + "-" + paper_id.value_or("0") + "-" + std::to_string(position);
    r.text = std::move(comments);
    r.label = Label::Human;
    r.source = source;
    r.paper_id = paper_id;
    out.push_back(std::move(r));
  }
  return out;
}

namespace csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

// RFC 4180 reader: quoted fields may hold commas, doubled quotes and newlines.
inline std::vector<Record> read_records(std::istream& in) {
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<Record> records;
  std::size_t i = 0, line = 1;
  while (i < data.size()) {
    Record rec;
    rec.line = line;
    std::string field;
    bool done = false;
    while (!done) {
      field.clear();
      if (i < data.size() && data[i] == '"') {
        std::size_t open = i++;
        for (;;) {
          if (i >= data.size()) throw ParseError("unterminated quoted field", open);
          if (data[i] == '"') {
            if (i + 1 < data.size() && data[i + 1] == '"') {
              field += '"';
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (data[i] == '\n') ++line;
          field += data[i++];
        }
      } else {
        while (i < data.size() && data[i] != ',' && data[i] != '\n' && data[i] != '\r')
          field += data[i++];
      }
      rec.fields.push_back(field);
      if (i >= data.size()) {
        done = true;
      } else if (data[i] == ',') {
        ++i;
      } else if (data[i] == '\r' || data[i] == '\n') {
        if (data[i] == '\r') ++i;
        if (i < data.size() && data[i] == '\n') ++i;
        ++line;
        done = true;
      } else {
        throw ParseError("unexpected character after quoted field", i);
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace csv

inline constexpr std::string_view kDatasetHeader = "id,text,label,source,paper_id";

inline void write_dataset_csv(const Dataset& data, std::ostream& out) {
  out << kDatasetHeader << '\n';
  for (const auto& r : data.reviews) {
    out << csv::quote(r.id) << ',' << csv::quote(r.text) << ',';
    out << (r.label ? csv::quote(std::to_string(static_cast<int>(*r.label))) : csv::quote(""));
    out << ',' << csv::quote(to_string(r.source)) << ',' << csv::quote(r.paper_id.value_or(""))
        << '\n';
  }
}

inline void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_dataset_csv(data, out);
}

inline Dataset load_dataset_csv(std::istream& in) {
  auto records = csv::read_records(in);
  Dataset data;
  if (records.empty()) throw SchemaError("dataset file is empty (missing header)");
  std::string header;
  for (std::size_t k = 0; k < records[0].fields.size(); ++k)
    header += (k ? "," : "") + records[0].fields[k];
  if (header != kDatasetHeader)
    throw SchemaError("dataset header must be '" + std::string(kDatasetHeader) + "', got '" +
                      header + "'");

  std::unordered_set<std::string> ids;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& rec = records[k];
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;  // blank line
    if (rec.fields.size() != 5) throw RowError(rec.line, "expected 5 fields");
    Review r;
    r.id = rec.fields[0];
    r.text = rec.fields[1];
    const auto& label = rec.fields[2];
    if (label == "0") r.label = Label::Human;
    else if (label == "1") r.label = Label::AiGenerated;
    else if (!label.empty()) throw RowError(rec.line, "unknown label '" + label + "'");
    auto source = parse_source(rec.fields[3]);
    if (!source) throw RowError(rec.line, "unknown source '" + rec.fields[3] + "'");
    r.source = *source;
    if (!rec.fields[4].empty()) r.paper_id = rec.fields[4];
    if (r.id.empty()) throw RowError(rec.line, "empty id");
    if (text::codepoint_count(r.text) < kMinReviewChars)
      throw RowError(rec.line, "review text shorter than 50 characters");
    if (!ids.insert(r.id).second) throw RowError(rec.line, "duplicate id '" + r.id + "'");
    data.reviews.push_back(std::move(r));
  }
  return data;
}

inline Dataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return load_dataset_csv(in);
}

// Deterministic permutation of the dataset for a fixed seed.
inline Dataset shuffled(const Dataset& data, std::uint64_t seed) {
  Dataset out = data;
  out.seed = seed;
  std::mt19937_64 rng(seed);
  std::shuffle(out.reviews.begin(), out.reviews.end(), rng);
  return out;
}

inline std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

struct Split {
  Dataset train;
  Dataset test;
};

// Per class, round-half-up(test_fraction * class size) reviews go to test, the
// rest to train. Both halves keep the original relative order.
inline Split stratified_split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw DataError("test_fraction must lie in (0, 1)");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < data.reviews.size(); ++i) {
    const auto& r = data.reviews[i];
    if (!r.label) throw DataError("review '" + r.id + "' has no label");
    by_class[static_cast<int>(*r.label)].push_back(i);
  }
  for (const auto& members : by_class)
    if (members.size() < 2) throw DataError("each class needs at least 2 reviews to split");

  std::mt19937_64 rng(seed);
  std::vector<char> in_test(data.reviews.size(), 0);
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_test = std::min(round_half_up(test_fraction * members.size()), members.size());
    for (std::size_t k = 0; k < n_test; ++k) in_test[members[k]] = 1;
  }
  Split split;
  split.train.seed = split.test.seed = seed;
  for (std::size_t i = 0; i < data.reviews.size(); ++i)
    (in_test[i] ? split.test : split.train).reviews.push_back(data.reviews[i]);
  return split;
}

}  // namespace revdetect
