#pragma once

// Dense review embeddings, an exact flat inner-product evidence index, and the
// retrieval evaluation harness.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "revdetect/corpus.hpp"
#include "revdetect/error.hpp"
#include "revdetect/markers.hpp"
#include "revdetect/text.hpp"

namespace revdetect {

inline constexpr std::size_t kEmbeddingDim = 384;
inline constexpr std::size_t kDisplayChars = 500;

using EmbeddingVector = std::array<double, kEmbeddingDim>;

inline EmbeddingVector normalize(const EmbeddingVector& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw DataError("cannot normalize a zero or non-finite vector");
  EmbeddingVector out;
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) out[i] = v[i] / norm;
  return out;
}

inline double similarity(std::span<const double, kEmbeddingDim> a, std::span<const double, kEmbeddingDim> b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) dot += a[i] * b[i];
  return dot;
}

class Encoder {
 public:
  virtual ~Encoder() = default;
  // Unnormalized embedding.
  virtual EmbeddingVector embed(std::string_view text) = 0;
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
  }
  virtual std::string tag() const = 0;
};

// Hashed lowercase word unigram + bigram frequencies.
class HashedNgramEncoder final : public Encoder {
 public:
  static constexpr std::uint64_t kHashSeed = 0x5eed0fba7c4e11a5ULL;

  static std::size_t bucket(std::string_view feature) {
    return static_cast<std::size_t>(text::fnv1a(feature, kHashSeed) % kEmbeddingDim);
  }

  EmbeddingVector embed(std::string_view s) override {
    EmbeddingVector v{};
    const auto tokens = detail::word_tokens(s);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      v[bucket("u:" + tokens[i])] += 1.0;
      if (i + 1 < tokens.size()) v[bucket("b:" + tokens[i] + ' ' + tokens[i + 1])] += 1.0;
    }
    return v;
  }

  std::string tag() const override { return "builtin-hashed-ngram-v1"; }
};

inline EmbeddingVector encode(std::string_view text, Encoder& encoder) { return normalize(encoder.embed(text)); }

struct EvidenceRecord {
  std::string id;
  Label label = Label::Human;
  Source source = Source::External;
  std::optional<std::string> paper_id;
  std::string text;          // full text, used for self-match exclusion
  std::string display_text;  // first kDisplayChars characters

  friend bool operator==(const EvidenceRecord&, const EvidenceRecord&) = default;
};

class EvidenceIndex {
 public:
  EvidenceIndex() = default;
  explicit EvidenceIndex(std::string encoder_tag) : encoder_tag_(std::move(encoder_tag)) {}

  void add(const EmbeddingVector& unit_vector, EvidenceRecord record) {
    vectors_.insert(vectors_.end(), unit_vector.begin(), unit_vector.end());
    records_.push_back(std::move(record));
  }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::string& encoder_tag() const { return encoder_tag_; }
  const EvidenceRecord& record(std::size_t row) const { return records_[row]; }
  std::span<const double, kEmbeddingDim> row(std::size_t r) const {
    return std::span<const double, kEmbeddingDim>(vectors_.data() + r * kEmbeddingDim, kEmbeddingDim);
  }
  const std::vector<double>& raw_vectors() const { return vectors_; }

  friend bool operator==(const EvidenceIndex&, const EvidenceIndex&) = default;

 private:
  std::string encoder_tag_;
  std::vector<double> vectors_;  // row-major N x kEmbeddingDim, unit rows
  std::vector<EvidenceRecord> records_;
};

inline constexpr std::size_t kEncodeBatch = 32;

// One normalized row per labeled review, in dataset order.
inline EvidenceIndex build_index(const Dataset& data, Encoder& encoder, std::size_t batch_size = kEncodeBatch) {
  if (data.empty()) throw DataError("cannot index an empty dataset");
  if (batch_size == 0) batch_size = kEncodeBatch;
  EvidenceIndex index(encoder.tag());
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(start + batch_size, data.size());
    std::vector<std::string> texts;
    for (std::size_t i = start; i < end; ++i) texts.push_back(data.reviews[i].text);
    const auto raw = encoder.embed_batch(texts);
    if (raw.size() != texts.size()) throw Error("encoder returned a wrong batch size");
    for (std::size_t i = start; i < end; ++i) {
      const auto& r = data.reviews[i];
      if (!r.label) throw DataError("indexed review '" + r.id + "' has no label");
      index.add(normalize(raw[i - start]),
                {r.id, *r.label, r.source, r.paper_id, r.text, text::utf8_prefix(r.text, kDisplayChars)});
    }
  }
  return index;
}

struct Neighbor {
  std::size_t row = 0;
  std::string id;
  Label label = Label::Human;
  double similarity = 0.0;
  std::string display_text;
  Source source = Source::External;
  std::optional<std::string> paper_id;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct RetrievalSummary {
  std::size_t human_count = 0;
  std::size_t ai_count = 0;
  double avg_similarity = 0.0;
  std::optional<Label> top1_label;

  friend bool operator==(const RetrievalSummary&, const RetrievalSummary&) = default;
};

struct RetrievalResult {
  std::vector<Neighbor> neighbors;
  RetrievalSummary summary;

  friend bool operator==(const RetrievalResult&, const RetrievalResult&) = default;
};

inline RetrievalSummary summarize(const std::vector<Neighbor>& neighbors) {
  RetrievalSummary s;
  double sum = 0.0;
  for (const auto& n : neighbors) {
    (n.label == Label::Human ? s.human_count : s.ai_count) += 1;
    sum += n.similarity;
  }
  if (!neighbors.empty()) {
    s.avg_similarity = sum / static_cast<double>(neighbors.size());
    s.top1_label = neighbors.front().label;
  }
  return s;
}

inline bool same_text(std::string_view a, std::string_view b) { return text::trim_right(a) == text::trim_right(b); }

// Exhaustive scan: the K+1 best rows by (similarity desc, row asc), minus rows
// whose text equals the query, truncated to K.
inline RetrievalResult search_vector(const EvidenceIndex& index, const EmbeddingVector& query,
                                     std::string_view query_text, std::size_t k) {
  if (index.empty()) throw DataError("evidence index is empty");
  if (k < 1) throw DataError("K must be at least 1");
  std::vector<double> sims(index.size());
  for (std::size_t r = 0; r < index.size(); ++r) sims[r] = similarity(query, index.row(r));
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t candidates = std::min(k + 1, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(candidates), order.end(),
                    [&](std::size_t a, std::size_t b) { return sims[a] > sims[b] || (sims[a] == sims[b] && a < b); });

  RetrievalResult result;
  for (std::size_t c = 0; c < candidates && result.neighbors.size() < k; ++c) {
    const auto r = order[c];
    const auto& rec = index.record(r);
    if (same_text(rec.text, query_text)) continue;
    result.neighbors.push_back({r, rec.id, rec.label, sims[r], rec.display_text, rec.source, rec.paper_id});
  }
  result.summary = summarize(result.neighbors);
  return result;
}

inline RetrievalResult search(const EvidenceIndex& index, std::string_view query_text, std::size_t k,
                              Encoder& encoder) {
  if (index.empty()) throw DataError("evidence index is empty");
  return search_vector(index, encode(query_text, encoder), query_text, k);
}

// --- persistence -----------------------------------------------------------
// Line 1: JSON header. Then N * 384 little-endian float64 values. Then one
// JSON metadata record per row.

inline constexpr int kIndexFormatVersion = 1;

inline void save_index(const EvidenceIndex& index, std::ostream& out) {
  static_assert(std::endian::native == std::endian::little, "index files are little-endian");
  nlohmann::json header = {{"format_version", kIndexFormatVersion},
                           {"dimension", kEmbeddingDim},
                           {"N", index.size()},
                           {"encoder", index.encoder_tag()}};
  out << header.dump() << '\n';
  const auto& v = index.raw_vectors();
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  for (std::size_t r = 0; r < index.size(); ++r) {
    const auto& rec = index.record(r);
    nlohmann::json meta = {{"id", rec.id},
                           {"label", static_cast<int>(rec.label)},
                           {"source", std::string(to_string(rec.source))},
                           {"paper_id", rec.paper_id ? nlohmann::json(*rec.paper_id) : nlohmann::json(nullptr)},
                           {"text", rec.text}};
    out << meta.dump() << '\n';
  }
}

inline void save_index(const EvidenceIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  save_index(index, out);
}

inline EvidenceIndex load_index(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("index file is empty");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed index header: ") + e.what(), e.byte);
  }
  if (header.value("format_version", 0) != kIndexFormatVersion) throw SchemaError("unsupported index format_version");
  if (header.value("dimension", std::size_t{0}) != kEmbeddingDim) throw SchemaError("index dimension must be 384");
  const auto n = header.at("N").get<std::size_t>();
  EvidenceIndex index(header.at("encoder").get<std::string>());

  std::vector<double> block(n * kEmbeddingDim);
  in.read(reinterpret_cast<char*>(block.data()), static_cast<std::streamsize>(block.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != block.size() * sizeof(double))
    throw ParseError("index vector block is truncated");
  for (std::size_t r = 0; r < n; ++r) {
    if (!std::getline(in, line)) throw ParseError("index metadata block is truncated");
    try {
      auto meta = nlohmann::json::parse(line);
      EvidenceRecord rec;
      rec.id = meta.at("id").get<std::string>();
      rec.label = static_cast<Label>(meta.at("label").get<int>());
      auto src = parse_source(meta.at("source").get<std::string>());
      if (!src) throw SchemaError("unknown source");
      rec.source = *src;
      if (!meta.at("paper_id").is_null()) rec.paper_id = meta.at("paper_id").get<std::string>();
      rec.text = meta.at("text").get<std::string>();
      rec.display_text = text::utf8_prefix(rec.text, kDisplayChars);
      EmbeddingVector v;
      std::copy_n(block.begin() + static_cast<std::ptrdiff_t>(r * kEmbeddingDim), kEmbeddingDim, v.begin());
      index.add(v, std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("index metadata row " + std::to_string(r) + ": " + e.what());
    }
  }
  return index;
}

inline EvidenceIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open index '" + path.string() + "'");
  return load_index(in);
}

// --- evaluation harness ----------------------------------------------------

struct ClassRetrievalStats {
  std::size_t queries = 0;
  double top1_accuracy = 0.0;
  double avg_same_class = 0.0;
  double avg_cross_class = 0.0;
  double mean_topk_similarity = 0.0;
  double mean_top1_similarity = 0.0;
};

struct RetrievalEvaluation {
  ClassRetrievalStats human;
  ClassRetrievalStats ai;
  std::size_t k = 5;
};

inline ClassRetrievalStats evaluate_class(const EvidenceIndex& index, Encoder& encoder,
                                          const std::vector<std::string>& queries, Label query_label, std::size_t k) {
  ClassRetrievalStats s;
  s.queries = queries.size();
  for (const auto& q : queries) {
    const auto res = search(index, q, k, encoder);
    if (res.neighbors.empty()) continue;
    std::size_t same = 0;
    double sim_sum = 0.0;
    for (const auto& n : res.neighbors) {
      same += n.label == query_label;
      sim_sum += n.similarity;
    }
    s.top1_accuracy += res.neighbors.front().label == query_label;
    s.avg_same_class += static_cast<double>(same);
    s.avg_cross_class += static_cast<double>(res.neighbors.size() - same);
    s.mean_topk_similarity += sim_sum / static_cast<double>(res.neighbors.size());
    s.mean_top1_similarity += res.neighbors.front().similarity;
  }
  const double n = static_cast<double>(queries.size());
  s.top1_accuracy /= n;
  s.avg_same_class /= n;
  s.avg_cross_class /= n;
  s.mean_topk_similarity /= n;
  s.mean_top1_similarity /= n;
  return s;
}

inline RetrievalEvaluation evaluate_retrieval(const EvidenceIndex& index, Encoder& encoder,
                                              const std::vector<std::string>& human_queries,
                                              const std::vector<std::string>& ai_queries, std::size_t k = 5) {
  if (human_queries.empty() || ai_queries.empty()) throw DataError("retrieval evaluation needs queries of both classes");
  return {evaluate_class(index, encoder, human_queries, Label::Human, k),
          evaluate_class(index, encoder, ai_queries, Label::AiGenerated, k), k};
}

struct QuerySample {
  std::vector<std::string> human;
  std::vector<std::string> ai;
};

// Up to n reviews per class, drawn without replacement with a fixed seed.
inline QuerySample sample_queries(const Dataset& data, std::size_t n_per_class, std::uint64_t seed) {
  std::array<std::vector<const Review*>, 2> pool;
  for (const auto& r : data.reviews)
    if (r.label) pool[static_cast<int>(*r.label)].push_back(&r);
  std::mt19937_64 rng(seed);
  QuerySample out;
  for (int c = 0; c < 2; ++c) {
    std::shuffle(pool[c].begin(), pool[c].end(), rng);
    auto& dst = c == 0 ? out.human : out.ai;
    for (std::size_t i = 0; i < std::min(n_per_class, pool[c].size()); ++i) dst.push_back(pool[c][i]->text);
  }
  return out;
}

inline nlohmann::json to_json(const ClassRetrievalStats& s) {
  return {{"queries", s.queries},
          {"top1_accuracy", s.top1_accuracy},
          {"avg_same_class", s.avg_same_class},
          {"avg_cross_class", s.avg_cross_class},
          {"mean_topk_similarity", s.mean_topk_similarity},
          {"mean_top1_similarity", s.mean_top1_similarity}};
}

inline nlohmann::json to_json(const RetrievalEvaluation& e) {
  return {{"k", e.k}, {"human", to_json(e.human)}, {"ai", to_json(e.ai)}};
}

inline nlohmann::json to_json(const Neighbor& n, std::size_t preview_chars = kDisplayChars) {
  return {{"id", n.id},
          {"label", std::string(to_string(n.label))},
          {"similarity", n.similarity},
          {"text", text::utf8_prefix(n.display_text, preview_chars)},
          {"source", std::string(to_string(n.source))},
          {"paper_id", n.paper_id ? nlohmann::json(*n.paper_id) : nlohmann::json(nullptr)}};
}

inline nlohmann::json to_json(const RetrievalSummary& s) {
  return {{"human_count", s.human_count},
          {"ai_count", s.ai_count},
          {"avg_similarity", s.avg_similarity},
          {"top1_label", s.top1_label ? nlohmann::json(std::string(to_string(*s.top1_label))) : nlohmann::json(nullptr)}};
}

inline nlohmann::json to_json(const RetrievalResult& r) {
  nlohmann::json neighbors = nlohmann::json::array();
  for (const auto& n : r.neighbors) neighbors.push_back(to_json(n));
  return {{"neighbors", neighbors}, {"summary", to_json(r.summary)}};
}

}  // namespace revdetect
