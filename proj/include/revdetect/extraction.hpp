#pragma once

// LLM-backed marker scoring (prompt, response parsing) and checkpointed batch
// extraction over a worker pool.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "revdetect/corpus.hpp"
#include "revdetect/error.hpp"
#include "revdetect/markers.hpp"
#include "revdetect/text.hpp"

namespace revdetect {

inline constexpr std::size_t kPromptTextLimit = 3000;

inline constexpr std::string_view kExtractionPromptTemplate =
    R"(You are a linguistic analyst evaluating the writing characteristics of an academic peer review.

Score each of the following 8 textual properties from 0.0 (not present at all) to 1.0 (very strongly present). Be precise and use the full range of scores.

PROPERTIES:

1. `standardized_structure`: How rigidly does the text follow a templated structure with clearly labeled sections (e.g., Summary, Strengths, Weaknesses)?
2. `predictable_criticism`: How much does the text rely on common, formulaic critique phrases (e.g., "needs ablation study", "stronger baselines") rather than paper-specific criticism?
3. `excessive_balance`: How diplomatically balanced is the tone? Does it systematically pair criticism with positive framing?
4. `linguistic_homogeneity`: How uniform are the grammar, sentence length, and tone throughout the text?
5. `generic_domain_language`: How much does the text use broad academic phrases (e.g., "novel approach", "significant contribution") rather than precise technical language?
6. `conceptual_feedback`: How much does the feedback stay at a high/conceptual level without referencing specific lines, pages, figures, or tables?
7. `absence_personal_signals`: How absent are personal voice markers (e.g., "I think", "I found", "in my experience", expressions of uncertainty)?
8. `repetition_patterns`: How much repetitive or templated phrasing appears across sections?

PEER REVIEW TEXT:
"""
{review_text}
"""

Respond ONLY with valid JSON containing the 8 scores (no justifications):
{
  "standardized_structure": 0.0,
  "predictable_criticism": 0.0,
  "excessive_balance": 0.0,
  "linguistic_homogeneity": 0.0,
  "generic_domain_language": 0.0,
  "conceptual_feedback": 0.0,
  "absence_personal_signals": 0.0,
  "repetition_patterns": 0.0
})";

inline std::string build_extraction_prompt(std::string_view review_text) {
  static constexpr std::string_view kPlaceholder = "{review_text}";
  std::string prompt(kExtractionPromptTemplate);
  const auto pos = prompt.find(kPlaceholder);
  prompt.replace(pos, kPlaceholder.size(), text::utf8_prefix(review_text, kPromptTextLimit));
  return prompt;
}

namespace detail {

// Byte range of the first balanced {...} object, honoring JSON string escapes.
inline std::optional<std::string_view> first_json_object(std::string_view s) {
  for (std::size_t start = s.find('{'); start != std::string_view::npos; start = s.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < s.size(); ++i) {
      char c = s[i];
      if (in_string) {
        if (c == '\\') ++i;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        auto candidate = s.substr(start, i - start + 1);
        if (nlohmann::json::accept(candidate)) return candidate;
        break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline MarkerVector parse_llm_scores(std::string_view response) {
  auto object = detail::first_json_object(response);
  if (!object) throw ParseFailure("no JSON object in LLM response");
  const auto doc = nlohmann::json::parse(*object);
  std::array<double, kNumMarkers> values{};
  for (std::size_t j = 0; j < kNumMarkers; ++j) {
    auto it = doc.find(std::string(kMarkerNames[j]));
    if (it == doc.end()) throw ParseFailure("LLM response missing '" + std::string(kMarkerNames[j]) + "'");
    if (!it->is_number()) throw ParseFailure("LLM score '" + std::string(kMarkerNames[j]) + "' is not numeric");
    values[j] = it->get<double>();
  }
  return MarkerVector(values);
}

// Sends one prompt to a completion endpoint and returns the model's text.
// Throws TransportError when the endpoint cannot be reached.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

using ClientFactory = std::function<std::unique_ptr<CompletionClient>()>;

enum class Provenance { Rule, Llm, RuleFallback };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Rule: return "rule";
    case Provenance::Llm: return "llm";
    case Provenance::RuleFallback: return "rule-fallback";
  }
  return "rule";
}

inline std::optional<Provenance> parse_provenance(std::string_view s) {
  if (s == "rule") return Provenance::Rule;
  if (s == "llm") return Provenance::Llm;
  if (s == "rule-fallback") return Provenance::RuleFallback;
  return std::nullopt;
}

struct ExtractedMarkers {
  MarkerVector markers;
  Provenance provenance = Provenance::Rule;
  friend bool operator==(const ExtractedMarkers&, const ExtractedMarkers&) = default;
};

// Scores with the LLM, retrying once on a malformed response and falling back
// to the rule-based extractor after that. Transport failures propagate after
// one retry.
inline ExtractedMarkers score_with_llm(CompletionClient& client, std::string_view text, const Lexicon& lex) {
  const auto prompt = build_extraction_prompt(text);
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string response;
    try {
      response = client.complete(prompt);
    } catch (const TransportError&) {
      if (attempt == 1) throw;
      continue;
    }
    try {
      return {parse_llm_scores(response), Provenance::Llm};
    } catch (const ParseFailure&) {
    }
  }
  return {extract_rule_based(text, lex), Provenance::RuleFallback};
}

// Append-only line-delimited record of completed extractions.
struct ExtractionCheckpoint {
  std::map<std::string, ExtractedMarkers> completed;
  std::size_t cursor() const { return completed.size(); }
};

inline std::string checkpoint_record(const std::string& id, const ExtractedMarkers& e) {
  nlohmann::json rec;
  rec["id"] = id;
  rec["scores"] = e.markers.values();
  rec["extractor"] = std::string(to_string(e.provenance));
  return rec.dump();
}

// A trailing partial line (interrupted write) is ignored; other bad lines throw.
inline ExtractionCheckpoint load_checkpoint(const std::filesystem::path& path) {
  ExtractionCheckpoint cp;
  std::ifstream in(path, std::ios::binary);
  if (!in) return cp;
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!text::trim(line).empty()) lines.push_back(line);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    try {
      auto rec = nlohmann::json::parse(lines[k]);
      auto scores = rec.at("scores").get<std::array<double, kNumMarkers>>();
      auto prov = parse_provenance(rec.at("extractor").get<std::string>());
      if (!prov) throw SchemaError("unknown extractor tag");
      cp.completed[rec.at("id").get<std::string>()] = {MarkerVector(scores), *prov};
    } catch (const std::exception& e) {
      if (k + 1 == lines.size()) break;
      throw ParseError("checkpoint '" + path.string() + "' record " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  return cp;
}

struct BatchOptions {
  std::size_t workers = 10;
  std::size_t checkpoint_every = 50;
  std::optional<std::filesystem::path> checkpoint_path;
};

struct BatchResult {
  std::map<std::string, ExtractedMarkers> markers;
  std::vector<std::size_t> checkpoints;  // cursor value after each checkpoint flush
  std::size_t resumed = 0;
  std::size_t extracted = 0;
  std::vector<std::string> warnings;
};

// Extracts markers for every review. With a client factory each worker owns
// its own client; without one the rule-based extractor is used. Completed ids
// found in the checkpoint file are skipped.
inline BatchResult extract_batch(const std::vector<Review>& reviews, const Lexicon& lex,
                                 const ClientFactory& llm, const BatchOptions& options) {
  if (options.workers < 1) throw DataError("workers must be >= 1");
  if (options.checkpoint_every < 1) throw DataError("checkpoint_every must be >= 1");

  BatchResult result;
  if (options.checkpoint_path) {
    auto cp = load_checkpoint(*options.checkpoint_path);
    result.resumed = cp.cursor();
    result.markers = std::move(cp.completed);
  }

  std::vector<const Review*> pending;
  for (const auto& r : reviews)
    if (!result.markers.count(r.id)) pending.push_back(&r);

  std::vector<std::optional<ExtractedMarkers>> slots(pending.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> llm_down{false};
  std::mutex writer;
  std::size_t cursor = result.resumed;
  std::vector<std::string> buffer;
  std::vector<std::string> warnings;

  std::ofstream checkpoint_out;
  if (options.checkpoint_path) {
    checkpoint_out.open(*options.checkpoint_path, std::ios::binary | std::ios::app);
    if (!checkpoint_out) throw Error("cannot open checkpoint '" + options.checkpoint_path->string() + "'");
  }
  auto flush = [&] {
    if (checkpoint_out.is_open()) {
      for (const auto& line : buffer) checkpoint_out << line << '\n';
      checkpoint_out.flush();
    }
    buffer.clear();
    result.checkpoints.push_back(cursor);
  };

  auto work = [&] {
    std::unique_ptr<CompletionClient> client;
    if (llm) client = llm();
    for (std::size_t k = next++; k < pending.size(); k = next++) {
      const Review& review = *pending[k];
      ExtractedMarkers out;
      if (client && !llm_down) {
        try {
          out = score_with_llm(*client, review.text, lex);
        } catch (const TransportError& e) {
          bool first = !llm_down.exchange(true);
          if (first) {
            std::lock_guard lock(writer);
            warnings.push_back(std::string("LLM endpoint unreachable, switching to rule-based extraction: ") + e.what());
          }
          out = {extract_rule_based(review.text, lex), Provenance::RuleFallback};
        }
      } else {
        out = {extract_rule_based(review.text, lex), client ? Provenance::RuleFallback : Provenance::Rule};
      }
      std::lock_guard lock(writer);
      slots[k] = out;
      buffer.push_back(checkpoint_record(review.id, out));
      ++cursor;
      if (cursor % options.checkpoint_every == 0) flush();
    }
  };

  {
    const auto n_threads = std::min(options.workers, std::max<std::size_t>(pending.size(), 1));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(work);
    work();
  }
  if (!buffer.empty()) flush();

  for (std::size_t k = 0; k < pending.size(); ++k) result.markers[pending[k]->id] = *slots[k];
  result.extracted = pending.size();
  result.warnings = std::move(warnings);
  return result;
}

}  // namespace revdetect
