#pragma once

// Eight-marker stylometric taxonomy and the deterministic rule-based extractor.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "revdetect/default_lexicon.hpp"
#include "revdetect/error.hpp"
#include "revdetect/text.hpp"

namespace revdetect {

inline constexpr std::size_t kNumMarkers = 8;

enum class Marker : std::size_t {
  StandardizedStructure = 0,
  PredictableCriticism,
  ExcessiveBalance,
  LinguisticHomogeneity,
  GenericDomainLanguage,
  ConceptualFeedback,
  AbsencePersonalSignals,
  RepetitionPatterns,
};

// Keys in the order the extraction prompt lists them.
inline constexpr std::array<std::string_view, kNumMarkers> kMarkerNames{
    "standardized_structure",   "predictable_criticism",   "excessive_balance",
    "linguistic_homogeneity",   "generic_domain_language", "conceptual_feedback",
    "absence_personal_signals", "repetition_patterns",
};

inline double clip_unit(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, 0.0, 1.0);
}

// Marker scores x1..x8, each clipped to [0, 1] on construction.
class MarkerVector {
 public:
  MarkerVector() { values_.fill(0.0); }
  explicit MarkerVector(const std::array<double, kNumMarkers>& values) {
    for (std::size_t j = 0; j < kNumMarkers; ++j) values_[j] = clip_unit(values[j]);
  }

  double operator[](std::size_t j) const { return values_[j]; }
  double operator[](Marker m) const { return values_[static_cast<std::size_t>(m)]; }
  const std::array<double, kNumMarkers>& values() const { return values_; }

  friend bool operator==(const MarkerVector&, const MarkerVector&) = default;

 private:
  std::array<double, kNumMarkers> values_;
};

struct Lexicon {
  std::vector<std::string> section_headers;
  std::vector<std::string> critique_phrases;
  std::vector<std::string> diplomatic_phrases;
  std::vector<std::string> generic_phrases;
  std::vector<std::string> personal_markers;
  std::vector<std::string> reference_patterns;

  // Content hash, embedded in reports as the lexicon version.
  std::string version() const {
    std::uint64_t h = text::fnv1a("lexicon");
    for (const auto* list : {&section_headers, &critique_phrases, &diplomatic_phrases,
                             &generic_phrases, &personal_markers, &reference_patterns}) {
      for (const auto& p : *list) h = text::fnv1a(p + "\n", h);
      h = text::fnv1a("\x1d", h);
    }
    return text::hex64(h);
  }

  friend bool operator==(const Lexicon&, const Lexicon&) = default;
};

inline Lexicon parse_lexicon(std::string_view content) {
  Lexicon lex;
  std::vector<std::string>* current = nullptr;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(content)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("lexicon line " + std::to_string(line_no) + ": bad section");
      auto name = line.substr(1, line.size() - 2);
      if (name == "section_headers") current = &lex.section_headers;
      else if (name == "critique_phrases") current = &lex.critique_phrases;
      else if (name == "diplomatic_phrases") current = &lex.diplomatic_phrases;
      else if (name == "generic_phrases") current = &lex.generic_phrases;
      else if (name == "personal_markers") current = &lex.personal_markers;
      else if (name == "reference_patterns") current = &lex.reference_patterns;
      else throw ParseError("lexicon line " + std::to_string(line_no) + ": unknown section '" + std::string(name) + "'");
      seen.clear();
      continue;
    }
    if (!current) throw ParseError("lexicon line " + std::to_string(line_no) + ": phrase outside a section");
    std::string phrase(line);
    if (text::to_lower(phrase) != phrase)
      throw ParseError("lexicon line " + std::to_string(line_no) + ": phrase must be lowercase");
    if (!seen.insert(phrase).second)
      throw ParseError("lexicon line " + std::to_string(line_no) + ": duplicate phrase '" + phrase + "'");
    current->push_back(std::move(phrase));
  }
  return lex;
}

inline Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open lexicon '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lexicon(buf.str());
}

inline const Lexicon& default_lexicon() {
  static const Lexicon lex = parse_lexicon(kDefaultLexiconText);
  return lex;
}

// Sentences end at '.', '!' or '?' followed by whitespace or end of text.
// Each length is the number of whitespace-delimited tokens; empty segments are skipped.
inline std::vector<std::size_t> segment_sentences(std::string_view text) {
  std::vector<std::size_t> lengths;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    auto n = text::split_whitespace(text.substr(start, end - start)).size();
    if (n > 0) lengths.push_back(n);
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || text::is_space(text[i + 1])))
      flush(i + 1);
  }
  if (start < text.size()) flush(text.size());
  return lengths;
}

namespace detail {

inline std::size_t count_phrases(std::string_view lowered, const std::vector<std::string>& phrases) {
  std::size_t n = 0;
  for (const auto& p : phrases) n += text::count_occurrences(lowered, p);
  return n;
}

inline bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Keyword at a line start (after markdown bullets/hashes/numbering) or directly
// before a colon.
inline bool header_present(std::string_view lowered, std::string_view keyword) {
  for (std::size_t pos = lowered.find(keyword); pos != std::string_view::npos;
       pos = lowered.find(keyword, pos + 1)) {
    const std::size_t end = pos + keyword.size();
    if (pos > 0 && is_alnum(lowered[pos - 1])) continue;
    if (end < lowered.size() && is_alnum(lowered[end])) continue;

    std::size_t after = end;
    while (after < lowered.size() && (lowered[after] == ' ' || lowered[after] == '*')) ++after;
    if (after < lowered.size() && lowered[after] == ':') return true;

    std::size_t before = pos;
    while (before > 0) {
      char c = lowered[before - 1];
      if (c == '\n') break;
      if (c == ' ' || c == '\t' || c == '#' || c == '*' || c == '-' || c == '_' || c == '>' ||
          c == '.' || c == ')' || is_digit(c)) {
        --before;
        continue;
      }
      break;
    }
    if (before == 0 || lowered[before - 1] == '\n') return true;
  }
  return false;
}

inline std::size_t count_references(std::string_view lowered, const std::vector<std::string>& keywords) {
  std::size_t n = 0;
  for (const auto& kw : keywords) {
    const bool alpha_start = is_alnum(kw.front());
    const bool alpha_end = is_alnum(kw.back());
    for (std::size_t pos = lowered.find(kw); pos != std::string_view::npos;
         pos = lowered.find(kw, pos + kw.size())) {
      if (alpha_start && pos > 0 && is_alnum(lowered[pos - 1])) continue;
      std::size_t i = pos + kw.size();
      if (alpha_end && i < lowered.size() && lowered[i] == 's') ++i;
      while (i < lowered.size() && (lowered[i] == ' ' || lowered[i] == '\t' || lowered[i] == '~')) ++i;
      if (i < lowered.size() && lowered[i] == '(') ++i;
      if (i < lowered.size() && is_digit(lowered[i])) ++n;
    }
  }
  return n;
}

// Lowercase word tokens with ASCII punctuation stripped.
inline std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto raw : text::split_whitespace(text)) {
    std::string tok;
    for (char c : raw) {
      auto u = static_cast<unsigned char>(c);
      if (u >= 0x80 || is_alnum(c)) tok += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    }
    if (!tok.empty()) out.push_back(std::move(tok));
  }
  return out;
}

}  // namespace detail

inline double saturating(std::size_t count, double divisor) {
  return std::min(static_cast<double>(count) / divisor, 1.0);
}

inline double inverse_saturating(std::size_t count, double divisor) {
  return std::max(0.0, 1.0 - static_cast<double>(count) / divisor);
}

inline std::size_t count_headers(std::string_view text, const Lexicon& lex) {
  const auto lowered = text::to_lower(text);
  std::size_t h = 0;
  for (const auto& kw : lex.section_headers) h += detail::header_present(lowered, kw);
  return h;
}

inline double score_structure(std::string_view text, const Lexicon& lex) {
  return saturating(count_headers(text, lex), 5.0);
}

inline double score_criticism(std::string_view text, const Lexicon& lex) {
  return saturating(detail::count_phrases(text::to_lower(text), lex.critique_phrases), 4.0);
}

inline double score_balance(std::string_view text, const Lexicon& lex) {
  return saturating(detail::count_phrases(text::to_lower(text), lex.diplomatic_phrases), 3.0);
}

// 1 - CV of the given sentence lengths (population sigma); <= 1 sentence scores 1.
inline double homogeneity_from_lengths(const std::vector<std::size_t>& lengths) {
  constexpr double kEps = 1e-9;
  if (lengths.size() <= 1) return 1.0;
  double mean = 0.0;
  for (auto l : lengths) mean += static_cast<double>(l);
  mean /= static_cast<double>(lengths.size());
  double var = 0.0;
  for (auto l : lengths) var += (static_cast<double>(l) - mean) * (static_cast<double>(l) - mean);
  var /= static_cast<double>(lengths.size());
  return std::max(0.0, 1.0 - std::sqrt(var) / (mean + kEps));
}

inline double score_homogeneity(std::string_view text) {
  return homogeneity_from_lengths(segment_sentences(text));
}

inline double score_generic(std::string_view text, const Lexicon& lex) {
  return saturating(detail::count_phrases(text::to_lower(text), lex.generic_phrases), 4.0);
}

inline std::size_t count_references(std::string_view text, const Lexicon& lex) {
  return detail::count_references(text::to_lower(text), lex.reference_patterns);
}

inline double score_conceptual(std::string_view text, const Lexicon& lex) {
  return inverse_saturating(count_references(text, lex), 5.0);
}

inline double score_personal_absence(std::string_view text, const Lexicon& lex) {
  return inverse_saturating(detail::count_phrases(text::to_lower(text), lex.personal_markers), 3.0);
}

// min(3(1 - u), 1) with u the word-trigram uniqueness ratio.
inline double repetition_from_counts(std::size_t unique, std::size_t total) {
  if (total == 0) return 0.0;
  // 3(1 - u) written as 3(total - unique)/total to keep exact ratios exact.
  return std::min(3.0 * static_cast<double>(total - unique) / static_cast<double>(total), 1.0);
}

inline double score_repetition(std::string_view text) {
  const auto tokens = detail::word_tokens(text);
  if (tokens.size() < 3) return 0.0;
  std::set<std::string> unique;
  for (std::size_t i = 0; i + 2 < tokens.size(); ++i)
    unique.insert(tokens[i] + ' ' + tokens[i + 1] + ' ' + tokens[i + 2]);
  return repetition_from_counts(unique.size(), tokens.size() - 2);
}

inline MarkerVector extract_rule_based(std::string_view text, const Lexicon& lex = default_lexicon()) {
  return MarkerVector({
      score_structure(text, lex),
      score_criticism(text, lex),
      score_balance(text, lex),
      score_homogeneity(text),
      score_generic(text, lex),
      score_conceptual(text, lex),
      score_personal_absence(text, lex),
      score_repetition(text),
  });
}

}  // namespace revdetect
