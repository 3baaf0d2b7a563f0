#pragma once

// Editor report: extract -> classify -> explain -> retrieve -> combine.

#include <array>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "revdetect/corpus.hpp"
#include "revdetect/error.hpp"
#include "revdetect/explain.hpp"
#include "revdetect/extraction.hpp"
#include "revdetect/markers.hpp"
#include "revdetect/model.hpp"
#include "revdetect/retrieve.hpp"
#include "revdetect/text.hpp"

namespace revdetect {

enum class Level { High, Medium, Low };

inline std::string_view to_string(Level l) {
  switch (l) {
    case Level::High: return "High";
    case Level::Medium: return "Medium";
    case Level::Low: return "Low";
  }
  return "Low";
}

inline Level parse_level(std::string_view s) {
  if (s == "High") return Level::High;
  if (s == "Medium") return Level::Medium;
  if (s == "Low") return Level::Low;
  throw SchemaError("unknown level '" + std::string(s) + "'");
}

enum class Assessment { Strong, Moderate, Weak, Human };

inline std::string_view to_string(Assessment a) {
  switch (a) {
    case Assessment::Strong: return "STRONG";
    case Assessment::Moderate: return "MODERATE";
    case Assessment::Weak: return "WEAK";
    case Assessment::Human: return "HUMAN";
  }
  return "HUMAN";
}

inline Assessment parse_assessment(std::string_view s) {
  if (s == "STRONG") return Assessment::Strong;
  if (s == "MODERATE") return Assessment::Moderate;
  if (s == "WEAK") return Assessment::Weak;
  if (s == "HUMAN") return Assessment::Human;
  throw SchemaError("unknown assessment '" + std::string(s) + "'");
}

inline std::string_view describe(Assessment a) {
  switch (a) {
    case Assessment::Strong: return "Strong indicators of AI generation";
    case Assessment::Moderate: return "Moderate indicators of AI generation";
    case Assessment::Weak: return "Weak indicators of AI generation";
    case Assessment::Human: return "Appears human-authored";
  }
  return "";
}

inline Level confidence_level(double p0, double p1) {
  const double m = std::max(p0, p1);
  if (m > 0.8) return Level::High;
  if (m > 0.6) return Level::Medium;
  return Level::Low;
}

inline Level severity(double score) {
  if (score > 0.7) return Level::High;
  if (score > 0.4) return Level::Medium;
  return Level::Low;
}

inline constexpr double kHighMarkerThreshold = 0.7;

inline std::size_t high_marker_count(const MarkerVector& x) {
  std::size_t n = 0;
  for (double v : x.values()) n += v > kHighMarkerThreshold;
  return n;
}

inline Assessment assess(double p1, std::size_t high_count) {
  if (p1 > 0.8 && high_count >= 3) return Assessment::Strong;
  if (p1 > 0.6 && high_count >= 2) return Assessment::Moderate;
  if (p1 > 0.4) return Assessment::Weak;
  return Assessment::Human;
}

inline constexpr std::size_t kReportNeighbors = 3;
inline constexpr std::size_t kPreviewChars = 200;
inline constexpr std::size_t kReportTopContributors = 5;

struct MarkerEntry {
  std::string name;
  double score = 0.0;
  Level severity = Level::Low;
  friend bool operator==(const MarkerEntry&, const MarkerEntry&) = default;
};

struct ShapEntry {
  std::string name;
  double value = 0.0;
  Direction direction = Direction::TowardHuman;
  friend bool operator==(const ShapEntry&, const ShapEntry&) = default;
};

struct ShapSection {
  double base_value = 0.0;
  std::string scale;
  std::vector<ShapEntry> top5;
  friend bool operator==(const ShapSection&, const ShapSection&) = default;
};

struct EvidenceEntry {
  std::string id;
  Label label = Label::Human;
  double similarity = 0.0;
  std::string preview;
  Source source = Source::External;
  std::optional<std::string> paper_id;
  friend bool operator==(const EvidenceEntry&, const EvidenceEntry&) = default;
};

struct EvidenceSection {
  bool available = false;
  std::vector<EvidenceEntry> neighbors;
  std::optional<RetrievalSummary> summary;
  friend bool operator==(const EvidenceSection&, const EvidenceSection&) = default;
};

struct ReportProvenance {
  std::string review_id;
  Provenance extractor = Provenance::Rule;
  std::string model_version;
  std::string model_kind;
  std::string lexicon_version;
  std::string encoder;
  std::vector<std::string> warnings;
  friend bool operator==(const ReportProvenance&, const ReportProvenance&) = default;
};

struct EditorReport {
  Label predicted_label = Label::Human;
  double ai_probability = 0.0;
  Level confidence = Level::Low;
  std::array<MarkerEntry, kNumMarkers> markers;
  ShapSection shap;
  EvidenceSection evidence;
  Assessment assessment = Assessment::Human;
  ReportProvenance provenance;

  double human_probability() const { return 1.0 - ai_probability; }
  MarkerVector marker_vector() const {
    std::array<double, kNumMarkers> v{};
    for (std::size_t j = 0; j < kNumMarkers; ++j) v[j] = markers[j].score;
    return MarkerVector(v);
  }
  friend bool operator==(const EditorReport&, const EditorReport&) = default;
};

// True when confidence, severities and assessment match recomputation from
// the report's own probability and marker scores.
inline bool rules_consistent(const EditorReport& r) {
  if (r.confidence != confidence_level(r.human_probability(), r.ai_probability)) return false;
  for (const auto& m : r.markers)
    if (m.severity != severity(m.score)) return false;
  return r.assessment == assess(r.ai_probability, high_marker_count(r.marker_vector()));
}

// Shared, read-only inputs of the pipeline.
struct ReportContext {
  const TrainedModel* model = nullptr;
  const Lexicon* lexicon = nullptr;
  const EvidenceIndex* index = nullptr;  // null: evidence absent
  Encoder* encoder = nullptr;
  std::string model_version;    // computed from the model when empty
  std::string lexicon_version;  // computed from the lexicon when empty
};

struct ReportOptions {
  std::size_t k = kReportNeighbors;
  std::optional<std::string> review_id;
  CompletionClient* llm = nullptr;  // null: rule-based extraction
  bool skip_evidence = false;
};

inline std::string default_review_id(std::string_view text) { return "review-" + text::hex64(text::fnv1a(text)); }

inline EditorReport generate_report(std::string_view review_text, const ReportContext& ctx,
                                    const ReportOptions& opt = {}) {
  if (text::trim(review_text).empty()) throw DataError("review text is empty");
  if (!ctx.model || !ctx.lexicon) throw Error("report context needs a model and a lexicon");
  EditorReport r;
  auto& prov = r.provenance;
  prov.review_id = opt.review_id ? *opt.review_id : default_review_id(review_text);
  prov.model_version = ctx.model_version.empty() ? model_version(*ctx.model) : ctx.model_version;
  prov.model_kind = std::string(to_string(ctx.model->kind));
  prov.lexicon_version = ctx.lexicon_version.empty() ? ctx.lexicon->version() : ctx.lexicon_version;

  // (1) extract
  ExtractedMarkers extracted{extract_rule_based(review_text, *ctx.lexicon), Provenance::Rule};
  if (opt.llm) {
    try {
      extracted = score_with_llm(*opt.llm, review_text, *ctx.lexicon);
      if (extracted.provenance == Provenance::RuleFallback)
        prov.warnings.push_back("LLM response unparseable; used rule-based extractor");
    } catch (const TransportError& e) {
      extracted.provenance = Provenance::RuleFallback;
      prov.warnings.push_back(std::string("LLM endpoint unavailable; used rule-based extractor: ") + e.what());
    }
  }
  prov.extractor = extracted.provenance;
  const auto& x = extracted.markers;
  for (std::size_t j = 0; j < kNumMarkers; ++j)
    r.markers[j] = {std::string(kMarkerNames[j]), x[j], severity(x[j])};

  // (2) classify
  const auto proba = ctx.model->predict_proba(x);
  r.ai_probability = proba.ai;
  r.predicted_label = proba.ai >= 0.5 ? Label::AiGenerated : Label::Human;
  r.confidence = confidence_level(proba.human, proba.ai);

  // (3) explain
  const auto expl = explain(*ctx.model, x);
  r.shap.base_value = expl.base_value;
  r.shap.scale = expl.scale;
  for (const auto& c : expl.top(kReportTopContributors))
    r.shap.top5.push_back({std::string(c.name()), c.value, c.direction});

  // (4) retrieve
  if (opt.skip_evidence) {
    prov.warnings.push_back("evidence retrieval disabled");
  } else if (!ctx.index || !ctx.encoder || ctx.index->empty()) {
    prov.warnings.push_back("evidence index unavailable; evidence section absent");
  } else {
    prov.encoder = ctx.index->encoder_tag();
    const auto res = search(*ctx.index, review_text, std::max<std::size_t>(1, opt.k), *ctx.encoder);
    r.evidence.available = true;
    for (const auto& n : res.neighbors)
      r.evidence.neighbors.push_back(
          {n.id, n.label, n.similarity, text::utf8_prefix(n.display_text, kPreviewChars), n.source, n.paper_id});
    r.evidence.summary = res.summary;
  }

  // (5) combine
  r.assessment = assess(r.ai_probability, high_marker_count(x));
  return r;
}

// --- JSON ------------------------------------------------------------------

inline nlohmann::json to_json(const EditorReport& r) {
  using nlohmann::json;
  json markers = json::array();
  for (const auto& m : r.markers)
    markers.push_back({{"name", m.name}, {"score", m.score}, {"severity", std::string(to_string(m.severity))}});
  json top5 = json::array();
  for (const auto& s : r.shap.top5)
    top5.push_back({{"name", s.name}, {"value", s.value}, {"direction", std::string(to_string(s.direction))}});
  json neighbors = json::array();
  for (const auto& n : r.evidence.neighbors)
    neighbors.push_back({{"id", n.id},
                         {"label", std::string(to_string(n.label))},
                         {"similarity", n.similarity},
                         {"preview", n.preview},
                         {"source", std::string(to_string(n.source))},
                         {"paper_id", n.paper_id ? json(*n.paper_id) : json(nullptr)}});
  const auto& p = r.provenance;
  return {
      {"classification",
       {{"label", std::string(to_string(r.predicted_label))},
        {"ai_probability", r.ai_probability},
        {"confidence", std::string(to_string(r.confidence))}}},
      {"markers", markers},
      {"shap", {{"base_value", r.shap.base_value}, {"scale", r.shap.scale}, {"top5", top5}}},
      {"evidence",
       {{"available", r.evidence.available},
        {"neighbors", neighbors},
        {"summary", r.evidence.summary ? to_json(*r.evidence.summary) : json(nullptr)}}},
      {"assessment", std::string(to_string(r.assessment))},
      {"provenance",
       {{"review_id", p.review_id},
        {"extractor", std::string(to_string(p.extractor))},
        {"model_version", p.model_version},
        {"model_kind", p.model_kind},
        {"lexicon_version", p.lexicon_version},
        {"encoder", p.encoder},
        {"warnings", p.warnings}}},
  };
}

inline std::string render_json(const EditorReport& r) { return to_json(r).dump(2) + "\n"; }

namespace detail {

inline Label parse_label_name(const std::string& s) {
  if (s == "Human") return Label::Human;
  if (s == "AI-Generated") return Label::AiGenerated;
  throw SchemaError("unknown label '" + s + "'");
}

inline Direction parse_direction(const std::string& s) {
  if (s == "toward AI") return Direction::TowardAi;
  if (s == "toward Human") return Direction::TowardHuman;
  throw SchemaError("unknown direction '" + s + "'");
}

inline Source parse_source_name(const std::string& s) {
  auto src = parse_source(s);
  if (!src) throw SchemaError("unknown source '" + s + "'");
  return *src;
}

}  // namespace detail

inline EditorReport report_from_json(const nlohmann::json& j) {
  try {
    EditorReport r;
    const auto& c = j.at("classification");
    r.predicted_label = detail::parse_label_name(c.at("label").get<std::string>());
    r.ai_probability = c.at("ai_probability").get<double>();
    r.confidence = parse_level(c.at("confidence").get<std::string>());

    const auto& markers = j.at("markers");
    if (!markers.is_array() || markers.size() != kNumMarkers) throw SchemaError("report needs 8 markers");
    for (std::size_t i = 0; i < kNumMarkers; ++i)
      r.markers[i] = {markers[i].at("name").get<std::string>(), markers[i].at("score").get<double>(),
                      parse_level(markers[i].at("severity").get<std::string>())};

    const auto& shap = j.at("shap");
    r.shap.base_value = shap.at("base_value").get<double>();
    r.shap.scale = shap.at("scale").get<std::string>();
    for (const auto& s : shap.at("top5"))
      r.shap.top5.push_back({s.at("name").get<std::string>(), s.at("value").get<double>(),
                             detail::parse_direction(s.at("direction").get<std::string>())});

    const auto& ev = j.at("evidence");
    r.evidence.available = ev.at("available").get<bool>();
    for (const auto& n : ev.at("neighbors")) {
      EvidenceEntry e{n.at("id").get<std::string>(), detail::parse_label_name(n.at("label").get<std::string>()),
                      n.at("similarity").get<double>(), n.at("preview").get<std::string>(),
                      detail::parse_source_name(n.at("source").get<std::string>()), std::nullopt};
      if (!n.at("paper_id").is_null()) e.paper_id = n.at("paper_id").get<std::string>();
      r.evidence.neighbors.push_back(std::move(e));
    }
    if (!ev.at("summary").is_null()) {
      const auto& s = ev.at("summary");
      RetrievalSummary sum;
      sum.human_count = s.at("human_count").get<std::size_t>();
      sum.ai_count = s.at("ai_count").get<std::size_t>();
      sum.avg_similarity = s.at("avg_similarity").get<double>();
      if (!s.at("top1_label").is_null()) sum.top1_label = detail::parse_label_name(s.at("top1_label").get<std::string>());
      r.evidence.summary = sum;
    }

    r.assessment = parse_assessment(j.at("assessment").get<std::string>());

    const auto& p = j.at("provenance");
    r.provenance.review_id = p.at("review_id").get<std::string>();
    auto ex = parse_provenance(p.at("extractor").get<std::string>());
    if (!ex) throw SchemaError("unknown extractor provenance");
    r.provenance.extractor = *ex;
    r.provenance.model_version = p.at("model_version").get<std::string>();
    r.provenance.model_kind = p.at("model_kind").get<std::string>();
    r.provenance.lexicon_version = p.at("lexicon_version").get<std::string>();
    r.provenance.encoder = p.at("encoder").get<std::string>();
    r.provenance.warnings = p.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed report document: ") + e.what());
  }
}

inline EditorReport parse_report(std::string_view doc) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(doc);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed report JSON: ") + e.what(), e.byte);
  }
  return report_from_json(j);
}

// --- plain text ------------------------------------------------------------

inline constexpr std::array<std::string_view, 5> kTextSections{
    "1. CLASSIFICATION", "2. MARKER SCORES", "3. SHAP CONTRIBUTIONS", "4. RETRIEVAL EVIDENCE",
    "5. OVERALL ASSESSMENT"};

namespace detail {
inline std::string fixed(double v, int decimals = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}
inline std::string signed_fixed(double v, int decimals = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.*f", decimals, v);
  return buf;
}
inline std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}
}  // namespace detail

inline std::string render_text(const EditorReport& r) {
  using detail::fixed;
  using detail::pad;
  std::ostringstream out;
  out << "REVIEW ANALYSIS REPORT (" << r.provenance.review_id << ")\n\n";

  out << kTextSections[0] << "\n";
  out << "  Prediction:      " << to_string(r.predicted_label) << "\n";
  out << "  AI probability:  " << fixed(r.ai_probability) << "\n";
  out << "  Confidence:      " << to_string(r.confidence) << "\n\n";

  out << kTextSections[1] << "\n";
  for (const auto& m : r.markers)
    out << "  " << pad(m.name, 36) << fixed(m.score) << "  " << to_string(m.severity) << "\n";
  out << "\n";

  out << kTextSections[2] << " (" << r.shap.scale << " scale, base " << fixed(r.shap.base_value) << ")\n";
  for (const auto& s : r.shap.top5)
    out << "  " << pad(s.name, 36) << detail::signed_fixed(s.value) << "  " << to_string(s.direction) << "\n";
  out << "\n";

  out << kTextSections[3] << "\n";
  if (!r.evidence.available) {
    out << "  Not available.\n";
  } else {
    for (std::size_t i = 0; i < r.evidence.neighbors.size(); ++i) {
      const auto& n = r.evidence.neighbors[i];
      out << "  [" << i + 1 << "] " << to_string(n.label) << "  similarity " << fixed(n.similarity) << "  "
          << to_string(n.source) << "  " << n.id << "\n";
      out << "      \"" << n.preview << "\"\n";
    }
    if (r.evidence.summary) {
      const auto& s = *r.evidence.summary;
      out << "  Summary: " << s.human_count << " Human, " << s.ai_count << " AI-Generated, avg similarity "
          << fixed(s.avg_similarity) << "\n";
    }
  }
  out << "\n";

  out << kTextSections[4] << "\n";
  out << "  " << to_string(r.assessment) << ": " << describe(r.assessment) << "\n\n";

  out << "Extractor: " << to_string(r.provenance.extractor) << "  Model: " << r.provenance.model_version
      << "  Lexicon: " << r.provenance.lexicon_version << "\n";
  for (const auto& w : r.provenance.warnings) out << "Warning: " << w << "\n";
  return out.str();
}

}  // namespace revdetect
