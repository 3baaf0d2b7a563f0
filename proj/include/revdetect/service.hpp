#pragma once

// Analysis engine shared by the CLI and the HTTP service, plus the service.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

#include <httplib.h>
#include <json.hpp>

#include "revdetect/error.hpp"
#include "revdetect/extraction.hpp"
#include "revdetect/http_clients.hpp"
#include "revdetect/markers.hpp"
#include "revdetect/model.hpp"
#include "revdetect/report.hpp"
#include "revdetect/retrieve.hpp"

namespace revdetect {

enum class ExtractorPreference { Auto, Rule, Llm };

inline ExtractorPreference parse_extractor_preference(std::string_view s) {
  if (s == "auto") return ExtractorPreference::Auto;
  if (s == "rule") return ExtractorPreference::Rule;
  if (s == "llm") return ExtractorPreference::Llm;
  throw DataError("extractor must be one of auto, rule, llm");
}

struct ServiceConfig {
  std::filesystem::path model_path;
  std::optional<std::filesystem::path> index_path;
  std::optional<std::filesystem::path> lexicon_path;
  EncoderConfig encoder;
  std::optional<LlmConfig> llm;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t body_limit = 1 << 20;
  std::size_t llm_workers = 10;
};

inline ServiceConfig service_config_from_json(const nlohmann::json& j) {
  ServiceConfig c;
  try {
    if (j.contains("model")) c.model_path = j.at("model").get<std::string>();
    if (j.contains("index") && !j.at("index").is_null()) c.index_path = j.at("index").get<std::string>();
    if (j.contains("lexicon") && !j.at("lexicon").is_null()) c.lexicon_path = j.at("lexicon").get<std::string>();
    if (j.contains("encoder")) {
      const auto& e = j.at("encoder");
      c.encoder.kind = e.value("kind", c.encoder.kind);
      c.encoder.url = e.value("url", c.encoder.url);
      c.encoder.model = e.value("model", c.encoder.model);
      c.encoder.api_key_env = e.value("api_key_env", c.encoder.api_key_env);
    }
    if (j.contains("llm") && !j.at("llm").is_null()) {
      const auto& l = j.at("llm");
      LlmConfig llm;
      llm.url = l.at("url").get<std::string>();
      llm.model = l.at("model").get<std::string>();
      llm.api_key_env = l.value("api_key_env", llm.api_key_env);
      llm.max_tokens = l.value("max_tokens", llm.max_tokens);
      llm.timeout_seconds = l.value("timeout_seconds", llm.timeout_seconds);
      c.llm = llm;
    }
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.body_limit = j.value("body_limit", c.body_limit);
    c.llm_workers = j.value("workers", c.llm_workers);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid config: ") + e.what());
  }
  return c;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), e.byte);
  }
}

// Immutable after construction; safe to share across request threads.
class Engine {
 public:
  Engine(TrainedModel model, Lexicon lexicon, std::optional<EvidenceIndex> index, std::unique_ptr<Encoder> encoder,
         std::optional<LlmConfig> llm = std::nullopt, std::size_t llm_workers = 10)
      : model_(std::move(model)),
        lexicon_(std::move(lexicon)),
        index_(std::move(index)),
        encoder_(std::move(encoder)),
        llm_(std::move(llm)),
        llm_slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, std::min<std::size_t>(llm_workers, 64)))),
        model_version_(revdetect::model_version(model_)),
        lexicon_version_(lexicon_.version()) {
    if (index_ && encoder_ && index_->encoder_tag() != encoder_->tag())
      throw SchemaError("index was built with encoder '" + index_->encoder_tag() + "' but '" + encoder_->tag() +
                        "' is configured");
  }

  static Engine from_config(const ServiceConfig& c, bool require_index = true) {
    auto model = load_model(c.model_path);
    auto lex = c.lexicon_path ? load_lexicon(*c.lexicon_path) : default_lexicon();
    std::optional<EvidenceIndex> index;
    if (c.index_path) {
      if (require_index || std::filesystem::exists(*c.index_path)) index = load_index(*c.index_path);
    }
    return Engine(std::move(model), std::move(lex), std::move(index), make_encoder(c.encoder), c.llm, c.llm_workers);
  }

  const TrainedModel& model() const { return model_; }
  const Lexicon& lexicon() const { return lexicon_; }
  const std::optional<EvidenceIndex>& index() const { return index_; }
  const std::string& model_version() const { return model_version_; }
  const std::string& lexicon_version() const { return lexicon_version_; }
  bool llm_configured() const { return llm_.has_value(); }

  EditorReport analyze(std::string_view text, ExtractorPreference pref = ExtractorPreference::Auto,
                       std::size_t k = kReportNeighbors, bool skip_evidence = false) const {
    ReportContext ctx{&model_, &lexicon_, index_ ? &*index_ : nullptr, encoder_.get(), model_version_,
                      lexicon_version_};
    ReportOptions opt;
    opt.k = k;
    opt.skip_evidence = skip_evidence;
    auto client = llm_client(pref);
    if (!client) return generate_report(text, ctx, opt);
    opt.llm = client.get();
    Slot slot(llm_slots_);
    return generate_report(text, ctx, opt);
  }

  ExtractedMarkers markers(std::string_view text, ExtractorPreference pref = ExtractorPreference::Rule) const {
    if (text::trim(text).empty()) throw DataError("review text is empty");
    auto client = llm_client(pref);
    if (!client) return {extract_rule_based(text, lexicon_), Provenance::Rule};
    Slot slot(llm_slots_);
    try {
      return score_with_llm(*client, text, lexicon_);
    } catch (const TransportError&) {
      return {extract_rule_based(text, lexicon_), Provenance::RuleFallback};
    }
  }

  RetrievalResult retrieve(std::string_view text, std::size_t k) const {
    if (!index_) throw DataError("no evidence index loaded");
    if (text::trim(text).empty()) throw DataError("query text is empty");
    return search(*index_, text, k, *encoder_);
  }

 private:
  struct Slot {
    explicit Slot(std::counting_semaphore<64>& s) : sem(s) { sem.acquire(); }
    ~Slot() { sem.release(); }
    std::counting_semaphore<64>& sem;
  };

  std::unique_ptr<CompletionClient> llm_client(ExtractorPreference pref) const {
    if (pref == ExtractorPreference::Rule) return nullptr;
    if (!llm_) {
      if (pref == ExtractorPreference::Llm) throw DataError("no LLM extractor is configured");
      return nullptr;
    }
    return std::make_unique<ChatCompletionClient>(*llm_);
  }

  TrainedModel model_;
  Lexicon lexicon_;
  std::optional<EvidenceIndex> index_;
  std::unique_ptr<Encoder> encoder_;
  std::optional<LlmConfig> llm_;
  mutable std::counting_semaphore<64> llm_slots_;
  std::string model_version_;
  std::string lexicon_version_;
};

// --- HTTP ------------------------------------------------------------------

inline std::string error_body(std::string_view code, std::string_view message, std::string_view detail = "") {
  return nlohmann::json{{"code", code}, {"message", message}, {"detail", detail}}.dump();
}

inline nlohmann::json markers_response(const ExtractedMarkers& e) {
  nlohmann::json markers = nlohmann::json::array();
  for (std::size_t j = 0; j < kNumMarkers; ++j)
    markers.push_back({{"name", std::string(kMarkerNames[j])},
                       {"score", e.markers[j]},
                       {"severity", std::string(to_string(severity(e.markers[j])))}});
  return {{"markers", markers}, {"extractor", std::string(to_string(e.provenance))}};
}

class Service {
 public:
  Service(const Engine& engine, std::size_t body_limit) : engine_(engine) {
    srv_.set_payload_max_length(body_limit);
    srv_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 413)
        res.set_content(error_body("payload_too_large", "request body exceeds the size limit"), "application/json");
      else if (res.status == 404)
        res.set_content(error_body("not_found", "no such endpoint"), "application/json");
      else
        res.set_content(error_body("http_error", "request failed", std::to_string(res.status)), "application/json");
    });
    srv_.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      res.status = 500;
      std::string what = "unknown";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      res.set_content(error_body("internal_error", "analysis failed", what), "application/json");
    });
    routes();
  }

  // Returns the bound port; throws when the address is unavailable.
  int bind(const std::string& host, int port) {
    if (port == 0) {
      const int p = srv_.bind_to_any_port(host);
      if (p < 0) throw Error("cannot bind " + host);
      return p;
    }
    if (!srv_.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port;
  }
  void run() { srv_.listen_after_bind(); }
  void stop() { srv_.stop(); }
  bool running() const { return srv_.is_running(); }
  void wait_until_ready() const { srv_.wait_until_ready(); }

 private:
  using Handler = std::function<nlohmann::json(const nlohmann::json&)>;

  static void json_ok(httplib::Response& res, const std::string& body) {
    res.status = 200;
    res.set_content(body, "application/json");
  }

  // Parses the body, runs `fn`, maps exceptions to the error envelope.
  static void guarded(const httplib::Request& req, httplib::Response& res,
                      const std::function<std::string(const nlohmann::json&)>& fn) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      res.status = 400;
      res.set_content(error_body("invalid_json", "request body is not valid JSON", e.what()), "application/json");
      return;
    }
    if (!body.is_object()) {
      res.status = 400;
      res.set_content(error_body("invalid_request", "request body must be a JSON object"), "application/json");
      return;
    }
    try {
      json_ok(res, fn(body));
    } catch (const nlohmann::json::exception& e) {
      res.status = 400;
      res.set_content(error_body("invalid_request", "malformed request fields", e.what()), "application/json");
    } catch (const DataError& e) {
      res.status = 400;
      res.set_content(error_body("invalid_request", e.what()), "application/json");
    }
  }

  static std::size_t read_k(const nlohmann::json& body, std::size_t fallback) {
    if (!body.contains("K")) return fallback;
    const auto k = body.at("K").get<long long>();
    if (k < 1 || k > 1000) throw DataError("K must be between 1 and 1000");
    return static_cast<std::size_t>(k);
  }

  void routes() {
    srv_.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
      json_ok(res, nlohmann::json{{"status", "ok"},
                                  {"model_version", engine_.model_version()},
                                  {"index_size", engine_.index() ? engine_.index()->size() : 0}}
                       .dump());
    });
    srv_.Get("/api/model-info", [this](const httplib::Request&, httplib::Response& res) {
      const auto& m = engine_.model();
      json_ok(res, nlohmann::json{{"model_version", engine_.model_version()},
                                  {"kind", std::string(to_string(m.kind))},
                                  {"hyperparameters", m.hyperparameters},
                                  {"class_weight", m.class_weight},
                                  {"explanation_scale", std::string(explanation_scale(m))},
                                  {"feature_names", kMarkerNames},
                                  {"lexicon_version", engine_.lexicon_version()},
                                  {"index_size", engine_.index() ? engine_.index()->size() : 0},
                                  {"encoder", engine_.index() ? engine_.index()->encoder_tag() : ""},
                                  {"llm_configured", engine_.llm_configured()}}
                       .dump());
    });
    srv_.Post("/api/analyze", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [this](const nlohmann::json& b) {
        const auto text = b.at("review_text").get<std::string>();
        const auto pref = parse_extractor_preference(b.value("extractor", std::string("auto")));
        return render_json(engine_.analyze(text, pref, read_k(b, kReportNeighbors)));
      });
    });
    srv_.Post("/api/retrieve", [this](const httplib::Request& req, httplib::Response& res) {
      if (!engine_.index()) {
        res.status = 503;
        res.set_content(error_body("index_unavailable", "no evidence index loaded"), "application/json");
        return;
      }
      guarded(req, res, [this](const nlohmann::json& b) {
        return to_json(engine_.retrieve(b.at("text").get<std::string>(), read_k(b, 5))).dump();
      });
    });
    srv_.Post("/api/markers", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [this](const nlohmann::json& b) {
        const auto pref = parse_extractor_preference(b.value("extractor", std::string("rule")));
        return markers_response(engine_.markers(b.at("text").get<std::string>(), pref)).dump();
      });
    });
  }

  const Engine& engine_;
  httplib::Server srv_;
};

}  // namespace revdetect
