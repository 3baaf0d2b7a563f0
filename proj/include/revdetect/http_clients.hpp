#pragma once

// Network clients: a chat-completions LLM client for marker extraction and an
// external embedding encoder. Both speak JSON over HTTP(S).

#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "revdetect/error.hpp"
#include "revdetect/extraction.hpp"
#include "revdetect/retrieve.hpp"

namespace revdetect {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // request path, "/" when absent
};

inline Endpoint split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw Error("endpoint URL needs a scheme: '" + std::string(url) + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

inline std::string credential_from_env(const std::string& var) {
  if (var.empty()) return {};
  const char* v = std::getenv(var.c_str());
  return v ? std::string(v) : std::string();
}

struct LlmConfig {
  std::string url;  // full chat-completions URL
  std::string model;
  std::string api_key_env = "REVDETECT_LLM_API_KEY";
  int max_tokens = 256;
  int timeout_seconds = 60;
};

inline nlohmann::json post_json(const Endpoint& ep, const std::string& api_key, const nlohmann::json& body,
                                int timeout_seconds) {
  httplib::Client cli(ep.base);
  cli.set_connection_timeout(timeout_seconds, 0);
  cli.set_read_timeout(timeout_seconds, 0);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
  auto res = cli.Post(ep.path, headers, body.dump(), "application/json");
  if (!res) throw TransportError("request to " + ep.base + ep.path + " failed: " + httplib::to_string(res.error()));
  if (res->status >= 500 || res->status == 429)
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
  if (res->status != 200) throw Error("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error&) {
    throw ParseFailure("endpoint returned a non-JSON body");
  }
}

// Chat-completions protocol, temperature 0.
class ChatCompletionClient final : public CompletionClient {
 public:
  explicit ChatCompletionClient(LlmConfig cfg)
      : cfg_(std::move(cfg)), ep_(split_url(cfg_.url)), key_(credential_from_env(cfg_.api_key_env)) {}

  std::string complete(const std::string& prompt) override {
    const nlohmann::json body = {{"model", cfg_.model},
                                 {"temperature", 0},
                                 {"max_tokens", cfg_.max_tokens},
                                 {"messages", {{{"role", "user"}, {"content", prompt}}}}};
    const auto j = post_json(ep_, key_, body, cfg_.timeout_seconds);
    try {
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ParseFailure("completion response has no message content");
    }
  }

 private:
  LlmConfig cfg_;
  Endpoint ep_;
  std::string key_;
};

inline ClientFactory make_llm_factory(const LlmConfig& cfg) {
  return [cfg] { return std::make_unique<ChatCompletionClient>(cfg); };
}

struct EncoderConfig {
  std::string kind = "builtin";  // builtin | external
  std::string url;
  std::string model;
  std::string api_key_env = "REVDETECT_EMBED_API_KEY";
  int timeout_seconds = 60;
};

// Embeddings protocol: {"model", "input": [texts]} -> {"data": [{"embedding": [...]}]}.
class ExternalEncoder final : public Encoder {
 public:
  explicit ExternalEncoder(EncoderConfig cfg)
      : cfg_(std::move(cfg)), ep_(split_url(cfg_.url)), key_(credential_from_env(cfg_.api_key_env)) {}

  EmbeddingVector embed(std::string_view text) override {
    const std::string t(text);
    return embed_batch(std::span<const std::string>(&t, 1)).front();
  }

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override {
    const nlohmann::json body = {{"model", cfg_.model}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    const auto j = post_json(ep_, key_, body, cfg_.timeout_seconds);
    std::vector<EmbeddingVector> out;
    try {
      for (const auto& item : j.at("data")) {
        const auto v = item.at("embedding").get<std::vector<double>>();
        if (v.size() != kEmbeddingDim) throw Error("external encoder returned dimension " + std::to_string(v.size()));
        EmbeddingVector e;
        std::copy(v.begin(), v.end(), e.begin());
        out.push_back(e);
      }
    } catch (const nlohmann::json::exception&) {
      throw ParseFailure("embedding response is malformed");
    }
    if (out.size() != texts.size()) throw Error("external encoder returned a wrong batch size");
    return out;
  }

  std::string tag() const override { return "external:" + cfg_.model; }

 private:
  EncoderConfig cfg_;
  Endpoint ep_;
  std::string key_;
};

inline std::unique_ptr<Encoder> make_encoder(const EncoderConfig& cfg) {
  if (cfg.kind == "builtin") return std::make_unique<HashedNgramEncoder>();
  if (cfg.kind == "external") return std::make_unique<ExternalEncoder>(cfg);
  throw Error("unknown encoder kind '" + cfg.kind + "'");
}

}  // namespace revdetect
