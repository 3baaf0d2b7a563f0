#include <gtest/gtest.h>

#include <thread>

#include "revdetect/learners.hpp"
#include "revdetect/service.hpp"
#include "revdetect/synthetic.hpp"

using namespace revdetect;

namespace {

Dataset corpus() {
  Dataset d;
  for (int i = 0; i < 6; ++i) {
    d.reviews.push_back({"h" + std::to_string(i), "The proof of Lemma " + std::to_string(i) + " is wrong. I think Table 2 is off.",
                         Label::Human, Source::PeerReadAcl, std::nullopt});
    d.reviews.push_back({"a" + std::to_string(i), "Summary. A comprehensive framework number " + std::to_string(i) + ".",
                         Label::AiGenerated, Source::GenReviewNeutral, std::nullopt});
  }
  return d;
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto s = synthetic::generate(60, 20, 1);
    BoostingParams p;
    p.n_estimators = 10;
    auto model = fit_gradient_boosting(s.X, s.y, p, 3.0, 1);
    auto enc = std::make_unique<HashedNgramEncoder>();
    auto idx = build_index(corpus(), *enc);
    engine_ = new Engine(std::move(model), default_lexicon(), std::move(idx), std::move(enc));
    service_ = new Service(*engine_, 4096);
    port_ = service_->bind("127.0.0.1", 0);
    thread_ = new std::thread([] { service_->run(); });
    service_->wait_until_ready();
  }
  static void TearDownTestSuite() {
    service_->stop();
    thread_->join();
    delete thread_;
    delete service_;
    delete engine_;
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

  static Engine* engine_;
  static Service* service_;
  static std::thread* thread_;
  static int port_;
};

Engine* ServiceTest::engine_ = nullptr;
Service* ServiceTest::service_ = nullptr;
std::thread* ServiceTest::thread_ = nullptr;
int ServiceTest::port_ = 0;

}  // namespace

TEST_F(ServiceTest, Health) {
  auto res = client().Get("/api/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto j = nlohmann::json::parse(res->body);
  EXPECT_EQ(j.at("status"), "ok");
  EXPECT_EQ(j.at("index_size"), 12);
  EXPECT_EQ(j.at("model_version"), engine_->model_version());
}

TEST_F(ServiceTest, ModelInfo) {
  auto res = client().Get("/api/model-info");
  ASSERT_TRUE(res);
  const auto j = nlohmann::json::parse(res->body);
  EXPECT_EQ(j.at("feature_names").size(), 8u);
  EXPECT_EQ(j.at("explanation_scale"), "margin");
}

TEST_F(ServiceTest, AnalyzeMatchesLibrary) {
  const std::string text = "Summary. The method is a comprehensive framework. I think Figure 3 is unclear.";
  auto res = client().Post("/api/analyze", nlohmann::json{{"review_text", text}, {"K", 2}}.dump(), "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  const auto r = parse_report(res->body);
  EXPECT_EQ(r.evidence.neighbors.size(), 2u);
  EXPECT_EQ(res->body, render_json(engine_->analyze(text, ExtractorPreference::Auto, 2)));
  EXPECT_TRUE(rules_consistent(r));
}

TEST_F(ServiceTest, RetrieveHonorsK) {
  auto res = client().Post("/api/retrieve", R"({"text": "comprehensive framework", "K": 4})", "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  const auto j = nlohmann::json::parse(res->body);
  EXPECT_EQ(j.at("neighbors").size(), 4u);
  EXPECT_EQ(j.at("summary").at("ai_count").get<int>() + j.at("summary").at("human_count").get<int>(), 4);
}

TEST_F(ServiceTest, Markers) {
  auto res = client().Post("/api/markers", R"({"text": "I think so."})", "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  EXPECT_NE(res->body.find("absence_personal_signals"), std::string::npos);
}

TEST_F(ServiceTest, BadRequests) {
  auto c = client();
  auto bad_json = c.Post("/api/analyze", "{nope", "application/json");
  ASSERT_TRUE(bad_json);
  EXPECT_EQ(bad_json->status, 400);
  EXPECT_EQ(nlohmann::json::parse(bad_json->body).at("code"), "invalid_json");
  auto missing = c.Post("/api/analyze", R"({"text": "x"})", "application/json");
  EXPECT_EQ(missing->status, 400);
  auto empty = c.Post("/api/analyze", R"({"review_text": "  "})", "application/json");
  EXPECT_EQ(empty->status, 400);
  auto bad_k = c.Post("/api/retrieve", R"({"text": "x", "K": 0})", "application/json");
  EXPECT_EQ(bad_k->status, 400);
  auto big = c.Post("/api/analyze", nlohmann::json{{"review_text", std::string(10000, 'x')}}.dump(), "application/json");
  ASSERT_TRUE(big);
  EXPECT_EQ(big->status, 413);
  auto none = c.Get("/api/nothing");
  EXPECT_EQ(none->status, 404);
}
