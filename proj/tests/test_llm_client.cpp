#include <doctest.h>

#include <chrono>

#include "elfarol/llm_client.hpp"
#include "support/stub_llm.hpp"

using namespace elfarol;
using elfarol::testing::ScopedEnv;
using elfarol::testing::StubLlmServer;

namespace {

LlmConfig stub_config(const std::string& url) {
  LlmConfig cfg;
  cfg.endpoint_url = url;
  cfg.max_retries = 3;
  cfg.backoff_base = std::chrono::milliseconds(500);
  cfg.backoff_cap = std::chrono::milliseconds(8000);
  cfg.request_timeout = std::chrono::milliseconds(5000);
  return cfg;
}

// Records requested delays instead of sleeping.
struct FakeSleep {
  std::shared_ptr<std::vector<std::chrono::milliseconds>> delays =
      std::make_shared<std::vector<std::chrono::milliseconds>>();
  SleepFn fn() {
    auto d = delays;
    return [d](std::chrono::milliseconds ms) { d->push_back(ms); };
  }
};

}  // namespace

TEST_CASE("complete returns the first choice text in one attempt") {
  ScopedEnv key("ELFAROL_API_KEY", "test-key");
  StubLlmServer stub([](int, const nlohmann::json&) {
    return std::make_pair(200, StubLlmServer::completion_body("Message: hi\nAction: stay"));
  });
  LlmClient client(stub_config(stub.url()));
  const CompletionResult result = client.complete("prompt");
  CHECK(result.text == "Message: hi\nAction: stay");
  CHECK(result.attempts == 1);
  CHECK(result.prompt_tokens == 12);
  CHECK(result.completion_tokens == 34);
  CHECK(stub.request_count() == 1);
}

TEST_CASE("the request body carries the model configuration") {
  ScopedEnv key("ELFAROL_API_KEY", "test-key");
  nlohmann::json seen;
  StubLlmServer stub([&seen](int, const nlohmann::json& body) {
    seen = body;
    return std::make_pair(200, StubLlmServer::completion_body("ok"));
  });
  LlmConfig cfg = stub_config(stub.url());
  cfg.model_name = "gpt-4o-2024-08-06";
  cfg.temperature = 0.7;
  cfg.max_tokens = 5000;
  LlmClient client(cfg);
  client.complete("the prompt text");
  CHECK(seen["model"] == "gpt-4o-2024-08-06");
  CHECK(seen["temperature"].get<double>() == doctest::Approx(0.7));
  CHECK(seen["max_tokens"] == 5000);
  REQUIRE(seen["messages"].size() == 1);  // single stateless user turn
  CHECK(seen["messages"][0]["role"] == "user");
  CHECK(seen["messages"][0]["content"] == "the prompt text");
}

TEST_CASE("429 twice then 200 succeeds on the third attempt with backoff") {
  ScopedEnv key("ELFAROL_API_KEY", "test-key");
  StubLlmServer stub([](int ordinal, const nlohmann::json&) {
    if (ordinal <= 2) return std::make_pair(429, std::string("{\"error\":\"rate\"}"));
    return std::make_pair(200, StubLlmServer::completion_body("done"));
  });
  FakeSleep sleep;
  LlmClient client(stub_config(stub.url()), sleep.fn());
  const CompletionResult result = client.complete("p");
  CHECK(result.text == "done");
  CHECK(result.attempts == 3);
  CHECK(stub.request_count() == 3);
  // retry k is delayed by base * 2^(k-1), capped
  REQUIRE(sleep.delays->size() == 2);
  CHECK((*sleep.delays)[0] == std::chrono::milliseconds(500));
  CHECK((*sleep.delays)[1] == std::chrono::milliseconds(1000));
}

TEST_CASE("backoff delays are capped") {
  ScopedEnv key("ELFAROL_API_KEY", "test-key");
  StubLlmServer stub([](int, const nlohmann::json&) {
    return std::make_pair(503, std::string("{}"));
  });
  LlmConfig cfg = stub_config(stub.url());
  cfg.max_retries = 5;
  cfg.backoff_cap = std::chrono::milliseconds(1200);
  FakeSleep sleep;
  LlmClient client(cfg, sleep.fn());
  CHECK_THROWS_AS(client.complete("p"), TransportError);
  REQUIRE(sleep.delays->size() == 5);
  CHECK((*sleep.delays)[0] == std::chrono::milliseconds(500));
  CHECK((*sleep.delays)[1] == std::chrono::milliseconds(1000));
  CHECK((*sleep.delays)[2] == std::chrono::milliseconds(1200));
  CHECK((*sleep.delays)[3] == std::chrono::milliseconds(1200));
  CHECK((*sleep.delays)[4] == std::chrono::milliseconds(1200));
}

TEST_CASE("401 is an auth error with no retry") {
  ScopedEnv key("ELFAROL_API_KEY", "bad-key");
  StubLlmServer stub([](int, const nlohmann::json&) {
    return std::make_pair(401, std::string("{\"error\":\"unauthorized\"}"));
  });
  FakeSleep sleep;
  LlmClient client(stub_config(stub.url()), sleep.fn());
  CHECK_THROWS_AS(client.complete("p"), AuthError);
  CHECK(stub.request_count() == 1);
  CHECK(sleep.delays->empty());
}

TEST_CASE("malformed response bodies are protocol errors") {
  ScopedEnv key("ELFAROL_API_KEY", "test-key");
  SUBCASE("not json") {
    StubLlmServer stub(
        [](int, const nlohmann::json&) { return std::make_pair(200, std::string("oops")); });
    LlmClient client(stub_config(stub.url()));
    CHECK_THROWS_AS(client.complete("p"), ProtocolError);
  }
  SUBCASE("no choices") {
    StubLlmServer stub(
        [](int, const nlohmann::json&) { return std::make_pair(200, std::string("{}")); });
    LlmClient client(stub_config(stub.url()));
    CHECK_THROWS_AS(client.complete("p"), ProtocolError);
  }
  SUBCASE("unexpected 4xx") {
    StubLlmServer stub(
        [](int, const nlohmann::json&) { return std::make_pair(400, std::string("{}")); });
    LlmClient client(stub_config(stub.url()));
    CHECK_THROWS_AS(client.complete("p"), ProtocolError);
  }
}

TEST_CASE("missing credential fails before any request") {
  ScopedEnv unset("ELFAROL_API_KEY", "");
  CHECK_THROWS_AS(LlmClient(stub_config("http://127.0.0.1:1")), AuthError);
}

TEST_CASE("endpoint environment override wins over the configured url") {
  ScopedEnv key("ELFAROL_API_KEY", "test-key");
  StubLlmServer stub([](int, const nlohmann::json&) {
    return std::make_pair(200, StubLlmServer::completion_body("via override"));
  });
  ScopedEnv base("ELFAROL_API_BASE", stub.url());
  LlmConfig cfg = stub_config("http://203.0.113.1:9");  // unreachable if used
  cfg.max_retries = 0;
  LlmClient client(cfg);
  CHECK(client.complete("p").text == "via override");
}

TEST_CASE("batch results stay positionally aligned under out-of-order completion") {
  ScopedEnv key("ELFAROL_API_KEY", "test-key");
  StubLlmServer stub([](int, const nlohmann::json& body) {
    const std::string prompt = StubLlmServer::prompt_of(body);
    // later prompts answer sooner
    const int index = std::stoi(prompt.substr(prompt.rfind('-') + 1));
    std::this_thread::sleep_for(std::chrono::milliseconds((20 - index) * 3));
    return std::make_pair(200, StubLlmServer::completion_body("echo " + prompt));
  });
  LlmConfig cfg = stub_config(stub.url());
  cfg.max_concurrency = 20;
  LlmClient client(cfg);
  std::vector<std::string> prompts;
  for (int i = 0; i < 20; ++i) prompts.push_back("prompt-" + std::to_string(i));
  const auto outcomes = client.complete_batch(prompts);
  REQUIRE(outcomes.size() == 20);
  for (int i = 0; i < 20; ++i) {
    REQUIRE(outcomes[static_cast<std::size_t>(i)].ok());
    CHECK(outcomes[static_cast<std::size_t>(i)].result->text ==
          "echo prompt-" + std::to_string(i));
  }
}

TEST_CASE("in-flight requests never exceed max_concurrency") {
  ScopedEnv key("ELFAROL_API_KEY", "test-key");
  StubLlmServer stub([](int, const nlohmann::json&) {
    std::this_thread::sleep_for(std::chrono::milliseconds(15));
    return std::make_pair(200, StubLlmServer::completion_body("ok"));
  });
  LlmConfig cfg = stub_config(stub.url());
  cfg.max_concurrency = 3;
  LlmClient client(cfg);
  const auto outcomes = client.complete_batch(std::vector<std::string>(12, "p"));
  CHECK(outcomes.size() == 12);
  CHECK(stub.high_water_mark() <= 3);
}

TEST_CASE("max_concurrency 1 is strictly sequential") {
  ScopedEnv key("ELFAROL_API_KEY", "test-key");
  StubLlmServer stub([](int, const nlohmann::json&) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    return std::make_pair(200, StubLlmServer::completion_body("ok"));
  });
  LlmConfig cfg = stub_config(stub.url());
  cfg.max_concurrency = 1;
  LlmClient client(cfg);
  client.complete_batch(std::vector<std::string>(8, "p"));
  CHECK(stub.high_water_mark() == 1);
}

TEST_CASE("a permanently failing slot carries its error; others succeed") {
  ScopedEnv key("ELFAROL_API_KEY", "test-key");
  StubLlmServer stub([](int, const nlohmann::json& body) {
    if (StubLlmServer::prompt_of(body).find("FAIL") != std::string::npos)
      return std::make_pair(500, std::string("{\"error\":\"boom\"}"));
    return std::make_pair(200, StubLlmServer::completion_body("fine"));
  });
  LlmConfig cfg = stub_config(stub.url());
  cfg.max_retries = 1;
  FakeSleep sleep;
  LlmClient client(cfg, sleep.fn());
  const auto outcomes = client.complete_batch({"a", "FAIL", "c"});
  REQUIRE(outcomes.size() == 3);
  CHECK(outcomes[0].ok());
  CHECK_FALSE(outcomes[1].ok());
  CHECK(outcomes[1].error_code == "transport");
  CHECK(outcomes[2].ok());
}

TEST_CASE("transcript sink observes every exchange") {
  ScopedEnv key("ELFAROL_API_KEY", "test-key");
  StubLlmServer stub([](int, const nlohmann::json&) {
    return std::make_pair(200, StubLlmServer::completion_body("ok"));
  });
  LlmClient client(stub_config(stub.url()));
  std::vector<std::size_t> indices;
  std::mutex mutex;
  client.set_transcript_sink([&](std::size_t index, const std::string& request,
                                 const std::string& response, int attempts, double) {
    std::lock_guard<std::mutex> lock(mutex);
    indices.push_back(index);
    CHECK(request.find("\"messages\"") != std::string::npos);
    CHECK(response.find("choices") != std::string::npos);
    CHECK(attempts == 1);
  });
  client.complete_batch({"a", "b", "c"});
  std::sort(indices.begin(), indices.end());
  CHECK(indices == std::vector<std::size_t>{0, 1, 2});
}
