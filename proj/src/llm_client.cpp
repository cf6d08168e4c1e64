#include "elfarol/llm_client.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace elfarol {

using nlohmann::json;

namespace {

std::string env_or_empty(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  return v == nullptr ? std::string() : std::string(v);
}

bool transient_status(int status) { return status == 429 || (status >= 500 && status < 600); }

std::string strip_trailing_slash(std::string url) {
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url;
}

}  // namespace

LlmClient::LlmClient(LlmConfig cfg, SleepFn sleep) : cfg_(std::move(cfg)), sleep_(std::move(sleep)) {
  if (!cfg_.endpoint_env.empty()) {
    const std::string override_url = env_or_empty(cfg_.endpoint_env);
    if (!override_url.empty()) cfg_.endpoint_url = override_url;
  }
  cfg_.endpoint_url = strip_trailing_slash(cfg_.endpoint_url);
  api_key_ = env_or_empty(cfg_.api_key_env);
  if (api_key_.empty())
    throw AuthError("credential missing: set " + cfg_.api_key_env + " in the environment");
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

CompletionResult LlmClient::complete(const std::string& prompt) const {
  return complete_one(prompt, 0);
}

CompletionResult LlmClient::complete_one(const std::string& prompt, std::size_t index) const {
  json request;
  request["model"] = cfg_.model_name;
  request["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  request["temperature"] = cfg_.temperature;
  request["max_tokens"] = cfg_.max_tokens;
  const std::string body = request.dump();

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  auto record = [&](const std::string& response_body, int attempts) {
    if (transcript_) transcript_(index, body, response_body, attempts, elapsed_ms());
  };

  std::string last_failure = "no attempt made";
  for (int attempt = 1; attempt <= cfg_.max_retries + 1; ++attempt) {
    if (attempt > 1) {
      auto delay = cfg_.backoff_base * (1LL << (attempt - 2));
      if (delay > cfg_.backoff_cap) delay = cfg_.backoff_cap;
      sleep_(std::chrono::duration_cast<std::chrono::milliseconds>(delay));
    }

    httplib::Client http(cfg_.endpoint_url);
    http.set_connection_timeout(cfg_.request_timeout);
    http.set_read_timeout(cfg_.request_timeout);
    http.set_write_timeout(cfg_.request_timeout);
    http.set_bearer_token_auth(api_key_);

    httplib::Result res = http.Post(cfg_.completions_path, body, "application/json");
    if (!res) {
      last_failure = "connection failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      record(res->body, attempt);
      throw AuthError("authentication rejected (status " + std::to_string(res->status) + ")");
    }
    if (transient_status(res->status)) {
      last_failure = "transient status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      record(res->body, attempt);
      throw ProtocolError("unexpected status " + std::to_string(res->status) + ": " + res->body);
    }

    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      record(res->body, attempt);
      throw ProtocolError(std::string("malformed response body: ") + e.what());
    }
    if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty()) {
      record(res->body, attempt);
      throw ProtocolError("response body has no choices");
    }
    const json& choice = reply["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
      record(res->body, attempt);
      throw ProtocolError("response choice has no message content");
    }

    CompletionResult result;
    result.text = choice["message"]["content"].get<std::string>();
    if (reply.contains("usage")) {
      const json& usage = reply["usage"];
      if (usage.contains("prompt_tokens") && usage["prompt_tokens"].is_number())
        result.prompt_tokens = usage["prompt_tokens"].get<long>();
      if (usage.contains("completion_tokens") && usage["completion_tokens"].is_number())
        result.completion_tokens = usage["completion_tokens"].get<long>();
    }
    result.attempts = attempt;
    result.latency_ms = elapsed_ms();
    record(res->body, attempt);
    return result;
  }
  record(last_failure, cfg_.max_retries + 1);
  throw TransportError("retries exhausted after " + std::to_string(cfg_.max_retries + 1) +
                       " attempts: " + last_failure);
}

std::vector<CompletionOutcome> LlmClient::complete_batch(
    const std::vector<std::string>& prompts) const {
  std::vector<CompletionOutcome> out(prompts.size());
  if (prompts.empty()) return out;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= prompts.size()) return;
      try {
        out[i].result = complete_one(prompts[i], i);
      } catch (const Error& e) {
        out[i].error_code = e.code();
        out[i].error_message = e.what();
      } catch (const std::exception& e) {
        out[i].error_code = "transport";
        out[i].error_message = e.what();
      }
    }
  };

  const std::size_t n_workers =
      std::min(prompts.size(), static_cast<std::size_t>(std::max(1, cfg_.max_concurrency)));
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return out;
}

}  // namespace elfarol
