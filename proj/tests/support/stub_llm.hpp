#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace elfarol::testing {

// In-process chat-completions stub. The script callback receives the 1-based
// request ordinal and the parsed request body and returns (status, body);
// concurrency is tracked so tests can assert the in-flight high-water mark.
class StubLlmServer {
 public:
  // status, body
  using Script = std::function<std::pair<int, std::string>(int ordinal, const nlohmann::json&)>;

  explicit StubLlmServer(Script script) : script_(std::move(script)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      const int in_flight = 1 + in_flight_.fetch_add(1);
      int seen = high_water_.load();
      while (in_flight > seen && !high_water_.compare_exchange_weak(seen, in_flight)) {
      }
      const int ordinal = 1 + requests_.fetch_add(1);
      nlohmann::json body = nlohmann::json::value_t::null;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::exception&) {
      }
      const auto [status, text] = script_(ordinal, body);
      res.status = status;
      res.set_content(text, "application/json");
      in_flight_.fetch_sub(1);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubLlmServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int request_count() const { return requests_.load(); }
  int high_water_mark() const { return high_water_.load(); }

  // A well-formed completion body with the given reply text.
  static std::string completion_body(const std::string& text) {
    nlohmann::json j;
    j["choices"] = nlohmann::json::array(
        {nlohmann::json{{"message", {{"role", "assistant"}, {"content", text}}}}});
    j["usage"] = {{"prompt_tokens", 12}, {"completion_tokens", 34}};
    return j.dump();
  }

  // Extracts the user prompt from a parsed request body.
  static std::string prompt_of(const nlohmann::json& request) {
    if (!request.is_object() || !request.contains("messages")) return "";
    return request["messages"][0]["content"].get<std::string>();
  }

 private:
  Script script_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> high_water_{0};
};

// Sets an environment variable for the lifetime of the object.
class ScopedEnv {
 public:
  ScopedEnv(std::string name, const std::string& value) : name_(std::move(name)) {
    const char* old = ::getenv(name_.c_str());
    if (old != nullptr) saved_ = old;
    ::setenv(name_.c_str(), value.c_str(), 1);
  }
  ~ScopedEnv() {
    if (saved_.has_value())
      ::setenv(name_.c_str(), saved_->c_str(), 1);
    else
      ::unsetenv(name_.c_str());
  }

 private:
  std::string name_;
  std::optional<std::string> saved_;
};

}  // namespace elfarol::testing
