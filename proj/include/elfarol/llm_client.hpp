#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "elfarol/errors.hpp"

namespace elfarol {

// Remote chat-completion configuration. Defaults mirror the shipped scenario:
// gpt-4o-2024-08-06, temperature 0.7, 5000 output tokens.
struct LlmConfig {
  std::string endpoint_url = "https://api.openai.com";
  std::string completions_path = "/v1/chat/completions";
  std::string model_name = "gpt-4o-2024-08-06";
  double temperature = 0.7;
  int max_tokens = 5000;
  std::chrono::milliseconds request_timeout{60000};
  int max_retries = 3;
  int max_concurrency = 8;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{8000};
  // Credential is read from the environment, never from config files.
  std::string api_key_env = "ELFAROL_API_KEY";
  // When set in the environment, overrides endpoint_url (stubs, local models).
  std::string endpoint_env = "ELFAROL_API_BASE";

  friend bool operator==(const LlmConfig&, const LlmConfig&) = default;
};

struct CompletionResult {
  std::string text;  // raw, unparsed model output (first choice)
  long prompt_tokens = 0;
  long completion_tokens = 0;
  double latency_ms = 0.0;
  int attempts = 1;
};

// One slot of a batch. Either `result` is set, or `error_code`/`error_message`
// describe the failure that exhausted the slot.
struct CompletionOutcome {
  std::optional<CompletionResult> result;
  std::string error_code;
  std::string error_message;
  bool ok() const { return result.has_value(); }
};

// Called once per completed request with the raw wire payloads, for
// transcript recording. `index` is the position within the batch (0 for
// single complete() calls).
using TranscriptFn = std::function<void(std::size_t index, const std::string& request_body,
                                        const std::string& response_body, int attempts,
                                        double latency_ms)>;

// Sleep injection point so retry backoff can be asserted with a virtual clock.
using SleepFn = std::function<void(std::chrono::milliseconds)>;

class LlmClient {
 public:
  // Throws AuthError when the credential variable is unset or empty.
  explicit LlmClient(LlmConfig cfg, SleepFn sleep = {});

  // Blocking single completion. Retries transient failures (connect errors,
  // timeouts, 429, 5xx) with exponential backoff; non-transient failures
  // (401/403 -> AuthError, other 4xx / malformed body -> ProtocolError)
  // propagate immediately. TransportError after retries are exhausted.
  CompletionResult complete(const std::string& prompt) const;

  // Runs all prompts with at most max_concurrency in flight and returns only
  // when every slot is resolved; results are positionally aligned with the
  // prompts. Per-slot failures are carried in the outcome, never thrown.
  std::vector<CompletionOutcome> complete_batch(const std::vector<std::string>& prompts) const;

  void set_transcript_sink(TranscriptFn fn) { transcript_ = std::move(fn); }

  const LlmConfig& config() const { return cfg_; }

 private:
  CompletionResult complete_one(const std::string& prompt, std::size_t index) const;

  LlmConfig cfg_;
  std::string api_key_;
  SleepFn sleep_;
  TranscriptFn transcript_;
};

}  // namespace elfarol
