#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace elfarol {

// Exit-code families used by the CLI: 2 config, 3 transport, 4 data.
enum class ErrorFamily { Config = 2, Transport = 3, Data = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorFamily family, std::string code, const std::string& message)
      : std::runtime_error(message), family_(family), code_(std::move(code)) {}

  ErrorFamily family() const noexcept { return family_; }
  int exit_code() const noexcept { return static_cast<int>(family_); }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorFamily family_;
  std::string code_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(ErrorFamily::Config, "config", msg) {}
};

// Remote completion errors.
struct AuthError : Error {
  explicit AuthError(const std::string& msg) : Error(ErrorFamily::Transport, "auth", msg) {}
};
struct TransportError : Error {
  explicit TransportError(const std::string& msg) : Error(ErrorFamily::Transport, "transport", msg) {}
};
struct ProtocolError : Error {
  explicit ProtocolError(const std::string& msg) : Error(ErrorFamily::Transport, "protocol", msg) {}
};

// Trace loading errors.
struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error(ErrorFamily::Data, "parse", msg) {}
};
struct SchemaError : Error {
  explicit SchemaError(const std::string& msg) : Error(ErrorFamily::Data, "schema", msg) {}
};
struct ConsistencyError : Error {
  explicit ConsistencyError(const std::string& msg) : Error(ErrorFamily::Data, "consistency", msg) {}
};

// Analysis errors.
struct NoCrowdingError : Error {
  explicit NoCrowdingError(const std::string& msg) : Error(ErrorFamily::Data, "no_crowding", msg) {}
};
struct NoEventError : Error {
  explicit NoEventError(const std::string& msg) : Error(ErrorFamily::Data, "no_event", msg) {}
};
struct DegenerateSampleError : Error {
  explicit DegenerateSampleError(const std::string& msg)
      : Error(ErrorFamily::Data, "degenerate_sample", msg) {}
};
struct DataError : Error {
  explicit DataError(const std::string& msg) : Error(ErrorFamily::Data, "data", msg) {}
};

}  // namespace elfarol
