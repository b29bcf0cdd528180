#pragma once

#include <stdexcept>
#include <string>

namespace dtg {

// All recoverable failures surface as Error with a stable machine-parseable
// code ("scenario-exhausted", "unreachable", ...) followed by detail text.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace dtg
