#pragma once

#include <stdexcept>
#include <string>

namespace distill {

// Input that could not be parsed at all (malformed JSON, unreadable file).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that parsed but violates a contract. The message names the
// offending record id or line number.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No deployment satisfies the request. stage() names the pipeline stage
// that ran out of candidates.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// Teacher endpoint failure that survived the retry budget, or a whole
// batch of calls failing past the tolerated fraction.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace distill
