#pragma once

#include <stdexcept>
#include <string>

namespace biaslens {

/// Input data violates a documented invariant (bad record, duplicate id, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// LLM output could not be turned into a BiasVector. Carries the raw text.
class LabelParseError : public std::runtime_error {
 public:
  LabelParseError(const std::string& what, std::string raw_text)
      : std::runtime_error(what), raw_text_(std::move(raw_text)) {}

  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  std::string raw_text_;
};

/// Reading or writing an artifact failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace biaslens
