#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace seo {

// Every recoverable failure in the toolkit is reported through one exception
// type carrying a code. The CLI maps codes to exit status 1; usage mistakes
// (bad flags) never reach this path.
enum class ErrorCode {
    DuplicateLeaf,
    UnknownGroup,
    CountMismatch,
    UnknownIntent,
    NotASymptom,
    SyntaxError,
    SchemaError,
    DuplicateDialogueId,
    EmptyCorpus,
    UnknownSlot,
    LengthMismatch,
    KeyMismatch,
    BadThreshold,
    MalformedLexicon,
    MissingIntents,
    MissingStates,
    MissingTemplate,
    NonTerminating,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(error_code_name(code) + std::string(": ") + message),
          code_(code), line_(0), message_(message) {}

    // Line numbers are 1-based; 0 means "no location".
    Error(ErrorCode code, const std::string& message, std::uint64_t line)
        : std::runtime_error(error_code_name(code) + std::string(": line ") +
                             std::to_string(line) + ": " + message),
          code_(code), line_(line), message_(message) {}

    ErrorCode code() const { return code_; }
    std::uint64_t line() const { return line_; }
    const std::string& message() const { return message_; }

  private:
    ErrorCode code_;
    std::uint64_t line_;
    std::string message_;
};

} // namespace seo
