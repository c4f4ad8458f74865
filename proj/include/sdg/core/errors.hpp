#pragma once

#include <stdexcept>
#include <string>

namespace sdg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Engine rule violations.
struct IllegalTarget : Error { using Error::Error; };
struct IllegalBallot : Error { using Error::Error; };
struct IllegalProposal : Error { using Error::Error; };
struct IllegalPhase : Error { using Error::Error; };

// Policy / backend failures.
struct UnsupportedCapability : Error { using Error::Error; };
struct AuthError : Error { using Error::Error; };
struct RetryExhausted : Error { using Error::Error; };

struct RemoteError : Error {
    RemoteError(const std::string& msg, int status_code, int attempts_made)
        : Error(msg), status(status_code), attempts(attempts_made) {}
    int status;    // HTTP status, 0 for transport-level failures
    int attempts;
};

// Parsing failures carry the raw backend text for diagnostics.
struct ParseError : Error {
    ParseError(const std::string& msg, std::string raw)
        : Error(msg), raw_text(std::move(raw)) {}
    std::string raw_text;
};
struct IntentParseError : ParseError { using ParseError::ParseError; };
struct BaseParseError : ParseError { using ParseError::ParseError; };
struct RefineParseError : ParseError { using ParseError::ParseError; };
struct GroupSampleError : ParseError { using ParseError::ParseError; };

struct TemplateRenderError : Error { using Error::Error; };
struct GroupTooSmall : Error { using Error::Error; };
struct SampleExceedsPool : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace sdg
