#pragma once

#include <stdexcept>
#include <string>

namespace ltlm {

// Error categories mirrored one-to-one by the C API status codes.
enum class ErrorCode {
    InvalidArgument,
    Io,
    Format,       // malformed input file (corpus, embeddings, n-best, ...)
    Truncated,    // checkpoint shorter than its declared structure
    Checksum,     // checkpoint payload checksum mismatch
    Version,      // checkpoint format version not supported
    VocabMismatch,
    Numeric,      // non-finite value where a finite one is required
    Diverged,
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool ok, ErrorCode code, const std::string& message) {
    if (!ok) fail(code, message);
}

} // namespace ltlm
