#pragma once

#include <stdexcept>
#include <string>

namespace dilacov {

// Invalid input or a precondition violation. CLI exit status 1.
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed literal or file content.
struct FormatError : DomainError {
  explicit FormatError(const std::string& what) : DomainError(what) {}
};

// A configured bound was exceeded. CLI exit status 2.
struct ResourceError : std::runtime_error {
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// An internal invariant failed to certify. CLI exit status 3.
struct CertificationError : std::runtime_error {
  explicit CertificationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dilacov
