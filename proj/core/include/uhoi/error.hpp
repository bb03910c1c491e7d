#pragma once

#include <stdexcept>
#include <string>

namespace uhoi {

// Base of every error thrown by the library. Callers that only need a
// message can catch this; the subclasses let the CLI map failures to stages.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (JSON, TSV, JSONL). Message names the field/record.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A value that parsed but violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or out-of-range configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Remote provider unreachable or retries exhausted.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Key missing from a file-backed provider.
class LookupError : public Error {
 public:
  using Error::Error;
};

class ImageError : public Error {
 public:
  using Error::Error;
};

// A metric whose value is undefined for the given input (e.g. no ground truth).
class UndefinedResultError : public Error {
 public:
  using Error::Error;
};

}  // namespace uhoi
