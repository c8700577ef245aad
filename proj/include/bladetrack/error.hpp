#pragma once

#include <stdexcept>
#include <string>

namespace bladetrack {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed serialized data (RLE sums, JSON structure, image headers).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Extent mismatch between masks, images or frames.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bladetrack
