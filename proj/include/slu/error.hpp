#pragma once

#include <stdexcept>
#include <string>

namespace slu {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input that could not be read at all (bad JSON, bad WAV header).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a contract (length mismatch, unknown label).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// The two tokenizations of one utterance disagree on the word count.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

}  // namespace slu
