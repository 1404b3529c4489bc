#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evhmm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// belief functions

class FrameMismatch : public Error {
 public:
  FrameMismatch() : Error("mass functions are defined on different frames") {}
};

class NotAMass : public Error {
 public:
  using Error::Error;
};

class TotalConflict : public Error {
 public:
  using Error::Error;
};

class AllZeroLikelihoods : public Error {
 public:
  AllZeroLikelihoods() : Error("all likelihoods are zero") {}
};

// models and decoders

class EmptyCounts : public Error {
 public:
  EmptyCounts() : Error("counts are empty") {}
};

class NoTrigrams : public Error {
 public:
  NoTrigrams() : Error("counts contain no trigram") {}
};

class EmptyObservation : public Error {
 public:
  EmptyObservation() : Error("observation sequence is empty") {}
};

// corpus and model files

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("empty corpus") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& section, std::size_t line, const std::string& reason)
      : Error("section [" + section + "], line " + std::to_string(line) + ": " + reason),
        section_(section),
        line_(line) {}
  const std::string& section() const { return section_; }
  std::size_t line() const { return line_; }

 private:
  std::string section_;
  std::size_t line_;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent input that is not a syntax error, e.g. misaligned files.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace evhmm
