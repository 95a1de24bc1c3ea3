#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace freqmix {

/// Broad error category; the CLI maps each kind onto a process exit code.
enum class ErrorKind {
  InvalidDimension,
  InvalidParameter,
  SymmetryViolation,
  Divergence,
  Parse,
  Schema,
  Decode,
  Manifest,
  Io,
  Usage,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(int step, const std::string& what)
      : Error(ErrorKind::Divergence, what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& what)
      : Error(ErrorKind::Parse, what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DecodeError : public Error {
 public:
  // offset < 0 when the failing position is unknown
  DecodeError(long long offset, const std::string& what)
      : Error(ErrorKind::Decode, what), offset_(offset) {}
  long long offset() const noexcept { return offset_; }

 private:
  long long offset_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace freqmix
