#pragma once

#include <stdexcept>
#include <string>

namespace lib2vec {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntaxError : Error {
  SyntaxError(int line, const std::string& expected)
      : Error("syntax error at line " + std::to_string(line) + ": expected " + expected),
        line(line),
        expected(expected) {}
  int line;
  std::string expected;
};

struct SemanticError : Error {
  using Error::Error;
};

struct NamingError : Error {
  using Error::Error;
};

struct MissingPin : Error {
  using Error::Error;
};

struct PinMismatch : Error {
  using Error::Error;
};

struct MultiOutput : Error {
  using Error::Error;
};

struct TooManyInputs : Error {
  using Error::Error;
};

struct EmptyLibrary : Error {
  using Error::Error;
};

struct NonPositiveValue : Error {
  NonPositiveValue(std::size_t index, const std::string& what)
      : Error(what), index(index) {}
  std::size_t index;
};

struct MissingVector : Error {
  using Error::Error;
};

struct UnknownToken : Error {
  using Error::Error;
};

struct NonFiniteLoss : Error {
  using Error::Error;
};

struct EnvelopeInfeasible : Error {
  using Error::Error;
};

struct UnconnectedNet : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace lib2vec
