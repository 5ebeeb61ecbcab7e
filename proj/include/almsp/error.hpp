#pragma once

#include <stdexcept>
#include <string>

namespace almsp {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class CorpusError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

class OracleError : public Error {
public:
  using Error::Error;
};

class AdapterError : public Error {
public:
  using Error::Error;
};

} // namespace almsp
