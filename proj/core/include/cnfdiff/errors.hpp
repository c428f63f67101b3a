#pragma once

#include <stdexcept>
#include <string>

namespace cnfdiff {

// Base for every domain error thrown by this library. Solver outcomes that
// are ordinary results (infeasible instance, timeout) are reported through
// status enums, not exceptions.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class ShapeMismatch : public Error {
public:
  using Error::Error;
};

class IncompletePlacement : public Error {
public:
  using Error::Error;
};

class DisconnectedHop : public Error {
public:
  using Error::Error;
};

class TooLarge : public Error {
public:
  using Error::Error;
};

class GenerationFailed : public Error {
public:
  using Error::Error;
};

class BadCount : public Error {
public:
  using Error::Error;
};

class UnplaceableCnf : public Error {
public:
  using Error::Error;
};

class NotScalar : public Error {
public:
  using Error::Error;
};

class StaleTape : public Error {
public:
  using Error::Error;
};

class AllMaskedRow : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace cnfdiff
