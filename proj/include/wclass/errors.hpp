#pragma once

#include <stdexcept>
#include <string>

namespace wclass {

// Every library failure derives from Error so callers can catch one type.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ModeError : public Error {
  public:
    using Error::Error;
};

class ModeKindError : public ModeError {
  public:
    using ModeError::ModeError;
};

class RegistryError : public Error {
  public:
    using Error::Error;
};

class NormalizationError : public Error {
  public:
    using Error::Error;
};

class SequencingError : public Error {
  public:
    using Error::Error;
};

class PreconditionError : public Error {
  public:
    using Error::Error;
};

class DomainError : public Error {
  public:
    using Error::Error;
};

class InsufficientData : public Error {
  public:
    using Error::Error;
};

class AttemptsExhausted : public Error {
  public:
    AttemptsExhausted(const std::string& stage, const std::string& what)
        : Error(what), stage_(stage) {}

    const std::string& stage() const { return stage_; }

  private:
    std::string stage_;
};

}  // namespace wclass
