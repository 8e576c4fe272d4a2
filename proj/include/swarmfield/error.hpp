#pragma once

#include <stdexcept>
#include <string>

namespace swarmfield {

enum class ErrorCode
{
  InvalidArgument,
  ZeroMass,
  RegionOutsideDomain,
  NonFiniteVelocity,
  NonFiniteFeedback,
  NonPositiveDensity,
  SingularGram,
  CflViolation,
  ShapeMismatch,
  ParseError,
  ValidationError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

//! Base exception for every failure raised by the library.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code)
  {
  }

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

//! A configuration value violates a documented bound.
class ValidationError : public Error
{
public:
  ValidationError(std::string section, std::string key, std::string reason)
    : Error(ErrorCode::ValidationError,
            "[" + section + "] " + key + ": " + reason),
      section_(std::move(section)), key_(std::move(key)),
      reason_(std::move(reason))
  {
  }

  const std::string& section() const noexcept { return section_; }
  const std::string& key() const noexcept { return key_; }
  const std::string& reason() const noexcept { return reason_; }

private:
  std::string section_;
  std::string key_;
  std::string reason_;
};

} // namespace swarmfield
