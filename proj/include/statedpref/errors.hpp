#pragma once

#include <stdexcept>
#include <string>

namespace statedpref {

//! Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Malformed input data (CSV contents, probabilities out of range, ...).
class ValidationError : public Error
{
public:
  using Error::Error;
};

//! Invalid configuration (non-PSD covariance, unknown config keys, ...).
class ConfigError : public Error
{
public:
  using Error::Error;
};

//! A function was called outside its documented preconditions.
class ArgumentError : public Error
{
public:
  using Error::Error;
};

//! A numerical stage could not produce an estimate.
class EstimationError : public Error
{
public:
  using Error::Error;
};

} // namespace statedpref
