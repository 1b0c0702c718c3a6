#pragma once

#include <stdexcept>
#include <string>

namespace homsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration, schema violations and bad arguments.
class ConfigError : public Error {
public:
    using Error::Error;
};

class ParseError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class LookupError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class NoBracketError : public RangeError {
public:
    using RangeError::RangeError;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class EmptySpectrumError : public ShapeError {
public:
    using ShapeError::ShapeError;
};

class FitError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public FitError {
public:
    using FitError::FitError;
};

class ExtrapolationError : public Error {
public:
    using Error::Error;
};

class ProtocolFault : public Error {
public:
    ProtocolFault(const std::string& what, std::string state_dump)
        : Error(what), state_dump_(std::move(state_dump))
    {
    }

    const std::string& state_dump() const noexcept { return state_dump_; }

private:
    std::string state_dump_;
};

}  // namespace homsim
