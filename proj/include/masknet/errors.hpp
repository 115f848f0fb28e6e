#pragma once

#include <stdexcept>
#include <string>

namespace masknet {

// Base class for all library errors. Subcommands map these to exit code 2,
// usage problems to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geom
struct AngleNearPi : Error { using Error::Error; };
struct KTooLarge : Error { using Error::Error; };

// nn
struct ShapeMismatch : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct NoForwardRecorded : Error { using Error::Error; };

// masknet
struct EmptyCloud : Error { using Error::Error; };
struct BadThreshold : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct EmptyMask : Error { using Error::Error; };

// data / io
struct BadSpec : Error { using Error::Error; };
struct ParseError : Error {
  ParseError(const std::string& msg, long line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
  long line_number;
};
struct UnsupportedFormat : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// registration
struct Degenerate : Error { using Error::Error; };
struct SingularJacobian : Error { using Error::Error; };
struct RegistrationFailed : Error { using Error::Error; };

// train
struct NonFiniteLoss : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct VersionMismatch : Error { using Error::Error; };
struct ChecksumMismatch : Error { using Error::Error; };

// eval
struct NoPositivePredictions : Error { using Error::Error; };

}  // namespace masknet
