#pragma once

#include <stdexcept>
#include <string>

namespace ibvs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Euler extraction requested at |pitch| = pi/2.
struct DegeneratePitchError : Error {
  using Error::Error;
};

struct ProjectionBehindCamera : Error {
  using Error::Error;
};

struct DepthDomainError : Error {
  using Error::Error;
};

/// Every singular value of the interaction matrix was truncated.
struct SingularInteraction : Error {
  using Error::Error;
};

/// A feature ray ended up behind the (virtual) image plane.
struct OutOfField : Error {
  using Error::Error;
};

/// No corner of the target could be detected.
struct TargetLost : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace ibvs
