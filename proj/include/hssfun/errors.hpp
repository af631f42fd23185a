#pragma once

#include <stdexcept>
#include <string>

namespace hssfun {

/// Base class of every exception thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimensions of the operands do not match.
class shape_error : public error {
 public:
  using error::error;
};

/// An input violates a documented precondition (e.g. symmetry).
class contract_error : public error {
 public:
  using error::error;
};

/// A scalar function was asked for a value outside its domain.
class domain_error : public error {
 public:
  using error::error;
};

/// A shift coincides (numerically) with an eigenvalue of the shifted matrix.
class pole_collision_error : public error {
 public:
  using error::error;
};

/// Generators that should satisfy a structural identity do not.
class consistency_error : public error {
 public:
  using error::error;
};

/// Malformed serialized input.
class parse_error : public error {
 public:
  using error::error;
};

}  // namespace hssfun
