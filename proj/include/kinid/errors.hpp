#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kinid {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GimbalLock : public Error {
 public:
  GimbalLock() : Error("rotation is at gimbal lock (|pitch| = pi/2)") {}
};

class FrameMismatch : public Error {
 public:
  FrameMismatch(const std::string& a, const std::string& b)
      : Error("poses expressed in different frames: '" + a + "' vs '" + b + "'") {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidRange : public Error {
 public:
  using Error::Error;
};

class DegenerateDisplacement : public Error {
 public:
  explicit DegenerateDisplacement(int joint)
      : Error("displacement of signal " + std::to_string(joint) +
              " is a multiple of 2*pi"),
        joint_(joint) {}
  int joint() const { return joint_; }

 private:
  int joint_;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

/// A feasibility test needs at least two observations.
class InsufficientObservations : public Error {
 public:
  explicit InsufficientObservations(std::size_t t)
      : Error("at least 2 observations required, got " + std::to_string(t)) {}
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed input document. Carries the JSON path of the offending field.
class ParseError : public Error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

class SchemaVersionMismatch : public Error {
 public:
  SchemaVersionMismatch(int found, int expected)
      : Error("schema version " + std::to_string(found) + " not supported (expected " +
              std::to_string(expected) + ")") {}
};

struct TripletId {
  int i1 = 0;
  int i2 = 0;
  int k = 0;
  friend bool operator==(const TripletId&, const TripletId&) = default;
};

/// The verdict graph over markers does not form a single open chain, or some
/// triplets could not be decided.
class StructureAmbiguous : public Error {
 public:
  StructureAmbiguous(const std::string& reason, std::vector<TripletId> inconclusive = {},
                     int missing_edges = 0)
      : Error("structure ambiguous: " + reason),
        reason_(reason),
        inconclusive_(std::move(inconclusive)),
        missing_edges_(missing_edges) {}

  const std::string& reason() const { return reason_; }
  const std::vector<TripletId>& inconclusive() const { return inconclusive_; }
  /// n-1 minus the number of accepted edges (0 when the edge count is right).
  int missing_edges() const { return missing_edges_; }

 private:
  std::string reason_;
  std::vector<TripletId> inconclusive_;
  int missing_edges_;
};

}  // namespace kinid
