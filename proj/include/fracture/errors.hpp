#pragma once

#include <stdexcept>
#include <string>

namespace fracture {

/// Invalid numeric argument (radii, resolutions, negative constants, ...).
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A path or mesh that cannot be represented on the given triangulation.
class GeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Linear solver breakdown (singular system, failed factorization).
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A computed quantity contradicts an identity that must hold (e.g. a negative duality gap).
class ConsistencyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A stress field that is not statically admissible; carries the worst offending edge.
class AdmissibilityError : public std::runtime_error {
public:
  AdmissibilityError(const std::string& what, int edge_a, int edge_b, double traction)
      : std::runtime_error(what), edge_a_(edge_a), edge_b_(edge_b), traction_(traction) {}

  int edge_a() const noexcept { return edge_a_; }
  int edge_b() const noexcept { return edge_b_; }
  double traction() const noexcept { return traction_; }

private:
  int edge_a_;
  int edge_b_;
  double traction_;
};

/// Scenario file problems; the message names the offending key and line.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::string key, int line)
      : std::runtime_error(what), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

private:
  std::string key_;
  int line_;
};

/// Reading or writing run artifacts failed (missing exports, unwritable directory).
class ExportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace fracture
