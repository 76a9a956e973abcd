#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace flatflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid shape descriptor, degenerate or non-closed input geometry.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A field violates the per-component zero-mean condition of the H^-1 pairing.
class CompatibilityError : public Error {
 public:
  CompatibilityError(const std::string& what, int component, double mean)
      : Error(what), component_(component), mean_(mean) {}
  int component() const { return component_; }
  double mean() const { return mean_; }

 private:
  int component_;
  double mean_;
};

/// A height field leaves the region where the normal graph is well defined,
/// or the graph surface folds over.
class GraphError : public Error {
 public:
  GraphError(const std::string& what, std::vector<int> vertices = {})
      : Error(what), vertices_(std::move(vertices)) {}
  const std::vector<int>& vertices() const { return vertices_; }

 private:
  std::vector<int> vertices_;
};

/// Sparse factorization or solve failure.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Configuration parse or validation failure.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace flatflow
