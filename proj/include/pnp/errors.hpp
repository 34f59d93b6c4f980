#pragma once

#include <stdexcept>
#include <string>

namespace pnp {

// Tensor kernels reject incompatible operand shapes. The message always
// names both shapes involved.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Structural misuse of a computation graph: unknown parameter names,
// arity violations, out-of-range indices, seeding unevaluated nodes.
class GraphError : public std::runtime_error {
 public:
  explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};

// Exhaustive enumeration exceeded its execution guard limit.
class EnumerationLimitError : public std::runtime_error {
 public:
  explicit EnumerationLimitError(const std::string& what)
      : std::runtime_error(what) {}
};

// Malformed domain data: bad programs, inconsistent gold traces,
// unknown labels, unreadable or wrongly-versioned files.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pnp
