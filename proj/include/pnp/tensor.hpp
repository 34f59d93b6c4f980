#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pnp {

// Dense n-dimensional array of doubles, row-major. A rank-0 tensor is a
// scalar holding exactly one value. Tensors are immutable in spirit: all
// operations return fresh values, so they can be shared freely.
class Tensor {
 public:
  Tensor() : shape_(), values_(1, 0.0) {}  // scalar zero

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor scalar(double v);
  static Tensor from_values(std::vector<std::size_t> shape,
                            std::vector<double> values);
  static Tensor vector(std::vector<double> values);

  // Entries i.i.d. uniform in [-scale, scale] from a fixed generator, so the
  // same (shape, scale, seed) triple always yields the same tensor on any
  // platform.
  static Tensor random_uniform(std::vector<std::size_t> shape, double scale,
                               std::uint64_t seed);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double at2(std::size_t row, std::size_t col) const;  // rank-2 access

  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool operator==(const Tensor& other) const = default;

 private:
  Tensor(std::vector<std::size_t> shape, std::vector<double> values)
      : shape_(std::move(shape)), values_(std::move(values)) {}

  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

std::string shape_to_string(const std::vector<std::size_t>& shape);

std::size_t shape_element_count(const std::vector<std::size_t>& shape);

// A [m,n] * [n] -> [m]. Throws ShapeError naming both shapes on mismatch.
Tensor matvec(const Tensor& a, const Tensor& x);

// Elementwise; operands must have identical shapes.
Tensor add(const Tensor& a, const Tensor& b);

Tensor tanh(const Tensor& a);

// Concatenation of rank-1 tensors, in order. The list must be nonempty.
Tensor concat(std::span<const Tensor> parts);

// Columnwise maximum over rank-1 rows of equal length `width`. An empty row
// list yields the sentinel vector of -1 entries; detection scores live in
// [0, 1], so -1 is out of band and "no rows" stays a legal model input.
Tensor maxpool(std::span<const Tensor> rows, std::size_t width);

inline constexpr double kMaxpoolEmptySentinel = -1.0;

}  // namespace pnp
