#include "pnp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pnp/errors.hpp"
#include "pnp/random.hpp"

namespace pnp {

std::size_t shape_element_count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  std::size_t n = shape_element_count(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::scalar(double v) {
  return Tensor({}, std::vector<double>{v});
}

Tensor Tensor::from_values(std::vector<std::size_t> shape,
                           std::vector<double> values) {
  if (values.size() != shape_element_count(shape)) {
    throw ShapeError("tensor " + shape_to_string(shape) + " needs " +
                     std::to_string(shape_element_count(shape)) +
                     " values, got " + std::to_string(values.size()));
  }
  return Tensor(std::move(shape), std::move(values));
}

Tensor Tensor::vector(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::random_uniform(std::vector<std::size_t> shape, double scale,
                              std::uint64_t seed) {
  std::size_t n = shape_element_count(shape);
  std::vector<double> values(n);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = (2.0 * rng.uniform01() - 1.0) * scale;
  }
  return Tensor(std::move(shape), std::move(values));
}

double Tensor::at2(std::size_t row, std::size_t col) const {
  return values_[row * shape_[1] + col];
}

Tensor matvec(const Tensor& a, const Tensor& x) {
  if (a.rank() != 2 || x.rank() != 1 || a.shape()[1] != x.shape()[0]) {
    throw ShapeError("matvec: incompatible shapes " +
                     shape_to_string(a.shape()) + " and " +
                     shape_to_string(x.shape()));
  }
  std::size_t m = a.shape()[0];
  std::size_t n = a.shape()[1];
  Tensor out = Tensor::zeros({m});
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a.at2(i, j) * x[j];
    out[i] = acc;
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("add: incompatible shapes " + shape_to_string(a.shape()) +
                     " and " + shape_to_string(b.shape()));
  }
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor tanh(const Tensor& a) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  return out;
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat: empty part list");
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != 1) {
      throw ShapeError("concat: expected rank-1 part, got " +
                       shape_to_string(p.shape()));
    }
    total += p.size();
  }
  Tensor out = Tensor::zeros({total});
  std::size_t k = 0;
  for (const Tensor& p : parts) {
    for (std::size_t i = 0; i < p.size(); ++i) out[k++] = p[i];
  }
  return out;
}

Tensor maxpool(std::span<const Tensor> rows, std::size_t width) {
  Tensor out = Tensor::zeros({width});
  if (rows.empty()) {
    std::fill(out.mutable_values().begin(), out.mutable_values().end(),
              kMaxpoolEmptySentinel);
    return out;
  }
  for (const Tensor& r : rows) {
    if (r.rank() != 1 || r.size() != width) {
      throw ShapeError("maxpool: row shape " + shape_to_string(r.shape()) +
                       " does not match width [" + std::to_string(width) +
                       "]");
    }
  }
  for (std::size_t j = 0; j < width; ++j) {
    double best = rows[0][j];
    for (std::size_t i = 1; i < rows.size(); ++i) {
      best = std::max(best, rows[i][j]);
    }
    out[j] = best;
  }
  return out;
}

}  // namespace pnp
