#include "pnp/foodweb/features.hpp"

#include <algorithm>
#include <cmath>

#include "pnp/errors.hpp"

namespace pnp::foodweb {

namespace {

double distance(const TextDetection& a, const TextDetection& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

Tensor hand_features_organism(const DetectionGraph& d, const std::string& x) {
  const TextDetection& tx = d.text(x);
  // With no other text around, "nearest" defaults to the unit square's
  // diameter.
  double nearest = std::sqrt(2.0);
  for (const TextDetection& t : d.texts) {
    if (&t == &tx) continue;
    nearest = std::min(nearest, distance(tx, t));
  }
  return Tensor::vector({tx.organism_score, nearest, 1.0});
}

Tensor hand_features_eat(const DetectionGraph& d, const std::string& x,
                         const std::string& y) {
  const TextDetection& tx = d.text(x);
  const TextDetection& ty = d.text(y);
  double max_conf = -1.0;
  std::size_t count = 0;
  for (const ArrowDetection& a : d.arrows) {
    if (a.tail_label == x && a.head_label == y) {
      max_conf = std::max(max_conf, a.confidence);
      ++count;
    }
  }
  double capped = static_cast<double>(std::min<std::size_t>(count, 3)) / 3.0;
  return Tensor::vector({max_conf, capped, distance(tx, ty),
                         tx.organism_score, ty.organism_score, 1.0});
}

std::vector<Tensor> arrow_rows_eat(const DetectionGraph& d,
                                   const std::string& x,
                                   const std::string& y) {
  std::vector<Tensor> rows;
  for (const ArrowDetection& a : d.arrows) {
    if (a.tail_label != x || a.head_label != y) continue;
    if (a.geometry.size() != kGeometryDim) {
      throw DataError("arrow " + x + "->" + y + " has " +
                      std::to_string(a.geometry.size()) +
                      " geometry channels, expected " +
                      std::to_string(kGeometryDim));
    }
    std::vector<double> row;
    row.reserve(1 + kGeometryDim);
    row.push_back(a.confidence);
    row.insert(row.end(), a.geometry.begin(), a.geometry.end());
    rows.push_back(Tensor::vector(std::move(row)));
  }
  return rows;
}

Tensor maxpool_features_eat(const DetectionGraph& d, const std::string& x,
                            const std::string& y) {
  Tensor hand = hand_features_eat(d, x, y);
  std::vector<Tensor> rows = arrow_rows_eat(d, x, y);
  Tensor pooled = maxpool(rows, 1 + kGeometryDim);
  std::vector<Tensor> parts{std::move(hand), std::move(pooled)};
  return concat(parts);
}

}  // namespace pnp::foodweb
