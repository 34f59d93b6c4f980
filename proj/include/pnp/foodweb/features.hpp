#pragma once

#include <string>
#include <vector>

#include "pnp/foodweb/web.hpp"
#include "pnp/tensor.hpp"

namespace pnp::foodweb {

inline constexpr std::size_t kOrganismFeatureDim = 3;
inline constexpr std::size_t kEatFeatureDim = 6;
// One pooled [confidence ++ geometry] block appended to the hand features.
inline constexpr std::size_t kMaxpoolEatFeatureDim =
    kEatFeatureDim + 1 + kGeometryDim;

// [organism_score(x), distance to nearest other text, 1]
Tensor hand_features_organism(const DetectionGraph& d, const std::string& x);

// [max confidence of arrows tail=x head=y (-1 if none),
//  arrow count capped at 3 and scaled by 1/3,
//  distance(x, y), organism_score(x), organism_score(y), 1]
// Geometry channels are deliberately left out; only the maxpool variant
// sees them.
Tensor hand_features_eat(const DetectionGraph& d, const std::string& x,
                         const std::string& y);

// Per-arrow [confidence ++ geometry] vectors for arrows tail=x head=y, the
// rows the maxpool model pools over.
std::vector<Tensor> arrow_rows_eat(const DetectionGraph& d,
                                   const std::string& x,
                                   const std::string& y);

// hand_features_eat ++ maxpool(arrow_rows_eat), empty pool -> -1 sentinel.
Tensor maxpool_features_eat(const DetectionGraph& d, const std::string& x,
                            const std::string& y);

}  // namespace pnp::foodweb
