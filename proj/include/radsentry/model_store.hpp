#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "radsentry/gbdt.hpp"

namespace radsentry {

// Compact binary model blob for low-footprint inference.
//
// Layout, all little-endian:
//   magic "RDS1" (4 bytes)
//   u16  version (= 1)
//   f32  base_score
//   u16  n_features_retained
//   n_features_retained x u16 original column indices
//   u16  n_trees
//   per tree:
//     u32 n_nodes
//     n_nodes x { u16 feature_index   (0xFFFF marks a leaf)
//                 f32 threshold_or_leaf_value
//                 i32 left, i32 right (-1 on leaves) }
//   node records are in pre-order; child indices point into the same array.
//
// Decoding then re-encoding a blob is byte-identical, and a loaded model
// predicts bit-identically to the source model.
std::vector<std::uint8_t> export_compact(const GradientBoostedEnsemble& model);

GradientBoostedEnsemble load_compact(const std::vector<std::uint8_t>& blob);

void save_model(const std::string& path, const GradientBoostedEnsemble& model);
GradientBoostedEnsemble load_model(const std::string& path);

}  // namespace radsentry
