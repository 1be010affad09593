#pragma once

#include <cstdint>
#include <vector>

#include "macchiato/stack.hpp"

namespace macchiato {

// Step-count distances under the grid neighborhood (chessboard for N8/N26,
// city-block for N4/N6). kUnset marks voxels the map was not asked about.
struct DistanceField {
  static constexpr std::int32_t kUnset = -1;
  Grid grid;
  std::vector<std::int32_t> values;

  std::int32_t at(std::int64_t i) const { return values[i]; }
};

// Multi-source BFS from `source`, reported on `domain` (plus 0 on every
// source voxel). Paths may traverse any grid voxel.
DistanceField distance_map(const BinaryMask& source,
                           const std::vector<std::int64_t>& domain);

// D = sum of per-rater distance maps on E_S, computed per connected
// component of the union. On each component, only raters with a non-empty
// restriction contribute, and their map is taken to that restriction.
DistanceField global_distance_map(const RaterStack& stack);
DistanceField global_distance_map(const RaterStack& stack,
                                  const ComponentLabels& labels);

struct SubcrownEntry {
  std::int32_t td = 0;        // shared global morphological distance
  std::uint64_t group = 0;    // bit k set when rater k segmented these voxels
  std::vector<std::int64_t> voxels;  // scan order
};

struct SubcrownPartition {
  std::int32_t component_id = 0;
  std::vector<SubcrownEntry> entries;  // ascending (td, group)
};

SubcrownPartition subcrown_partition(const RaterStack& stack,
                                     const DistanceField& D,
                                     const ComponentLabels& labels,
                                     std::int32_t component_id);

}  // namespace macchiato
