#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "macchiato/grid.hpp"

namespace macchiato {

// A set of K rater masks on a shared grid. K is capped at 64 so a voxel's
// rater pattern fits in one word.
struct RaterStack {
  Grid grid;
  std::vector<BinaryMask> raters;

  RaterStack() = default;
  explicit RaterStack(std::vector<BinaryMask> masks);

  int k() const { return static_cast<int>(raters.size()); }
  std::int64_t voxel_count() const { return grid.voxel_count(); }

  // Number of raters marking each voxel foreground.
  std::vector<int> s_plus() const;
  // Bit k set when rater k marks the voxel foreground.
  std::vector<std::uint64_t> patterns() const;
  // Union of all raters (the support E_S).
  BinaryMask support_union() const;
  // Voxels where all raters agree on foreground.
  BinaryMask support_intersection() const;

  void validate() const;
};

// Histogram of voxel patterns; the workhorse representation for EM.
std::map<std::uint64_t, std::int64_t> pattern_counts(const RaterStack& stack);

RaterStack pad_background(const RaterStack& stack,
                          const std::vector<AxisMargin>& margins);

// Component ids are 1..count; 0 marks voxels outside the union support.
struct ComponentLabels {
  std::vector<std::int32_t> labels;
  std::int32_t count = 0;

  // voxels of component id (1-based), in scan order
  std::vector<std::int64_t> component_voxels(std::int32_t id) const;
};

// Deterministic labelling: components numbered by first voxel in scan order.
ComponentLabels connected_components(const BinaryMask& mask);
ComponentLabels connected_components(const RaterStack& stack);

}  // namespace macchiato
