#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "macchiato/errors.hpp"

namespace macchiato {

// Connectivity used for distance maps and connected components.
// N4/N8 are the 2D neighborhoods (on 1D grids both degenerate to the two
// +-1 line neighbors), N6/N26 the 3D ones. Slicewise2D treats a 3D volume
// as independent 2D slices along axis 0: N8 within a slice, no edges
// between slices.
enum class Neighborhood { N4, N8, N6, N26, Slicewise2D };

const char* to_string(Neighborhood n);
Neighborhood neighborhood_from_string(const std::string& name);

using Coords = std::array<std::int64_t, 3>;

struct Grid {
  std::vector<std::int64_t> dims;  // 1 to 3 axes, row-major storage
  Neighborhood neighborhood = Neighborhood::N8;

  Grid() = default;
  Grid(std::vector<std::int64_t> d, Neighborhood n);

  int ndim() const { return static_cast<int>(dims.size()); }
  std::int64_t voxel_count() const;

  // Unused trailing coordinates are zero.
  Coords coords(std::int64_t flat) const;
  std::int64_t flat(const Coords& c) const;
  bool contains(const Coords& c) const;

  // Coordinate deltas of the neighborhood, in a fixed scan order.
  const std::vector<Coords>& neighbor_offsets() const;

  void validate() const;

  bool operator==(const Grid& other) const {
    return dims == other.dims && neighborhood == other.neighborhood;
  }
};

struct BinaryMask {
  Grid grid;
  std::vector<std::uint8_t> values;  // row-major, each 0 or 1

  BinaryMask() = default;
  BinaryMask(Grid g, std::vector<std::uint8_t> v);
  static BinaryMask zeros(const Grid& g);
  static BinaryMask from_indices(const Grid& g,
                                 const std::vector<std::int64_t>& foreground);

  std::int64_t foreground_count() const;
  std::vector<std::int64_t> foreground_indices() const;
  void validate() const;

  bool operator==(const BinaryMask& other) const {
    return grid == other.grid && values == other.values;
  }
};

struct SoftMask {
  Grid grid;
  std::vector<double> values;  // row-major, each in [0, 1]

  SoftMask() = default;
  SoftMask(Grid g, std::vector<double> v);
  static SoftMask zeros(const Grid& g);

  double volume() const;  // sum of values
  BinaryMask threshold(double level = 0.5) const;  // strictly greater
  void validate() const;

  bool operator==(const SoftMask& other) const {
    return grid == other.grid && values == other.values;
  }
};

// Margins prepended/appended along one axis.
struct AxisMargin {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

std::vector<AxisMargin> uniform_margin(int ndim, std::int64_t m);

BinaryMask pad_background(const BinaryMask& mask,
                          const std::vector<AxisMargin>& margins);
SoftMask pad_background(const SoftMask& mask,
                        const std::vector<AxisMargin>& margins);
// Inverse of pad_background with the same margins; cropped-away voxels
// must be background.
BinaryMask crop_background(const BinaryMask& mask,
                           const std::vector<AxisMargin>& margins);
SoftMask crop_background(const SoftMask& mask,
                         const std::vector<AxisMargin>& margins);

}  // namespace macchiato
