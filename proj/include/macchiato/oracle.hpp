#pragma once

#include <cstdint>

#include "macchiato/distances.hpp"
#include "macchiato/errors.hpp"
#include "macchiato/stack.hpp"

namespace macchiato {

struct OracleBudget {
  int max_support = 20;
  std::int64_t max_grid_points = std::int64_t{1} << 20;
};

struct HardOracleResult {
  BinaryMask mask;
  double lmsd = 0.0;
};

struct SoftOracleResult {
  SoftMask mask;
  double lmsd = 0.0;
};

// True per-component LMSD minimizer over all support subsets.
// Ties resolve to the lexicographically smallest sorted voxel list.
HardOracleResult exhaustive_hard(const RaterStack& stack, DistanceKind kind,
                                 const OracleBudget& budget = {});

// Per-voxel minimizer of the summed squared Hamming distance.
BinaryMask frechet_hamming(const RaterStack& stack);

// Cyclic per-voxel coordinate descent with a fixed-resolution grid search.
// A strong reference, not a certified global optimum.
SoftOracleResult dense_soft(const RaterStack& stack, DistanceKind kind,
                            double resolution = 1e-3,
                            const OracleBudget& budget = {});

}  // namespace macchiato
