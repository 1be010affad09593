#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "macchiato/distance_map.hpp"
#include "macchiato/distances.hpp"

namespace macchiato {

// Optimization granularity: subcrowns (distance + rater group), whole
// crowns (distance only), or single voxels.
enum class Heuristic { Subcrown, Crown, Voxel };

const char* to_string(Heuristic h);
Heuristic heuristic_from_string(const std::string& name);

struct MacchiatoConfig {
  DistanceKind distance = DistanceKind::Jaccard;
  Heuristic heuristic = Heuristic::Subcrown;
  double scalar_minimizer_tol = 1e-6;
  int max_sweeps = 100;
};

struct FusionResult {
  std::string method;
  bool soft = false;
  BinaryMask hard_mask;  // set when !soft
  SoftMask soft_mask;    // set when soft
  double lmsd = 0.0;     // achieved criterion, recomputed from the mask
  std::vector<double> p, q;  // rater performances (staple methods)
  // Objective value before and after each accepted move; every segment is
  // one uninterrupted greedy run and must be strictly decreasing.
  std::vector<std::vector<double>> lmsd_trace;
  // Soft runs: final value of each optimization chunk, in visit order.
  std::vector<double> chunk_values;
  std::vector<double> component_lmsd;  // chosen value per component
};

FusionResult hard_consensus(const RaterStack& stack,
                            const MacchiatoConfig& cfg);
FusionResult soft_consensus(const RaterStack& stack,
                            const MacchiatoConfig& cfg);

// --- pieces exposed for testing -----------------------------------------

struct ScalarMinResult {
  double x = 0.0;
  double value = 0.0;
};

// One optimization block: the set of voxels updated together, split into
// chunks of equal rater group. Subcrown and voxel blocks hold one chunk.
struct OptChunk {
  std::uint64_t group = 0;
  std::vector<std::int64_t> voxels;
  double value = 0.0;  // soft state; hard state uses membership instead
};

struct OptBlock {
  std::int32_t td = 0;
  std::uint64_t order_group = 0;  // secondary sort key
  std::int64_t order_voxel = 0;   // tertiary sort key (voxel heuristic)
  std::vector<OptChunk> chunks;

  std::int64_t size() const;
};

std::vector<OptBlock> build_blocks(const SubcrownPartition& partition,
                                   Heuristic heuristic);

// Soft objective of one connected component as a function of its chunk
// values, maintained through compact per-rater aggregates. Chunk values
// start at the mask-average |group| / K.
class SoftComponentState {
 public:
  SoftComponentState(int K, std::vector<OptBlock> blocks, DistanceKind kind);

  int block_count() const { return static_cast<int>(blocks_.size()); }
  const std::vector<OptBlock>& blocks() const { return blocks_; }

  // current component objective: (1/K) sum_k d(T, S^k)^2
  double value() const;
  // objective when every chunk of `block` is set to x
  double value_with(int block, double x) const;
  // scalar minimization over [0,1]: coarse scan, golden section, explicit
  // endpoints, and the incumbent value when the block is uniform
  ScalarMinResult minimize_block(int block, double tol) const;
  // returns true when res improves on the current value by more than 1e-12
  bool apply_if_better(int block, const ScalarMinResult& res);

  void write_to(SoftMask& out) const;

 private:
  void rebuild_aggregates();

  int k_ = 0;
  DistanceKind kind_;
  std::vector<OptBlock> blocks_;
  std::vector<double> n_;   // per-rater restricted sizes
  std::vector<double> ip_;  // per-rater sum x * S
  double t1_ = 0.0;         // sum x
  double t2_ = 0.0;         // sum x^2
};

// Strict-improvement threshold shared by all greedy accept decisions.
inline constexpr double kImprovementTol = 1e-12;

}  // namespace macchiato
