#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "macchiato/consensus.hpp"
#include "macchiato/stack.hpp"

namespace macchiato {

// 0/0 conventions, documented in report headers: precision = 1 when
// TP = FP = 0 (no predictions, none wrong); recall = 1 when TP = FN = 0;
// F1 = 0 when precision + recall = 0.
struct PrfTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

PrfTriple prf_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn);

PrfTriple voxel_prf(const BinaryMask& gt, const BinaryMask& pred);

struct LesionPrfRow {
  std::int32_t component_id = 0;
  int rater = 0;
  PrfTriple prf;
};

struct LesionPrfReport {
  std::vector<LesionPrfRow> rows;  // one per (lesion, rater) pair
  PrfTriple mean;
};

// Per-lesion voxel PRF with the consensus as ground truth, restricted to
// each connected component of the union; mean taken over all rows.
LesionPrfReport lesionwise_prf(const BinaryMask& consensus,
                               const RaterStack& stack,
                               const ComponentLabels& labels);

// Component detection: TP = consensus components touched by the rater,
// FN = consensus components missed, FP = rater components disjoint from
// the consensus.
PrfTriple detection_prf(const BinaryMask& consensus, const BinaryMask& rater);

// Natural-log Shannon entropy summed over voxels, with 0·ln 0 := 0.
double shannon_entropy(const SoftMask& u);

struct SizeRow {
  std::string method;
  bool soft = false;
  double size = 0.0;                 // hard count or soft volume Σu
  double pct_vs_reference = 0.0;     // NaN when the reference size is 0
  std::int64_t thresholded_size = 0; // voxels with value strictly > 0.5
};

std::vector<SizeRow> size_report(const std::vector<FusionResult>& results,
                                 const FusionResult& reference);

}  // namespace macchiato
