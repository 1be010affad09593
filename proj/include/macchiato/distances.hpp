#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "macchiato/stack.hpp"

namespace macchiato {

enum class DistanceKind {
  // binary set distances
  Hamming,
  Jaccard,
  Dice,
  // soft surrogates
  Tanimoto,  // of Jaccard
  Soergel,   // of Jaccard
  Psd1,      // of Dice
  Psd2,      // of Dice
  L2,        // of Hamming
};

const char* to_string(DistanceKind k);
DistanceKind distance_kind_from_string(const std::string& name);
bool is_binary_kind(DistanceKind k);
bool is_surrogate_kind(DistanceKind k);
DistanceKind binary_counterpart(DistanceKind surrogate);

// Distance between two sets given their sizes and intersection size. This
// one kernel backs binary_distance, lmsd, the greedy optimizer, and the
// exhaustive oracle, so all of them agree to the last bit.
// Conventions: d(EMPTY, EMPTY) = 0 for all kinds; Jaccard/Dice distance to
// the null set is 1; Hamming is the plain symmetric-difference count.
inline double binary_distance_from_counts(DistanceKind kind, std::int64_t na,
                                          std::int64_t nb, std::int64_t inter) {
  switch (kind) {
    case DistanceKind::Hamming:
      return static_cast<double>(na + nb - 2 * inter);
    case DistanceKind::Jaccard: {
      const std::int64_t uni = na + nb - inter;
      if (uni == 0) return 0.0;
      return static_cast<double>(na + nb - 2 * inter) /
             static_cast<double>(uni);
    }
    case DistanceKind::Dice: {
      if (na + nb == 0) return 0.0;
      return 1.0 - 2.0 * static_cast<double>(inter) /
                       static_cast<double>(na + nb);
    }
    default:
      throw DomainError("not a binary distance kind");
  }
}

// The term a distance contributes to a squared-distance criterion. Hamming
// enters as-is: it is the squared form already, since the underlying
// distance is sqrt(|A delta B|).
inline double lmsd_term(DistanceKind kind, double d) {
  if (kind == DistanceKind::Hamming) return d;
  return d * d;
}

double binary_distance(DistanceKind kind, const std::vector<std::int64_t>& a,
                       const std::vector<std::int64_t>& b);
double binary_distance(DistanceKind kind, const BinaryMask& a,
                       const BinaryMask& b);

// Soft surrogate distances on equal-length value vectors in [0,1].
// Zero-denominator cases (both inputs all-zero) return 0.
double soft_distance(DistanceKind kind, const std::vector<double>& x,
                     const std::vector<double>& y);

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};
// A is the prediction, B the reference.
ConfusionCounts confusion(const BinaryMask& a, const BinaryMask& b);

struct SoftConfusionCounts {
  double stp = 0, sfp = 0, sfn = 0, stn = 0;
};
// Soft counts of rater S against consensus probability u, as used by the
// performance updates: stp = sum_{S=1} u, sfp = sum_{S=1} (1-u),
// sfn = sum_{S=0} u, stn = sum_{S=0} (1-u).
SoftConfusionCounts soft_confusion(const SoftMask& u, const BinaryMask& s);

// Local Mean Squared Distance: per connected component of the union, the
// mean over raters of the squared distance between restrictions, summed
// over components.
double lmsd(const RaterStack& stack, const BinaryMask& candidate,
            DistanceKind kind, const ComponentLabels& labels);
double lmsd(const RaterStack& stack, const SoftMask& candidate,
            DistanceKind kind, const ComponentLabels& labels);

}  // namespace macchiato
