#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "macchiato/baselines.hpp"
#include "macchiato/consensus.hpp"
#include "macchiato/oracle.hpp"
#include "macchiato/staple.hpp"

namespace macchiato {

// mv, ma, ml-staple, mml-staple, macchiato-{j,d,tj,sj,1sd,2sd}
std::vector<std::string> method_names();

struct MethodSpec {
  std::string method = "mv";
  MacchiatoConfig macchiato;  // macchiato-* only
  PriorSpec prior;            // mml-staple only
  StapleOptions staple;       // ml-/mml-staple

  bool is_macchiato() const { return method.rfind("macchiato-", 0) == 0; }
  bool is_staple() const {
    return method == "ml-staple" || method == "mml-staple";
  }
  bool soft_output() const;
};

// Resolves the method name and pins the matching distance kind.
MethodSpec method_spec_from_name(const std::string& name);

// "uninformative", "avg", or "power:A:alpha" with A > 0 and alpha >= 0.
PriorSpec prior_from_string(const std::string& text);

FusionResult run_method(const RaterStack& stack, const MethodSpec& spec);

struct BackgroundRow {
  std::int64_t margin = 0;
  double hard_size = 0.0;    // soft outputs: voxels strictly above 0.5
  double soft_volume = 0.0;  // binary outputs: equals hard_size
  double entropy = 0.0;
  double p_mean = 0.0, q_mean = 0.0;  // NaN for non-staple methods
};

// Re-runs the method per margin. STAPLE methods use virtual background
// voxels, so huge margins cost nothing; other methods pad for real.
std::vector<BackgroundRow> background_sweep(
    const RaterStack& stack, const MethodSpec& spec,
    const std::vector<std::int64_t>& margins);

// (A, alpha) with the prior written as w = A / N^alpha.
std::pair<double, int> power_equivalent(const PriorSpec& prior,
                                        const RaterStack& stack);

struct LimitRow {
  std::uint64_t pattern = 0;
  std::int64_t count = 0;  // occurrences, virtual background included
  int leading_sign = 0;
  double limit = 0.0;
  std::string classification;  // diverges_to_one | diverges_to_zero | finite
};

// Large-background asymptote of the posterior logit for every observed vote
// pattern, evaluated at the converged MML parameters.
std::vector<LimitRow> limit_classification(const RaterStack& stack,
                                           const PriorSpec& prior,
                                           const MmlResult& converged,
                                           std::int64_t extra_background);

struct BenchRow {
  std::string label;  // heuristic name or "oracle"
  std::vector<double> lmsd;  // per instance; NaN when over budget
  double mean_lmsd = 0.0;    // over finite entries
  double wall_ms = 0.0;
};

std::vector<BenchRow> bench_heuristics(const std::vector<RaterStack>& stacks,
                                       DistanceKind kind,
                                       const std::vector<Heuristic>& heuristics,
                                       const OracleBudget& budget = {});

}  // namespace macchiato
