#pragma once

#include <cstdint>
#include <vector>

#include "macchiato/stack.hpp"

namespace macchiato {

inline constexpr double kProbClamp = 1e-8;

// Keeps probabilities usable inside logs and ratios.
double clamp_prob(double v);

struct RaterPerformance {
  std::vector<double> p;  // sensitivities
  std::vector<double> q;  // specificities
};

// Spatially uniform consensus prior w. POWER covers w = A / N^alpha;
// UNINFORMATIVE is w = 0.5 and AVG_OCCURRENCE the mean foreground ratio.
struct PriorSpec {
  enum class Mode { Uninformative, AvgOccurrence, Power };
  Mode mode = Mode::Uninformative;
  double A = 0.5;
  int alpha = 0;

  // N counts real plus virtual background voxels.
  double resolve(const RaterStack& stack, std::int64_t extra_background) const;
};

struct EmTrace {
  int iterations = 0;
  std::vector<double> param_delta;   // max |dp|, |dq| per iteration
  std::vector<double> log_marginal;  // soft EM only
  bool converged = false;
  int degenerate_warnings = 0;  // 0/0 performance updates, reset to 0.5
};

struct StapleOptions {
  double init_p = 0.99;
  double init_q = 0.99;
  int max_iter = 100;
  double tol = 1e-7;
  // Analysis mode: one shared accuracy gamma with p_k = q_k = gamma.
  bool equal_performance = false;
  // Virtual all-background voxels appended to the grid. Equivalent to
  // padding the stack, without materializing the padded grid.
  std::int64_t extra_background = 0;
};

// E-step posterior for one rater-vote pattern (bit k = rater k's vote).
double estep_posterior(std::uint64_t pattern, int K,
                       const RaterPerformance& perf, double w);
// Same posterior through its logit decomposition.
double posterior_logit(std::uint64_t pattern, int K,
                       const RaterPerformance& perf, double w);

// Raw performance update ratios against a fixed soft consensus (no
// clamping; 0/0 falls back to 0.5).
RaterPerformance mstep(const RaterStack& stack, const SoftMask& u);

struct MlResult {
  BinaryMask consensus;
  RaterPerformance perf;
  EmTrace trace;
  // Decision for the all-background pattern; covers virtual padding voxels.
  bool background_decision = false;
};
MlResult ml_staple(const RaterStack& stack, const StapleOptions& opts = {});

struct MmlResult {
  SoftMask consensus;
  RaterPerformance perf;
  EmTrace trace;
  // Posterior of the all-background pattern; covers virtual padding voxels.
  double background_posterior = 0.0;
};
MmlResult mml_staple(const RaterStack& stack, const PriorSpec& prior,
                     const StapleOptions& opts = {});

// Large-background asymptote of the posterior logit for one pattern, with
// the sign of the (sum_k S_k - alpha) * ln N leading term.
struct LimitLogit {
  double value = 0.0;
  int leading_sign = 0;  // -1, 0, +1
};
LimitLogit limit_logit(std::uint64_t pattern, int K, int alpha, double A,
                       const std::vector<double>& p,
                       const std::vector<double>& fp,
                       const std::vector<double>& b, double n);

}  // namespace macchiato
