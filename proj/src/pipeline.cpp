#include "macchiato/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "macchiato/errors.hpp"
#include "macchiato/metrics.hpp"

namespace macchiato {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr std::int64_t kMaxMaterializedVoxels = 100'000'000;

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNan;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::int64_t padded_voxel_count(const Grid& g, std::int64_t margin) {
  std::int64_t n = 1;
  for (auto d : g.dims) n *= d + 2 * margin;
  return n;
}

double entropy_term(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return -u * std::log(u) - (1.0 - u) * std::log(1.0 - u);
}

}  // namespace

std::vector<std::string> method_names() {
  return {"mv",           "ma",           "ml-staple",    "mml-staple",
          "macchiato-j",  "macchiato-d",  "macchiato-tj", "macchiato-sj",
          "macchiato-1sd", "macchiato-2sd"};
}

bool MethodSpec::soft_output() const {
  return method == "ma" || method == "mml-staple" || method == "macchiato-tj" ||
         method == "macchiato-sj" || method == "macchiato-1sd" ||
         method == "macchiato-2sd";
}

MethodSpec method_spec_from_name(const std::string& name) {
  MethodSpec spec;
  spec.method = name;
  if (name == "macchiato-j")
    spec.macchiato.distance = DistanceKind::Jaccard;
  else if (name == "macchiato-d")
    spec.macchiato.distance = DistanceKind::Dice;
  else if (name == "macchiato-tj")
    spec.macchiato.distance = DistanceKind::Tanimoto;
  else if (name == "macchiato-sj")
    spec.macchiato.distance = DistanceKind::Soergel;
  else if (name == "macchiato-1sd")
    spec.macchiato.distance = DistanceKind::Psd1;
  else if (name == "macchiato-2sd")
    spec.macchiato.distance = DistanceKind::Psd2;
  else if (name != "mv" && name != "ma" && name != "ml-staple" &&
           name != "mml-staple")
    throw DomainError("unknown method: " + name);
  return spec;
}

PriorSpec prior_from_string(const std::string& text) {
  PriorSpec prior;
  if (text == "uninformative") return prior;
  if (text == "avg") {
    prior.mode = PriorSpec::Mode::AvgOccurrence;
    return prior;
  }
  if (text.rfind("power:", 0) == 0) {
    const std::string rest = text.substr(6);
    const std::size_t colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        prior.mode = PriorSpec::Mode::Power;
        prior.A = std::stod(rest.substr(0, colon));
        prior.alpha = std::stoi(rest.substr(colon + 1));
      } catch (const std::exception&) {
        throw DomainError("cannot parse prior '" + text + "'");
      }
      if (prior.A > 0.0 && prior.alpha >= 0) return prior;
    }
  }
  throw DomainError("unknown prior '" + text +
                    "' (want uninformative, avg, or power:A:alpha)");
}

FusionResult run_method(const RaterStack& stack, const MethodSpec& spec) {
  if (spec.method == "mv") {
    FusionResult out;
    out.method = "mv";
    out.hard_mask = majority_vote(stack);
    return out;
  }
  if (spec.method == "ma") {
    FusionResult out;
    out.method = "ma";
    out.soft = true;
    out.soft_mask = mask_average(stack);
    return out;
  }
  if (spec.method == "ml-staple") {
    const MlResult r = ml_staple(stack, spec.staple);
    FusionResult out;
    out.method = spec.method;
    out.hard_mask = r.consensus;
    out.p = r.perf.p;
    out.q = r.perf.q;
    return out;
  }
  if (spec.method == "mml-staple") {
    const MmlResult r = mml_staple(stack, spec.prior, spec.staple);
    FusionResult out;
    out.method = spec.method;
    out.soft = true;
    out.soft_mask = r.consensus;
    out.p = r.perf.p;
    out.q = r.perf.q;
    return out;
  }
  if (spec.is_macchiato()) {
    if (is_binary_kind(spec.macchiato.distance))
      return hard_consensus(stack, spec.macchiato);
    return soft_consensus(stack, spec.macchiato);
  }
  throw DomainError("unknown method: " + spec.method);
}

std::vector<BackgroundRow> background_sweep(
    const RaterStack& stack, const MethodSpec& spec,
    const std::vector<std::int64_t>& margins) {
  for (std::size_t i = 0; i + 1 < margins.size(); ++i)
    if (margins[i + 1] < margins[i])
      throw DomainError("margins must be ascending");
  for (auto m : margins)
    if (m < 0) throw DomainError("margins must be non-negative");

  std::vector<BackgroundRow> rows;
  for (auto margin : margins) {
    BackgroundRow row;
    row.margin = margin;
    row.p_mean = kNan;
    row.q_mean = kNan;
    const std::int64_t extra =
        padded_voxel_count(stack.grid, margin) - stack.grid.voxel_count();
    if (spec.method == "ml-staple") {
      StapleOptions opts = spec.staple;
      opts.extra_background = extra;
      const MlResult r = ml_staple(stack, opts);
      double size =
          static_cast<double>(r.consensus.foreground_count());
      if (r.background_decision) size += static_cast<double>(extra);
      row.hard_size = size;
      row.soft_volume = size;
      row.entropy = 0.0;
      row.p_mean = mean_of(r.perf.p);
      row.q_mean = mean_of(r.perf.q);
    } else if (spec.method == "mml-staple") {
      StapleOptions opts = spec.staple;
      opts.extra_background = extra;
      const MmlResult r = mml_staple(stack, spec.prior, opts);
      std::int64_t above = 0;
      for (double u : r.consensus.values)
        if (u > 0.5) ++above;
      row.hard_size = static_cast<double>(above) +
                      (r.background_posterior > 0.5
                           ? static_cast<double>(extra)
                           : 0.0);
      row.soft_volume = r.consensus.volume() +
                        r.background_posterior * static_cast<double>(extra);
      row.entropy = shannon_entropy(r.consensus) +
                    static_cast<double>(extra) *
                        entropy_term(r.background_posterior);
      row.p_mean = mean_of(r.perf.p);
      row.q_mean = mean_of(r.perf.q);
    } else {
      if (padded_voxel_count(stack.grid, margin) > kMaxMaterializedVoxels)
        throw BudgetExceeded("margin too large to materialize");
      const RaterStack padded =
          margin == 0 ? stack
                      : pad_background(
                            stack, uniform_margin(stack.grid.ndim(), margin));
      const FusionResult r = run_method(padded, spec);
      if (r.soft) {
        std::int64_t above = 0;
        for (double u : r.soft_mask.values)
          if (u > 0.5) ++above;
        row.hard_size = static_cast<double>(above);
        row.soft_volume = r.soft_mask.volume();
        row.entropy = shannon_entropy(r.soft_mask);
      } else {
        row.hard_size = static_cast<double>(r.hard_mask.foreground_count());
        row.soft_volume = row.hard_size;
        row.entropy = 0.0;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::pair<double, int> power_equivalent(const PriorSpec& prior,
                                        const RaterStack& stack) {
  switch (prior.mode) {
    case PriorSpec::Mode::Uninformative:
      return {0.5, 0};
    case PriorSpec::Mode::AvgOccurrence: {
      // w = sum S / (N K) = (sum S / K) / N^1
      double s = 0.0;
      for (const auto& r : stack.raters)
        s += static_cast<double>(r.foreground_count());
      return {s / stack.k(), 1};
    }
    case PriorSpec::Mode::Power:
      return {prior.A, prior.alpha};
  }
  throw DomainError("unknown prior mode");
}

std::vector<LimitRow> limit_classification(const RaterStack& stack,
                                           const PriorSpec& prior,
                                           const MmlResult& converged,
                                           std::int64_t extra_background) {
  const int K = stack.k();
  const auto [A, alpha] = power_equivalent(prior, stack);
  const double n = static_cast<double>(stack.grid.voxel_count()) +
                   static_cast<double>(extra_background);
  const double consensus_size =
      converged.consensus.volume() +
      converged.background_posterior * static_cast<double>(extra_background);
  // false-positive mass recovered from the converged specificities, so the
  // asymptote matches the (clamped) parameters the posterior actually uses
  std::vector<double> fp(K, 0.0);
  for (int k = 0; k < K; ++k)
    fp[k] = (1.0 - converged.perf.q[k]) * (n - consensus_size);
  const std::vector<double> b(K, consensus_size);

  std::map<std::uint64_t, std::int64_t> counts = pattern_counts(stack);
  counts[0] += extra_background;
  std::vector<LimitRow> rows;
  for (const auto& [pattern, count] : counts) {
    const LimitLogit ll =
        limit_logit(pattern, K, alpha, A, converged.perf.p, fp, b, n);
    LimitRow row;
    row.pattern = pattern;
    row.count = count;
    row.leading_sign = ll.leading_sign;
    row.limit = ll.value;
    row.classification = ll.leading_sign > 0   ? "diverges_to_one"
                         : ll.leading_sign < 0 ? "diverges_to_zero"
                                               : "finite";
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<BenchRow> bench_heuristics(const std::vector<RaterStack>& stacks,
                                       DistanceKind kind,
                                       const std::vector<Heuristic>& heuristics,
                                       const OracleBudget& budget) {
  if (!is_binary_kind(kind))
    throw DomainError("heuristic benchmarks need the Jaccard or Dice distance");
  std::vector<BenchRow> rows;
  for (Heuristic h : heuristics) {
    BenchRow row;
    row.label = to_string(h);
    const auto start = std::chrono::steady_clock::now();
    for (const auto& stack : stacks) {
      MacchiatoConfig cfg;
      cfg.distance = kind;
      cfg.heuristic = h;
      row.lmsd.push_back(hard_consensus(stack, cfg).lmsd);
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    row.mean_lmsd = mean_of(row.lmsd);
    rows.push_back(std::move(row));
  }

  BenchRow oracle_row;
  oracle_row.label = "oracle";
  bool any = false;
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> finite;
  for (const auto& stack : stacks) {
    try {
      const HardOracleResult r = exhaustive_hard(stack, kind, budget);
      oracle_row.lmsd.push_back(r.lmsd);
      finite.push_back(r.lmsd);
      any = true;
    } catch (const BudgetExceeded&) {
      oracle_row.lmsd.push_back(kNan);
    }
  }
  oracle_row.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  if (any) {
    oracle_row.mean_lmsd = mean_of(finite);
    rows.push_back(std::move(oracle_row));
  }
  return rows;
}

}  // namespace macchiato
