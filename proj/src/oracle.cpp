#include "macchiato/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

namespace macchiato {

namespace {

std::vector<std::int64_t> subset_voxels(std::uint32_t bits,
                                        const std::vector<std::int64_t>& sup) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < sup.size(); ++i)
    if (bits >> i & 1u) out.push_back(sup[i]);
  return out;
}

}  // namespace

HardOracleResult exhaustive_hard(const RaterStack& stack, DistanceKind kind,
                                 const OracleBudget& budget) {
  if (!is_binary_kind(kind)) throw DomainError("need a binary distance kind");
  const ComponentLabels labels = connected_components(stack);
  const int K = stack.k();
  HardOracleResult res;
  res.mask = BinaryMask::zeros(stack.grid);
  for (std::int32_t id = 1; id <= labels.count; ++id) {
    const std::vector<std::int64_t> sup = labels.component_voxels(id);
    if (static_cast<int>(sup.size()) > budget.max_support)
      throw BudgetExceeded("component support exceeds max_support");
    // per-rater coverage of the support voxels, as bitmasks
    std::vector<std::uint32_t> cover(K, 0);
    std::vector<std::int64_t> n(K, 0);
    for (std::size_t i = 0; i < sup.size(); ++i)
      for (int k = 0; k < K; ++k)
        if (stack.raters[k].values[sup[i]]) {
          cover[k] |= 1u << i;
          ++n[k];
        }
    const std::uint32_t limit = 1u << sup.size();
    double best_value = 0.0;
    std::uint32_t best_bits = 0;
    for (std::uint32_t bits = 0; bits < limit; ++bits) {
      const std::int64_t m = std::popcount(bits);
      double acc = 0.0;
      for (int k = 0; k < K; ++k)
        acc += lmsd_term(kind, binary_distance_from_counts(
                                   kind, m, n[k], std::popcount(bits & cover[k])));
      acc /= K;
      if (bits == 0 || acc < best_value) {
        best_value = acc;
        best_bits = bits;
      } else if (acc == best_value) {
        const auto cand = subset_voxels(bits, sup);
        const auto cur = subset_voxels(best_bits, sup);
        if (std::lexicographical_compare(cand.begin(), cand.end(),
                                         cur.begin(), cur.end()))
          best_bits = bits;
      }
    }
    for (auto v : subset_voxels(best_bits, sup)) res.mask.values[v] = 1;
  }
  // Report through the shared evaluator so equal masks yield bitwise-equal
  // values when compared against other consensus paths.
  res.lmsd = lmsd(stack, res.mask, kind, labels);
  return res;
}

BinaryMask frechet_hamming(const RaterStack& stack) {
  const int K = stack.k();
  BinaryMask out = BinaryMask::zeros(stack.grid);
  for (std::int64_t i = 0; i < stack.voxel_count(); ++i) {
    int s = 0;
    for (int k = 0; k < K; ++k) s += stack.raters[k].values[i] ? 1 : 0;
    // foreground cost K - s vs background cost s; ties stay background
    out.values[i] = (K - s) < s ? 1 : 0;
  }
  return out;
}

SoftOracleResult dense_soft(const RaterStack& stack, DistanceKind kind,
                            double resolution, const OracleBudget& budget) {
  if (!is_surrogate_kind(kind))
    throw DomainError("need a surrogate distance kind");
  if (!(resolution > 0.0 && resolution <= 1.0))
    throw DomainError("resolution must lie in (0, 1]");
  const ComponentLabels labels = connected_components(stack);
  const int K = stack.k();
  const std::int64_t steps = std::llround(1.0 / resolution) + 1;

  SoftOracleResult res;
  res.mask = SoftMask::zeros(stack.grid);
  std::int64_t evals_used = 0;
  for (std::int32_t id = 1; id <= labels.count; ++id) {
    const std::vector<std::int64_t> sup = labels.component_voxels(id);
    const std::int64_t sweep_cost =
        steps * static_cast<std::int64_t>(sup.size());
    if (sweep_cost > budget.max_grid_points)
      throw BudgetExceeded("dense grid sweep exceeds max_grid_points");

    std::vector<double> x(sup.size());
    std::vector<std::vector<char>> in(K);
    std::vector<double> n(K, 0.0);
    for (int k = 0; k < K; ++k) {
      in[k].resize(sup.size());
      for (std::size_t i = 0; i < sup.size(); ++i) {
        in[k][i] = stack.raters[k].values[sup[i]] ? 1 : 0;
        n[k] += in[k][i];
      }
    }
    for (std::size_t i = 0; i < sup.size(); ++i) {
      int s = 0;
      for (int k = 0; k < K; ++k) s += in[k][i];
      x[i] = static_cast<double>(s) / K;
    }

    double t1 = 0.0, t2 = 0.0;
    std::vector<double> ip(K, 0.0);
    auto rebuild = [&] {
      t1 = t2 = 0.0;
      std::fill(ip.begin(), ip.end(), 0.0);
      for (std::size_t i = 0; i < sup.size(); ++i) {
        t1 += x[i];
        t2 += x[i] * x[i];
        for (int k = 0; k < K; ++k)
          if (in[k][i]) ip[k] += x[i];
      }
    };
    auto term = [&](double nk, double ipk, double s1, double s2) {
      double d;
      switch (kind) {
        case DistanceKind::Tanimoto: {
          const double diff2 = std::max(0.0, s2 - 2.0 * ipk + nk);
          const double den = diff2 + ipk;
          d = den == 0.0 ? 0.0 : diff2 / den;
          break;
        }
        case DistanceKind::Soergel: {
          const double den = nk + s1 - ipk;
          d = den == 0.0 ? 0.0 : std::max(0.0, nk + s1 - 2.0 * ipk) / den;
          break;
        }
        case DistanceKind::Psd1: {
          const double den = s1 + nk;
          d = den == 0.0 ? 0.0 : 1.0 - 2.0 * ipk / den;
          break;
        }
        case DistanceKind::Psd2: {
          const double den = s2 + nk;
          d = den == 0.0 ? 0.0 : 1.0 - 2.0 * ipk / den;
          break;
        }
        default:
          return std::max(0.0, s2 - 2.0 * ipk + nk);  // L2 squared
      }
      return d * d;
    };
    auto value = [&] {
      double acc = 0.0;
      for (int k = 0; k < K; ++k) acc += term(n[k], ip[k], t1, t2);
      return acc / K;
    };
    auto value_at = [&](std::size_t i, double cand) {
      const double d1 = cand - x[i];
      const double d2 = cand * cand - x[i] * x[i];
      double acc = 0.0;
      for (int k = 0; k < K; ++k)
        acc += term(n[k], ip[k] + (in[k][i] ? d1 : 0.0), t1 + d1, t2 + d2);
      return acc / K;
    };

    rebuild();
    double cur = value();
    bool out_of_budget = false;
    while (!out_of_budget) {
      const double sweep_start = cur;
      for (std::size_t i = 0; i < sup.size(); ++i) {
        if (evals_used + steps > budget.max_grid_points) {
          out_of_budget = true;
          break;
        }
        double best_f = cur, best_x = x[i];
        for (std::int64_t s = 0; s < steps; ++s) {
          const double cand = std::min(1.0, s * resolution);
          const double f = value_at(i, cand);
          if (f < best_f) {
            best_f = f;
            best_x = cand;
          }
        }
        evals_used += steps;
        if (best_x != x[i]) {
          x[i] = best_x;
          rebuild();
          cur = value();
        }
      }
      if (sweep_start - cur < 1e-10) break;
    }
    for (std::size_t i = 0; i < sup.size(); ++i) res.mask.values[sup[i]] = x[i];
  }
  res.lmsd = lmsd(stack, res.mask, kind, labels);
  return res;
}

}  // namespace macchiato
