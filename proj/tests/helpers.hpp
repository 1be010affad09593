#pragma once

// Slow, independent reference implementations used to cross-check the
// library. Everything here works straight from the definitions with its
// own coordinate arithmetic, neighbor generation, flood fill and BFS, so
// agreement with the optimized paths is meaningful evidence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "macchiato/distances.hpp"
#include "macchiato/grid.hpp"
#include "macchiato/stack.hpp"

namespace testref {

using macchiato::BinaryMask;
using macchiato::DistanceKind;
using macchiato::Grid;
using macchiato::Neighborhood;
using macchiato::RaterStack;
using macchiato::SoftMask;

// ---------------------------------------------------------------- coords

inline std::vector<std::int64_t> unflatten(
    const std::vector<std::int64_t>& dims, std::int64_t flat) {
  std::vector<std::int64_t> c(dims.size());
  for (int a = static_cast<int>(dims.size()) - 1; a >= 0; --a) {
    c[a] = flat % dims[a];
    flat /= dims[a];
  }
  return c;
}

inline std::int64_t flatten(const std::vector<std::int64_t>& dims,
                            const std::vector<std::int64_t>& c) {
  std::int64_t f = 0;
  for (std::size_t a = 0; a < dims.size(); ++a) f = f * dims[a] + c[a];
  return f;
}

// All neighbor coordinate deltas of the connectivity, derived by direct
// enumeration of {-1,0,1}^ndim.
inline std::vector<std::vector<std::int64_t>> offsets(const Grid& g) {
  const int nd = g.ndim();
  std::vector<std::vector<std::int64_t>> out;
  if (g.neighborhood == Neighborhood::Slicewise2D) {
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        if (a != 0 || b != 0)
          out.push_back({0, static_cast<std::int64_t>(a),
                         static_cast<std::int64_t>(b)});
    return out;
  }
  const bool chebyshev = g.neighborhood == Neighborhood::N8 ||
                         g.neighborhood == Neighborhood::N26;
  std::vector<std::int64_t> delta(nd, 0);
  std::function<void(int)> rec = [&](int a) {
    if (a == nd) {
      int nonzero = 0, absum = 0;
      for (auto d : delta) {
        if (d != 0) ++nonzero;
        absum += static_cast<int>(std::llabs(d));
      }
      if (nonzero == 0) return;
      if (!chebyshev && absum != 1) return;
      out.push_back(delta);
      return;
    }
    for (int v = -1; v <= 1; ++v) {
      delta[a] = v;
      rec(a + 1);
    }
    delta[a] = 0;
  };
  rec(0);
  return out;
}

inline std::vector<std::int64_t> neighbors(const Grid& g, std::int64_t i) {
  const auto c = unflatten(g.dims, i);
  std::vector<std::int64_t> out;
  for (const auto& d : offsets(g)) {
    std::vector<std::int64_t> n(c);
    bool ok = true;
    for (std::size_t a = 0; a < n.size(); ++a) {
      n[a] += d[a];
      if (n[a] < 0 || n[a] >= g.dims[a]) ok = false;
    }
    if (ok) out.push_back(flatten(g.dims, n));
  }
  return out;
}

// ------------------------------------------------------------ components

// Flood-fill labels, numbered 1.. in order of first scan-order voxel.
inline std::vector<std::int32_t> flood_components(const BinaryMask& mask,
                                                  std::int32_t* count_out) {
  std::vector<std::int32_t> labels(mask.values.size(), 0);
  std::int32_t count = 0;
  for (std::int64_t seed = 0;
       seed < static_cast<std::int64_t>(mask.values.size()); ++seed) {
    if (!mask.values[seed] || labels[seed] != 0) continue;
    ++count;
    std::deque<std::int64_t> frontier{seed};
    labels[seed] = count;
    while (!frontier.empty()) {
      const std::int64_t v = frontier.front();
      frontier.pop_front();
      for (std::int64_t n : neighbors(mask.grid, v))
        if (mask.values[n] && labels[n] == 0) {
          labels[n] = count;
          frontier.push_back(n);
        }
    }
  }
  if (count_out) *count_out = count;
  return labels;
}

// Plain multi-source BFS; -1 where never reached. Paths may cross any voxel.
inline std::vector<std::int64_t> bfs_distance(
    const Grid& g, const std::vector<std::int64_t>& sources) {
  std::vector<std::int64_t> dist(g.voxel_count(), -1);
  std::deque<std::int64_t> frontier;
  for (auto s : sources) {
    dist[s] = 0;
    frontier.push_back(s);
  }
  while (!frontier.empty()) {
    const std::int64_t v = frontier.front();
    frontier.pop_front();
    for (std::int64_t n : neighbors(g, v))
      if (dist[n] < 0) {
        dist[n] = dist[v] + 1;
        frontier.push_back(n);
      }
  }
  return dist;
}

// ------------------------------------------------------------- distances

// Distances written from the set formulas, not from shared counts.
inline double set_distance(DistanceKind kind, const std::set<std::int64_t>& a,
                           const std::set<std::int64_t>& b) {
  std::vector<std::int64_t> inter, uni, sym;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(inter));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(uni));
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::back_inserter(sym));
  switch (kind) {
    case DistanceKind::Hamming:
      return static_cast<double>(sym.size());
    case DistanceKind::Jaccard:
      if (uni.empty()) return 0.0;
      return static_cast<double>(sym.size()) / static_cast<double>(uni.size());
    case DistanceKind::Dice:
      if (a.empty() && b.empty()) return 0.0;
      return 1.0 - 2.0 * static_cast<double>(inter.size()) /
                       static_cast<double>(a.size() + b.size());
    default:
      throw std::runtime_error("set_distance wants a binary kind");
  }
}

// Soft surrogate distances via direct element loops. y may be any vector
// in [0,1]; on 0/1 inputs these reduce to the binary set distances.
inline double surrogate_distance(DistanceKind kind,
                                 const std::vector<double>& x,
                                 const std::vector<double>& y) {
  double diff2 = 0, absdiff = 0, ip = 0, sx = 0, sy = 0, sx2 = 0, sy2 = 0,
         smax = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    diff2 += (x[i] - y[i]) * (x[i] - y[i]);
    absdiff += std::fabs(x[i] - y[i]);
    ip += x[i] * y[i];
    sx += x[i];
    sy += y[i];
    sx2 += x[i] * x[i];
    sy2 += y[i] * y[i];
    smax += std::max(x[i], y[i]);
  }
  switch (kind) {
    case DistanceKind::Tanimoto:
      return diff2 + ip == 0 ? 0.0 : diff2 / (diff2 + ip);
    case DistanceKind::Soergel:
      return smax == 0 ? 0.0 : absdiff / smax;
    case DistanceKind::Psd1:
      return sx + sy == 0 ? 0.0 : 1.0 - 2.0 * ip / (sx + sy);
    case DistanceKind::Psd2:
      return sx2 + sy2 == 0 ? 0.0 : 1.0 - 2.0 * ip / (sx2 + sy2);
    case DistanceKind::L2:
      return std::sqrt(diff2);
    default:
      throw std::runtime_error("surrogate_distance wants a soft kind");
  }
}

// The term one rater contributes on one component: squared distance for
// every kind except Hamming, whose distance is already the squared form.
inline double criterion_term(DistanceKind kind, double d) {
  return kind == DistanceKind::Hamming ? d : d * d;
}

// --------------------------------------------------------------- LMSD

inline double lmsd_binary(const RaterStack& stack, const BinaryMask& cand,
                          DistanceKind kind) {
  BinaryMask uni = stack.support_union();
  std::int32_t count = 0;
  const auto labels = flood_components(uni, &count);
  double total = 0.0;
  for (std::int32_t id = 1; id <= count; ++id) {
    std::vector<std::int64_t> comp;
    for (std::int64_t v = 0; v < static_cast<std::int64_t>(labels.size()); ++v)
      if (labels[v] == id) comp.push_back(v);
    std::set<std::int64_t> c;
    for (auto v : comp)
      if (cand.values[v]) c.insert(v);
    double acc = 0.0;
    for (const auto& rater : stack.raters) {
      std::set<std::int64_t> s;
      for (auto v : comp)
        if (rater.values[v]) s.insert(v);
      acc += criterion_term(kind, set_distance(kind, s, c));
    }
    total += acc / stack.k();
  }
  return total;
}

inline double lmsd_soft(const RaterStack& stack, const SoftMask& cand,
                        DistanceKind kind) {
  BinaryMask uni = stack.support_union();
  std::int32_t count = 0;
  const auto labels = flood_components(uni, &count);
  double total = 0.0;
  for (std::int32_t id = 1; id <= count; ++id) {
    std::vector<std::int64_t> comp;
    for (std::int64_t v = 0; v < static_cast<std::int64_t>(labels.size()); ++v)
      if (labels[v] == id) comp.push_back(v);
    std::vector<double> x;
    for (auto v : comp) x.push_back(cand.values[v]);
    double acc = 0.0;
    for (const auto& rater : stack.raters) {
      std::vector<double> s;
      for (auto v : comp) s.push_back(rater.values[v] ? 1.0 : 0.0);
      const double d = surrogate_distance(kind, x, s);
      acc += d * d;
    }
    total += acc / stack.k();
  }
  return total;
}

// ------------------------------------------------------ exhaustive search

// Second, recursive enumeration of all support subsets per component,
// with the same tie rule: lexicographically smallest sorted voxel list.
struct BruteResult {
  BinaryMask mask;
  double lmsd = 0.0;
};

inline BruteResult brute_force_hard(const RaterStack& stack,
                                    DistanceKind kind) {
  BinaryMask uni = stack.support_union();
  std::int32_t count = 0;
  const auto labels = flood_components(uni, &count);
  BruteResult res;
  res.mask = BinaryMask::zeros(stack.grid);
  for (std::int32_t id = 1; id <= count; ++id) {
    std::vector<std::int64_t> comp;
    for (std::int64_t v = 0; v < static_cast<std::int64_t>(labels.size()); ++v)
      if (labels[v] == id) comp.push_back(v);
    std::vector<std::set<std::int64_t>> raters;
    for (const auto& r : stack.raters) {
      std::set<std::int64_t> s;
      for (auto v : comp)
        if (r.values[v]) s.insert(v);
      raters.push_back(std::move(s));
    }
    auto eval = [&](const std::set<std::int64_t>& c) {
      double acc = 0.0;
      for (const auto& s : raters)
        acc += criterion_term(kind, set_distance(kind, s, c));
      return acc / stack.k();
    };
    std::set<std::int64_t> chosen, current;
    double best = eval(chosen);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == comp.size()) {
        const double v = eval(current);
        if (v < best ||
            (v == best &&
             std::lexicographical_compare(current.begin(), current.end(),
                                          chosen.begin(), chosen.end()))) {
          best = v;
          chosen = current;
        }
        return;
      }
      rec(i + 1);
      current.insert(comp[i]);
      rec(i + 1);
      current.erase(comp[i]);
    };
    rec(0);
    for (auto v : chosen) res.mask.values[v] = 1;
    res.lmsd += best;
  }
  return res;
}

// ------------------------------------------------------------- builders

inline BinaryMask mask_of(const Grid& g,
                          const std::vector<std::int64_t>& fg) {
  return BinaryMask::from_indices(g, fg);
}

inline RaterStack stack_of(const Grid& g,
                           const std::vector<std::vector<std::int64_t>>& fgs) {
  std::vector<BinaryMask> raters;
  for (const auto& fg : fgs) raters.push_back(mask_of(g, fg));
  return RaterStack(std::move(raters));
}

inline RaterStack random_binary_stack(std::mt19937_64& rng,
                                      const Grid& g, int k, double density) {
  std::vector<BinaryMask> raters;
  for (int j = 0; j < k; ++j) {
    BinaryMask m = BinaryMask::zeros(g);
    for (auto& v : m.values)
      v = (static_cast<double>(rng() >> 11) * 0x1.0p-53) < density ? 1 : 0;
    raters.push_back(std::move(m));
  }
  return RaterStack(std::move(raters));
}

}  // namespace testref
