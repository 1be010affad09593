#include "macchiato/distances.hpp"

#include <algorithm>
#include <cmath>

namespace macchiato {

const char* to_string(DistanceKind k) {
  switch (k) {
    case DistanceKind::Hamming: return "hamming";
    case DistanceKind::Jaccard: return "jaccard";
    case DistanceKind::Dice: return "dice";
    case DistanceKind::Tanimoto: return "tanimoto";
    case DistanceKind::Soergel: return "soergel";
    case DistanceKind::Psd1: return "psd1";
    case DistanceKind::Psd2: return "psd2";
    case DistanceKind::L2: return "l2";
  }
  throw DomainError("unknown distance kind");
}

DistanceKind distance_kind_from_string(const std::string& name) {
  if (name == "hamming") return DistanceKind::Hamming;
  if (name == "jaccard") return DistanceKind::Jaccard;
  if (name == "dice") return DistanceKind::Dice;
  if (name == "tanimoto") return DistanceKind::Tanimoto;
  if (name == "soergel") return DistanceKind::Soergel;
  if (name == "psd1") return DistanceKind::Psd1;
  if (name == "psd2") return DistanceKind::Psd2;
  if (name == "l2") return DistanceKind::L2;
  throw DomainError("unknown distance kind: " + name);
}

bool is_binary_kind(DistanceKind k) {
  return k == DistanceKind::Hamming || k == DistanceKind::Jaccard ||
         k == DistanceKind::Dice;
}

bool is_surrogate_kind(DistanceKind k) { return !is_binary_kind(k); }

DistanceKind binary_counterpart(DistanceKind surrogate) {
  switch (surrogate) {
    case DistanceKind::Tanimoto:
    case DistanceKind::Soergel: return DistanceKind::Jaccard;
    case DistanceKind::Psd1:
    case DistanceKind::Psd2: return DistanceKind::Dice;
    case DistanceKind::L2: return DistanceKind::Hamming;
    default: throw DomainError("not a surrogate distance kind");
  }
}

namespace {

std::int64_t sorted_intersection_size(std::vector<std::int64_t> a,
                                      std::vector<std::int64_t> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::int64_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else { ++n; ++ia; ++ib; }
  }
  return n;
}

void check_unit_range(const std::vector<double>& v) {
  for (double x : v)
    if (!(x >= 0.0 && x <= 1.0))
      throw DomainError("soft values must lie in [0, 1]");
}

}  // namespace

double binary_distance(DistanceKind kind, const std::vector<std::int64_t>& a,
                       const std::vector<std::int64_t>& b) {
  if (!is_binary_kind(kind)) throw DomainError("not a binary distance kind");
  const std::int64_t inter = sorted_intersection_size(a, b);
  return binary_distance_from_counts(kind, a.size(), b.size(), inter);
}

double binary_distance(DistanceKind kind, const BinaryMask& a,
                       const BinaryMask& b) {
  if (!(a.grid == b.grid)) throw GridMismatch("binary distance across grids");
  if (!is_binary_kind(kind)) throw DomainError("not a binary distance kind");
  std::int64_t na = 0, nb = 0, inter = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    na += a.values[i];
    nb += b.values[i];
    inter += a.values[i] & b.values[i];
  }
  return binary_distance_from_counts(kind, na, nb, inter);
}

double soft_distance(DistanceKind kind, const std::vector<double>& x,
                     const std::vector<double>& y) {
  if (!is_surrogate_kind(kind)) throw DomainError("not a surrogate kind");
  if (x.size() != y.size())
    throw DomainError("soft distance needs equal-length vectors");
  check_unit_range(x);
  check_unit_range(y);
  switch (kind) {
    case DistanceKind::Tanimoto: {
      double diff2 = 0, ip = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        diff2 += d * d;
        ip += x[i] * y[i];
      }
      const double den = diff2 + ip;
      return den == 0.0 ? 0.0 : diff2 / den;
    }
    case DistanceKind::Soergel: {
      double num = 0, den = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        num += std::max(x[i], y[i]) - std::min(x[i], y[i]);
        den += std::max(x[i], y[i]);
      }
      return den == 0.0 ? 0.0 : num / den;
    }
    case DistanceKind::Psd1:
    case DistanceKind::Psd2: {
      const int p = kind == DistanceKind::Psd1 ? 1 : 2;
      double ip = 0, den = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        ip += x[i] * y[i];
        den += (p == 1) ? x[i] + y[i] : x[i] * x[i] + y[i] * y[i];
      }
      return den == 0.0 ? 0.0 : 1.0 - 2.0 * ip / den;
    }
    case DistanceKind::L2: {
      double diff2 = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        diff2 += d * d;
      }
      return std::sqrt(diff2);
    }
    default:
      throw DomainError("not a surrogate kind");
  }
}

ConfusionCounts confusion(const BinaryMask& a, const BinaryMask& b) {
  if (!(a.grid == b.grid)) throw GridMismatch("confusion across grids");
  ConfusionCounts c;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const bool pa = a.values[i] != 0, pb = b.values[i] != 0;
    if (pa && pb) ++c.tp;
    else if (pa && !pb) ++c.fp;
    else if (!pa && pb) ++c.fn;
    else ++c.tn;
  }
  return c;
}

SoftConfusionCounts soft_confusion(const SoftMask& u, const BinaryMask& s) {
  if (!(u.grid == s.grid)) throw GridMismatch("soft confusion across grids");
  SoftConfusionCounts c;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double ui = u.values[i];
    if (s.values[i]) {
      c.stp += ui;
      c.sfp += 1.0 - ui;
    } else {
      c.sfn += ui;
      c.stn += 1.0 - ui;
    }
  }
  return c;
}

double lmsd(const RaterStack& stack, const BinaryMask& candidate,
            DistanceKind kind, const ComponentLabels& labels) {
  if (!is_binary_kind(kind))
    throw DomainError("hard lmsd needs a binary distance kind");
  if (!(candidate.grid == stack.grid))
    throw GridMismatch("candidate grid differs from stack grid");
  for (std::size_t i = 0; i < candidate.values.size(); ++i)
    if (candidate.values[i] && labels.labels[i] == 0)
      throw SupportError("hard candidate has foreground outside the union");
  const int K = stack.k();
  // per component and rater: |M|, |S^k|, |M & S^k|
  std::vector<std::int64_t> m(labels.count + 1, 0);
  std::vector<std::vector<std::int64_t>> n(labels.count + 1,
                                           std::vector<std::int64_t>(K, 0));
  std::vector<std::vector<std::int64_t>> a(labels.count + 1,
                                           std::vector<std::int64_t>(K, 0));
  for (std::size_t i = 0; i < candidate.values.size(); ++i) {
    const std::int32_t id = labels.labels[i];
    if (id == 0) continue;
    const bool in_m = candidate.values[i] != 0;
    if (in_m) ++m[id];
    for (int kk = 0; kk < K; ++kk) {
      if (stack.raters[kk].values[i]) {
        ++n[id][kk];
        if (in_m) ++a[id][kk];
      }
    }
  }
  double total = 0.0;
  for (std::int32_t id = 1; id <= labels.count; ++id) {
    double comp = 0.0;
    for (int kk = 0; kk < K; ++kk)
      comp += lmsd_term(
          kind, binary_distance_from_counts(kind, m[id], n[id][kk], a[id][kk]));
    total += comp / K;
  }
  return total;
}

double lmsd(const RaterStack& stack, const SoftMask& candidate,
            DistanceKind kind, const ComponentLabels& labels) {
  if (!is_surrogate_kind(kind))
    throw DomainError("soft lmsd needs a surrogate distance kind");
  if (!(candidate.grid == stack.grid))
    throw GridMismatch("candidate grid differs from stack grid");
  const int K = stack.k();
  double total = 0.0;
  for (std::int32_t id = 1; id <= labels.count; ++id) {
    const std::vector<std::int64_t> comp = labels.component_voxels(id);
    std::vector<double> x(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i)
      x[i] = candidate.values[comp[i]];
    double acc = 0.0;
    std::vector<double> y(comp.size());
    for (int kk = 0; kk < K; ++kk) {
      for (std::size_t i = 0; i < comp.size(); ++i)
        y[i] = stack.raters[kk].values[comp[i]];
      acc += lmsd_term(kind, soft_distance(kind, x, y));
    }
    total += acc / K;
  }
  return total;
}

}  // namespace macchiato
