#include "macchiato/consensus.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

namespace macchiato {

const char* to_string(Heuristic h) {
  switch (h) {
    case Heuristic::Subcrown: return "subcrown";
    case Heuristic::Crown: return "crown";
    case Heuristic::Voxel: return "voxel";
  }
  throw DomainError("unknown heuristic");
}

Heuristic heuristic_from_string(const std::string& name) {
  if (name == "subcrown") return Heuristic::Subcrown;
  if (name == "crown") return Heuristic::Crown;
  if (name == "voxel") return Heuristic::Voxel;
  throw DomainError("unknown heuristic: " + name);
}

std::int64_t OptBlock::size() const {
  std::int64_t s = 0;
  for (const auto& c : chunks) s += c.voxels.size();
  return s;
}

std::vector<OptBlock> build_blocks(const SubcrownPartition& partition,
                                   Heuristic heuristic) {
  std::vector<OptBlock> out;
  switch (heuristic) {
    case Heuristic::Subcrown:
      for (const auto& e : partition.entries) {
        OptBlock b;
        b.td = e.td;
        b.order_group = e.group;
        b.chunks.push_back({e.group, e.voxels, 0.0});
        out.push_back(std::move(b));
      }
      break;
    case Heuristic::Crown:
      for (const auto& e : partition.entries) {
        if (out.empty() || out.back().td != e.td) {
          OptBlock b;
          b.td = e.td;
          out.push_back(std::move(b));
        }
        out.back().chunks.push_back({e.group, e.voxels, 0.0});
      }
      break;
    case Heuristic::Voxel:
      for (const auto& e : partition.entries)
        for (auto v : e.voxels) {
          OptBlock b;
          b.td = e.td;
          b.order_group = e.group;
          b.order_voxel = v;
          b.chunks.push_back({e.group, {v}, 0.0});
          out.push_back(std::move(b));
        }
      break;
  }
  return out;
}

namespace {

void foreach_bit(std::uint64_t g, auto&& fn) {
  while (g) {
    fn(std::countr_zero(g));
    g &= g - 1;
  }
}

// ---- hard optimization ---------------------------------------------------

struct HardState {
  int K = 0;
  DistanceKind kind;
  std::int64_t m = 0;
  std::vector<std::int64_t> n, a;

  double value() const {
    double acc = 0.0;
    for (int k = 0; k < K; ++k)
      acc += lmsd_term(kind,
                       binary_distance_from_counts(kind, m, n[k], a[k]));
    return acc / K;
  }

  double value_toggled(const OptBlock& b, int sign) const {
    std::int64_t dm = 0;
    std::array<std::int64_t, 64> da{};
    for (const auto& c : b.chunks) {
      const std::int64_t sz = c.voxels.size();
      dm += sz;
      foreach_bit(c.group, [&](int k) { da[k] += sz; });
    }
    double acc = 0.0;
    for (int k = 0; k < K; ++k)
      acc += lmsd_term(kind, binary_distance_from_counts(
                                 kind, m + sign * dm, n[k],
                                 a[k] + sign * da[k]));
    return acc / K;
  }

  void toggle(const OptBlock& b, int sign) {
    for (const auto& c : b.chunks) {
      const std::int64_t sz = c.voxels.size();
      m += sign * sz;
      foreach_bit(c.group, [&](int k) { a[k] += sign * sz; });
    }
  }
};

// index ranges of equal td in an ascending-sorted block list
std::vector<std::pair<std::size_t, std::size_t>> td_ranges(
    const std::vector<OptBlock>& blocks) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < blocks.size()) {
    std::size_t j = i;
    while (j < blocks.size() && blocks[j].td == blocks[i].td) ++j;
    out.emplace_back(i, j);
    i = j;
  }
  return out;
}

struct StrategyOutcome {
  std::vector<char> in;
  double value = 0.0;
  std::vector<double> trace;
};

StrategyOutcome run_hard_strategy(const std::vector<OptBlock>& blocks,
                                  HardState st, bool shrinking,
                                  int max_sweeps) {
  const auto ranges = td_ranges(blocks);
  StrategyOutcome res;
  res.in.assign(blocks.size(), 0);
  if (shrinking) {
    for (auto& f : res.in) f = 1;
    // st arrives holding the full component
  } else {
    // start from the minimum-distance crown
    st.m = 0;
    std::fill(st.a.begin(), st.a.end(), 0);
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (blocks[i].td == blocks.front().td) {
        res.in[i] = 1;
        st.toggle(blocks[i], +1);
      }
  }
  double cur = st.value();
  res.trace.push_back(cur);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t r = 0; r < ranges.size(); ++r) {
      const auto [lo, hi] = shrinking ? ranges[ranges.size() - 1 - r] : ranges[r];
      for (std::size_t i = lo; i < hi; ++i) {
        if (shrinking ? !res.in[i] : res.in[i]) continue;
        const int sign = shrinking ? -1 : +1;
        const double cand = st.value_toggled(blocks[i], sign);
        if (cand < cur - kImprovementTol) {
          st.toggle(blocks[i], sign);
          res.in[i] = shrinking ? 0 : 1;
          cur = st.value();
          res.trace.push_back(cur);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  res.value = cur;
  return res;
}

// ---- soft objective helpers ----------------------------------------------

double soft_sq_term(DistanceKind kind, double n, double ip, double t1,
                    double t2) {
  switch (kind) {
    case DistanceKind::Tanimoto: {
      const double diff2 = std::max(0.0, t2 - 2.0 * ip + n);
      const double den = diff2 + ip;
      const double d = den == 0.0 ? 0.0 : diff2 / den;
      return d * d;
    }
    case DistanceKind::Soergel: {
      const double num = std::max(0.0, n + t1 - 2.0 * ip);
      const double den = n + t1 - ip;
      const double d = den == 0.0 ? 0.0 : num / den;
      return d * d;
    }
    case DistanceKind::Psd1: {
      const double den = t1 + n;
      const double d = den == 0.0 ? 0.0 : 1.0 - 2.0 * ip / den;
      return d * d;
    }
    case DistanceKind::Psd2: {
      const double den = t2 + n;
      const double d = den == 0.0 ? 0.0 : 1.0 - 2.0 * ip / den;
      return d * d;
    }
    case DistanceKind::L2:
      return std::max(0.0, t2 - 2.0 * ip + n);
    default:
      throw DomainError("not a surrogate distance kind");
  }
}

}  // namespace

SoftComponentState::SoftComponentState(int K, std::vector<OptBlock> blocks,
                                       DistanceKind kind)
    : k_(K), kind_(kind), blocks_(std::move(blocks)) {
  if (!is_surrogate_kind(kind)) throw DomainError("need a surrogate kind");
  for (auto& b : blocks_)
    for (auto& c : b.chunks)
      c.value = static_cast<double>(std::popcount(c.group)) / K;
  rebuild_aggregates();
}

void SoftComponentState::rebuild_aggregates() {
  n_.assign(k_, 0.0);
  ip_.assign(k_, 0.0);
  t1_ = 0.0;
  t2_ = 0.0;
  for (const auto& b : blocks_)
    for (const auto& c : b.chunks) {
      const double sz = static_cast<double>(c.voxels.size());
      t1_ += sz * c.value;
      t2_ += sz * c.value * c.value;
      foreach_bit(c.group, [&](int k) {
        n_[k] += sz;
        ip_[k] += sz * c.value;
      });
    }
}

double SoftComponentState::value() const {
  double acc = 0.0;
  for (int k = 0; k < k_; ++k)
    acc += soft_sq_term(kind_, n_[k], ip_[k], t1_, t2_);
  return acc / k_;
}

double SoftComponentState::value_with(int block, double x) const {
  const OptBlock& b = blocks_.at(block);
  double d1 = 0.0, d2 = 0.0;
  std::array<double, 64> dip{};
  for (const auto& c : b.chunks) {
    const double sz = static_cast<double>(c.voxels.size());
    d1 += sz * (x - c.value);
    d2 += sz * (x * x - c.value * c.value);
    foreach_bit(c.group, [&](int k) { dip[k] += sz * (x - c.value); });
  }
  double acc = 0.0;
  for (int k = 0; k < k_; ++k)
    acc += soft_sq_term(kind_, n_[k], ip_[k] + dip[k], t1_ + d1, t2_ + d2);
  return acc / k_;
}

ScalarMinResult SoftComponentState::minimize_block(int block,
                                                   double tol) const {
  auto f = [&](double x) { return value_with(block, x); };
  // coarse scan seeds the bracket
  double best_x = 0.0, best_f = f(0.0);
  constexpr int kCoarse = 8;
  for (int i = 1; i <= kCoarse; ++i) {
    const double x = static_cast<double>(i) / kCoarse;
    const double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  double a = std::max(0.0, best_x - 1.0 / kCoarse);
  double b = std::min(1.0, best_x + 1.0 / kCoarse);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  ScalarMinResult res{fc < fd ? c : d, std::min(fc, fd)};
  // endpoints are always candidates, as is the incumbent of a uniform block
  if (best_f < res.value) res = {best_x, best_f};  // covers 0 and 1
  const OptBlock& blk = blocks_.at(block);
  bool uniform = true;
  for (const auto& ch : blk.chunks)
    if (ch.value != blk.chunks.front().value) uniform = false;
  if (uniform) {
    const double inc = f(blk.chunks.front().value);
    if (inc <= res.value) res = {blk.chunks.front().value, inc};
  }
  return res;
}

bool SoftComponentState::apply_if_better(int block,
                                         const ScalarMinResult& res) {
  if (!(res.value < value() - kImprovementTol)) return false;
  for (auto& c : blocks_.at(block).chunks) c.value = res.x;
  rebuild_aggregates();
  return true;
}

void SoftComponentState::write_to(SoftMask& out) const {
  for (const auto& b : blocks_)
    for (const auto& c : b.chunks)
      for (auto v : c.voxels)
        out.values[v] = std::min(1.0, std::max(0.0, c.value));
}

FusionResult hard_consensus(const RaterStack& stack,
                            const MacchiatoConfig& cfg) {
  if (cfg.distance != DistanceKind::Jaccard &&
      cfg.distance != DistanceKind::Dice)
    throw DomainError("hard consensus needs the Jaccard or Dice distance");
  const ComponentLabels labels = connected_components(stack);
  FusionResult out;
  out.method = cfg.distance == DistanceKind::Jaccard ? "macchiato-j"
                                                     : "macchiato-d";
  out.hard_mask = BinaryMask::zeros(stack.grid);
  if (labels.count > 0) {
    const DistanceField D = global_distance_map(stack, labels);
    for (std::int32_t id = 1; id <= labels.count; ++id) {
      const SubcrownPartition part =
          subcrown_partition(stack, D, labels, id);
      const std::vector<OptBlock> blocks = build_blocks(part, cfg.heuristic);
      HardState st;
      st.K = stack.k();
      st.kind = cfg.distance;
      st.n.assign(st.K, 0);
      st.a.assign(st.K, 0);
      for (const auto& b : blocks)
        for (const auto& c : b.chunks) {
          const std::int64_t sz = c.voxels.size();
          st.m += sz;
          foreach_bit(c.group, [&](int k) {
            st.n[k] += sz;
            st.a[k] += sz;
          });
        }
      StrategyOutcome shrunk =
          run_hard_strategy(blocks, st, true, cfg.max_sweeps);
      StrategyOutcome grown =
          run_hard_strategy(blocks, st, false, cfg.max_sweeps);
      HardState empty_st = st;
      empty_st.m = 0;
      std::fill(empty_st.a.begin(), empty_st.a.end(), 0);
      const double empty_value = empty_st.value();

      // ties keep the shrinking result, then the growing one, then empty
      const StrategyOutcome* chosen = &shrunk;
      if (grown.value < chosen->value - kImprovementTol) chosen = &grown;
      bool use_empty = empty_value < chosen->value - kImprovementTol;

      out.lmsd_trace.push_back(shrunk.trace);
      out.lmsd_trace.push_back(grown.trace);
      if (!use_empty) {
        for (std::size_t i = 0; i < blocks.size(); ++i)
          if (chosen->in[i])
            for (const auto& c : blocks[i].chunks)
              for (auto v : c.voxels) out.hard_mask.values[v] = 1;
        out.component_lmsd.push_back(chosen->value);
      } else {
        out.component_lmsd.push_back(empty_value);
      }
    }
  }
  out.lmsd = lmsd(stack, out.hard_mask, cfg.distance, labels);
  return out;
}

FusionResult soft_consensus(const RaterStack& stack,
                            const MacchiatoConfig& cfg) {
  if (!is_surrogate_kind(cfg.distance) || cfg.distance == DistanceKind::L2)
    throw DomainError(
        "soft consensus needs a Tanimoto, Soergel, or pSD distance");
  const ComponentLabels labels = connected_components(stack);
  FusionResult out;
  out.soft = true;
  switch (cfg.distance) {
    case DistanceKind::Tanimoto: out.method = "macchiato-tj"; break;
    case DistanceKind::Soergel: out.method = "macchiato-sj"; break;
    case DistanceKind::Psd1: out.method = "macchiato-1sd"; break;
    default: out.method = "macchiato-2sd"; break;
  }
  out.soft_mask = SoftMask::zeros(stack.grid);
  if (labels.count == 0) return out;

  const DistanceField D = global_distance_map(stack, labels);
  std::vector<SoftComponentState> states;
  for (std::int32_t id = 1; id <= labels.count; ++id) {
    const SubcrownPartition part = subcrown_partition(stack, D, labels, id);
    states.emplace_back(stack.k(), build_blocks(part, cfg.heuristic),
                        cfg.distance);
  }
  double total = 0.0;
  for (const auto& s : states) total += s.value();
  std::vector<double> trace{total};

  for (auto& state : states) {
    double comp_cur = state.value();
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
      const double sweep_start = comp_cur;
      for (int i = 0; i < state.block_count(); ++i) {
        const ScalarMinResult res =
            state.minimize_block(i, cfg.scalar_minimizer_tol);
        if (state.apply_if_better(i, res)) {
          const double updated = state.value();
          total += updated - comp_cur;
          comp_cur = updated;
          trace.push_back(total);
        }
      }
      if (sweep_start - comp_cur < kImprovementTol) break;
    }
    out.component_lmsd.push_back(comp_cur);
    state.write_to(out.soft_mask);
    for (const auto& b : state.blocks())
      for (const auto& c : b.chunks) out.chunk_values.push_back(c.value);
  }
  out.lmsd_trace.push_back(std::move(trace));
  out.lmsd = lmsd(stack, out.soft_mask, cfg.distance, labels);
  return out;
}

}  // namespace macchiato
