#include "macchiato/stack.hpp"

#include <deque>

namespace macchiato {

RaterStack::RaterStack(std::vector<BinaryMask> masks)
    : raters(std::move(masks)) {
  if (raters.empty()) throw DomainError("rater stack needs at least one mask");
  grid = raters.front().grid;
  validate();
}

void RaterStack::validate() const {
  if (raters.empty()) throw DomainError("rater stack needs at least one mask");
  if (k() > 64) throw DomainError("at most 64 raters are supported");
  grid.validate();
  for (const auto& r : raters) {
    r.validate();
    if (!(r.grid == grid))
      throw GridMismatch("rater masks disagree on grid shape");
  }
}

std::vector<int> RaterStack::s_plus() const {
  std::vector<int> out(voxel_count(), 0);
  for (const auto& r : raters)
    for (std::int64_t i = 0; i < voxel_count(); ++i) out[i] += r.values[i];
  return out;
}

std::vector<std::uint64_t> RaterStack::patterns() const {
  std::vector<std::uint64_t> out(voxel_count(), 0);
  for (int kk = 0; kk < k(); ++kk) {
    const auto& vals = raters[kk].values;
    const std::uint64_t bit = std::uint64_t{1} << kk;
    for (std::int64_t i = 0; i < voxel_count(); ++i)
      if (vals[i]) out[i] |= bit;
  }
  return out;
}

BinaryMask RaterStack::support_union() const {
  BinaryMask out = BinaryMask::zeros(grid);
  for (const auto& r : raters)
    for (std::int64_t i = 0; i < voxel_count(); ++i)
      if (r.values[i]) out.values[i] = 1;
  return out;
}

BinaryMask RaterStack::support_intersection() const {
  BinaryMask out = BinaryMask::zeros(grid);
  out.values.assign(voxel_count(), 1);
  for (const auto& r : raters)
    for (std::int64_t i = 0; i < voxel_count(); ++i)
      if (!r.values[i]) out.values[i] = 0;
  return out;
}

std::map<std::uint64_t, std::int64_t> pattern_counts(const RaterStack& stack) {
  std::map<std::uint64_t, std::int64_t> out;
  for (auto p : stack.patterns()) ++out[p];
  return out;
}

RaterStack pad_background(const RaterStack& stack,
                          const std::vector<AxisMargin>& margins) {
  std::vector<BinaryMask> padded;
  padded.reserve(stack.raters.size());
  for (const auto& r : stack.raters) padded.push_back(pad_background(r, margins));
  return RaterStack(std::move(padded));
}

std::vector<std::int64_t> ComponentLabels::component_voxels(
    std::int32_t id) const {
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(labels.size()); ++i)
    if (labels[i] == id) out.push_back(i);
  return out;
}

ComponentLabels connected_components(const BinaryMask& mask) {
  const Grid& g = mask.grid;
  const auto& offsets = g.neighbor_offsets();
  ComponentLabels out;
  out.labels.assign(g.voxel_count(), 0);
  std::deque<std::int64_t> queue;
  for (std::int64_t seed = 0; seed < g.voxel_count(); ++seed) {
    if (!mask.values[seed] || out.labels[seed] != 0) continue;
    const std::int32_t label = ++out.count;
    out.labels[seed] = label;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::int64_t cur = queue.front();
      queue.pop_front();
      const Coords c = g.coords(cur);
      for (const auto& off : offsets) {
        Coords nb = c;
        for (int a = 0; a < g.ndim(); ++a) nb[a] += off[a];
        if (!g.contains(nb)) continue;
        const std::int64_t j = g.flat(nb);
        if (mask.values[j] && out.labels[j] == 0) {
          out.labels[j] = label;
          queue.push_back(j);
        }
      }
    }
  }
  return out;
}

ComponentLabels connected_components(const RaterStack& stack) {
  return connected_components(stack.support_union());
}

}  // namespace macchiato
