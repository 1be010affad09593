#include "macchiato/distance_map.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace macchiato {

namespace {

// BFS from `sources` until every voxel of `targets` has a distance.
// Early exit keeps the cost proportional to the explored ball, not the grid.
void bfs_into(const Grid& g, const std::vector<std::int64_t>& sources,
              const std::vector<std::int64_t>& targets,
              std::vector<std::int32_t>& dist /* full grid, kUnset-filled */) {
  if (sources.empty()) throw EmptySourceMask("distance map from an empty mask");
  std::int64_t remaining = 0;
  for (auto t : targets)
    if (dist[t] == DistanceField::kUnset) ++remaining;
  std::deque<std::int64_t> queue;
  for (auto s : sources) {
    if (dist[s] == DistanceField::kUnset) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  for (auto t : targets)
    if (dist[t] == 0) --remaining;
  const auto& offsets = g.neighbor_offsets();
  std::vector<std::int64_t> target_sorted(targets);
  std::sort(target_sorted.begin(), target_sorted.end());
  auto is_target = [&](std::int64_t i) {
    return std::binary_search(target_sorted.begin(), target_sorted.end(), i);
  };
  while (!queue.empty() && remaining > 0) {
    const std::int64_t cur = queue.front();
    queue.pop_front();
    const Coords c = g.coords(cur);
    for (const auto& off : offsets) {
      Coords nb = c;
      for (int a = 0; a < g.ndim(); ++a) nb[a] += off[a];
      if (!g.contains(nb)) continue;
      const std::int64_t j = g.flat(nb);
      if (dist[j] != DistanceField::kUnset) continue;
      dist[j] = dist[cur] + 1;
      if (is_target(j)) --remaining;
      queue.push_back(j);
    }
  }
}

}  // namespace

DistanceField distance_map(const BinaryMask& source,
                           const std::vector<std::int64_t>& domain) {
  const Grid& g = source.grid;
  std::vector<std::int32_t> scratch(g.voxel_count(), DistanceField::kUnset);
  bfs_into(g, source.foreground_indices(), domain, scratch);
  DistanceField out;
  out.grid = g;
  out.values.assign(g.voxel_count(), DistanceField::kUnset);
  for (auto i : source.foreground_indices()) out.values[i] = 0;
  for (auto d : domain) out.values[d] = scratch[d];
  return out;
}

DistanceField global_distance_map(const RaterStack& stack) {
  return global_distance_map(stack, connected_components(stack));
}

DistanceField global_distance_map(const RaterStack& stack,
                                  const ComponentLabels& labels) {
  const Grid& g = stack.grid;
  DistanceField out;
  out.grid = g;
  out.values.assign(g.voxel_count(), DistanceField::kUnset);
  std::vector<std::int32_t> scratch(g.voxel_count(), DistanceField::kUnset);
  for (std::int32_t id = 1; id <= labels.count; ++id) {
    const std::vector<std::int64_t> comp = labels.component_voxels(id);
    bool any = false;
    std::vector<std::int64_t> acc(comp.size(), 0);
    for (const auto& rater : stack.raters) {
      std::vector<std::int64_t> restricted;
      for (auto v : comp)
        if (rater.values[v]) restricted.push_back(v);
      if (restricted.empty()) continue;  // non-segmenting rater, excluded
      any = true;
      std::fill(scratch.begin(), scratch.end(), DistanceField::kUnset);
      bfs_into(g, restricted, comp, scratch);
      for (std::size_t i = 0; i < comp.size(); ++i) acc[i] += scratch[comp[i]];
    }
    if (!any)
      throw EmptySourceMask("component with no contributing rater");
    for (std::size_t i = 0; i < comp.size(); ++i)
      out.values[comp[i]] = static_cast<std::int32_t>(acc[i]);
  }
  return out;
}

SubcrownPartition subcrown_partition(const RaterStack& stack,
                                     const DistanceField& D,
                                     const ComponentLabels& labels,
                                     std::int32_t component_id) {
  if (component_id < 1 || component_id > labels.count)
    throw DomainError("component id out of range");
  const std::vector<std::uint64_t> pat = stack.patterns();
  std::map<std::pair<std::int32_t, std::uint64_t>, std::vector<std::int64_t>>
      buckets;
  for (std::int64_t i = 0;
       i < static_cast<std::int64_t>(labels.labels.size()); ++i) {
    if (labels.labels[i] != component_id) continue;
    if (D.values[i] == DistanceField::kUnset)
      throw DomainError("distance field unset inside the component");
    buckets[{D.values[i], pat[i]}].push_back(i);
  }
  SubcrownPartition out;
  out.component_id = component_id;
  for (auto& [key, voxels] : buckets) {
    SubcrownEntry e;
    e.td = key.first;
    e.group = key.second;
    e.voxels = std::move(voxels);
    out.entries.push_back(std::move(e));
  }
  return out;
}

}  // namespace macchiato
