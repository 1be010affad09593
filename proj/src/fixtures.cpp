#include "macchiato/fixtures.hpp"

#include <algorithm>
#include <numeric>

#include "macchiato/errors.hpp"
#include "macchiato/mask_io.hpp"

namespace macchiato {

namespace {

void set_disk(BinaryMask& m, std::int64_t c0, std::int64_t c1,
              std::int64_t radius) {
  for (std::int64_t r = 0; r < m.grid.dims[0]; ++r)
    for (std::int64_t c = 0; c < m.grid.dims[1]; ++c)
      if ((r - c0) * (r - c0) + (c - c1) * (c - c1) <= radius * radius)
        m.values[m.grid.flat({r, c, 0})] = 1;
}

std::int64_t jitter(std::mt19937_64& g) {
  return static_cast<std::int64_t>(rand_below(g, 3)) - 1;  // -1, 0, or 1
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"f1", "rings", "blobs", "empty-rater", "two-components"};
}

RaterStack make_preset(const std::string& preset, std::uint64_t seed) {
  if (preset == "f1") return make_f1();
  if (preset == "rings") return make_rings(seed);
  if (preset == "blobs") return make_blobs(seed);
  if (preset == "empty-rater") return make_empty_rater(seed);
  if (preset == "two-components") return make_two_components(seed);
  throw DomainError("unknown preset: " + preset);
}

RaterStack make_f1() {
  const Grid grid({8}, Neighborhood::N4);
  RaterStack s;
  s.grid = grid;
  s.raters.push_back(BinaryMask::from_indices(grid, {2, 3, 4}));
  s.raters.push_back(BinaryMask::from_indices(grid, {3, 4, 5}));
  return s;
}

RaterStack make_rings(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  const Grid grid({21, 21}, Neighborhood::N8);
  RaterStack s;
  s.grid = grid;
  const std::int64_t c0 = 10 + jitter(g), c1 = 10 + jitter(g);
  for (int k = 0; k < 3; ++k) {
    BinaryMask m = BinaryMask::zeros(grid);
    set_disk(m, c0, c1, 5 + k + static_cast<std::int64_t>(rand_below(g, 2)));
    s.raters.push_back(std::move(m));
  }
  return s;
}

RaterStack make_blobs(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  const Grid grid({24, 24}, Neighborhood::N8);
  RaterStack s;
  s.grid = grid;
  const int K = 4;
  // blob -> raters drawing it; blob B has a single rater, blob D a 2/4 tie
  struct Blob {
    std::int64_t c0, c1, radius;
    std::vector<int> raters;
  };
  const std::vector<Blob> blobs = {
      {6, 6, 3, {0, 1, 2, 3}},
      {6, 17, 2, {0}},
      {17, 6, 3, {0, 1, 2}},
      {17, 17, 2, {1, 2}},
  };
  s.raters.assign(K, BinaryMask::zeros(grid));
  for (const auto& b : blobs)
    for (int k : b.raters)
      set_disk(s.raters[k], b.c0 + jitter(g), b.c1 + jitter(g),
               b.radius + static_cast<std::int64_t>(rand_below(g, 2)));
  return s;
}

RaterStack make_empty_rater(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  const Grid grid({16, 16}, Neighborhood::N8);
  RaterStack s;
  s.grid = grid;
  for (int k = 0; k < 6; ++k) {
    BinaryMask m = BinaryMask::zeros(grid);
    set_disk(m, 8 + jitter(g), 8 + jitter(g),
             4 + static_cast<std::int64_t>(rand_below(g, 2)));
    s.raters.push_back(std::move(m));
  }
  s.raters.push_back(BinaryMask::zeros(grid));  // the 7th is an empty map
  return s;
}

RaterStack make_two_components(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  const Grid grid({20, 20}, Neighborhood::N8);
  RaterStack s;
  s.grid = grid;
  s.raters.assign(3, BinaryMask::zeros(grid));
  for (int k = 0; k < 3; ++k)
    set_disk(s.raters[k], 5 + jitter(g), 5 + jitter(g),
             3 + static_cast<std::int64_t>(rand_below(g, 2)));
  for (int k = 0; k < 2; ++k)  // second component misses the third rater
    set_disk(s.raters[k], 14 + jitter(g), 14 + jitter(g),
             3 + static_cast<std::int64_t>(rand_below(g, 2)));
  return s;
}

RaterStack random_stack(std::uint64_t seed, const RandomStackOptions& opt) {
  if (opt.k < 1 || opt.k > 64) throw DomainError("rater count out of range");
  std::mt19937_64 g(seed);
  const Grid grid(opt.dims, opt.neighborhood);
  RaterStack s;
  s.grid = grid;
  s.raters.assign(opt.k, BinaryMask::zeros(grid));
  const std::int64_t n = grid.voxel_count();
  if (opt.max_support > 0) {
    std::vector<std::int64_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::int64_t i = n - 1; i > 0; --i)
      std::swap(idx[i], idx[rand_below(g, static_cast<std::uint64_t>(i + 1))]);
    const std::int64_t take = std::min<std::int64_t>(
        n, 1 + static_cast<std::int64_t>(
                   rand_below(g, static_cast<std::uint64_t>(opt.max_support))));
    for (std::int64_t i = 0; i < take; ++i)
      for (int k = 0; k < opt.k; ++k)
        if (rand_unit(g) < opt.density) s.raters[k].values[idx[i]] = 1;
  } else {
    for (std::int64_t i = 0; i < n; ++i)
      for (int k = 0; k < opt.k; ++k)
        if (rand_unit(g) < opt.density) s.raters[k].values[i] = 1;
  }
  return s;
}

std::filesystem::path write_fixture(const RaterStack& stack,
                                    const std::string& name,
                                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Manifest m;
  m.name = name;
  m.dims = stack.grid.dims;
  m.neighborhood = stack.grid.neighborhood;
  for (int k = 0; k < stack.k(); ++k) {
    const std::string stem = "rater" + std::to_string(k);
    save_mask(dir / stem, stack.raters[k]);
    m.raters.push_back(stem + ".json");
  }
  const std::filesystem::path mp = dir / "manifest.json";
  save_manifest(mp, m);
  return mp;
}

}  // namespace macchiato
