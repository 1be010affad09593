#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "macchiato/stack.hpp"

namespace macchiato {

// Deterministic helpers on top of the fixed mt19937_64 stream; the standard
// distributions are implementation-defined, so fixtures avoid them.
inline std::uint64_t rand_below(std::mt19937_64& g, std::uint64_t n) {
  return n == 0 ? 0 : g() % n;
}

inline double rand_unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

std::vector<std::string> preset_names();

// Synthetic stand-ins for the datasets: a hand-pinned 1D two-rater case,
// nested disks, scattered blobs (one segmented by a single rater), a
// seven-rater set whose last rater is empty, and two separated components.
RaterStack make_preset(const std::string& preset, std::uint64_t seed);

RaterStack make_f1();
RaterStack make_rings(std::uint64_t seed);
RaterStack make_blobs(std::uint64_t seed);
RaterStack make_empty_rater(std::uint64_t seed);
RaterStack make_two_components(std::uint64_t seed);

struct RandomStackOptions {
  std::vector<std::int64_t> dims{5, 5};
  Neighborhood neighborhood = Neighborhood::N8;
  int k = 3;
  double density = 0.4;  // per-rater coverage probability of a support voxel
  int max_support = -1;  // when > 0, the union is confined to that many voxels
};

RaterStack random_stack(std::uint64_t seed, const RandomStackOptions& opt);

// Writes rater masks plus a manifest into dir; returns the manifest path.
std::filesystem::path write_fixture(const RaterStack& stack,
                                    const std::string& name,
                                    const std::filesystem::path& dir);

}  // namespace macchiato
