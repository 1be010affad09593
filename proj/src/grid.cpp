#include "macchiato/grid.hpp"

#include <algorithm>
#include <cmath>

namespace macchiato {

const char* to_string(Neighborhood n) {
  switch (n) {
    case Neighborhood::N4: return "n4";
    case Neighborhood::N8: return "n8";
    case Neighborhood::N6: return "n6";
    case Neighborhood::N26: return "n26";
    case Neighborhood::Slicewise2D: return "slicewise";
  }
  throw DomainError("unknown neighborhood");
}

Neighborhood neighborhood_from_string(const std::string& name) {
  if (name == "n4") return Neighborhood::N4;
  if (name == "n8") return Neighborhood::N8;
  if (name == "n6") return Neighborhood::N6;
  if (name == "n26") return Neighborhood::N26;
  if (name == "slicewise") return Neighborhood::Slicewise2D;
  throw DomainError("unknown neighborhood: " + name);
}

Grid::Grid(std::vector<std::int64_t> d, Neighborhood n)
    : dims(std::move(d)), neighborhood(n) {
  validate();
}

void Grid::validate() const {
  if (dims.empty() || dims.size() > 3)
    throw DomainError("grid must have 1 to 3 axes");
  for (auto d : dims)
    if (d <= 0) throw DomainError("grid axes must be positive");
  const int nd = ndim();
  switch (neighborhood) {
    case Neighborhood::N4:
    case Neighborhood::N8:
      if (nd > 2) throw DomainError("2D neighborhood on a 3D grid");
      break;
    case Neighborhood::N6:
    case Neighborhood::N26:
    case Neighborhood::Slicewise2D:
      if (nd != 3) throw DomainError("3D neighborhood needs a 3D grid");
      break;
  }
}

std::int64_t Grid::voxel_count() const {
  std::int64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

Coords Grid::coords(std::int64_t flat) const {
  Coords c{0, 0, 0};
  for (int a = ndim() - 1; a >= 0; --a) {
    c[a] = flat % dims[a];
    flat /= dims[a];
  }
  return c;
}

std::int64_t Grid::flat(const Coords& c) const {
  std::int64_t f = 0;
  for (int a = 0; a < ndim(); ++a) f = f * dims[a] + c[a];
  return f;
}

bool Grid::contains(const Coords& c) const {
  for (int a = 0; a < ndim(); ++a)
    if (c[a] < 0 || c[a] >= dims[a]) return false;
  return true;
}

namespace {

std::vector<Coords> make_offsets(int ndim, Neighborhood n) {
  std::vector<Coords> out;
  const bool diag = (n == Neighborhood::N8 || n == Neighborhood::N26 ||
                     n == Neighborhood::Slicewise2D);
  // Axis 0 is frozen for slicewise connectivity.
  const int lo_axis = (n == Neighborhood::Slicewise2D) ? 1 : 0;
  std::array<std::int64_t, 3> d{0, 0, 0};
  auto rec = [&](auto&& self, int axis) -> void {
    if (axis == ndim) {
      bool all_zero = true;
      std::int64_t manhattan = 0;
      for (int a = 0; a < ndim; ++a) {
        if (d[a] != 0) all_zero = false;
        manhattan += std::abs(d[a]);
      }
      if (all_zero) return;
      if (!diag && manhattan > 1) return;
      out.push_back({d[0], d[1], d[2]});
      return;
    }
    const bool frozen = axis < lo_axis;
    for (std::int64_t v : {-1, 0, 1}) {
      if (frozen && v != 0) continue;
      d[axis] = v;
      self(self, axis + 1);
    }
    d[axis] = 0;
  };
  rec(rec, 0);
  return out;
}

}  // namespace

const std::vector<Coords>& Grid::neighbor_offsets() const {
  // Cache per (ndim, neighborhood); tiny table, built once.
  static const auto table = [] {
    std::array<std::array<std::vector<Coords>, 5>, 4> t;
    for (int nd = 1; nd <= 3; ++nd)
      for (int n = 0; n < 5; ++n)
        t[nd][n] = make_offsets(nd, static_cast<Neighborhood>(n));
    return t;
  }();
  return table[ndim()][static_cast<int>(neighborhood)];
}

BinaryMask::BinaryMask(Grid g, std::vector<std::uint8_t> v)
    : grid(std::move(g)), values(std::move(v)) {
  validate();
}

BinaryMask BinaryMask::zeros(const Grid& g) {
  BinaryMask m;
  m.grid = g;
  m.values.assign(g.voxel_count(), 0);
  return m;
}

BinaryMask BinaryMask::from_indices(const Grid& g,
                                    const std::vector<std::int64_t>& fg) {
  BinaryMask m = zeros(g);
  for (auto i : fg) {
    if (i < 0 || i >= g.voxel_count())
      throw DomainError("foreground index out of range");
    m.values[i] = 1;
  }
  return m;
}

void BinaryMask::validate() const {
  grid.validate();
  if (static_cast<std::int64_t>(values.size()) != grid.voxel_count())
    throw GridMismatch("mask payload size does not match grid");
  for (auto v : values)
    if (v > 1) throw DomainError("binary mask values must be 0 or 1");
}

std::int64_t BinaryMask::foreground_count() const {
  std::int64_t n = 0;
  for (auto v : values) n += v;
  return n;
}

std::vector<std::int64_t> BinaryMask::foreground_indices() const {
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(values.size()); ++i)
    if (values[i]) out.push_back(i);
  return out;
}

SoftMask::SoftMask(Grid g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  validate();
}

SoftMask SoftMask::zeros(const Grid& g) {
  SoftMask m;
  m.grid = g;
  m.values.assign(g.voxel_count(), 0.0);
  return m;
}

void SoftMask::validate() const {
  grid.validate();
  if (static_cast<std::int64_t>(values.size()) != grid.voxel_count())
    throw GridMismatch("mask payload size does not match grid");
  for (auto v : values)
    if (!(v >= 0.0 && v <= 1.0))
      throw DomainError("soft mask values must lie in [0, 1]");
}

double SoftMask::volume() const {
  double s = 0.0;
  for (auto v : values) s += v;
  return s;
}

BinaryMask SoftMask::threshold(double level) const {
  BinaryMask out = BinaryMask::zeros(grid);
  for (std::size_t i = 0; i < values.size(); ++i)
    out.values[i] = values[i] > level ? 1 : 0;
  return out;
}

std::vector<AxisMargin> uniform_margin(int ndim, std::int64_t m) {
  if (m < 0) throw DomainError("margin must be non-negative");
  return std::vector<AxisMargin>(ndim, AxisMargin{m, m});
}

namespace {

template <typename T>
std::pair<Grid, std::vector<T>> pad_impl(const Grid& g,
                                         const std::vector<T>& vals,
                                         const std::vector<AxisMargin>& m) {
  if (static_cast<int>(m.size()) != g.ndim())
    throw DomainError("margin count does not match grid dimensionality");
  Grid out_grid = g;
  for (int a = 0; a < g.ndim(); ++a) {
    if (m[a].lo < 0 || m[a].hi < 0)
      throw DomainError("margin must be non-negative");
    out_grid.dims[a] += m[a].lo + m[a].hi;
  }
  std::vector<T> out(out_grid.voxel_count(), T{});
  for (std::int64_t i = 0; i < g.voxel_count(); ++i) {
    Coords c = g.coords(i);
    for (int a = 0; a < g.ndim(); ++a) c[a] += m[a].lo;
    out[out_grid.flat(c)] = vals[i];
  }
  return {std::move(out_grid), std::move(out)};
}

template <typename T>
std::pair<Grid, std::vector<T>> crop_impl(const Grid& g,
                                          const std::vector<T>& vals,
                                          const std::vector<AxisMargin>& m) {
  if (static_cast<int>(m.size()) != g.ndim())
    throw DomainError("margin count does not match grid dimensionality");
  Grid out_grid = g;
  for (int a = 0; a < g.ndim(); ++a) {
    if (m[a].lo < 0 || m[a].hi < 0)
      throw DomainError("margin must be non-negative");
    out_grid.dims[a] -= m[a].lo + m[a].hi;
    if (out_grid.dims[a] <= 0) throw DomainError("crop exceeds grid extent");
  }
  std::vector<T> out(out_grid.voxel_count(), T{});
  for (std::int64_t i = 0; i < g.voxel_count(); ++i) {
    Coords c = g.coords(i);
    bool inside = true;
    for (int a = 0; a < g.ndim(); ++a) {
      c[a] -= m[a].lo;
      if (c[a] < 0 || c[a] >= out_grid.dims[a]) inside = false;
    }
    if (inside) {
      out[out_grid.flat(c)] = vals[i];
    } else if (vals[i] != T{}) {
      throw DomainError("crop would discard foreground");
    }
  }
  return {std::move(out_grid), std::move(out)};
}

}  // namespace

BinaryMask pad_background(const BinaryMask& mask,
                          const std::vector<AxisMargin>& margins) {
  auto [g, v] = pad_impl(mask.grid, mask.values, margins);
  BinaryMask out;
  out.grid = std::move(g);
  out.values = std::move(v);
  return out;
}

SoftMask pad_background(const SoftMask& mask,
                        const std::vector<AxisMargin>& margins) {
  auto [g, v] = pad_impl(mask.grid, mask.values, margins);
  SoftMask out;
  out.grid = std::move(g);
  out.values = std::move(v);
  return out;
}

BinaryMask crop_background(const BinaryMask& mask,
                           const std::vector<AxisMargin>& margins) {
  auto [g, v] = crop_impl(mask.grid, mask.values, margins);
  BinaryMask out;
  out.grid = std::move(g);
  out.values = std::move(v);
  return out;
}

SoftMask crop_background(const SoftMask& mask,
                         const std::vector<AxisMargin>& margins) {
  auto [g, v] = crop_impl(mask.grid, mask.values, margins);
  SoftMask out;
  out.grid = std::move(g);
  out.values = std::move(v);
  return out;
}

}  // namespace macchiato
