// Python extension exposing the consensus library on NumPy arrays.
//
// Rater stacks are passed as arrays of shape (K, dims...) with 1-3 grid
// axes; grids are row-major, matching NumPy's default layout.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "macchiato/fixtures.hpp"
#include "macchiato/metrics.hpp"
#include "macchiato/oracle.hpp"
#include "macchiato/pipeline.hpp"

namespace py = pybind11;
using namespace macchiato;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Grid grid_from_shape(const py::array& arr, int skip_axes,
                     const std::string& neighborhood) {
  const int nd = static_cast<int>(arr.ndim()) - skip_axes;
  if (nd < 1 || nd > 3)
    throw DomainError("arrays must carry 1 to 3 grid axes");
  std::vector<std::int64_t> dims;
  for (int i = skip_axes; i < arr.ndim(); ++i)
    dims.push_back(arr.shape(i));
  return Grid(dims, neighborhood_from_string(neighborhood));
}

RaterStack stack_from_array(const U8Array& arr,
                            const std::string& neighborhood) {
  if (arr.ndim() < 2)
    throw DomainError("masks must have shape (K, dims...)");
  const Grid grid = grid_from_shape(arr, 1, neighborhood);
  const std::int64_t n = grid.voxel_count();
  const std::uint8_t* data = arr.data();
  std::vector<BinaryMask> raters;
  for (py::ssize_t k = 0; k < arr.shape(0); ++k) {
    std::vector<std::uint8_t> v(data + k * n, data + (k + 1) * n);
    raters.emplace_back(grid, std::move(v));
  }
  return RaterStack(std::move(raters));
}

BinaryMask binary_from_array(const U8Array& arr,
                             const std::string& neighborhood) {
  const Grid grid = grid_from_shape(arr, 0, neighborhood);
  return BinaryMask(grid,
                    std::vector<std::uint8_t>(arr.data(),
                                              arr.data() + grid.voxel_count()));
}

SoftMask soft_from_array(const F64Array& arr, const std::string& neighborhood) {
  const Grid grid = grid_from_shape(arr, 0, neighborhood);
  return SoftMask(grid, std::vector<double>(arr.data(),
                                            arr.data() + grid.voxel_count()));
}

std::vector<py::ssize_t> np_shape(const Grid& grid) {
  return std::vector<py::ssize_t>(grid.dims.begin(), grid.dims.end());
}

py::array binary_to_array(const BinaryMask& mask) {
  py::array_t<std::uint8_t> out(np_shape(mask.grid));
  std::copy(mask.values.begin(), mask.values.end(), out.mutable_data());
  return out;
}

py::array soft_to_array(const SoftMask& mask) {
  py::array_t<double> out(np_shape(mask.grid));
  std::copy(mask.values.begin(), mask.values.end(), out.mutable_data());
  return out;
}

MethodSpec spec_from_args(const std::string& method,
                          const std::string& heuristic,
                          const std::string& prior) {
  MethodSpec spec = method_spec_from_name(method);
  if (!heuristic.empty()) {
    if (!spec.is_macchiato())
      throw DomainError("heuristic requires a macchiato method");
    spec.macchiato.heuristic = heuristic_from_string(heuristic);
  }
  if (!prior.empty()) {
    if (spec.method != "mml-staple")
      throw DomainError("prior requires the mml-staple method");
    spec.prior = prior_from_string(prior);
  }
  return spec;
}

py::dict result_to_dict(const FusionResult& result) {
  py::dict out;
  out["method"] = result.method;
  out["soft"] = result.soft;
  if (result.soft) {
    out["mask"] = soft_to_array(result.soft_mask);
    out["volume"] = result.soft_mask.volume();
    out["thresholded_size"] =
        result.soft_mask.threshold().foreground_count();
  } else {
    out["mask"] = binary_to_array(result.hard_mask);
    out["volume"] = static_cast<double>(result.hard_mask.foreground_count());
  }
  if (result.method.rfind("macchiato-", 0) == 0) {
    out["lmsd"] = result.lmsd;
    out["component_lmsd"] = result.component_lmsd;
  }
  if (!result.p.empty()) {
    out["p"] = result.p;
    out["q"] = result.q;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_macchiato, m) {
  m.doc() = "Consensus fusion of multi-rater binary segmentations";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<GridMismatch>(m, "GridMismatch", PyExc_ValueError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded",
                                         PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  m.def("method_names", &method_names, "Names accepted by fuse().");

  m.def(
      "fuse",
      [](const U8Array& masks, const std::string& method,
         const std::string& neighborhood, const std::string& heuristic,
         const std::string& prior) {
        const RaterStack stack = stack_from_array(masks, neighborhood);
        const MethodSpec spec = spec_from_args(method, heuristic, prior);
        return result_to_dict(run_method(stack, spec));
      },
      py::arg("masks"), py::arg("method"), py::kw_only(),
      py::arg("neighborhood") = "n8", py::arg("heuristic") = "",
      py::arg("prior") = "",
      "Fuse a (K, dims...) stack of binary rater masks with one method.");

  m.def(
      "lmsd",
      [](const U8Array& masks, const py::array& candidate,
         const std::string& distance, const std::string& neighborhood) {
        const RaterStack stack = stack_from_array(masks, neighborhood);
        const ComponentLabels labels = connected_components(stack);
        const DistanceKind kind = distance_kind_from_string(distance);
        if (candidate.dtype().kind() == 'f')
          return lmsd(stack, soft_from_array(F64Array(candidate), neighborhood),
                      kind, labels);
        return lmsd(stack, binary_from_array(U8Array(candidate), neighborhood),
                    kind, labels);
      },
      py::arg("masks"), py::arg("candidate"), py::arg("distance"),
      py::kw_only(), py::arg("neighborhood") = "n8",
      "Local mean squared distance of a candidate mask against the stack. "
      "float64 candidates use the surrogate distances; anything else is "
      "treated as a binary mask.");

  m.def(
      "background_sweep",
      [](const U8Array& masks, const std::string& method,
         const std::vector<std::int64_t>& margins,
         const std::string& neighborhood, const std::string& prior) {
        const RaterStack stack = stack_from_array(masks, neighborhood);
        const MethodSpec spec = spec_from_args(method, "", prior);
        py::list rows;
        for (const BackgroundRow& r : background_sweep(stack, spec, margins)) {
          py::dict row;
          row["margin"] = r.margin;
          row["hard_size"] = r.hard_size;
          row["soft_volume"] = r.soft_volume;
          row["entropy"] = r.entropy;
          row["p_mean"] = r.p_mean;
          row["q_mean"] = r.q_mean;
          rows.append(row);
        }
        return rows;
      },
      py::arg("masks"), py::arg("method"), py::arg("margins"), py::kw_only(),
      py::arg("neighborhood") = "n8", py::arg("prior") = "",
      "Re-run a method under growing background margins; one dict per "
      "margin.");

  m.def(
      "exhaustive_hard",
      [](const U8Array& masks, const std::string& distance,
         const std::string& neighborhood) {
        const RaterStack stack = stack_from_array(masks, neighborhood);
        const HardOracleResult res =
            exhaustive_hard(stack, distance_kind_from_string(distance), {});
        py::dict out;
        out["mask"] = binary_to_array(res.mask);
        out["lmsd"] = res.lmsd;
        return out;
      },
      py::arg("masks"), py::arg("distance"), py::kw_only(),
      py::arg("neighborhood") = "n8",
      "Brute-force optimal hard consensus (small supports only).");

  m.def("preset_names", &preset_names, "Built-in fixture names.");

  m.def(
      "make_preset",
      [](const std::string& name, std::uint64_t seed) {
        const RaterStack stack = make_preset(name, seed);
        py::dict out;
        out["name"] = name;
        out["neighborhood"] = std::string(to_string(stack.grid.neighborhood));
        std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(stack.k())};
        for (auto d : stack.grid.dims) shape.push_back(d);
        py::array_t<std::uint8_t> arr(shape);
        std::uint8_t* dst = arr.mutable_data();
        const std::int64_t n = stack.voxel_count();
        for (int k = 0; k < stack.k(); ++k)
          dst = std::copy(stack.raters[k].values.begin(),
                          stack.raters[k].values.end(), dst);
        (void)n;
        out["masks"] = arr;
        return out;
      },
      py::arg("name"), py::arg("seed") = 0,
      "Materialize a built-in fixture as a (K, dims...) array plus its "
      "neighborhood.");

  m.def(
      "shannon_entropy",
      [](const F64Array& values, const std::string& neighborhood) {
        return shannon_entropy(soft_from_array(values, neighborhood));
      },
      py::arg("values"), py::kw_only(), py::arg("neighborhood") = "n8",
      "Total Shannon entropy (natural log) of a soft mask.");
}
