#include "macchiato/metrics.hpp"

#include <cmath>
#include <limits>

#include "macchiato/errors.hpp"

namespace macchiato {

PrfTriple prf_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  PrfTriple out;
  out.precision = (tp + fp) == 0
                      ? 1.0
                      : static_cast<double>(tp) / static_cast<double>(tp + fp);
  out.recall = (tp + fn) == 0
                   ? 1.0
                   : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double pr = out.precision + out.recall;
  out.f1 = pr == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / pr;
  return out;
}

PrfTriple voxel_prf(const BinaryMask& gt, const BinaryMask& pred) {
  if (!(gt.grid == pred.grid)) throw GridMismatch("voxel_prf grids differ");
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const bool g = gt.values[i] != 0, p = pred.values[i] != 0;
    if (p && g)
      ++tp;
    else if (p)
      ++fp;
    else if (g)
      ++fn;
  }
  return prf_from_counts(tp, fp, fn);
}

LesionPrfReport lesionwise_prf(const BinaryMask& consensus,
                               const RaterStack& stack,
                               const ComponentLabels& labels) {
  if (!(consensus.grid == stack.grid))
    throw GridMismatch("lesionwise_prf grids differ");
  LesionPrfReport rep;
  for (std::int32_t id = 1; id <= labels.count; ++id) {
    const std::vector<std::int64_t> voxels = labels.component_voxels(id);
    for (int k = 0; k < stack.k(); ++k) {
      std::int64_t tp = 0, fp = 0, fn = 0;
      for (auto v : voxels) {
        const bool g = consensus.values[v] != 0;
        const bool p = stack.raters[k].values[v] != 0;
        if (p && g)
          ++tp;
        else if (p)
          ++fp;
        else if (g)
          ++fn;
      }
      rep.rows.push_back({id, k, prf_from_counts(tp, fp, fn)});
    }
  }
  if (!rep.rows.empty()) {
    for (const auto& r : rep.rows) {
      rep.mean.precision += r.prf.precision;
      rep.mean.recall += r.prf.recall;
      rep.mean.f1 += r.prf.f1;
    }
    const double n = static_cast<double>(rep.rows.size());
    rep.mean.precision /= n;
    rep.mean.recall /= n;
    rep.mean.f1 /= n;
  }
  return rep;
}

PrfTriple detection_prf(const BinaryMask& consensus, const BinaryMask& rater) {
  if (!(consensus.grid == rater.grid))
    throw GridMismatch("detection_prf grids differ");
  const ComponentLabels cl = connected_components(consensus);
  const ComponentLabels rl = connected_components(rater);
  std::int64_t tp = 0;
  for (std::int32_t id = 1; id <= cl.count; ++id) {
    bool touched = false;
    for (auto v : cl.component_voxels(id))
      if (rater.values[v]) {
        touched = true;
        break;
      }
    tp += touched ? 1 : 0;
  }
  const std::int64_t fn = cl.count - tp;
  std::int64_t fp = 0;
  for (std::int32_t id = 1; id <= rl.count; ++id) {
    bool touched = false;
    for (auto v : rl.component_voxels(id))
      if (consensus.values[v]) {
        touched = true;
        break;
      }
    fp += touched ? 0 : 1;
  }
  return prf_from_counts(tp, fp, fn);
}

double shannon_entropy(const SoftMask& u) {
  double acc = 0.0;
  for (double v : u.values) {
    if (v > 0.0 && v < 1.0)
      acc -= v * std::log(v) + (1.0 - v) * std::log(1.0 - v);
  }
  return acc;
}

namespace {

double result_size(const FusionResult& r) {
  if (r.soft) return r.soft_mask.volume();
  return static_cast<double>(r.hard_mask.foreground_count());
}

std::int64_t thresholded_size(const FusionResult& r) {
  if (!r.soft) return r.hard_mask.foreground_count();
  std::int64_t n = 0;
  for (double v : r.soft_mask.values)
    if (v > 0.5) ++n;
  return n;
}

}  // namespace

std::vector<SizeRow> size_report(const std::vector<FusionResult>& results,
                                 const FusionResult& reference) {
  const double ref = result_size(reference);
  std::vector<SizeRow> rows;
  for (const auto& r : results) {
    SizeRow row;
    row.method = r.method;
    row.soft = r.soft;
    row.size = result_size(r);
    if (ref != 0.0)
      row.pct_vs_reference = 100.0 * (row.size - ref) / ref;
    else if (row.size == 0.0)
      row.pct_vs_reference = 0.0;
    else
      row.pct_vs_reference = std::numeric_limits<double>::quiet_NaN();
    row.thresholded_size = thresholded_size(r);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace macchiato
