// Command-line front end: fuse, metrics, bg-study, bench-heuristics,
// gen-fixtures. Exit codes: 0 ok, 2 bad options, 3 I/O or format trouble.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <zlib.h>

#include "macchiato/errors.hpp"
#include "macchiato/fixtures.hpp"
#include "macchiato/mask_io.hpp"
#include "macchiato/metrics.hpp"
#include "macchiato/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace macchiato;

namespace {

constexpr const char* kPrfConventions =
    "precision=1 when TP=FP=0; recall=1 when TP=FN=0; "
    "f1=0 when precision+recall=0; entropy in nats";

class OptionConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

RaterStack load_stack_with_override(const fs::path& manifest_path,
                                    const std::string& neighborhood,
                                    Manifest* out_manifest) {
  Manifest m = load_manifest(manifest_path);
  if (!neighborhood.empty())
    m.neighborhood = neighborhood_from_string(neighborhood);
  if (out_manifest) *out_manifest = m;
  return load_stack(m, fs::absolute(manifest_path).parent_path());
}

json prf_json(const PrfTriple& t) {
  return json{{"precision", t.precision},
              {"recall", t.recall},
              {"f1", t.f1}};
}

// ---- PNG debug export (greyscale coverage + consensus contour) -----------

void png_chunk(std::ostream& out, const char type[4],
               const std::vector<unsigned char>& data) {
  const auto be32 = [&](std::uint32_t v) {
    out.put(static_cast<char>(v >> 24));
    out.put(static_cast<char>(v >> 16));
    out.put(static_cast<char>(v >> 8));
    out.put(static_cast<char>(v));
  };
  be32(static_cast<std::uint32_t>(data.size()));
  out.write(type, 4);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(type), 4);
  if (!data.empty()) crc = crc32(crc, data.data(), uInt(data.size()));
  be32(static_cast<std::uint32_t>(crc));
}

void write_grey_png(const fs::path& path, std::int64_t width,
                    std::int64_t height,
                    const std::vector<unsigned char>& pixels) {
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(height * (width + 1)));
  for (std::int64_t r = 0; r < height; ++r) {
    raw.push_back(0);  // filter type none
    for (std::int64_t c = 0; c < width; ++c)
      raw.push_back(pixels[static_cast<std::size_t>(r * width + c)]);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> packed(bound);
  if (compress2(packed.data(), &bound, raw.data(),
                static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw FormatError("png compression failed");
  packed.resize(bound);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string());
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n',
                                       0x1a, '\n'};
  out.write(reinterpret_cast<const char*>(sig), 8);
  std::vector<unsigned char> ihdr(13, 0);
  const auto put32 = [&](std::size_t at, std::uint32_t v) {
    ihdr[at] = static_cast<unsigned char>(v >> 24);
    ihdr[at + 1] = static_cast<unsigned char>(v >> 16);
    ihdr[at + 2] = static_cast<unsigned char>(v >> 8);
    ihdr[at + 3] = static_cast<unsigned char>(v);
  };
  put32(0, static_cast<std::uint32_t>(width));
  put32(4, static_cast<std::uint32_t>(height));
  ihdr[8] = 8;  // bit depth, greyscale
  png_chunk(out, "IHDR", ihdr);
  png_chunk(out, "IDAT", packed);
  png_chunk(out, "IEND", {});
  if (!out) throw FormatError("write failed on " + path.string());
}

void export_debug_png(const fs::path& path, const RaterStack& stack,
                      const FusionResult& result) {
  const Grid& g = stack.grid;
  // 3D grids export the middle axis-0 slice; 1D grids a single row.
  const int nd = g.ndim();
  const std::int64_t height = nd >= 2 ? g.dims[nd - 2] : 1;
  const std::int64_t width = g.dims[nd - 1];
  const std::int64_t slice = nd == 3 ? g.dims[0] / 2 : 0;
  const auto flat = [&](std::int64_t r, std::int64_t c) {
    Coords co{0, 0, 0};
    if (nd == 3)
      co = {slice, r, c};
    else if (nd == 2)
      co = {r, c, 0};
    else
      co = {c, 0, 0};
    return g.flat(co);
  };
  const auto consensus_at = [&](std::int64_t r, std::int64_t c) {
    const std::int64_t i = flat(r, c);
    return result.soft ? result.soft_mask.values[i] > 0.5
                       : result.hard_mask.values[i] != 0;
  };
  std::vector<unsigned char> pix(
      static_cast<std::size_t>(width * height), 0);
  for (std::int64_t r = 0; r < height; ++r)
    for (std::int64_t c = 0; c < width; ++c) {
      int votes = 0;
      for (const auto& rater : stack.raters)
        votes += rater.values[flat(r, c)] ? 1 : 0;
      double grey = 160.0 * votes / stack.k();
      bool contour = false;
      if (consensus_at(r, c)) {
        grey = std::max(grey, 60.0);
        for (std::int64_t dr = -1; dr <= 1 && !contour; ++dr)
          for (std::int64_t dc = -1; dc <= 1 && !contour; ++dc) {
            const std::int64_t rr = r + dr, cc = c + dc;
            if (rr < 0 || rr >= height || cc < 0 || cc >= width ||
                !consensus_at(rr, cc))
              contour = true;
          }
      }
      pix[static_cast<std::size_t>(r * width + c)] =
          contour ? 255 : static_cast<unsigned char>(std::lround(grey));
    }
  write_grey_png(path, width, height, pix);
}

// ---- subcommands ---------------------------------------------------------

struct FuseArgs {
  std::string manifest, method, heuristic, neighborhood, prior, out, report,
      debug_png;
  bool heuristic_given = false, prior_given = false;
};

int cmd_fuse(const FuseArgs& a) {
  if (a.heuristic_given && a.method.rfind("macchiato-", 0) != 0)
    throw OptionConflict("heuristic requires a macchiato method");
  if (a.prior_given && a.method != "mml-staple")
    throw OptionConflict("prior requires the mml-staple method");
  MethodSpec spec = method_spec_from_name(a.method);
  if (a.heuristic_given)
    spec.macchiato.heuristic = heuristic_from_string(a.heuristic);
  if (a.prior_given) spec.prior = prior_from_string(a.prior);

  Manifest manifest;
  const RaterStack stack =
      load_stack_with_override(a.manifest, a.neighborhood, &manifest);
  const double t0 = now_ms();
  const FusionResult result = run_method(stack, spec);
  const double elapsed = now_ms() - t0;

  if (result.soft)
    save_mask(a.out, result.soft_mask);
  else
    save_mask(a.out, result.hard_mask);
  if (!a.debug_png.empty()) export_debug_png(a.debug_png, stack, result);

  std::int64_t thresholded = 0;
  double volume = 0.0;
  if (result.soft) {
    volume = result.soft_mask.volume();
    for (double v : result.soft_mask.values)
      if (v > 0.5) ++thresholded;
  } else {
    thresholded = result.hard_mask.foreground_count();
    volume = static_cast<double>(thresholded);
  }

  json rep{{"schema_version", kReportSchemaVersion},
           {"command", "fuse"},
           {"method", spec.method},
           {"config",
            {{"manifest", manifest.name},
             {"dims", manifest.dims},
             {"neighborhood", to_string(manifest.neighborhood)},
             {"raters", stack.k()}}},
           {"result",
            {{"kind", result.soft ? "soft" : "binary"},
             {"volume", volume},
             {"thresholded_size", thresholded},
             {"out", a.out}}},
           {"timing_ms", elapsed}};
  if (spec.is_macchiato()) {
    rep["config"]["heuristic"] = to_string(spec.macchiato.heuristic);
    rep["config"]["distance"] = to_string(spec.macchiato.distance);
    rep["result"]["lmsd"] = result.lmsd;
    rep["result"]["component_lmsd"] = result.component_lmsd;
  }
  if (spec.is_staple()) {
    rep["result"]["p"] = result.p;
    rep["result"]["q"] = result.q;
  }
  if (spec.method == "mml-staple")
    rep["config"]["prior"] = a.prior_given ? a.prior : "uninformative";
  if (!a.report.empty()) save_json_atomic(a.report, rep);

  std::cout << "method=" << spec.method << " kind="
            << (result.soft ? "soft" : "binary") << " volume=" << volume
            << " thresholded_size=" << thresholded;
  if (spec.is_macchiato()) std::cout << " lmsd=" << result.lmsd;
  std::cout << " out=" << a.out << "\n";
  return 0;
}

struct MetricsArgs {
  std::string manifest, consensus, mode, neighborhood, report;
};

int cmd_metrics(const MetricsArgs& a) {
  Manifest manifest;
  const RaterStack stack =
      load_stack_with_override(a.manifest, a.neighborhood, &manifest);
  const Neighborhood nb = stack.grid.neighborhood;

  // Peek at the header to learn the stored kind.
  fs::path stem = a.consensus;
  if (stem.extension() == ".json" || stem.extension() == ".raw")
    stem.replace_extension();
  const json header = load_json(fs::path(stem).concat(".json"));
  const std::string kind = header.value("kind", "");
  const bool soft = kind == "soft";
  if (!soft && kind != "binary")
    throw FormatError("consensus header has unknown kind '" + kind + "'");

  BinaryMask hard;
  SoftMask softmask;
  if (soft)
    softmask = load_soft_mask(stem, nb);
  else
    hard = load_binary_mask(stem, nb);
  if (!((soft ? softmask.grid : hard.grid) == stack.grid))
    throw FormatError("consensus grid does not match the manifest");

  json rep{{"schema_version", kReportSchemaVersion},
           {"command", "metrics"},
           {"mode", a.mode},
           {"conventions", kPrfConventions},
           {"manifest", manifest.name}};

  if (a.mode == "voxel" || a.mode == "lesion" || a.mode == "detect") {
    if (soft)
      throw OptionConflict("mode " + a.mode + " requires a binary consensus");
    if (a.mode == "voxel") {
      json rows = json::array();
      PrfTriple mean;
      for (int k = 0; k < stack.k(); ++k) {
        const PrfTriple t = voxel_prf(hard, stack.raters[k]);
        rows.push_back({{"rater", k},
                        {"precision", t.precision},
                        {"recall", t.recall},
                        {"f1", t.f1}});
        mean.precision += t.precision;
        mean.recall += t.recall;
        mean.f1 += t.f1;
      }
      mean.precision /= stack.k();
      mean.recall /= stack.k();
      mean.f1 /= stack.k();
      rep["rows"] = rows;
      rep["mean"] = prf_json(mean);
    } else if (a.mode == "lesion") {
      const ComponentLabels labels = connected_components(stack);
      const LesionPrfReport lr = lesionwise_prf(hard, stack, labels);
      json rows = json::array();
      for (const auto& r : lr.rows)
        rows.push_back({{"lesion", r.component_id},
                        {"rater", r.rater},
                        {"precision", r.prf.precision},
                        {"recall", r.prf.recall},
                        {"f1", r.prf.f1}});
      rep["rows"] = rows;
      rep["mean"] = prf_json(lr.mean);
    } else {
      json rows = json::array();
      for (int k = 0; k < stack.k(); ++k) {
        const PrfTriple t = detection_prf(hard, stack.raters[k]);
        rows.push_back({{"rater", k},
                        {"precision", t.precision},
                        {"recall", t.recall},
                        {"f1", t.f1}});
      }
      rep["rows"] = rows;
    }
  } else if (a.mode == "entropy") {
    double h = 0.0;
    if (soft) h = shannon_entropy(softmask);
    rep["entropy"] = h;
  } else if (a.mode == "sizes") {
    FusionResult loaded;
    loaded.method = stem.filename().string();
    loaded.soft = soft;
    if (soft)
      loaded.soft_mask = softmask;
    else
      loaded.hard_mask = hard;
    MethodSpec mv = method_spec_from_name("mv");
    const FusionResult reference = run_method(stack, mv);
    json rows = json::array();
    for (const auto& r : size_report({reference, loaded}, reference))
      rows.push_back({{"method", r.method},
                      {"soft", r.soft},
                      {"size", r.size},
                      {"pct_vs_reference", r.pct_vs_reference},
                      {"thresholded_size", r.thresholded_size}});
    rep["reference"] = "mv";
    rep["rows"] = rows;
  } else {
    throw OptionConflict("unknown mode '" + a.mode + "'");
  }

  if (!a.report.empty()) save_json_atomic(a.report, rep);
  std::cout << rep.dump(2) << "\n";
  return 0;
}

struct BgArgs {
  std::string manifest, method, neighborhood, prior, report;
  std::vector<std::int64_t> margins;
  bool prior_given = false;
};

int cmd_bg_study(const BgArgs& a) {
  if (a.prior_given && a.method != "mml-staple")
    throw OptionConflict("prior requires the mml-staple method");
  MethodSpec spec = method_spec_from_name(a.method);
  if (a.prior_given) spec.prior = prior_from_string(a.prior);
  Manifest manifest;
  const RaterStack stack =
      load_stack_with_override(a.manifest, a.neighborhood, &manifest);

  const std::vector<BackgroundRow> rows =
      background_sweep(stack, spec, a.margins);
  json jrows = json::array();
  for (const auto& r : rows)
    jrows.push_back({{"margin", r.margin},
                     {"hard_size", r.hard_size},
                     {"soft_volume", r.soft_volume},
                     {"entropy", r.entropy},
                     {"p_mean", r.p_mean},
                     {"q_mean", r.q_mean}});
  json rep{{"schema_version", kReportSchemaVersion},
           {"command", "bg-study"},
           {"method", a.method},
           {"manifest", manifest.name},
           {"rows", jrows}};

  if (a.method == "mml-staple" && !a.margins.empty()) {
    // Classify every vote pattern at the largest margin.
    const std::int64_t margin = a.margins.back();
    std::int64_t padded = 1;
    for (auto d : stack.grid.dims) padded *= d + 2 * margin;
    StapleOptions opts = spec.staple;
    opts.extra_background = padded - stack.grid.voxel_count();
    const MmlResult conv = mml_staple(stack, spec.prior, opts);
    json jl = json::array();
    for (const auto& r : limit_classification(stack, spec.prior, conv,
                                              opts.extra_background))
      jl.push_back({{"pattern", r.pattern},
                    {"count", r.count},
                    {"leading_sign", r.leading_sign},
                    {"limit_logit", r.limit},
                    {"classification", r.classification}});
    rep["limit_classification"] = jl;
  }

  if (!a.report.empty()) save_json_atomic(a.report, rep);
  std::cout << rep.dump(2) << "\n";
  return 0;
}

struct BenchArgs {
  std::vector<std::string> manifests;
  std::string distance = "jaccard";
  std::vector<std::string> heuristics{"subcrown", "crown", "voxel"};
  std::string neighborhood, report;
};

int cmd_bench(const BenchArgs& a) {
  const DistanceKind kind = distance_kind_from_string(a.distance);
  if (!is_binary_kind(kind))
    throw OptionConflict("bench-heuristics needs a jaccard or dice distance");
  std::vector<Heuristic> hs;
  for (const auto& h : a.heuristics) hs.push_back(heuristic_from_string(h));
  std::vector<RaterStack> stacks;
  std::vector<std::string> names;
  for (const auto& m : a.manifests) {
    Manifest manifest;
    stacks.push_back(load_stack_with_override(m, a.neighborhood, &manifest));
    names.push_back(manifest.name);
  }

  const std::vector<BenchRow> rows = bench_heuristics(stacks, kind, hs);
  json jrows = json::array();
  for (const auto& r : rows)
    jrows.push_back({{"label", r.label},
                     {"lmsd", r.lmsd},
                     {"mean_lmsd", r.mean_lmsd},
                     {"wall_ms", r.wall_ms}});
  json rep{{"schema_version", kReportSchemaVersion},
           {"command", "bench-heuristics"},
           {"distance", a.distance},
           {"instances", names},
           {"rows", jrows}};
  if (!a.report.empty()) save_json_atomic(a.report, rep);
  std::cout << rep.dump(2) << "\n";
  return 0;
}

struct GenArgs {
  std::string preset, out;
  std::uint64_t seed = 1;
};

int cmd_gen_fixtures(const GenArgs& a) {
  RaterStack stack;
  try {
    stack = make_preset(a.preset, a.seed);
  } catch (const DomainError& e) {
    throw OptionConflict(e.what());
  }
  const fs::path manifest = write_fixture(stack, a.preset, a.out);
  std::cout << manifest.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus fusion of multi-rater binary segmentations"};
  app.require_subcommand(1);

  FuseArgs fuse;
  CLI::App* cf = app.add_subcommand("fuse", "Fuse raters into a consensus");
  cf->add_option("manifest", fuse.manifest, "Rater manifest JSON")->required();
  cf->add_option("--method", fuse.method, "Fusion method")->required();
  CLI::Option* fh = cf->add_option("--heuristic", fuse.heuristic,
                                   "subcrown, crown, or voxel");
  CLI::Option* fp = cf->add_option("--prior", fuse.prior,
                                   "uninformative, avg, or power:A:alpha");
  cf->add_option("--neighborhood", fuse.neighborhood,
                 "n4, n8, n6, n26, or slicewise");
  cf->add_option("--out", fuse.out, "Output mask stem")->required();
  cf->add_option("--report", fuse.report, "Report JSON path");
  cf->add_option("--debug-png", fuse.debug_png,
                 "Greyscale debug overlay (2D slice)");

  MetricsArgs met;
  CLI::App* cm = app.add_subcommand("metrics", "Evaluate a consensus");
  cm->add_option("manifest", met.manifest, "Rater manifest JSON")->required();
  cm->add_option("--consensus", met.consensus, "Consensus mask stem")
      ->required();
  cm->add_option("--mode", met.mode,
                 "voxel, lesion, detect, entropy, or sizes")
      ->required();
  cm->add_option("--neighborhood", met.neighborhood,
                 "n4, n8, n6, n26, or slicewise");
  cm->add_option("--report", met.report, "Report JSON path");

  BgArgs bg;
  CLI::App* cb = app.add_subcommand("bg-study",
                                    "Background-size sweep for one method");
  cb->add_option("manifest", bg.manifest, "Rater manifest JSON")->required();
  cb->add_option("--method", bg.method, "Fusion method")->required();
  cb->add_option("--margins", bg.margins, "Padding margins, ascending")
      ->required()
      ->delimiter(',');
  CLI::Option* bp = cb->add_option("--prior", bg.prior,
                                   "uninformative, avg, or power:A:alpha");
  cb->add_option("--neighborhood", bg.neighborhood,
                 "n4, n8, n6, n26, or slicewise");
  cb->add_option("--report", bg.report, "Report JSON path");

  BenchArgs bench;
  CLI::App* ch = app.add_subcommand("bench-heuristics",
                                    "Compare heuristics across fixtures");
  ch->add_option("manifests", bench.manifests, "Manifest JSON files")
      ->required();
  ch->add_option("--distance", bench.distance, "jaccard or dice");
  ch->add_option("--heuristics", bench.heuristics,
                 "Subset of subcrown, crown, voxel")
      ->delimiter(',');
  ch->add_option("--neighborhood", bench.neighborhood,
                 "n4, n8, n6, n26, or slicewise");
  ch->add_option("--report", bench.report, "Report JSON path");

  GenArgs gen;
  CLI::App* cg = app.add_subcommand("gen-fixtures",
                                    "Write a synthetic fixture");
  cg->add_option("--preset", gen.preset,
                 "f1, rings, blobs, empty-rater, or two-components")
      ->required();
  cg->add_option("--seed", gen.seed, "Generator seed");
  cg->add_option("--out", gen.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  fuse.heuristic_given = fh->count() > 0;
  fuse.prior_given = fp->count() > 0;
  bg.prior_given = bp->count() > 0;

  try {
    if (app.got_subcommand(cf)) return cmd_fuse(fuse);
    if (app.got_subcommand(cm)) return cmd_metrics(met);
    if (app.got_subcommand(cb)) return cmd_bg_study(bg);
    if (app.got_subcommand(ch)) return cmd_bench(bench);
    if (app.got_subcommand(cg)) return cmd_gen_fixtures(gen);
  } catch (const OptionConflict& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    // Remaining library domain errors stem from option values.
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
