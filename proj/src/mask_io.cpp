#include "macchiato/mask_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "macchiato/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "mask payloads are little-endian; big-endian hosts need a swap");

namespace macchiato {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path strip_known_extension(fs::path p) {
  const auto ext = p.extension().string();
  if (ext == ".json" || ext == ".raw") p.replace_extension();
  return p;
}

json mask_header(const std::vector<std::int64_t>& dims, const char* dtype,
                 const char* kind) {
  return json{{"dims", dims},
              {"order", "row-major"},
              {"dtype", dtype},
              {"kind", kind}};
}

std::vector<char> read_file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot open " + p.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (in.bad()) throw FormatError("read failed on " + p.string());
  return bytes;
}

struct LoadedHeader {
  std::vector<std::int64_t> dims;
  std::string dtype, kind;
};

LoadedHeader read_header(const fs::path& stem) {
  const fs::path hp = fs::path(stem).concat(".json");
  const json h = load_json(hp);
  LoadedHeader out;
  try {
    out.dims = h.at("dims").get<std::vector<std::int64_t>>();
    if (h.at("order").get<std::string>() != "row-major")
      throw FormatError("unsupported order in " + hp.string());
    out.dtype = h.at("dtype").get<std::string>();
    out.kind = h.at("kind").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError("bad mask header " + hp.string() + ": " + e.what());
  }
  if (out.dims.empty() || out.dims.size() > 3)
    throw FormatError("bad dims in " + hp.string());
  for (auto d : out.dims)
    if (d <= 0) throw FormatError("bad dims in " + hp.string());
  return out;
}

std::int64_t dims_product(const std::vector<std::int64_t>& dims) {
  std::int64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

}  // namespace

void save_bytes_atomic(const fs::path& file, const void* data,
                       std::size_t bytes) {
  const fs::path tmp = fs::path(file).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for write");
    out.write(static_cast<const char*>(data),
              static_cast<std::streamsize>(bytes));
    if (!out) throw FormatError("write failed on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec)
    throw FormatError("rename " + tmp.string() + " -> " + file.string() +
                      " failed: " + ec.message());
}

void save_json_atomic(const fs::path& file, const json& doc) {
  const std::string text = doc.dump(2) + "\n";
  save_bytes_atomic(file, text.data(), text.size());
}

json load_json(const fs::path& file) {
  const std::vector<char> bytes = read_file_bytes(file);
  json doc = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (doc.is_discarded())
    throw FormatError("invalid JSON in " + file.string());
  return doc;
}

void save_mask(const fs::path& stem_in, const BinaryMask& mask) {
  const fs::path stem = strip_known_extension(stem_in);
  mask.validate();
  save_json_atomic(fs::path(stem).concat(".json"),
                   mask_header(mask.grid.dims, "u8", "binary"));
  save_bytes_atomic(fs::path(stem).concat(".raw"), mask.values.data(),
                    mask.values.size());
}

void save_mask(const fs::path& stem_in, const SoftMask& mask) {
  const fs::path stem = strip_known_extension(stem_in);
  mask.validate();
  save_json_atomic(fs::path(stem).concat(".json"),
                   mask_header(mask.grid.dims, "f64", "soft"));
  save_bytes_atomic(fs::path(stem).concat(".raw"), mask.values.data(),
                    mask.values.size() * sizeof(double));
}

BinaryMask load_binary_mask(const fs::path& stem_in,
                            Neighborhood neighborhood) {
  const fs::path stem = strip_known_extension(stem_in);
  const LoadedHeader h = read_header(stem);
  if (h.kind != "binary" || h.dtype != "u8")
    throw FormatError(stem.string() + ": expected a binary u8 mask, got " +
                      h.kind + "/" + h.dtype);
  const std::vector<char> bytes =
      read_file_bytes(fs::path(stem).concat(".raw"));
  const std::int64_t n = dims_product(h.dims);
  if (static_cast<std::int64_t>(bytes.size()) != n)
    throw FormatError(stem.string() + ".raw: payload length mismatch");
  std::vector<std::uint8_t> values(bytes.begin(), bytes.end());
  for (auto v : values)
    if (v > 1)
      throw FormatError(stem.string() + ".raw: binary payload not 0/1");
  try {
    return BinaryMask(Grid(h.dims, neighborhood), std::move(values));
  } catch (const Error& e) {
    throw FormatError(stem.string() + ": " + e.what());
  }
}

SoftMask load_soft_mask(const fs::path& stem_in, Neighborhood neighborhood) {
  const fs::path stem = strip_known_extension(stem_in);
  const LoadedHeader h = read_header(stem);
  if (h.kind != "soft" || h.dtype != "f64")
    throw FormatError(stem.string() + ": expected a soft f64 mask, got " +
                      h.kind + "/" + h.dtype);
  const std::vector<char> bytes =
      read_file_bytes(fs::path(stem).concat(".raw"));
  const std::int64_t n = dims_product(h.dims);
  if (static_cast<std::int64_t>(bytes.size()) !=
      n * static_cast<std::int64_t>(sizeof(double)))
    throw FormatError(stem.string() + ".raw: payload length mismatch");
  std::vector<double> values(n);
  std::memcpy(values.data(), bytes.data(), bytes.size());
  try {
    return SoftMask(Grid(h.dims, neighborhood), std::move(values));
  } catch (const Error& e) {
    throw FormatError(stem.string() + ": " + e.what());
  }
}

Manifest load_manifest(const fs::path& file) {
  const json doc = load_json(file);
  Manifest m;
  try {
    m.name = doc.at("name").get<std::string>();
    m.dims = doc.at("dims").get<std::vector<std::int64_t>>();
    m.neighborhood =
        neighborhood_from_string(doc.at("neighborhood").get<std::string>());
    m.raters = doc.at("raters").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError("bad manifest " + file.string() + ": " + e.what());
  } catch (const Error& e) {
    throw FormatError("bad manifest " + file.string() + ": " + e.what());
  }
  if (m.raters.empty())
    throw FormatError("manifest " + file.string() + " lists no raters");
  return m;
}

void save_manifest(const fs::path& file, const Manifest& m) {
  if (m.raters.empty()) throw FormatError("manifest lists no raters");
  save_json_atomic(file, json{{"name", m.name},
                              {"dims", m.dims},
                              {"neighborhood", to_string(m.neighborhood)},
                              {"raters", m.raters}});
}

RaterStack load_stack(const Manifest& m, const fs::path& base_dir) {
  Grid grid;
  try {
    grid = Grid(m.dims, m.neighborhood);
  } catch (const Error& e) {
    throw FormatError(std::string("bad manifest grid: ") + e.what());
  }
  RaterStack stack;
  stack.grid = grid;
  for (const auto& rel : m.raters) {
    BinaryMask rater = load_binary_mask(base_dir / rel, m.neighborhood);
    if (!(rater.grid == grid))
      throw FormatError("rater " + rel + " dims do not match the manifest");
    stack.raters.push_back(std::move(rater));
  }
  stack.validate();
  return stack;
}

RaterStack load_stack(const fs::path& manifest_file) {
  const Manifest m = load_manifest(manifest_file);
  return load_stack(m, fs::absolute(manifest_file).parent_path());
}

}  // namespace macchiato
