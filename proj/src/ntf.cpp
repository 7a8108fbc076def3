#include "minkray/ntf.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace minkray {
namespace {

using json = nlohmann::json;

constexpr int kVersion = 1;
constexpr std::size_t kMaxHeader = std::size_t(1) << 20;

// ---- byte level -----------------------------------------------------------

void put_le(std::string& out, const double* data, std::size_t count) {
  const std::size_t start = out.size();
  out.resize(start + 8 * count);
  char* dst = out.data() + start;
  for (std::size_t k = 0; k < count; ++k) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(data[k]);
    for (int b = 0; b < 8; ++b) dst[8 * k + b] = char((bits >> (8 * b)) & 0xff);
  }
}

void get_le(const char* src, double* data, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t(static_cast<unsigned char>(src[8 * k + b])) << (8 * b);
    data[k] = std::bit_cast<double>(bits);
  }
}

void put_array(std::string& out, const Array& a) { put_le(out, a.data(), std::size_t(a.size())); }

void put_carray(std::string& out, const CArray& a) {
  // std::complex<double> is layout-compatible with double[2]
  put_le(out, reinterpret_cast<const double*>(a.data()), 2 * std::size_t(a.size()));
}

void write_file(const std::string& path, const json& header, const std::string& payload) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("ntf: cannot open '" + path + "' for writing");
  const std::string line = header.dump() + "\n";
  os.write(line.data(), std::streamsize(line.size()));
  os.write(payload.data(), std::streamsize(payload.size()));
  if (!os) throw Error("ntf: write failed for '" + path + "'");
}

struct RawFile {
  json header;
  std::string payload;
};

RawFile read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("ntf: cannot open '" + path + "'");
  std::string line;
  char c = 0;
  while (is.get(c) && c != '\n') {
    line.push_back(c);
    if (line.size() > kMaxHeader) throw FormatError("", "header line exceeds 1 MiB");
  }
  if (c != '\n') throw FormatError("", "missing header terminator (truncated file?)");
  RawFile raw;
  try {
    raw.header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError("", std::string("header is not valid JSON: ") + e.what());
  }
  if (!raw.header.is_object()) throw FormatError("", "header must be a JSON object");
  raw.payload.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
  return raw;
}

// ---- header access ---------------------------------------------------------

const json& require(const json& h, const char* key) {
  const auto it = h.find(key);
  if (it == h.end()) throw FormatError(key, "missing");
  return *it;
}

long long get_int(const json& h, const char* key) {
  const json& v = require(h, key);
  if (!v.is_number_integer()) throw FormatError(key, "expected an integer");
  return v.get<long long>();
}

double get_double(const json& h, const char* key) {
  const json& v = require(h, key);
  if (!v.is_number()) throw FormatError(key, "expected a number");
  return v.get<double>();
}

std::string get_string(const json& h, const char* key) {
  const json& v = require(h, key);
  if (!v.is_string()) throw FormatError(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_doubles(const json& h, const char* key, std::size_t count) {
  const json& v = require(h, key);
  if (!v.is_array() || v.size() != count)
    throw FormatError(key, "expected an array of " + std::to_string(count) + " numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw FormatError(key, "expected numeric entries");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<Index> get_shape(const json& h, std::size_t count) {
  const json& v = require(h, "shape");
  if (!v.is_array() || v.size() != count)
    throw FormatError("shape", "expected an array of " + std::to_string(count) + " integers");
  std::vector<Index> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 1) throw FormatError("shape", "entries must be positive integers");
    out.push_back(Index(e.get<long long>()));
  }
  return out;
}

json base_header(const std::string& kind, int n, const std::vector<Index>& shape, const std::vector<double>& spacing,
                 const std::vector<double>& origin, Index components, const char* dtype) {
  json h;
  h["version"] = kVersion;
  h["kind"] = kind;
  h["n"] = n;
  h["shape"] = shape;
  h["spacing"] = spacing;
  h["origin"] = origin;
  h["components"] = components;
  h["order"] = "upper-lex";
  h["dtype"] = dtype;
  return h;
}

json grid_header(const std::string& kind, const Grid& g, Index components, const char* dtype) {
  return base_header(kind, g.n(), g.shape(), g.spacings(), g.origins(), components, dtype);
}

struct Common {
  int n = 0;
  Index components = 0;
};

Common check_common(const json& h, const std::string& kind, const char* dtype) {
  if (get_int(h, "version") != kVersion) throw FormatError("version", "unsupported version (expected 1)");
  const std::string k = get_string(h, "kind");
  if (k != kind) throw FormatError("kind", "expected '" + kind + "', found '" + k + "'");
  if (get_string(h, "order") != "upper-lex") throw FormatError("order", "expected 'upper-lex'");
  if (get_string(h, "dtype") != dtype) throw FormatError("dtype", std::string("expected '") + dtype + "'");
  Common c;
  const long long n = get_int(h, "n");
  if (n < 1 || n > 64) throw FormatError("n", "out of range");
  c.n = int(n);
  const long long comps = get_int(h, "components");
  if (comps < 1) throw FormatError("components", "must be positive");
  c.components = Index(comps);
  return c;
}

Grid read_grid(const json& h, int n) {
  const std::size_t d = std::size_t(n) + 1;
  auto shape = get_shape(h, d);
  auto spacing = get_doubles(h, "spacing", d);
  auto origin = get_doubles(h, "origin", d);
  try {
    return Grid(n, std::move(shape), std::move(spacing), std::move(origin));
  } catch (const InvalidArgument& e) {
    throw FormatError("shape", e.what());
  }
}

void expect_components(Index found, Index expected) {
  if (found != expected)
    throw FormatError("components", "expected " + std::to_string(expected) + ", found " + std::to_string(found));
}

// Checks the payload size and decodes `count` doubles.
std::vector<double> decode(const std::string& payload, std::size_t count) {
  const std::size_t want = 8 * count;
  if (payload.size() < want)
    throw FormatError("", "truncated payload: expected " + std::to_string(want) + " bytes, found " +
                              std::to_string(payload.size()));
  if (payload.size() > want)
    throw FormatError("", "payload has " + std::to_string(payload.size() - want) + " trailing bytes");
  std::vector<double> out(count);
  get_le(payload.data(), out.data(), count);
  return out;
}

std::vector<Array> split(const std::vector<double>& flat, Index components, Index size) {
  std::vector<Array> out;
  for (Index c = 0; c < components; ++c) out.push_back(Eigen::Map<const Array>(flat.data() + c * size, size));
  return out;
}

}  // namespace

void write_field(const std::string& path, const ScalarField& f) {
  std::string payload;
  put_array(payload, f.values());
  write_file(path, grid_header("scalar", f.grid(), 1, "f64le"), payload);
}

void write_field(const std::string& path, const VectorField& f) {
  std::string payload;
  for (int i = 0; i < f.count(); ++i) put_array(payload, f[i]);
  write_file(path, grid_header("vector", f.grid(), f.count(), "f64le"), payload);
}

void write_field(const std::string& path, const SymTensorField& f) {
  std::string payload;
  for (Index k = 0; k < f.count(); ++k) put_array(payload, f.component(k));
  json h = grid_header("tensor", f.grid(), f.count(), "f64le");
  h["compact_support"] = f.compact_support();
  write_file(path, h, payload);
}

void write_field(const std::string& path, const SpectralField& f) {
  std::string payload;
  for (Index k = 0; k < f.count(); ++k) put_carray(payload, f.component(k));
  write_file(path, grid_header("spectral", f.grid(), f.count(), "c128le"), payload);
}

void write_field(const std::string& path, const Slab& s) {
  const int n = s.direction.n();
  json h = base_header("slab", n, s.counts, std::vector<double>(std::size_t(n), s.spacing),
                       std::vector<double>(s.anchor.data(), s.anchor.data() + s.anchor.size()), 1, "f64le");
  h["direction"] = std::vector<double>(s.direction.theta().data(), s.direction.theta().data() + n);
  std::vector<std::vector<double>> cols;
  for (Index k = 0; k < s.basis.cols(); ++k) cols.emplace_back(s.basis.col(k).data(), s.basis.col(k).data() + s.basis.rows());
  h["basis"] = cols;
  h["covers_support"] = s.covers_support;
  h["required_half_extent"] = s.required_half_extent;
  std::string payload;
  put_array(payload, s.values);
  write_file(path, h, payload);
}

void write_field(const std::string& path, const DeterminantMap& m) {
  const double step = m.resolution > 1 ? 2.0 * m.half_width / double(m.resolution - 1) : 0.0;
  const Index r = m.resolution;
  json h = base_header("detmap", 3, {r, r, r}, {step, step, step}, {-m.half_width, -m.half_width, -m.half_width}, 1,
                       "f64le");
  h["half_width"] = m.half_width;
  h["resolution"] = m.resolution;
  h["at_origin"] = m.at_origin;
  std::string payload;
  put_le(payload, m.values.data(), m.values.size());
  write_file(path, h, payload);
}

std::string read_kind(const std::string& path) { return get_string(read_file(path).header, "kind"); }

ScalarField read_scalar(const std::string& path) {
  const RawFile raw = read_file(path);
  const Common c = check_common(raw.header, "scalar", "f64le");
  expect_components(c.components, 1);
  const Grid g = read_grid(raw.header, c.n);
  const auto flat = decode(raw.payload, std::size_t(g.size()));
  return ScalarField(g, split(flat, 1, g.size())[0]);
}

VectorField read_vector(const std::string& path) {
  const RawFile raw = read_file(path);
  const Common c = check_common(raw.header, "vector", "f64le");
  const Grid g = read_grid(raw.header, c.n);
  const auto flat = decode(raw.payload, std::size_t(c.components * g.size()));
  return VectorField(g, split(flat, c.components, g.size()));
}

SymTensorField read_tensor(const std::string& path) {
  const RawFile raw = read_file(path);
  const Common c = check_common(raw.header, "tensor", "f64le");
  expect_components(c.components, sym_components(c.n));
  const Grid g = read_grid(raw.header, c.n);
  const auto flat = decode(raw.payload, std::size_t(c.components * g.size()));
  SymTensorField F(g, split(flat, c.components, g.size()));
  if (const auto it = raw.header.find("compact_support"); it != raw.header.end()) {
    if (!it->is_boolean()) throw FormatError("compact_support", "expected a boolean");
    F.declare_compact_support(it->get<bool>());
  }
  return F;
}

SpectralField read_spectral(const std::string& path) {
  const RawFile raw = read_file(path);
  const Common c = check_common(raw.header, "spectral", "c128le");
  expect_components(c.components, sym_components(c.n));
  const Grid g = read_grid(raw.header, c.n);
  const auto flat = decode(raw.payload, std::size_t(2 * c.components * g.size()));
  std::vector<CArray> comps;
  for (Index k = 0; k < c.components; ++k) {
    CArray a(g.size());
    std::memcpy(static_cast<void*>(a.data()), flat.data() + 2 * k * g.size(), sizeof(double) * 2 * std::size_t(g.size()));
    comps.push_back(std::move(a));
  }
  return SpectralField(g, std::move(comps));
}

Slab read_slab(const std::string& path) {
  const RawFile raw = read_file(path);
  const Common c = check_common(raw.header, "slab", "f64le");
  expect_components(c.components, 1);
  const int n = c.n;
  const auto theta = get_doubles(raw.header, "direction", std::size_t(n));
  const Direction d = [&] {
    try {
      return Direction(Eigen::Map<const Vec>(theta.data(), n));
    } catch (const InvalidArgument& e) {
      throw FormatError("direction", e.what());
    }
  }();
  Slab s{d, Mat(), Vec(), 0.0, {}, Array(), true, 0.0};
  const json& basis = require(raw.header, "basis");
  if (!basis.is_array() || basis.size() != std::size_t(n)) throw FormatError("basis", "expected n columns");
  s.basis.resize(n + 1, n);
  for (int k = 0; k < n; ++k) {
    const json& col = basis[std::size_t(k)];
    if (!col.is_array() || col.size() != std::size_t(n) + 1) throw FormatError("basis", "expected columns of length n+1");
    for (int i = 0; i <= n; ++i) {
      if (!col[std::size_t(i)].is_number()) throw FormatError("basis", "expected numeric entries");
      s.basis(i, k) = col[std::size_t(i)].get<double>();
    }
  }
  const auto anchor = get_doubles(raw.header, "origin", std::size_t(n) + 1);
  s.anchor = Eigen::Map<const Vec>(anchor.data(), n + 1);
  const auto spacing = get_doubles(raw.header, "spacing", std::size_t(n));
  for (double h : spacing)
    if (!(h > 0.0) || h != spacing[0]) throw FormatError("spacing", "expected equal positive entries");
  s.spacing = spacing[0];
  s.counts = get_shape(raw.header, std::size_t(n));
  Index size = 1;
  for (Index m : s.counts) size *= m;
  const auto flat = decode(raw.payload, std::size_t(size));
  s.values = Eigen::Map<const Array>(flat.data(), size);
  const json& cover = require(raw.header, "covers_support");
  if (!cover.is_boolean()) throw FormatError("covers_support", "expected a boolean");
  s.covers_support = cover.get<bool>();
  s.required_half_extent = get_double(raw.header, "required_half_extent");
  return s;
}

DeterminantMap read_detmap(const std::string& path) {
  const RawFile raw = read_file(path);
  const Common c = check_common(raw.header, "detmap", "f64le");
  if (c.n != 3) throw FormatError("n", "determinant maps are defined for n = 3");
  expect_components(c.components, 1);
  DeterminantMap m;
  m.half_width = get_double(raw.header, "half_width");
  const long long r = get_int(raw.header, "resolution");
  if (r < 1) throw FormatError("resolution", "must be positive");
  m.resolution = int(r);
  const auto shape = get_shape(raw.header, 3);
  for (Index s : shape)
    if (s != r) throw FormatError("shape", "must equal (resolution, resolution, resolution)");
  m.at_origin = get_double(raw.header, "at_origin");
  m.values = decode(raw.payload, std::size_t(r * r * r));
  const auto it = std::min_element(m.values.begin(), m.values.end());
  m.min_abs = *it;
  m.argmin = Index(it - m.values.begin());
  return m;
}

}  // namespace minkray
