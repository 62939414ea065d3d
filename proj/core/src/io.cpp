#include "dvfinv/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "dvfinv/error.hpp"

namespace dvfinv {
namespace {

constexpr std::string_view kMagic = "dvfinv-field 1";
constexpr std::string_view kLayout = "component-major x-fastest";
constexpr std::string_view kByteOrder = "little-endian";

[[noreturn]] void mismatch(const std::string& what) { throw Error(Errc::HeaderMismatch, "header: " + what); }

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::vector<std::string> split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  double x = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(x)) mismatch("bad number in " + key);
  return x;
}

long long parse_int(const std::string& key, const std::string& s) {
  long long x = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size()) mismatch("bad integer in " + key);
  return x;
}

Semantic parse_semantic(const std::string& s) {
  for (Semantic v : {Semantic::ForwardDvf, Semantic::InverseDvf, Semantic::ScalarMap, Semantic::Mask})
    if (s == to_string(v)) return v;
  mismatch("unknown semantic '" + s + "'");
}

SampleType parse_type(const std::string& s) {
  for (SampleType v : {SampleType::Float32, SampleType::Float64, SampleType::UInt8})
    if (s == to_string(v)) return v;
  throw Error(Errc::UnsupportedSampleType, "header: unsupported sample type '" + s + "'");
}

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

// Encodes samples of one type into a little-endian byte buffer.
std::vector<char> encode(const std::vector<const std::vector<double>*>& planes, SampleType type) {
  std::vector<char> out;
  const std::size_t n = planes.empty() ? 0 : planes[0]->size();
  const std::size_t sz = type == SampleType::Float64 ? 8 : type == SampleType::Float32 ? 4 : 1;
  out.resize(planes.size() * n * sz);
  char* p = out.data();
  for (const auto* plane : planes)
    for (double x : *plane) {
      if (type == SampleType::Float64) {
        const double v = to_little(x);
        std::memcpy(p, &v, 8);
      } else if (type == SampleType::Float32) {
        const float v = to_little(static_cast<float>(x));
        std::memcpy(p, &v, 4);
      } else {
        *p = static_cast<char>(x != 0.0 ? 1 : 0);
      }
      p += sz;
    }
  return out;
}

void write_container(const std::filesystem::path& header_path, ContainerHeader h,
                     const std::vector<char>& payload) {
  h.payload = payload_path_for(header_path).filename().string();
  const GridGeometry& g = h.geometry;
  std::ofstream out(header_path, std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + header_path.string());
  auto list = [&](auto get) {
    std::string s;
    for (int a = 0; a < g.dimension; ++a) s += (a ? " " : "") + get(a);
    return s;
  };
  out << "format: " << kMagic << '\n'
      << "semantic: " << to_string(h.semantic) << '\n'
      << "dimension: " << g.dimension << '\n'
      << "extent: " << list([&](int a) { return std::to_string(g.extent[a]); }) << '\n'
      << "spacing: " << list([&](int a) { return format_double(g.spacing[a]); }) << '\n'
      << "origin: " << list([&](int a) { return format_double(g.origin[a]); }) << '\n'
      << "components: " << h.components << '\n'
      << "sample_type: " << to_string(h.sample_type) << '\n'
      << "byte_order: " << kByteOrder << '\n'
      << "layout: " << kLayout << '\n'
      << "payload: " << h.payload << '\n';
  if (!out) throw Error(Errc::IoFailure, "cannot write " + header_path.string());
  out.close();

  std::ofstream raw(header_path.parent_path() / h.payload, std::ios::binary | std::ios::trunc);
  raw.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!raw) throw Error(Errc::IoFailure, "cannot write payload for " + header_path.string());
}

// Validates header and payload size, then returns the raw payload bytes.
std::vector<char> read_payload(const std::filesystem::path& header_path, const ContainerHeader& h) {
  const auto path = header_path.parent_path() / h.payload;
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot open payload " + path.string());
  const auto expected = h.payload_bytes();
  if (size < expected)
    throw Error(Errc::TruncatedPayload, "payload has " + std::to_string(size) + " bytes, header implies " +
                                            std::to_string(expected));
  if (size > expected)
    mismatch("payload has " + std::to_string(size) + " bytes, expected " + std::to_string(expected));
  std::vector<char> bytes(expected);
  std::ifstream in(path, std::ios::binary);
  in.read(bytes.data(), static_cast<std::streamsize>(expected));
  if (!in) throw Error(Errc::TruncatedPayload, "short read from " + path.string());
  return bytes;
}

double decode(const char* p, SampleType type) {
  if (type == SampleType::Float64) {
    double v;
    std::memcpy(&v, p, 8);
    return to_little(v);
  }
  if (type == SampleType::Float32) {
    float v;
    std::memcpy(&v, p, 4);
    return static_cast<double>(to_little(v));
  }
  return static_cast<double>(static_cast<unsigned char>(*p));
}

void expect(const ContainerHeader& h, bool ok, const std::string& what) {
  if (!ok) mismatch(what + " (semantic " + std::string(to_string(h.semantic)) + ")");
}

}  // namespace

std::string_view to_string(SampleType t) {
  switch (t) {
    case SampleType::Float32: return "float32";
    case SampleType::Float64: return "float64";
    case SampleType::UInt8: return "uint8";
  }
  return "?";
}

std::string_view to_string(Semantic s) {
  switch (s) {
    case Semantic::ForwardDvf: return "forward-dvf";
    case Semantic::InverseDvf: return "inverse-dvf";
    case Semantic::ScalarMap: return "scalar-map";
    case Semantic::Mask: return "mask";
  }
  return "?";
}

std::size_t ContainerHeader::sample_bytes() const {
  return sample_type == SampleType::Float64 ? 8 : sample_type == SampleType::Float32 ? 4 : 1;
}

std::uintmax_t ContainerHeader::payload_bytes() const {
  return static_cast<std::uintmax_t>(geometry.size()) * static_cast<std::uintmax_t>(components) * sample_bytes();
}

std::filesystem::path payload_path_for(const std::filesystem::path& header_path) {
  auto p = header_path;
  return p.replace_extension(".raw");
}

ContainerHeader read_header(const std::filesystem::path& header_path) {
  std::ifstream in(header_path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + header_path.string());
  std::map<std::string, std::string> kv;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) mismatch("malformed line '" + line + "'");
    std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 1);
    const auto b = value.find_first_not_of(' ');
    value = b == std::string::npos ? "" : value.substr(b);
    static const char* known[] = {"format", "semantic", "dimension", "extent", "spacing", "origin",
                                  "components", "sample_type", "byte_order", "layout", "payload"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) mismatch("unknown key '" + key + "'");
    if (!kv.emplace(key, value).second) mismatch("duplicate key '" + key + "'");
  }
  for (const char* k : {"format", "semantic", "dimension", "extent", "spacing", "origin", "components",
                        "sample_type", "byte_order", "layout", "payload"})
    if (!kv.count(k)) mismatch(std::string("missing key '") + k + "'");

  if (kv["format"] != kMagic) mismatch("unrecognized format '" + kv["format"] + "'");
  if (kv["byte_order"] != kByteOrder) mismatch("byte order must be " + std::string(kByteOrder));
  if (kv["layout"] != kLayout) mismatch("layout must be '" + std::string(kLayout) + "'");

  ContainerHeader h;
  h.semantic = parse_semantic(kv["semantic"]);
  const long long dim = parse_int("dimension", kv["dimension"]);
  if (dim != 2 && dim != 3) mismatch("dimension must be 2 or 3");
  const auto ext = split(kv["extent"]), sp = split(kv["spacing"]), org = split(kv["origin"]);
  if (static_cast<long long>(ext.size()) != dim) mismatch("extent count differs from dimension");
  if (static_cast<long long>(sp.size()) != dim) mismatch("spacing count differs from dimension");
  if (static_cast<long long>(org.size()) != dim) mismatch("origin count differs from dimension");
  Index3 extent{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0}, origin{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    const long long e = parse_int("extent", ext[a]);
    if (e < 2 || e > (1 << 20)) mismatch("extent out of range");
    extent[a] = static_cast<int>(e);
    spacing[a] = parse_double("spacing", sp[a]);
    if (!(spacing[a] > 0.0)) mismatch("spacing must be positive");
    origin[a] = parse_double("origin", org[a]);
  }
  h.geometry = GridGeometry::make(static_cast<int>(dim), extent, spacing, origin);
  const long long comps = parse_int("components", kv["components"]);
  h.components = static_cast<int>(comps);
  h.sample_type = parse_type(kv["sample_type"]);
  h.payload = kv["payload"];
  if (h.payload.empty() || std::filesystem::path(h.payload).has_parent_path())
    mismatch("payload must be a plain file name");

  const bool vector = h.semantic == Semantic::ForwardDvf || h.semantic == Semantic::InverseDvf;
  expect(h, comps == (vector ? dim : 1), "component count");
  if (h.semantic == Semantic::Mask) {
    if (h.sample_type != SampleType::UInt8)
      throw Error(Errc::UnsupportedSampleType, "header: masks are stored as uint8");
  } else if (h.sample_type == SampleType::UInt8) {
    throw Error(Errc::UnsupportedSampleType, "header: real-valued fields need float32 or float64");
  }
  return h;
}

void write_field(const std::filesystem::path& header_path, const VectorField& f, Semantic semantic,
                 SampleType type) {
  if (semantic != Semantic::ForwardDvf && semantic != Semantic::InverseDvf)
    throw Error(Errc::InvalidArgument, "vector fields need a dvf semantic");
  if (type == SampleType::UInt8) throw Error(Errc::UnsupportedSampleType, "vector fields need a real type");
  ContainerHeader h{semantic, f.geometry, f.geometry.dimension, type, {}};
  std::vector<const std::vector<double>*> planes;
  for (int a = 0; a < f.geometry.dimension; ++a) planes.push_back(&f.comp[a]);
  write_container(header_path, h, encode(planes, type));
}

void write_field(const std::filesystem::path& header_path, const ScalarField& f, SampleType type) {
  if (type == SampleType::UInt8) throw Error(Errc::UnsupportedSampleType, "scalar maps need a real type");
  std::vector<double> values = f.values;
  for (std::size_t l = 0; l < values.size(); ++l)
    if (!f.valid[l]) values[l] = std::numeric_limits<double>::quiet_NaN();
  ContainerHeader h{Semantic::ScalarMap, f.geometry, 1, type, {}};
  write_container(header_path, h, encode({&values}, type));
}

void write_field(const std::filesystem::path& header_path, const DomainMask& m) {
  std::vector<double> values(m.inside.begin(), m.inside.end());
  ContainerHeader h{Semantic::Mask, m.geometry, 1, SampleType::UInt8, {}};
  write_container(header_path, h, encode({&values}, SampleType::UInt8));
}

VectorField read_vector_field(const std::filesystem::path& header_path, Semantic* semantic) {
  const ContainerHeader h = read_header(header_path);
  if (h.semantic != Semantic::ForwardDvf && h.semantic != Semantic::InverseDvf)
    mismatch("expected a displacement field, found " + std::string(to_string(h.semantic)));
  const auto bytes = read_payload(header_path, h);
  VectorField f(h.geometry);
  const std::size_t n = h.geometry.size(), sz = h.sample_bytes();
  for (int a = 0; a < h.components; ++a)
    for (std::size_t l = 0; l < n; ++l) f.comp[a][l] = decode(bytes.data() + (a * n + l) * sz, h.sample_type);
  if (semantic) *semantic = h.semantic;
  return f;
}

ScalarField read_scalar_field(const std::filesystem::path& header_path) {
  const ContainerHeader h = read_header(header_path);
  if (h.semantic != Semantic::ScalarMap)
    mismatch("expected a scalar map, found " + std::string(to_string(h.semantic)));
  const auto bytes = read_payload(header_path, h);
  ScalarField f(h.geometry, 0.0, true);
  for (std::size_t l = 0; l < f.size(); ++l) {
    f.values[l] = decode(bytes.data() + l * h.sample_bytes(), h.sample_type);
    f.valid[l] = std::isnan(f.values[l]) ? 0 : 1;
  }
  return f;
}

DomainMask read_mask(const std::filesystem::path& header_path) {
  const ContainerHeader h = read_header(header_path);
  if (h.semantic != Semantic::Mask) mismatch("expected a mask, found " + std::string(to_string(h.semantic)));
  const auto bytes = read_payload(header_path, h);
  DomainMask m(h.geometry, false);
  for (std::size_t l = 0; l < m.size(); ++l) m.inside[l] = bytes[l] != 0 ? 1 : 0;
  return m;
}

}  // namespace dvfinv
