#include "msmax/grid_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace msmax::io {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'M', 'X', 'G', 'R', 'D', '1'};
constexpr const char* kTextTag = "msmax-grid";

static_assert(std::endian::native == std::endian::little, "binary grid format assumes little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw std::runtime_error("truncated binary grid file");
  }
  return v;
}

std::runtime_error parse_error(const std::string& what) {
  return std::runtime_error("grid file: " + what);
}

}  // namespace

void write_text(std::ostream& os, const GridFunction& f) {
  const GridShape& s = f.shape();
  os << kTextTag << " 1\n";
  os << "dims " << s.dims << '\n';
  os << "levels";
  for (int j = 0; j < s.dims; ++j) os << ' ' << s.levels[j];
  os << "\norigin";
  os << std::setprecision(17);
  for (int j = 0; j < s.dims; ++j) os << ' ' << s.origin[j];
  os << "\nside";
  for (int j = 0; j < s.dims; ++j) os << ' ' << s.side[j];
  os << "\nvalues\n";
  for (double v : f.values()) os << v << '\n';
}

void write_binary(std::ostream& os, const GridFunction& f) {
  const GridShape& s = f.shape();
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.dims));
  for (int j = 0; j < s.dims; ++j) put<std::uint32_t>(os, static_cast<std::uint32_t>(s.levels[j]));
  for (int j = 0; j < s.dims; ++j) put<double>(os, s.origin[j]);
  for (int j = 0; j < s.dims; ++j) put<double>(os, s.side[j]);
  for (double v : f.values()) put<double>(os, v);
}

GridFunction read_text(std::istream& is) {
  GridShape shape;
  bool have_dims = false;
  bool have_levels = false;
  std::string line;
  int version = 0;
  {
    std::string tag;
    if (!(is >> tag >> version) || tag != kTextTag) throw parse_error("missing msmax-grid header");
    if (version != 1) throw parse_error("unsupported version " + std::to_string(version));
    std::getline(is, line);
  }
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "values") break;
    if (key == "dims") {
      ls >> shape.dims;
      if (!ls || shape.dims < 1 || shape.dims > kMaxDims) throw parse_error("bad dims");
      have_dims = true;
      continue;
    }
    if (!have_dims) throw parse_error("'dims' must come before '" + key + "'");
    if (key == "levels") {
      for (int j = 0; j < shape.dims; ++j) ls >> shape.levels[j];
      have_levels = static_cast<bool>(ls);
    } else if (key == "origin") {
      for (int j = 0; j < shape.dims; ++j) ls >> shape.origin[j];
    } else if (key == "side") {
      for (int j = 0; j < shape.dims; ++j) ls >> shape.side[j];
    } else {
      throw parse_error("unknown header key '" + key + "'");
    }
    if (!ls) throw parse_error("malformed '" + key + "' line");
  }
  if (!have_levels) throw parse_error("missing levels");
  GridFunction f(shape);
  for (std::size_t k = 0; k < f.size(); ++k) {
    // Parse via strtod so "inf"/"nan" are rejected explicitly below.
    std::string tok;
    if (!(is >> tok)) throw parse_error("expected " + std::to_string(f.size()) + " values");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw parse_error("bad value '" + tok + "'");
    f[k] = v;
  }
  if (!f.all_finite()) throw parse_error("non-finite value");
  return f;
}

GridFunction read_binary(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw parse_error("bad binary magic");
  }
  GridShape shape;
  shape.dims = static_cast<int>(get<std::uint32_t>(is));
  if (shape.dims < 1 || shape.dims > kMaxDims) throw parse_error("bad dims");
  for (int j = 0; j < shape.dims; ++j) shape.levels[j] = static_cast<int>(get<std::uint32_t>(is));
  for (int j = 0; j < shape.dims; ++j) shape.origin[j] = get<double>(is);
  for (int j = 0; j < shape.dims; ++j) shape.side[j] = get<double>(is);
  GridFunction f(shape);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = get<double>(is);
  if (!f.all_finite()) throw parse_error("non-finite value");
  return f;
}

GridFunction read_grid(std::istream& is) {
  char head[8] = {};
  is.read(head, sizeof head);
  const auto got = is.gcount();
  is.clear();
  is.seekg(-got, std::ios::cur);
  if (got == 8 && std::memcmp(head, kMagic, sizeof kMagic) == 0) return read_binary(is);
  return read_text(is);
}

GridFunction load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_grid(in);
}

void save_grid(const std::string& path, const GridFunction& f, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (binary) {
    write_binary(out, f);
  } else {
    write_text(out, f);
  }
}

}  // namespace msmax::io
