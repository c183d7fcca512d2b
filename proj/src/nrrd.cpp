#include "ogmc/nrrd.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace ogmc {
namespace {

static_assert(std::endian::native == std::endian::little, "NRRD I/O assumes a little-endian host");

using Kind = FormatError::Kind;

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip form
  return std::string(buf, end);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw FormatError(Kind::malformed_header, "bad number '" + s + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  return {std::istream_iterator<std::string>(in), std::istream_iterator<std::string>()};
}

// "(a,b,c) (d,e,f) (g,h,i)" -> diagonal spacing; off-diagonal entries must be zero.
Spacing parse_space_directions(const std::string& value) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  while ((pos = value.find('(', pos)) != std::string::npos) {
    const std::size_t close = value.find(')', pos);
    if (close == std::string::npos) throw FormatError(Kind::malformed_header, "unterminated space direction");
    std::string inner = value.substr(pos + 1, close - pos - 1);
    std::vector<double> row;
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) row.push_back(parse_double(trim(item)));
    rows.push_back(std::move(row));
    pos = close + 1;
  }
  if (rows.size() != 3) throw FormatError(Kind::malformed_header, "space directions must list 3 vectors");
  double diag[3];
  for (int i = 0; i < 3; ++i) {
    if (rows[i].size() != 3) throw FormatError(Kind::malformed_header, "space direction must have 3 components");
    for (int j = 0; j < 3; ++j) {
      if (i != j && rows[i][j] != 0.0) throw FormatError(Kind::unsupported, "non-diagonal space directions");
    }
    diag[i] = rows[i][i];
    if (!(diag[i] > 0.0)) throw FormatError(Kind::unsupported, "space directions must be positive");
  }
  return {diag[0], diag[1], diag[2]};
}

std::vector<unsigned char> gzip_compress(std::span<const unsigned char> in) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw IoError("deflateInit2 failed");
  }
  std::vector<unsigned char> out(deflateBound(&zs, in.size()) + 32);
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw IoError("gzip compression failed");
  out.resize(zs.total_out);
  return out;
}

std::vector<unsigned char> gzip_decompress(std::span<const unsigned char> in, std::size_t expected) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 32) != Z_OK) throw IoError("inflateInit2 failed");
  std::vector<unsigned char> out;
  out.reserve(expected);
  unsigned char chunk[1 << 16];
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk;
    zs.avail_out = sizeof(chunk);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw FormatError(Kind::length_mismatch, "corrupt or truncated gzip payload");
    }
    out.insert(out.end(), chunk, chunk + (sizeof(chunk) - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw FormatError(Kind::length_mismatch, "truncated gzip payload");
    }
  }
  inflateEnd(&zs);
  return out;
}

template <typename T>
void write_impl(const Grid<T>& vol, const std::filesystem::path& path, Encoding encoding, const char* type) {
  std::ostringstream header;
  const auto& e = vol.extent();
  const auto& s = vol.spacing();
  header << "NRRD0004\n";
  header << "type: " << type << "\n";
  header << "dimension: 3\n";
  header << "sizes: " << e.nx << " " << e.ny << " " << e.nz << "\n";
  header << "space directions: (" << format_double(s.x) << ",0,0) (0," << format_double(s.y) << ",0) (0,0,"
         << format_double(s.z) << ")\n";
  header << "encoding: " << (encoding == Encoding::raw ? "raw" : "gzip") << "\n";
  if constexpr (sizeof(T) > 1) header << "endian: little\n";
  header << "\n";

  const auto bytes = std::as_bytes(vol.data());
  std::span<const unsigned char> raw(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
  std::vector<unsigned char> packed;
  if (encoding == Encoding::gzip) {
    packed = gzip_compress(raw);
    raw = packed;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

Volume3D read_nrrd(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  // Header ends at the first empty line.
  std::size_t pos = 0;
  auto next_line = [&](std::string& line) {
    if (pos >= file.size()) return false;
    std::size_t end = pos;
    while (end < file.size() && file[end] != '\n') ++end;
    if (end >= file.size()) throw FormatError(Kind::malformed_header, "header not terminated by a blank line");
    line.assign(reinterpret_cast<const char*>(file.data()) + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = end + 1;
    return true;
  };

  std::string line;
  if (!next_line(line) || line.rfind("NRRD000", 0) != 0) {
    throw FormatError(Kind::malformed_header, "missing NRRD magic");
  }
  std::map<std::string, std::string> fields;
  while (true) {
    if (!next_line(line)) throw FormatError(Kind::malformed_header, "unexpected end of header");
    if (line.empty()) break;
    if (line[0] == '#') continue;
    if (line.find(":=") != std::string::npos) continue;  // key/value pairs
    const auto colon = line.find(": ");
    if (colon == std::string::npos) throw FormatError(Kind::malformed_header, "malformed header line '" + line + "'");
    fields[lower(trim(line.substr(0, colon)))] = trim(line.substr(colon + 2));
  }

  auto require = [&](const char* key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw FormatError(Kind::malformed_header, std::string("missing field '") + key + "'");
    return it->second;
  };

  const std::string type = lower(require("type"));
  bool is_mask;
  if (type == "uint8" || type == "uchar" || type == "unsigned char" || type == "uint8_t") {
    is_mask = true;
  } else if (type == "float") {
    is_mask = false;
  } else {
    throw FormatError(Kind::unsupported, "unsupported type '" + type + "'");
  }

  if (trim(require("dimension")) != "3") throw FormatError(Kind::unsupported, "only 3D volumes are supported");

  const auto size_tokens = split_ws(require("sizes"));
  if (size_tokens.size() != 3) throw FormatError(Kind::malformed_header, "sizes must have 3 entries");
  int dims[3];
  for (int i = 0; i < 3; ++i) {
    const auto& tok = size_tokens[i];
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), dims[i]);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || dims[i] <= 0) {
      throw FormatError(Kind::malformed_header, "bad size '" + tok + "'");
    }
  }

  Spacing spacing{};
  if (auto it = fields.find("space directions"); it != fields.end()) {
    spacing = parse_space_directions(it->second);
  } else if (auto sp = fields.find("spacings"); sp != fields.end()) {
    const auto toks = split_ws(sp->second);
    if (toks.size() != 3) throw FormatError(Kind::malformed_header, "spacings must have 3 entries");
    spacing = {parse_double(toks[0]), parse_double(toks[1]), parse_double(toks[2])};
    if (!(spacing.x > 0 && spacing.y > 0 && spacing.z > 0)) {
      throw FormatError(Kind::unsupported, "spacings must be positive");
    }
  }

  const std::string encoding = lower(require("encoding"));
  if (encoding != "raw" && encoding != "gzip" && encoding != "gz") {
    throw FormatError(Kind::unsupported, "unsupported encoding '" + encoding + "'");
  }
  if (auto it = fields.find("endian"); it != fields.end() && lower(it->second) != "little") {
    throw FormatError(Kind::unsupported, "only little-endian data is supported");
  }
  if (fields.contains("data file") || fields.contains("datafile")) {
    throw FormatError(Kind::unsupported, "detached data files are not supported");
  }
  for (const char* skip : {"line skip", "byte skip"}) {
    if (auto it = fields.find(skip); it != fields.end() && trim(it->second) != "0") {
      throw FormatError(Kind::unsupported, std::string(skip) + " is not supported");
    }
  }

  const Extent extent{dims[0], dims[1], dims[2]};
  const std::size_t elem = is_mask ? 1 : sizeof(float);
  const std::size_t expected = extent.count() * elem;
  std::span<const unsigned char> payload(file.data() + pos, file.size() - pos);
  std::vector<unsigned char> inflated;
  if (encoding != "raw") {
    inflated = gzip_decompress(payload, expected);
    payload = inflated;
  }
  if (payload.size() != expected) {
    throw FormatError(Kind::length_mismatch, "data length " + std::to_string(payload.size()) + " does not match " +
                                                 std::to_string(expected) + " bytes declared by the header");
  }

  if (is_mask) {
    std::vector<std::uint8_t> data(payload.begin(), payload.end());
    if (std::any_of(data.begin(), data.end(), [](std::uint8_t v) { return v > 1; })) {
      throw FormatError(Kind::invalid_mask_value, "mask contains values other than 0 and 1");
    }
    return Mask(extent, spacing, std::move(data));
  }
  std::vector<float> data(extent.count());
  std::memcpy(data.data(), payload.data(), expected);
  if (std::any_of(data.begin(), data.end(), [](float v) { return !std::isfinite(v); })) {
    throw FormatError(Kind::malformed_header, "scalar volume contains non-finite values");
  }
  return ScalarVolume(extent, spacing, std::move(data));
}

Mask read_mask(const std::filesystem::path& path) {
  auto vol = read_nrrd(path);
  if (auto* m = std::get_if<Mask>(&vol)) return std::move(*m);
  throw FormatError(Kind::unsupported, "'" + path.string() + "' is not a uint8 mask volume");
}

void write_nrrd(const Mask& vol, const std::filesystem::path& path, Encoding encoding) {
  write_impl(vol, path, encoding, "uint8");
}

void write_nrrd(const ScalarVolume& vol, const std::filesystem::path& path, Encoding encoding) {
  write_impl(vol, path, encoding, "float");
}

void write_nrrd(const Volume3D& vol, const std::filesystem::path& path, Encoding encoding) {
  std::visit([&](const auto& v) { write_nrrd(v, path, encoding); }, vol);
}

}  // namespace ogmc
