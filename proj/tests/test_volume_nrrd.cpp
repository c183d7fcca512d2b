#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ogmc/nrrd.hpp"
#include "support.hpp"

using namespace ogmc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

FormatError::Kind format_error_kind(const fs::path& p) {
  try {
    (void)read_nrrd(p);
  } catch (const FormatError& e) {
    return e.kind();
  }
  FAIL("expected a FormatError");
  return FormatError::Kind::malformed_header;
}

}  // namespace

TEST_CASE("grid index and voxel are inverse") {
  const Mask m({5, 4, 3}, {});
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(m.index(m.voxel(i)) == i);
  CHECK(m.index(2, 3, 1) == 2 + 5 * (3 + 4 * 1));
}

TEST_CASE("grid rejects bad geometry") {
  CHECK_THROWS_AS(Mask({0, 1, 1}, {}), InvalidArgument);
  CHECK_THROWS_AS(Mask({1, 1, 1}, {1, -1, 1}), InvalidArgument);
  CHECK_THROWS_AS(Mask({2, 2, 2}, {}, std::vector<std::uint8_t>(7)), InvalidArgument);
}

TEST_CASE("all-zero 2x2x2 raw file reads as eight zero voxels") {
  const auto p = test::tmp_dir() / "zeros.nrrd";
  spit(p, std::string("NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 2 2\nencoding: raw\n\n") + std::string(8, '\0'));
  const Mask m = read_mask(p);
  CHECK(m.extent() == Extent{2, 2, 2});
  CHECK(m.size() == 8);
  CHECK(count_foreground(m) == 0);
}

TEST_CASE("1x1x1 all-ones mask has a single 0x01 payload byte") {
  const auto p = test::tmp_dir() / "one.nrrd";
  write_nrrd(Mask({1, 1, 1}, {}, std::uint8_t{1}), p);
  const std::string bytes = slurp(p);
  const auto sep = bytes.find("\n\n");
  REQUIRE(sep != std::string::npos);
  CHECK(bytes.substr(sep + 2) == std::string(1, '\x01'));
}

TEST_CASE("header fields are written in fixed order") {
  const auto p = test::tmp_dir() / "order.nrrd";
  write_nrrd(ScalarVolume({2, 2, 2}, {0.5, 0.5, 1.0}, 1.5f), p);
  const std::string h = slurp(p);
  const auto type = h.find("type:");
  const auto dim = h.find("dimension:");
  const auto sizes = h.find("sizes:");
  const auto dirs = h.find("space directions:");
  const auto enc = h.find("encoding:");
  REQUIRE(h.rfind("NRRD0004\n", 0) == 0);
  CHECK(type < dim);
  CHECK(dim < sizes);
  CHECK(sizes < dirs);
  CHECK(dirs < enc);
  CHECK(h.find("endian: little") != std::string::npos);
}

TEST_CASE("truncated payload is a length mismatch") {
  const auto good = test::tmp_dir() / "good432.nrrd";
  write_nrrd(Mask({4, 3, 2}, {}, std::uint8_t{1}), good);
  std::string bytes = slurp(good);
  bytes.pop_back();  // 23 of 24 data bytes
  const auto bad = test::tmp_dir() / "bad432.nrrd";
  spit(bad, bytes);
  CHECK(format_error_kind(bad) == FormatError::Kind::length_mismatch);
}

TEST_CASE("malformed and unsupported headers are rejected") {
  const auto dir = test::tmp_dir();
  const std::string payload(8, '\0');
  spit(dir / "magic.nrrd", "NOPE\ntype: uint8\ndimension: 3\nsizes: 2 2 2\nencoding: raw\n\n" + payload);
  CHECK(format_error_kind(dir / "magic.nrrd") == FormatError::Kind::malformed_header);

  spit(dir / "dim.nrrd", "NRRD0004\ntype: uint8\ndimension: 2\nsizes: 2 4\nencoding: raw\n\n" + payload);
  CHECK(format_error_kind(dir / "dim.nrrd") == FormatError::Kind::unsupported);

  spit(dir / "type.nrrd", "NRRD0004\ntype: short\ndimension: 3\nsizes: 2 2 1\nencoding: raw\n\n" + payload);
  CHECK(format_error_kind(dir / "type.nrrd") == FormatError::Kind::unsupported);

  spit(dir / "enc.nrrd", "NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 2 2\nencoding: ascii\n\n" + payload);
  CHECK(format_error_kind(dir / "enc.nrrd") == FormatError::Kind::unsupported);

  spit(dir / "big.nrrd",
       "NRRD0004\ntype: float\ndimension: 3\nsizes: 1 1 2\nencoding: raw\nendian: big\n\n" + payload);
  CHECK(format_error_kind(dir / "big.nrrd") == FormatError::Kind::unsupported);

  spit(dir / "value.nrrd", "NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 2 2\nencoding: raw\n\n" +
                               std::string(7, '\0') + std::string(1, '\x02'));
  CHECK(format_error_kind(dir / "value.nrrd") == FormatError::Kind::invalid_mask_value);

  spit(dir / "nosizes.nrrd", "NRRD0004\ntype: uint8\ndimension: 3\nencoding: raw\n\n" + payload);
  CHECK(format_error_kind(dir / "nosizes.nrrd") == FormatError::Kind::malformed_header);
}

TEST_CASE("missing file is an I/O error") {
  CHECK_THROWS_AS(read_nrrd(test::tmp_dir() / "does-not-exist.nrrd"), IoError);
}

TEST_CASE("unknown fields are ignored and spacings are accepted") {
  const auto p = test::tmp_dir() / "spacings.nrrd";
  spit(p, std::string("NRRD0004\n# comment\ntype: uint8\ndimension: 3\nsizes: 2 1 1\nspacings: 0.5 2 3\n"
                      "content: fixture\nencoding: raw\n\n") +
              std::string("\x01\x00", 2));
  const Mask m = read_mask(p);
  CHECK(m.spacing() == Spacing{0.5, 2.0, 3.0});
  CHECK(m(0, 0, 0) == 1);
  CHECK(m(1, 0, 0) == 0);
}

TEST_CASE("anisotropic spacing survives a round trip exactly") {
  const auto p = test::tmp_dir() / "aniso.nrrd";
  Mask m({3, 3, 3}, {0.5, 0.5, 1.0});
  m(1, 1, 1) = 1;
  write_nrrd(m, p);
  CHECK(read_mask(p) == m);
}

TEST_CASE("gzip payload of a constant 64^3 volume is smaller than raw") {
  const Mask m({64, 64, 64}, {}, std::uint8_t{1});
  const auto raw = test::tmp_dir() / "const_raw.nrrd";
  const auto gz = test::tmp_dir() / "const_gz.nrrd";
  write_nrrd(m, raw, Encoding::raw);
  write_nrrd(m, gz, Encoding::gzip);
  CHECK(fs::file_size(gz) < fs::file_size(raw));
  CHECK(read_mask(gz) == m);
}

TEST_CASE("round trip is bit exact for random volumes of every kind") {
  Rng rng(17);
  for (int trial = 0; trial < 24; ++trial) {
    const Extent e{1 + static_cast<int>(rng.index(9)), 1 + static_cast<int>(rng.index(9)),
                   1 + static_cast<int>(rng.index(9))};
    const Spacing s{rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0)};
    const Encoding enc = trial % 2 ? Encoding::gzip : Encoding::raw;
    const auto p = test::tmp_dir() / ("rt" + std::to_string(trial) + ".nrrd");
    if (trial % 4 < 2) {
      const Mask m = test::random_mask(e, 0.4, rng, s);
      write_nrrd(m, p, enc);
      const Volume3D v = read_nrrd(p);
      REQUIRE(std::holds_alternative<Mask>(v));
      CHECK(std::get<Mask>(v) == m);
    } else {
      ScalarVolume f(e, s);
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<float>(rng.uniform(-1e6, 1e6));
      write_nrrd(f, p, enc);
      const Volume3D v = read_nrrd(p);
      REQUIRE(std::holds_alternative<ScalarVolume>(v));
      const auto& g = std::get<ScalarVolume>(v);
      CHECK(g.extent() == f.extent());
      CHECK(g.spacing() == f.spacing());
      CHECK(std::memcmp(g.data().data(), f.data().data(), f.size() * sizeof(float)) == 0);
    }
  }
}

TEST_CASE("read_mask rejects scalar volumes") {
  const auto p = test::tmp_dir() / "scalar.nrrd";
  write_nrrd(ScalarVolume({2, 2, 2}, {}, 0.0f), p);
  CHECK_THROWS_AS(read_mask(p), FormatError);
}
