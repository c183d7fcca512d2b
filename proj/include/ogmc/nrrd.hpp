#pragma once

#include <filesystem>
#include <variant>

#include "ogmc/volume.hpp"

namespace ogmc {

/// A volume as stored on disk: either a binary mask (NRRD `uint8`) or a
/// scalar field (NRRD `float`).
using Volume3D = std::variant<Mask, ScalarVolume>;

enum class Encoding { raw, gzip };

/// Reads the supported NRRD subset: magic NRRD0004 (or earlier NRRD000x),
/// `type: uint8|float`, `dimension: 3`, `sizes`, diagonal `space directions`
/// or `spacings`, `encoding: raw|gzip`, `endian: little`. Unknown fields are
/// ignored. uint8 volumes are loaded as masks and must contain only 0/1.
Volume3D read_nrrd(const std::filesystem::path& path);

/// Reads a volume and requires it to be a mask.
Mask read_mask(const std::filesystem::path& path);

/// Writes header fields in the order type, dimension, sizes,
/// space directions, encoding (plus endian for float), then the payload.
void write_nrrd(const Mask& vol, const std::filesystem::path& path, Encoding encoding = Encoding::raw);
void write_nrrd(const ScalarVolume& vol, const std::filesystem::path& path, Encoding encoding = Encoding::raw);
void write_nrrd(const Volume3D& vol, const std::filesystem::path& path, Encoding encoding = Encoding::raw);

}  // namespace ogmc
