// Copyright 2026 The ARHNet Desk Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "arhnet/volume_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include "json.hpp"
#include <sstream>

#include "arhnet/error.hpp"

namespace arhnet {

static_assert(std::endian::native == std::endian::little,
              "volume I/O assumes a little-endian host");

namespace fs = std::filesystem;

std::string_view to_string(VolumeFormat f) {
  return f == VolumeFormat::kNifti1 ? "nifti1" : "rawf32";
}

VolumeFormat parse_volume_format(std::string_view name) {
  if (name == "nifti1" || name == "nifti" || name == "nii") return VolumeFormat::kNifti1;
  if (name == "rawf32" || name == "raw") return VolumeFormat::kRawF32;
  throw UnsupportedFormatError("unknown volume format '" + std::string(name) + "'");
}

std::optional<VolumeFormat> format_from_path(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".nii") return VolumeFormat::kNifti1;
  if (ext == ".bin" || ext == ".json") return VolumeFormat::kRawF32;
  return std::nullopt;
}

namespace {

std::vector<char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

void write_file(const fs::path& path, const char* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(data, static_cast<std::streamsize>(n));
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

// --- NIfTI-1 -----------------------------------------------------------------

constexpr std::size_t kNiftiHeaderSize = 348;
constexpr std::size_t kNiftiVoxOffset = 352;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;

namespace off {
constexpr std::size_t sizeof_hdr = 0;
constexpr std::size_t dim = 40;
constexpr std::size_t datatype = 70;
constexpr std::size_t bitpix = 72;
constexpr std::size_t pixdim = 76;
constexpr std::size_t vox_offset = 108;
constexpr std::size_t scl_slope = 112;
constexpr std::size_t scl_inter = 116;
constexpr std::size_t xyzt_units = 123;
constexpr std::size_t qform_code = 252;
constexpr std::size_t sform_code = 254;
constexpr std::size_t srow_x = 280;
constexpr std::size_t magic = 344;
}  // namespace off

template <typename T>
T get(const std::vector<char>& buf, std::size_t offset) {
  T v;
  std::memcpy(&v, buf.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void put(std::vector<char>& buf, std::size_t offset, T v) {
  std::memcpy(buf.data() + offset, &v, sizeof(T));
}

[[noreturn]] void bad_field(const fs::path& path, std::string_view field, const std::string& detail) {
  throw FormatError("nifti '" + path.string() + "': field '" + std::string(field) + "' " + detail);
}

Volume3D read_nifti(const fs::path& path) {
  const std::vector<char> buf = read_file(path);
  if (buf.size() < kNiftiHeaderSize) {
    bad_field(path, "sizeof_hdr", "missing: file holds only " + std::to_string(buf.size()) + " bytes");
  }
  const auto hdr_size = get<std::int32_t>(buf, off::sizeof_hdr);
  if (hdr_size != static_cast<std::int32_t>(kNiftiHeaderSize)) {
    if (static_cast<std::int32_t>(__builtin_bswap32(static_cast<std::uint32_t>(hdr_size))) == static_cast<std::int32_t>(kNiftiHeaderSize)) {
      throw UnsupportedFormatError("nifti '" + path.string() + "': big-endian files are not supported");
    }
    bad_field(path, "sizeof_hdr", "is " + std::to_string(hdr_size) + " (expected 348)");
  }
  if (std::memcmp(buf.data() + off::magic, "n+1\0", 4) != 0) {
    if (std::memcmp(buf.data() + off::magic, "ni1\0", 4) == 0) {
      throw UnsupportedFormatError("nifti '" + path.string() + "': two-file (.hdr/.img) NIfTI is not supported");
    }
    bad_field(path, "magic", "is not \"n+1\"");
  }

  std::array<std::int16_t, 8> dim{};
  for (int i = 0; i < 8; ++i) dim[i] = get<std::int16_t>(buf, off::dim + 2 * i);
  if (dim[0] < 3 || dim[0] > 7) bad_field(path, "dim[0]", "is " + std::to_string(dim[0]));
  for (int i = 1; i <= 3; ++i) {
    if (dim[i] <= 0) bad_field(path, "dim[" + std::to_string(i) + "]", "is " + std::to_string(dim[i]));
  }
  for (int i = 4; i <= dim[0]; ++i) {
    if (dim[i] != 1) {
      throw UnsupportedFormatError("nifti '" + path.string() + "': only single-volume images are supported (dim[" +
                                   std::to_string(i) + "] = " + std::to_string(dim[i]) + ")");
    }
  }

  const auto datatype = get<std::int16_t>(buf, off::datatype);
  const auto bitpix = get<std::int16_t>(buf, off::bitpix);
  std::size_t bytes_per_voxel = 0;
  if (datatype == kDtInt16) {
    bytes_per_voxel = 2;
  } else if (datatype == kDtFloat32) {
    bytes_per_voxel = 4;
  } else {
    throw UnsupportedFormatError("nifti '" + path.string() + "': datatype code " + std::to_string(datatype) +
                                 " is not supported (int16=4, float32=16)");
  }
  if (bitpix != static_cast<std::int16_t>(8 * bytes_per_voxel)) {
    bad_field(path, "bitpix", "is " + std::to_string(bitpix) + " for datatype " + std::to_string(datatype));
  }

  const float vox_offset_f = get<float>(buf, off::vox_offset);
  if (!(vox_offset_f >= static_cast<float>(kNiftiHeaderSize))) {
    bad_field(path, "vox_offset", "is " + std::to_string(vox_offset_f));
  }
  const auto vox_offset = static_cast<std::size_t>(vox_offset_f);

  std::array<float, 8> pixdim{};
  for (int i = 0; i < 8; ++i) pixdim[i] = get<float>(buf, off::pixdim + 4 * i);
  Spacing3 spacing{1.0, 1.0, 1.0};
  for (int i = 1; i <= 3; ++i) {
    const double p = pixdim[i];
    if (p < 0.0) bad_field(path, "pixdim[" + std::to_string(i) + "]", "is negative");
    (i == 1 ? spacing.x : i == 2 ? spacing.y : spacing.z) = p > 0.0 ? p : 1.0;
  }

  const Dims3 dims{dim[1], dim[2], dim[3]};
  const std::size_t n = static_cast<std::size_t>(dims.count());
  if (buf.size() < vox_offset + n * bytes_per_voxel) {
    bad_field(path, "data", "truncated: expected " + std::to_string(n * bytes_per_voxel) + " bytes at offset " +
                                std::to_string(vox_offset) + ", file has " + std::to_string(buf.size()));
  }

  float slope = get<float>(buf, off::scl_slope);
  float inter = get<float>(buf, off::scl_inter);
  const bool scale = slope != 0.0f && !(slope == 1.0f && inter == 0.0f);

  std::optional<Affine> affine;
  if (get<std::int16_t>(buf, off::sform_code) > 0) {
    Affine a{};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) a[r * 4 + c] = get<float>(buf, off::srow_x + 16 * r + 4 * c);
    a[15] = 1.0;
    affine = a;
  }

  // NIfTI stores x fastest; this library stores k (third axis) fastest.
  Volume3D vol(dims, spacing, affine);
  const char* payload = buf.data() + vox_offset;
  const std::int64_t nx = dims.h, ny = dims.w;
  for (std::int64_t z = 0; z < dims.d; ++z)
    for (std::int64_t y = 0; y < dims.w; ++y)
      for (std::int64_t x = 0; x < dims.h; ++x) {
        const std::size_t src = static_cast<std::size_t>(x + nx * (y + ny * z));
        float value;
        if (datatype == kDtFloat32) {
          std::memcpy(&value, payload + 4 * src, 4);
        } else {
          std::int16_t s;
          std::memcpy(&s, payload + 2 * src, 2);
          value = static_cast<float>(s);
        }
        if (scale) value = value * slope + inter;
        vol.at(x, y, z) = value;
      }
  return vol;
}

void write_nifti(const Volume3D& v, const fs::path& path) {
  const Dims3& dims = v.dims();
  if (dims.h > 32767 || dims.w > 32767 || dims.d > 32767) {
    throw PreconditionError("nifti: dims " + dims.str() + " exceed the int16 header range");
  }
  const std::size_t n = static_cast<std::size_t>(dims.count());
  std::vector<char> buf(kNiftiVoxOffset + 4 * n, 0);
  put<std::int32_t>(buf, off::sizeof_hdr, static_cast<std::int32_t>(kNiftiHeaderSize));
  const std::array<std::int16_t, 8> dim{3, static_cast<std::int16_t>(dims.h), static_cast<std::int16_t>(dims.w),
                                        static_cast<std::int16_t>(dims.d), 1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) put<std::int16_t>(buf, off::dim + 2 * i, dim[i]);
  put<std::int16_t>(buf, off::datatype, kDtFloat32);
  put<std::int16_t>(buf, off::bitpix, 32);
  const std::array<float, 8> pixdim{1.0f, static_cast<float>(v.spacing().x), static_cast<float>(v.spacing().y),
                                    static_cast<float>(v.spacing().z), 1.0f, 1.0f, 1.0f, 1.0f};
  for (int i = 0; i < 8; ++i) put<float>(buf, off::pixdim + 4 * i, pixdim[i]);
  put<float>(buf, off::vox_offset, static_cast<float>(kNiftiVoxOffset));
  // slope 0: no scaling.
  put<float>(buf, off::scl_slope, 0.0f);
  put<float>(buf, off::scl_inter, 0.0f);
  buf[off::xyzt_units] = 2;  // millimetres
  put<std::int16_t>(buf, off::qform_code, 0);
  if (v.affine()) {
    put<std::int16_t>(buf, off::sform_code, 1);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) put<float>(buf, off::srow_x + 16 * r + 4 * c, static_cast<float>((*v.affine())[r * 4 + c]));
  }
  std::memcpy(buf.data() + off::magic, "n+1\0", 4);

  char* payload = buf.data() + kNiftiVoxOffset;
  const std::int64_t nx = dims.h, ny = dims.w;
  for (std::int64_t z = 0; z < dims.d; ++z)
    for (std::int64_t y = 0; y < dims.w; ++y)
      for (std::int64_t x = 0; x < dims.h; ++x) {
        const std::size_t dst = static_cast<std::size_t>(x + nx * (y + ny * z));
        const float value = v.at(x, y, z);
        std::memcpy(payload + 4 * dst, &value, 4);
      }
  write_file(path, buf.data(), buf.size());
}

// --- rawf32 ------------------------------------------------------------------

fs::path raw_stem(const fs::path& path) {
  const auto ext = path.extension();
  if (ext == ".bin" || ext == ".json") {
    fs::path stem = path;
    stem.replace_extension();
    return stem;
  }
  return path;
}

Volume3D read_raw(const fs::path& path) {
  const fs::path json_path = rawf32_json_path(path);
  const fs::path bin_path = rawf32_bin_path(path);
  const std::vector<char> json_bytes = read_file(json_path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(json_bytes.begin(), json_bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("rawf32 sidecar '" + json_path.string() + "': " + e.what());
  }
  auto field = [&](const char* name, std::size_t n) -> const nlohmann::json& {
    if (!meta.contains(name) || !meta[name].is_array() || meta[name].size() != n) {
      throw FormatError("rawf32 sidecar '" + json_path.string() + "': field '" + name + "' must be an array of " +
                        std::to_string(n) + " numbers");
    }
    for (const auto& x : meta[name]) {
      if (!x.is_number()) {
        throw FormatError("rawf32 sidecar '" + json_path.string() + "': field '" + name + "' holds a non-number");
      }
    }
    return meta[name];
  };
  const auto& jd = field("dims", 3);
  Dims3 dims{jd[0].get<std::int64_t>(), jd[1].get<std::int64_t>(), jd[2].get<std::int64_t>()};
  if (dims.h <= 0 || dims.w <= 0 || dims.d <= 0) {
    throw FormatError("rawf32 sidecar '" + json_path.string() + "': field 'dims' must be positive");
  }
  Spacing3 spacing{};
  if (meta.contains("spacing")) {
    const auto& js = field("spacing", 3);
    spacing = {js[0].get<double>(), js[1].get<double>(), js[2].get<double>()};
    if (!(spacing.x > 0 && spacing.y > 0 && spacing.z > 0)) {
      throw FormatError("rawf32 sidecar '" + json_path.string() + "': field 'spacing' must be positive");
    }
  }
  std::optional<Affine> affine;
  if (meta.contains("affine") && !meta["affine"].is_null()) {
    const auto& ja = field("affine", 16);
    Affine a{};
    for (int i = 0; i < 16; ++i) a[i] = ja[i].get<double>();
    affine = a;
  }

  const std::vector<char> blob = read_file(bin_path);
  const std::size_t n = static_cast<std::size_t>(dims.count());
  if (blob.size() != 4 * n) {
    throw FormatError("rawf32 blob '" + bin_path.string() + "': expected " + std::to_string(4 * n) + " bytes, found " +
                      std::to_string(blob.size()));
  }
  std::vector<float> data(n);
  std::memcpy(data.data(), blob.data(), blob.size());
  return Volume3D(dims, std::move(data), spacing, affine);
}

void write_raw(const Volume3D& v, const fs::path& path) {
  nlohmann::json meta;
  meta["dims"] = {v.dims().h, v.dims().w, v.dims().d};
  meta["spacing"] = {v.spacing().x, v.spacing().y, v.spacing().z};
  if (v.affine()) meta["affine"] = *v.affine();
  const std::string text = meta.dump(2) + "\n";
  write_file(rawf32_json_path(path), text.data(), text.size());
  write_file(rawf32_bin_path(path), reinterpret_cast<const char*>(v.data().data()), 4 * v.data().size());
}

VolumeFormat require_format(const fs::path& path) {
  if (auto f = format_from_path(path)) return *f;
  throw UnsupportedFormatError("cannot infer volume format from '" + path.string() +
                               "' (expected .nii, .bin or .json)");
}

}  // namespace

fs::path rawf32_json_path(const fs::path& path) {
  fs::path p = raw_stem(path);
  p += ".json";
  return p;
}

fs::path rawf32_bin_path(const fs::path& path) {
  fs::path p = raw_stem(path);
  p += ".bin";
  return p;
}

Volume3D load_volume(const fs::path& path, VolumeFormat format) {
  return format == VolumeFormat::kNifti1 ? read_nifti(path) : read_raw(path);
}

Volume3D load_volume(const fs::path& path) { return load_volume(path, require_format(path)); }

void save_volume(const Volume3D& v, const fs::path& path, VolumeFormat format) {
  if (format == VolumeFormat::kNifti1) {
    write_nifti(v, path);
  } else {
    write_raw(v, path);
  }
}

void save_volume(const Volume3D& v, const fs::path& path) { save_volume(v, path, require_format(path)); }

Mask3D load_mask(const fs::path& path) { return mask_from_volume(load_volume(path)); }

void save_mask(const Mask3D& m, const fs::path& path, Spacing3 spacing) {
  save_volume(volume_from_mask(m, spacing), path);
}

}  // namespace arhnet
