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

#include "arhnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "arhnet/error.hpp"

namespace arhnet {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

template <typename U>
void put(std::string& out, U value) {
  char bytes[sizeof(U)];
  std::memcpy(bytes, &value, sizeof(U));
  out.append(bytes, sizeof(U));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string path) : bytes_(bytes), path_(std::move(path)) {}

  template <typename U>
  U get(const char* what) {
    U value;
    std::memcpy(&value, take(sizeof(U), what), sizeof(U));
    return value;
  }

  const char* take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) throw FormatError(path_ + ": truncated checkpoint while reading " + what);
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

const NamedBuffer& CheckpointData::find(const std::string& name) const {
  for (const auto& b : buffers) {
    if (b.name == name) return b;
  }
  throw FormatError("checkpoint has no buffer named '" + name + "'");
}

void save_checkpoint(const CheckpointData& data, const std::filesystem::path& path) {
  std::string out = "ARHF";
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, data.metadata.size());
  out += data.metadata;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.buffers.size()));
  for (const auto& b : data.buffers) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(b.name.size()));
    out += b.name;
    put<std::uint64_t>(out, b.values.size());
    out.append(reinterpret_cast<const char*>(b.values.data()), b.values.size() * sizeof(float));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

CheckpointData load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r(bytes, path.string());
  if (std::memcmp(r.take(4, "magic"), "ARHF", 4) != 0) throw FormatError(path.string() + ": bad magic, not an ARHF checkpoint");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw UnsupportedFormatError(path.string() + ": checkpoint version " + std::to_string(version) + ", expected " +
                                 std::to_string(kCheckpointVersion));
  }
  CheckpointData data;
  const auto meta_len = r.get<std::uint64_t>("metadata length");
  data.metadata.assign(r.take(meta_len, "metadata"), meta_len);
  const auto count = r.get<std::uint32_t>("buffer count");
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedBuffer b;
    const auto name_len = r.get<std::uint32_t>("buffer name length");
    b.name.assign(r.take(name_len, "buffer name"), name_len);
    const auto n = r.get<std::uint64_t>("buffer length");
    if (n > bytes.size()) throw FormatError(path.string() + ": buffer '" + b.name + "' length exceeds file size");
    b.values.resize(n);
    std::memcpy(b.values.data(), r.take(n * sizeof(float), "buffer values"), n * sizeof(float));
    data.buffers.push_back(std::move(b));
  }
  if (!r.done()) throw FormatError(path.string() + ": trailing bytes after last buffer");
  return data;
}

}  // namespace arhnet
