// Copyright 2026 The STMD Tracker Authors
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

#include "stmd/config.hpp"
#include "stmd/errors.hpp"
#include "stmd/train.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace stmd {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

template <class T>
void put(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <class T>
T take(const std::string& buf, std::size_t& pos, const std::string& path) {
  if (pos + sizeof(T) > buf.size()) throw ChecksumError(path + ": truncated checkpoint");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::uint32_t crc(const char* data, std::size_t n) {
  uLong c = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths
  while (n > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    c = crc32(c, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(c);
}

nlohmann::json comparable(nlohmann::json j) {
  j.erase("seed");
  return j;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TrackerNet& net, std::uint64_t step,
                     std::uint64_t seed) {
  const nlohmann::ordered_json meta = {
      {"tracker", tracker_config_to_json(net.config())}, {"step", step}, {"seed", seed}};
  const std::string text = meta.dump();
  const std::vector<double> flat = net.params().flatten();

  std::string buf = "STMD";
  put<std::uint32_t>(buf, kCheckpointVersion);
  put<std::uint64_t>(buf, flat.size());
  put<std::uint64_t>(buf, text.size());
  buf += text;
  for (double v : flat) put<float>(buf, static_cast<float>(v));
  put<std::uint32_t>(buf, crc(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const TrackerConfig& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (buf.size() < 4 + 4 + 8 + 8 + 4) throw ChecksumError(name + ": truncated checkpoint");
  if (buf.compare(0, 4, "STMD") != 0) throw ChecksumError(name + ": not a checkpoint (bad magic)");

  std::size_t pos = buf.size() - 4;
  const auto stored = take<std::uint32_t>(buf, pos, name);
  if (stored != crc(buf.data(), buf.size() - 4)) throw ChecksumError(name + ": CRC mismatch");

  pos = 4;
  const auto version = take<std::uint32_t>(buf, pos, name);
  if (version != kCheckpointVersion) {
    throw VersionError(name + ": format version " + std::to_string(version) + ", expected " +
                       std::to_string(kCheckpointVersion));
  }
  const auto count = take<std::uint64_t>(buf, pos, name);
  const auto json_len = take<std::uint64_t>(buf, pos, name);
  if (pos + json_len + count * sizeof(float) + 4 != buf.size()) throw ChecksumError(name + ": length mismatch");

  Checkpoint ck;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(buf.substr(pos, json_len));
    ck.config = meta.at("tracker");
    ck.step = meta.at("step").get<std::uint64_t>();
    ck.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ChecksumError(name + ": bad header: " + e.what());
  }
  pos += json_len;

  const nlohmann::json want = tracker_config_to_json(expected);
  if (comparable(ck.config) != comparable(want)) {
    std::string diff;
    for (auto it = want.begin(); it != want.end(); ++it) {
      if (it.key() != "seed" && (!ck.config.contains(it.key()) || ck.config[it.key()] != it.value())) {
        diff += " " + it.key();
      }
    }
    throw VersionError(name + ": checkpoint was written for a different tracker config (differs in" + diff + ")");
  }
  ck.params.resize(count);
  std::memcpy(ck.params.data(), buf.data() + pos, count * sizeof(float));
  return ck;
}

void apply_checkpoint(TrackerNet& net, const Checkpoint& ckpt) {
  if (ckpt.params.size() != net.params().count()) {
    throw VersionError("checkpoint holds " + std::to_string(ckpt.params.size()) + " parameters, network has " +
                       std::to_string(net.params().count()));
  }
  net.params().assign(std::vector<double>(ckpt.params.begin(), ckpt.params.end()));
}

}  // namespace stmd
