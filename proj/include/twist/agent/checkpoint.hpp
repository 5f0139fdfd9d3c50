#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "json.hpp"
#include "twist/agent/ppo.hpp"

namespace twist::agent {

// Binary container:
//   magic "TWSTCKPT", u32 format version, config hash (string),
//   metadata (JSON text), u64 entry count, then (name, bytes) pairs,
//   and a trailing FNV-1a 64 checksum of everything before it.
// Strings are u64-length prefixed, integers little-endian.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;
  std::string config_hash;
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, std::string> entries;
};

std::string encode_checkpoint(const Checkpoint& c);
// Throws std::runtime_error on bad magic, version, checksum or truncation.
Checkpoint decode_checkpoint(const std::string& bytes);

// Written to a temporary file first and renamed into place.
void write_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::string& path);

// Agent entries: parameters, normalizers, optimizer and RNG state under
// "agent", plus network shapes in the metadata.
void store_agent(Checkpoint& c, const PpoAgent& agent);
// `agent` must already have the configured shapes; throws on mismatch.
void restore_agent(const Checkpoint& c, PpoAgent& agent);

}  // namespace twist::agent
