#include "twist/agent/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "twist/core/serialize.hpp"

namespace twist::agent {

namespace {
constexpr char kMagic[8] = {'T', 'W', 'S', 'T', 'C', 'K', 'P', 'T'};
}

std::string encode_checkpoint(const Checkpoint& c) {
  ByteWriter w;
  std::string magic(kMagic, sizeof(kMagic));
  std::string out = magic;
  w.io(Checkpoint::kVersion);
  w.io(c.config_hash);
  w.io(c.meta.dump());
  w.io(static_cast<std::uint64_t>(c.entries.size()));
  for (const auto& [name, bytes] : c.entries) {
    w.io(name);
    w.io(bytes);
  }
  out += w.bytes();
  ByteWriter tail;
  tail.io(fnv1a64(out));
  return out + tail.bytes();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 8 || bytes.compare(0, sizeof(kMagic), kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: not a checkpoint file");
  const std::string_view body(bytes.data(), bytes.size() - 8);
  std::uint64_t sum = 0;
  ByteReader(std::string_view(bytes).substr(bytes.size() - 8)).io(sum);
  if (sum != fnv1a64(body)) throw std::runtime_error("checkpoint: checksum mismatch (file corrupted)");

  ByteReader r(body.substr(sizeof(kMagic)));
  std::uint32_t version = 0;
  r.io(version);
  if (version != Checkpoint::kVersion)
    throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(version));
  Checkpoint c;
  r.io(c.config_hash);
  std::string meta;
  r.io(meta);
  c.meta = nlohmann::json::parse(meta);
  std::uint64_t n = 0;
  r.io(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name, data;
    r.io(name);
    r.io(data);
    c.entries.emplace(std::move(name), std::move(data));
  }
  if (!r.done()) throw std::runtime_error("checkpoint: trailing bytes");
  return c;
}

void write_checkpoint(const std::string& path, const Checkpoint& c) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("checkpoint: cannot open '" + tmp + "' for writing");
    const std::string bytes = encode_checkpoint(c);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("checkpoint: write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("checkpoint: cannot rename '" + tmp + "' to '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_checkpoint(ss.str());
}

void store_agent(Checkpoint& c, const PpoAgent& agent) {
  c.meta["actor_sizes"] = agent.actor().net.sizes();
  c.meta["critic_sizes"] = agent.critic().sizes();
  c.entries["agent"] = to_bytes(agent);
}

void restore_agent(const Checkpoint& c, PpoAgent& agent) {
  if (!c.meta.contains("actor_sizes") || !c.meta.contains("critic_sizes") || !c.entries.count("agent"))
    throw std::runtime_error("checkpoint: no agent stored");
  if (c.meta["actor_sizes"].get<std::vector<int>>() != agent.actor().net.sizes() ||
      c.meta["critic_sizes"].get<std::vector<int>>() != agent.critic().sizes())
    throw std::runtime_error("checkpoint: network shapes differ from the configuration");
  PpoAgent loaded = agent;
  ByteReader r(c.entries.at("agent"));
  r.io(loaded);
  if (!r.done()) throw std::runtime_error("checkpoint: agent entry has trailing bytes");
  if (loaded.actor().net.params().size() != agent.actor().net.params().size() ||
      loaded.critic().params().size() != agent.critic().params().size())
    throw std::runtime_error("checkpoint: parameter count mismatch");
  agent = std::move(loaded);
}

}  // namespace twist::agent
