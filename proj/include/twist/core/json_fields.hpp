#pragma once

#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "json.hpp"
#include "twist/core/types.hpp"

namespace twist {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Strict reader over one JSON object: every key must be consumed, and type
// errors name the full key path.
class JsonFields {
 public:
  JsonFields(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  std::string child(const std::string& key) const { return path_ + "." + key; }

  template <class T>
  void get(const std::string& key, T& out) {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.insert(key);
    read(*it, child(key), out);
  }

  void nested(const std::string& key, const std::function<void(const nlohmann::json&, const std::string&)>& fn) {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.insert(key);
    fn(*it, child(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(child(it.key()) + ": unknown key");
  }

  static void read(const nlohmann::json& v, const std::string& path, double& out) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    out = v.get<double>();
  }
  static void read(const nlohmann::json& v, const std::string& path, int& out) {
    if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
    out = v.get<int>();
  }
  static void read(const nlohmann::json& v, const std::string& path, std::uint64_t& out) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(path + ": expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }
  static void read(const nlohmann::json& v, const std::string& path, bool& out) {
    if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
    out = v.get<bool>();
  }
  static void read(const nlohmann::json& v, const std::string& path, std::string& out) {
    if (!v.is_string()) throw ConfigError(path + ": expected a string");
    out = v.get<std::string>();
  }
  static void read(const nlohmann::json& v, const std::string& path, Vector3d& out) {
    if (!v.is_array() || v.size() != 3) throw ConfigError(path + ": expected an array of 3 numbers");
    for (int i = 0; i < 3; ++i) read(v[i], path + "[" + std::to_string(i) + "]", out[i]);
  }
  template <class T>
  static void read(const nlohmann::json& v, const std::string& path, std::vector<T>& out) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array");
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) read(v[i], path + "[" + std::to_string(i) + "]", out[i]);
  }
  template <class T, std::size_t N>
  static void read(const nlohmann::json& v, const std::string& path, std::array<T, N>& out) {
    if (!v.is_array() || v.size() != N)
      throw ConfigError(path + ": expected an array of " + std::to_string(N) + " elements");
    for (std::size_t i = 0; i < N; ++i) read(v[i], path + "[" + std::to_string(i) + "]", out[i]);
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline nlohmann::json vec_json(const Vector3d& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

}  // namespace twist
