#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace infrisk::detail {

/// Reads fields from one JSON object, appending a message per problem to a
/// shared error list instead of throwing, so a whole document can be
/// diagnosed in one pass. Keys never read are reported by finish().
class FieldReader {
 public:
  FieldReader(const nlohmann::json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) {
      fail("expected an object");
    }
  }

  bool ok_object() const { return obj_.is_object(); }
  const std::string& path() const { return path_; }

  const nlohmann::json* get(const std::string& key, bool required) {
    seen_.insert(key);
    if (!obj_.is_object()) return nullptr;
    auto it = obj_.find(key);
    if (it == obj_.end()) {
      if (required) fail("missing required field '" + key + "'");
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::string> string(const std::string& key, bool required = true) {
    const auto* v = get(key, required);
    if (v == nullptr || v->is_null()) {
      if (v != nullptr && required) fail_key(key, "must be a string");
      return std::nullopt;
    }
    if (!v->is_string()) {
      fail_key(key, "must be a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<double> number(const std::string& key, bool required = true) {
    const auto* v = get(key, required);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) {
      fail_key(key, "must be a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<long long> integer(const std::string& key, bool required = true) {
    const auto* v = get(key, required);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number_integer()) {
      fail_key(key, "must be an integer");
      return std::nullopt;
    }
    return v->get<long long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const auto* v = get(key, false);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) {
      fail_key(key, "must be a boolean");
      return fallback;
    }
    return v->get<bool>();
  }

  const nlohmann::json* object(const std::string& key, bool required = true) {
    const auto* v = get(key, required);
    if (v == nullptr) return nullptr;
    if (!v->is_object()) {
      fail_key(key, "must be an object");
      return nullptr;
    }
    return v;
  }

  const nlohmann::json* array(const std::string& key, bool required = true) {
    const auto* v = get(key, required);
    if (v == nullptr) return nullptr;
    if (!v->is_array()) {
      fail_key(key, "must be an array");
      return nullptr;
    }
    return v;
  }

  /// Reports keys present in the object but never requested.
  void finish() {
    if (!obj_.is_object()) return;
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.count(key)) fail("unknown field '" + key + "'");
    }
  }

  void fail(const std::string& message) { errors_.push_back(path_ + ": " + message); }
  void fail_key(const std::string& key, const std::string& message) {
    errors_.push_back(path_ + "." + key + ": " + message);
  }

 private:
  const nlohmann::json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

inline std::map<std::string, std::string> read_string_map(const nlohmann::json* j,
                                                          const std::string& path,
                                                          std::vector<std::string>& errors) {
  std::map<std::string, std::string> out;
  if (j == nullptr) return out;
  for (const auto& [k, v] : j->items()) {
    if (!v.is_string()) {
      errors.push_back(path + "." + k + ": must be a string");
      continue;
    }
    out.emplace(k, v.get<std::string>());
  }
  return out;
}

inline std::map<std::string, double> read_number_map(const nlohmann::json* j,
                                                     const std::string& path,
                                                     std::vector<std::string>& errors) {
  std::map<std::string, double> out;
  if (j == nullptr) return out;
  for (const auto& [k, v] : j->items()) {
    if (!v.is_number()) {
      errors.push_back(path + "." + k + ": must be a number");
      continue;
    }
    out.emplace(k, v.get<double>());
  }
  return out;
}

}  // namespace infrisk::detail
