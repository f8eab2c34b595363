#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "combo/errors.hpp"

namespace combo::detail {

// Reads fields out of a JSON object and rejects any key that was never asked for.
class FieldReader {
 public:
  FieldReader(const nlohmann::json& object, std::string where) : object_(object), where_(std::move(where)) {
    if (!object_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  bool read(const std::string& key, T& out) {
    known_.insert(key);
    auto it = object_.find(key);
    if (it == object_.end()) return false;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
    return true;
  }

  /// Marks a key as known without converting it (for nested objects read separately).
  const nlohmann::json* child(const std::string& key) {
    known_.insert(key);
    auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : object_.items()) {
      if (!known_.contains(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

  [[nodiscard]] const std::string& where() const noexcept { return where_; }

 private:
  const nlohmann::json& object_;
  std::string where_;
  std::set<std::string> known_;
};

}  // namespace combo::detail
