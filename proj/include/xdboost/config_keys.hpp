#pragma once

#include "xdboost/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>

namespace xdboost {

// Throws ConfigError for a non-object or a key outside `known`, so that typos
// do not silently fall back to defaults.
inline void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                               std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
    }
  }
}

}  // namespace xdboost
