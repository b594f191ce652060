#pragma once

#include <json.hpp>

#include <initializer_list>
#include <string>

#include "normsim/types.hpp"

namespace normsim {

// All serialization uses ordered_json so emitted documents have a stable,
// insertion-ordered key sequence and byte-identical dumps.
using Json = nlohmann::ordered_json;

/// Throws ConfigError if `j` is not an object or holds a key outside `allowed`.
void expect_fields(const Json& j, std::initializer_list<const char*> allowed,
                   const std::string& context);

/// Required field access with a ConfigError naming the offending field.
const Json& require(const Json& j, const std::string& key, const std::string& context);

Json cell_to_json(Cell c);
Cell cell_from_json(const Json& j, const std::string& context);

}  // namespace normsim
