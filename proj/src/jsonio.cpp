#include "normsim/jsonio.hpp"

#include <set>

#include "normsim/errors.hpp"

namespace normsim {

void expect_fields(const Json& j, std::initializer_list<const char*> allowed,
                   const std::string& context) {
  if (!j.is_object()) {
    throw ConfigError("ConfigError: " + context + " must be an object");
  }
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) {
      throw ConfigError("ConfigError: unknown field '" + it.key() + "' in " + context);
    }
  }
}

const Json& require(const Json& j, const std::string& key, const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError("ConfigError: missing field '" + key + "' in " + context);
  }
  return *it;
}

Json cell_to_json(Cell c) {
  return Json::array({c.row, c.col});
}

Cell cell_from_json(const Json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ConfigError("ConfigError: " + context + " must be a [row, col] pair");
  }
  return Cell{j[0].get<int>(), j[1].get<int>()};
}

}  // namespace normsim
