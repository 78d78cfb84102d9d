#pragma once

#include "lionmdp/lion_model.hpp"

#include <map>
#include <string>
#include <string_view>

namespace lionmdp {

/// Flat `key = value` pairs; `#` starts a comment, blank lines are ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values_file(const std::string& path);

/// Recognised keys: alpha beta lambda m M C_s C_h C_L C_H G K gamma.
/// Unknown keys and malformed numbers throw std::invalid_argument; ranges
/// are left to param_violations().
void apply_key_values(LionParams& params, const KeyValues& kv);

/// Inverse of apply_key_values, with full round-trip precision.
std::string to_key_values(const LionParams& params);

} // namespace lionmdp
