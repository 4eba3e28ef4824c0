#pragma once

#include "mfldp/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace mfldp {

inline constexpr int kModelSchemaVersion = 1;

// Model document, schema 1:
//   {"schema": 1, "name": "...", "d": 4, "K": 2, "symmetrize": true,
//    "params": {"c5": 1.0},
//    "transitions": [{"k": 2, "from": [1, 2], "to": [3, 4], "rate": "c5"}]}
// States are 1-based labels. "name", "K", "params" and per-transition "k" are optional;
// when present, "K" and "k" must agree with the transition list.
ModelSpec parse_model_json(std::string_view text);
ModelSpec load_model_file(const std::filesystem::path& path);
std::string model_to_json(const ModelSpec& spec);

}  // namespace mfldp
