#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

namespace strengthlab {

/// Compact JSON with keys sorted and every float printed with 17 significant
/// digits, so equal documents always serialize to equal bytes.
std::string canonical_dump(const nlohmann::json& doc);

/// Parses and re-serializes.
std::string canonicalize(const std::string& text);

}  // namespace strengthlab
