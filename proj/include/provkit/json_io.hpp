#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace provkit {

// Shortest round-trip representation, padded to at least six digits after
// the decimal point: 0.5 -> "0.500000", 1/3 -> "0.3333333333333333".
std::string format_real(double value);

std::string json_quote(std::string_view s);

nlohmann::json read_json_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace provkit
