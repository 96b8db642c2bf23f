#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace pfl {

// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

// Every regular file below the directory except the manifest itself, with its
// size and SHA-256, in sorted path order.
nlohmann::json build_manifest(const std::filesystem::path& dir, std::string_view manifest_name);

}  // namespace pfl
