#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace phid::io {

/// Hex SHA-1 of "blob <size>\0<bytes>", the object id git assigns to a file.
std::string git_blob_hash(std::string_view bytes);
std::string git_blob_hash_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes bytes verbatim (binary mode, LF preserved).
void write_file(const std::filesystem::path& path, std::string_view bytes);

} // namespace phid::io
