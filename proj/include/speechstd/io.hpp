#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace speechstd {

// Writes `content` to `path` via a temporary sibling and rename, creating
// parent directories. Throws IoFailure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Throws IoFailure.
std::string read_file(const std::filesystem::path& path);

}  // namespace speechstd
