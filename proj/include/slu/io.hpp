#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>

namespace slu {

// Writes through a temporary sibling file and renames it into place, so
// readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);
void atomic_write(const std::filesystem::path& path, const std::string& contents);

}  // namespace slu
