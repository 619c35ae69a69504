#pragma once

#include <filesystem>
#include <system_error>

#include "supra/error.hpp"

namespace supra {

/// Creates `dir` and its parents; failures surface as IoError.
inline void make_directories(const std::filesystem::path& dir) {
    if (dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

/// Creates the directory that will hold `file`.
inline void make_parent_directories(const std::filesystem::path& file) {
    if (file.has_parent_path()) make_directories(file.parent_path());
}

} // namespace supra
