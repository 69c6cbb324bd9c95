#pragma once

// Configuration files: JSON, or the TOML subset below.
//
//   # comment
//   seed = 7
//   exposure = 1e6
//   [optimizer]
//   multistart_count = 128
//   thetas = [0, 15.5, 45]
//
// Supported: [table] and [dotted.table] headers, bare keys, basic strings,
// booleans, integers, floats and single-line arrays of those.

#include <filesystem>
#include <string_view>

#include "tribell/io.hpp"

namespace tribell {

/// DomainError with the line number on a syntax error.
Json parse_toml_subset(std::string_view text);

/// JSON when the first non-blank character is '{', TOML subset otherwise.
Json parse_config_text(std::string_view text);

/// IoError if unreadable.
Json load_config_file(const std::filesystem::path& path);

}  // namespace tribell
