#pragma once

#include <map>
#include <string>

namespace dftlim {

/// Formats a double with 17 significant digits (%.17g): round-trip exact.
std::string format_g17(double v);

/// Reads a whole file; throws ConfigError if it cannot be opened.
std::string read_text_file(const std::string& path);

/// Writes content to a temporary file in the same directory and renames it
/// over the destination, so readers never observe a partial file.
void atomic_write_text(const std::string& path, const std::string& content);

/// mkdir -p. Throws ConfigError on failure.
void ensure_directory(const std::string& path);

bool file_exists(const std::string& path);

/// Parses "key = value" lines; '#' starts a comment; blank lines ignored.
/// Throws ConfigError on a line that is neither.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Cache directory precedence: explicit flag value, then the
/// DFTLIM_CACHE_DIR environment variable, then ./.dftlim-cache.
std::string resolve_cache_dir(const std::string& flag_value);

}  // namespace dftlim
