#pragma once

// The tribell command line as a library: argument parsing, command execution
// from a resolved parameter set, run manifests and replay.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tribell/io.hpp"

namespace tribell::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitConvergence = 3;
inline constexpr int kExitIo = 4;

inline constexpr std::string_view kVersion = "0.1.0";

/// Six significant digits, '.' decimal separator, independent of locale.
std::string format_number(double value);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

/// Hash of the canonical JSON of (command, params, version), as 16 hex digits.
std::string manifest_hash(const std::string& command, const Json& params);

/// Runs a command from its fully resolved parameters and returns the output
/// document. Identical inputs give byte-identical output.
std::string execute(const std::string& command, const Json& params);

/// Entry point: `args` excludes the program name. Output goes to --out (plus a
/// manifest beside it) or to `out`; diagnostics to `err`. Returns an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Path of the manifest written next to an output file.
std::string manifest_path_for(const std::string& output_path);

}  // namespace tribell::cli
