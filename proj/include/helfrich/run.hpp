#pragma once

#include <cstdint>
#include <string>

namespace helfrich {

/// Executes one CLI command with a JSON config, writing all artifacts plus a
/// manifest (file list with content hashes, config echo, seed, status) into
/// out_dir. Returns the process exit code: 0 success, 1 rejected input,
/// 2 numerical failure.
int run_command(const std::string& command, const std::string& config_path,
                const std::string& out_dir, std::uint64_t seed);

}  // namespace helfrich
