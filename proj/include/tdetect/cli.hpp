#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

namespace tdetect::cli {

enum ExitCode : int { kOk = 0, kConfig = 2, kBackend = 3, kData = 4 };

/// Entry point of the tdetect tool. Results go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Writes through a sibling temporary file and a rename, so readers never
/// observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace tdetect::cli
