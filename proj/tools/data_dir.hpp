#pragma once

#include <filesystem>

namespace infrisk::cli {

/// Directory holding schemas/ and models/: $INFRISK_DATA_DIR, then the
/// install location, then the source tree the binary was built from.
std::filesystem::path data_dir();

}  // namespace infrisk::cli
