#include "data_dir.hpp"

#include <cstdlib>

namespace infrisk::cli {

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("INFRISK_DATA_DIR"); env && *env) return env;
  for (const char* candidate : {INFRISK_INSTALL_DATA_DIR, INFRISK_SOURCE_DATA_DIR}) {
    std::error_code ec;
    if (std::filesystem::is_directory(std::filesystem::path(candidate) / "schemas", ec)) return candidate;
  }
  return INFRISK_SOURCE_DATA_DIR;
}

}  // namespace infrisk::cli
