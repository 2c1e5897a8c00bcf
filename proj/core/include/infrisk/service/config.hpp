#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

namespace infrisk::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path registry_root = "registry";
  std::filesystem::path schema_dir;   // shipped schemas
  std::filesystem::path models_dir;   // default models seeded into an empty registry
  std::filesystem::path static_dir;   // optional webapp assets, served at /
  std::string bearer_token;           // empty disables calibration and activation
  std::string cors_origin;            // empty sends no CORS headers
  std::chrono::seconds game_ttl{3600};
};

/// Recognized keys:
///   INFRISK_LISTEN          host:port (or just a port)
///   INFRISK_REGISTRY_ROOT   INFRISK_SCHEMA_DIR   INFRISK_MODELS_DIR
///   INFRISK_STATIC_DIR      INFRISK_TOKEN        INFRISK_CORS_ORIGIN
///   INFRISK_GAME_TTL_SECONDS
/// `lookup` returns nullopt for unset keys. Throws Error(configuration).
ServiceConfig config_from(const std::function<std::optional<std::string>(const std::string&)>& lookup,
                          ServiceConfig defaults = {});

ServiceConfig config_from_environment(ServiceConfig defaults = {});

/// KEY=VALUE lines; '#' starts a comment line; optional surrounding quotes
/// on the value are stripped.
std::map<std::string, std::string> read_env_file(const std::filesystem::path& path);

}  // namespace infrisk::service
