#include "infrisk/service/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include "infrisk/error.hpp"

namespace infrisk::service {

namespace {

int parse_int(const std::string& key, const std::string& text, int lo, int hi) {
  int v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || v < lo || v > hi) {
    throw Error(ErrorCode::configuration, key + ": expected an integer in [" + std::to_string(lo) + ", " +
                                              std::to_string(hi) + "], got '" + text + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ServiceConfig config_from(const std::function<std::optional<std::string>(const std::string&)>& lookup,
                          ServiceConfig cfg) {
  if (auto v = lookup("INFRISK_LISTEN")) {
    const auto colon = v->rfind(':');
    if (colon == std::string::npos) {
      cfg.port = parse_int("INFRISK_LISTEN", *v, 0, 65535);
    } else {
      if (colon > 0) cfg.host = v->substr(0, colon);
      cfg.port = parse_int("INFRISK_LISTEN", v->substr(colon + 1), 0, 65535);
    }
  }
  if (auto v = lookup("INFRISK_REGISTRY_ROOT")) cfg.registry_root = *v;
  if (auto v = lookup("INFRISK_SCHEMA_DIR")) cfg.schema_dir = *v;
  if (auto v = lookup("INFRISK_MODELS_DIR")) cfg.models_dir = *v;
  if (auto v = lookup("INFRISK_STATIC_DIR")) cfg.static_dir = *v;
  if (auto v = lookup("INFRISK_TOKEN")) cfg.bearer_token = *v;
  if (auto v = lookup("INFRISK_CORS_ORIGIN")) cfg.cors_origin = *v;
  if (auto v = lookup("INFRISK_GAME_TTL_SECONDS")) {
    cfg.game_ttl = std::chrono::seconds(parse_int("INFRISK_GAME_TTL_SECONDS", *v, 1, 7 * 24 * 3600));
  }
  return cfg;
}

ServiceConfig config_from_environment(ServiceConfig defaults) {
  return config_from(
      [](const std::string& key) -> std::optional<std::string> {
        if (const char* v = std::getenv(key.c_str())) return std::string(v);
        return std::nullopt;
      },
      std::move(defaults));
}

std::map<std::string, std::string> read_env_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (line.rfind("export ", 0) == 0) line = trim(line.substr(7));
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::configuration,
                  path.string() + ":" + std::to_string(lineno) + ": expected KEY=VALUE");
    }
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    out[trim(line.substr(0, eq))] = value;
  }
  return out;
}

}  // namespace infrisk::service
