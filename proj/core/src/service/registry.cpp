#include "infrisk/service/registry.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include "infrisk/error.hpp"

namespace infrisk::service {

namespace fs = std::filesystem;

namespace {

constexpr const char* kActiveFile = "ACTIVE";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-then-rename so readers never see a partial file.
void write_atomically(const fs::path& target, const std::string& content) {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  const fs::path tmp = target.parent_path() / (".tmp-" + std::to_string(rng()) + "-" + target.filename().string());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::io, "cannot rename into " + target.string());
  }
}

std::optional<int> version_from_filename(const fs::path& p) {
  const std::string name = p.filename().string();
  if (name.size() < 7 || name.front() != 'v' || p.extension() != ".json") return std::nullopt;
  const std::string digits = name.substr(1, name.size() - 6);
  int v = 0;
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc{} || end != digits.data() + digits.size() || v < 1) return std::nullopt;
  return v;
}

int parse_active(const std::string& text, const fs::path& where) {
  std::string t = text;
  while (!t.empty() && (t.back() == '\n' || t.back() == '\r' || t.back() == ' ')) t.pop_back();
  int v = 0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || end != t.data() + t.size() || v < 1) {
    throw Error(ErrorCode::configuration, "corrupt active pointer " + where.string());
  }
  return v;
}

}  // namespace

ModelRegistry::ModelRegistry(fs::path root, SchemaCatalog schemas)
    : root_(std::move(root)), schemas_(std::move(schemas)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create registry root " + root_.string());
  load_active();
}

fs::path ModelRegistry::schema_root(const std::string& schema_id) const { return root_ / schema_id; }

void ModelRegistry::load_active() {
  for (const auto& id : schemas_.ids()) {
    const fs::path pointer = schema_root(id) / kActiveFile;
    if (!fs::exists(pointer)) continue;
    const int version = parse_active(read_file(pointer), pointer);
    auto model = load_version(id, version);
    auto problems = check_model_against_schema(model, *schemas_.find(id));
    if (!problems.empty()) {
      throw Error(ErrorCode::schema_mismatch,
                  "active model v" + std::to_string(version) + " does not fit schema '" + id + "'", problems);
    }
    active_[id] = std::make_shared<const ActiveModel>(ActiveModel{version, std::move(model)});
  }
}

RiskModel ModelRegistry::load_version(const std::string& schema_id, int version) const {
  const fs::path file = schema_root(schema_id) / ("v" + std::to_string(version) + ".json");
  if (!fs::exists(file)) {
    throw Error(ErrorCode::not_found,
                "schema '" + schema_id + "' has no model version " + std::to_string(version));
  }
  auto model = load_model_file(file);
  set_version(model, version);
  return model;
}

void ModelRegistry::seed_defaults(const fs::path& models_dir) {
  for (const auto& id : schemas_.ids()) {
    if (!versions(id).empty()) continue;
    const fs::path file = models_dir / (id + ".json");
    if (!fs::exists(file)) continue;
    const int v = add_version(load_model_file(file));
    activate(id, v);
  }
}

std::shared_ptr<const ActiveModel> ModelRegistry::active(const std::string& schema_id) const {
  std::shared_lock lock(read_);
  auto it = active_.find(schema_id);
  return it == active_.end() ? nullptr : it->second;
}

std::vector<int> ModelRegistry::versions(const std::string& schema_id) const {
  std::vector<int> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(schema_root(schema_id), ec)) {
    if (auto v = version_from_filename(entry.path())) out.push_back(*v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int ModelRegistry::add_version(RiskModel model) {
  const std::string schema_id = schema_id_of(model);
  const auto schema = schemas_.find(schema_id);
  if (!schema) throw Error(ErrorCode::not_found, "unknown schema '" + schema_id + "'");
  auto problems = check_model_against_schema(model, *schema);
  if (!problems.empty()) {
    throw Error(ErrorCode::schema_mismatch, "model does not fit schema '" + schema_id + "'", problems);
  }

  std::lock_guard lock(writer_);
  const fs::path dir = schema_root(schema_id);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string());
  const auto existing = versions(schema_id);
  const int version = existing.empty() ? 1 : existing.back() + 1;
  set_version(model, version);
  const fs::path file = dir / ("v" + std::to_string(version) + ".json");
  if (fs::exists(file)) throw Error(ErrorCode::io, "refusing to overwrite " + file.string());
  write_atomically(file, serialize_model(model));
  return version;
}

void ModelRegistry::activate(const std::string& schema_id, int version) {
  const auto schema = schemas_.find(schema_id);
  if (!schema) throw Error(ErrorCode::not_found, "unknown schema '" + schema_id + "'");

  std::lock_guard lock(writer_);
  auto model = load_version(schema_id, version);
  auto problems = check_model_against_schema(model, *schema);
  if (!problems.empty()) {
    throw Error(ErrorCode::schema_mismatch,
                "model v" + std::to_string(version) + " does not fit schema '" + schema_id + "'", problems);
  }
  write_atomically(schema_root(schema_id) / kActiveFile, std::to_string(version) + "\n");
  auto next = std::make_shared<const ActiveModel>(ActiveModel{version, std::move(model)});
  std::unique_lock swap(read_);
  active_[schema_id] = std::move(next);
}

}  // namespace infrisk::service
