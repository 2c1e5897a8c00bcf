#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "infrisk/model_io.hpp"
#include "infrisk/schema.hpp"

namespace infrisk::service {

struct ActiveModel {
  int version = 0;
  RiskModel model;
};

/// File-backed model store.
///
///   <root>/<schema-id>/v<N>.json   immutable model versions
///   <root>/<schema-id>/ACTIVE      active version number
///
/// Writes go to a temporary file that is renamed into place. Readers get a
/// shared_ptr snapshot, so an activation never exposes a half-swapped model.
class ModelRegistry {
 public:
  ModelRegistry(std::filesystem::path root, SchemaCatalog schemas);

  const SchemaCatalog& schemas() const noexcept { return schemas_; }
  const std::filesystem::path& root() const noexcept { return root_; }

  /// For every schema without stored versions, stores `<dir>/<schema-id>.json`
  /// as version 1 and activates it. Schemas without a default file are skipped.
  void seed_defaults(const std::filesystem::path& models_dir);

  /// nullptr when the schema has no active model.
  std::shared_ptr<const ActiveModel> active(const std::string& schema_id) const;

  /// Persists the model as the next version and returns that number. The
  /// model must be compatible with its schema (Error(schema_mismatch)).
  int add_version(RiskModel model);

  /// Error(not_found) for an unknown schema or version, Error(schema_mismatch)
  /// when the stored model no longer fits the schema.
  void activate(const std::string& schema_id, int version);

  std::vector<int> versions(const std::string& schema_id) const;

 private:
  std::filesystem::path schema_root(const std::string& schema_id) const;
  RiskModel load_version(const std::string& schema_id, int version) const;
  void load_active();

  std::filesystem::path root_;
  SchemaCatalog schemas_;
  std::mutex writer_;
  mutable std::shared_mutex read_;
  std::map<std::string, std::shared_ptr<const ActiveModel>> active_;
};

}  // namespace infrisk::service
