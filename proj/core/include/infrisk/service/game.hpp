#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "infrisk/answers.hpp"
#include "infrisk/assessment.hpp"
#include "infrisk/probability.hpp"

namespace infrisk::service {

struct Guess {
  std::optional<double> probability;
  std::optional<RiskBand> band;
};

/// Parses {"probability": p} and/or {"band": name}; at least one is needed.
Guess guess_from_json(const nlohmann::json& doc);

struct GameSession {
  std::string id;
  std::string schema_id;
  AnswerSet answers;
  RiskAssessment actual;
  BandThresholds bands;
  std::optional<Guess> guess;
  std::chrono::steady_clock::time_point expires;
};

/// In-memory guess-the-risk sessions. Sessions expire `ttl` after creation.
class GameStore {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit GameStore(std::chrono::seconds ttl, Clock clock = {});

  /// Returns the public view: session id, schema id, state. No risk.
  nlohmann::json create(std::string schema_id, AnswerSet answers, RiskAssessment actual,
                        BandThresholds bands);

  /// Public view; includes the reveal once guessed. Error(not_found).
  nlohmann::json view(const std::string& id);

  /// Records the guess and returns the reveal document
  /// {session, actual, guess, absolute_error, band_match}.
  /// Error(not_found) for unknown or expired ids; Error(conflict) for a
  /// second guess. A numeric guess without a band is matched by its own band.
  nlohmann::json guess(const std::string& id, const Guess& guess);

  std::size_t size();

 private:
  void purge(std::chrono::steady_clock::time_point now);

  std::chrono::seconds ttl_;
  Clock clock_;
  std::mutex mutex_;
  std::map<std::string, GameSession> sessions_;
};

}  // namespace infrisk::service
