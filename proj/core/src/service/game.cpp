#include "infrisk/service/game.hpp"

#include <cmath>
#include <random>

#include "infrisk/error.hpp"

namespace infrisk::service {

namespace {

std::string new_session_id() {
  static thread_local std::random_device rd;
  static const char* hex = "0123456789abcdef";
  std::string id;
  for (int i = 0; i < 4; ++i) {
    std::uint32_t word = rd();
    for (int k = 0; k < 8; ++k, word >>= 4) id.push_back(hex[word & 0xf]);
  }
  return id;
}

nlohmann::json public_view(const GameSession& s) {
  return {{"session", s.id},
          {"schema_id", s.schema_id},
          {"state", s.guess ? "revealed" : "awaiting-guess"}};
}

nlohmann::json guess_to_json(const Guess& g) {
  nlohmann::json doc = nlohmann::json::object();
  if (g.probability) doc["probability"] = *g.probability;
  if (g.band) doc["band"] = std::string(to_string(*g.band));
  return doc;
}

nlohmann::json reveal(const GameSession& s) {
  auto doc = public_view(s);
  const Guess& g = *s.guess;
  doc["actual"] = assessment_to_json(s.actual);
  doc["guess"] = guess_to_json(g);
  doc["absolute_error"] = g.probability ? nlohmann::json(std::abs(*g.probability - s.actual.probability))
                                        : nlohmann::json(nullptr);
  const RiskBand guessed = g.band ? *g.band : band_for(*g.probability, s.bands);
  doc["band_match"] = guessed == s.actual.band;
  return doc;
}

}  // namespace

Guess guess_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::validation, "guess must be a JSON object");
  Guess g;
  for (const auto& [key, value] : doc.items()) {
    if (key == "probability") {
      if (!value.is_number()) throw Error(ErrorCode::validation, "guess.probability must be a number");
      const double p = value.get<double>();
      if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::validation, "guess.probability must lie in [0, 1]");
      g.probability = p;
    } else if (key == "band") {
      if (!value.is_string()) throw Error(ErrorCode::validation, "guess.band must be a string");
      g.band = parse_band(value.get<std::string>());
      if (!g.band) throw Error(ErrorCode::validation, "unknown band '" + value.get<std::string>() + "'");
    } else {
      throw Error(ErrorCode::validation, "unknown guess field '" + key + "'");
    }
  }
  if (!g.probability && !g.band) throw Error(ErrorCode::validation, "guess needs a probability or a band");
  return g;
}

GameStore::GameStore(std::chrono::seconds ttl, Clock clock) : ttl_(ttl), clock_(std::move(clock)) {
  if (!clock_) clock_ = [] { return std::chrono::steady_clock::now(); };
}

void GameStore::purge(std::chrono::steady_clock::time_point now) {
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (it->second.expires <= now) it = sessions_.erase(it);
    else ++it;
  }
}

nlohmann::json GameStore::create(std::string schema_id, AnswerSet answers, RiskAssessment actual,
                                 BandThresholds bands) {
  const auto now = clock_();
  std::lock_guard lock(mutex_);
  purge(now);
  std::string id;
  do id = new_session_id();
  while (sessions_.count(id));
  GameSession s{id, std::move(schema_id), std::move(answers), std::move(actual), bands, std::nullopt, now + ttl_};
  auto doc = public_view(s);
  doc["expires_in"] = ttl_.count();
  sessions_.emplace(id, std::move(s));
  return doc;
}

nlohmann::json GameStore::view(const std::string& id) {
  std::lock_guard lock(mutex_);
  purge(clock_());
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::not_found, "unknown or expired game session");
  return it->second.guess ? reveal(it->second) : public_view(it->second);
}

nlohmann::json GameStore::guess(const std::string& id, const Guess& g) {
  std::lock_guard lock(mutex_);
  purge(clock_());
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::not_found, "unknown or expired game session");
  if (it->second.guess) throw Error(ErrorCode::conflict, "this session has already been revealed");
  it->second.guess = g;
  return reveal(it->second);
}

std::size_t GameStore::size() {
  std::lock_guard lock(mutex_);
  purge(clock_());
  return sessions_.size();
}

}  // namespace infrisk::service
