#include "support.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace infrisk::testing {

namespace fs = std::filesystem;

fs::path source_dir() { return INFRISK_TEST_SOURCE_DIR; }
fs::path fixture(const std::string& name) { return source_dir() / "tests" / "fixtures" / name; }

QuestionnaireSchema shipped_schema(const std::string& id) {
  return load_schema_file(source_dir() / "schemas" / (id + ".json"));
}

RiskModel shipped_model(const std::string& id) { return load_model_file(source_dir() / "models" / (id + ".json")); }

std::vector<std::string> shipped_schema_ids() { return {"childbirth-hospital", "childbirth-patient", "sti-hiv"}; }

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 == 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

double joint_table_posterior(double prior, const std::vector<AttributeLikelihood>& attributes) {
  const std::size_t k = attributes.size();
  long double infected_and_evidence = 0.0L;
  long double evidence = 0.0L;
  for (int h = 0; h <= 1; ++h) {
    for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
      long double p = h ? prior : 1.0L - prior;
      for (std::size_t i = 0; i < k; ++i) {
        const long double present = h ? attributes[i].given_infected : attributes[i].given_clean;
        p *= (mask >> i & 1) ? present : 1.0L - present;
      }
      if (mask != (1ULL << k) - 1) continue;  // observed: every attribute present
      evidence += p;
      if (h) infected_and_evidence += p;
    }
  }
  return static_cast<double>(infected_and_evidence / evidence);
}

double enumerate_expectation(const FeatureVector& features, const std::map<std::string, double>& priors,
                             const std::function<double(const FeatureVector&)>& risk) {
  const std::vector<std::string> unknown(features.unknown.begin(), features.unknown.end());
  const std::size_t k = unknown.size();
  long double total = 0.0L;
  for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
    FeatureVector completed;
    completed.values = features.values;
    long double w = 1.0L;
    for (std::size_t i = 0; i < k; ++i) {
      const double p = priors.at(unknown[i]);
      const bool on = mask >> i & 1;
      completed.values[unknown[i]] = on ? 1.0 : 0.0;
      w *= on ? p : 1.0L - p;
    }
    if (w == 0.0L) continue;
    total += w * risk(completed);
  }
  return static_cast<double>(total);
}

double reference_logistic_probability(const FeatureVector& f, const LogisticModel& m) {
  auto value = [&](const std::string& id) -> long double {
    auto it = f.values.find(id);
    return it == f.values.end() ? 0.0L : it->second;
  };
  long double y = m.intercept;
  for (const auto& [id, b] : m.main_coefs) y += b * value(id);
  for (const auto& [pair, b] : m.interaction_coefs) y += b * value(pair.first) * value(pair.second);
  return static_cast<double>(1.0L / (1.0L + std::exp(-y)));
}

RandomLogisticCase random_logistic_case(std::mt19937_64& rng, std::size_t max_unknowns, std::size_t forced_unknowns) {
  RandomLogisticCase c;
  auto& s = c.schema;
  s.id = "random-" + std::to_string(rng() % 1000000);
  s.audience = Audience::hospital;
  s.model_kind = ModelKind::logistic;
  s.labels = {{"pl", "losowy"}};
  s.sections.push_back(Section{"s", {{"pl", "sekcja"}}, false, std::nullopt});

  forced_unknowns = std::min(forced_unknowns, max_unknowns);
  const std::size_t n = std::max<std::size_t>(1 + uniform_index(rng, 15), forced_unknowns + uniform_index(rng, 4));
  std::size_t unknowns = 0;
  c.answers.schema_id = s.id;
  c.model.schema_id = s.id;
  c.model.model_id = s.id + "-model";
  c.model.intercept = uniform(rng, -4.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    Question q;
    q.id = "q" + std::to_string(i);
    q.section = "s";
    q.feature = "f" + std::to_string(i);
    q.labels = {{"pl", "pytanie " + std::to_string(i)}};
    const bool forced = i < forced_unknowns;
    const bool tri = forced || uniform01(rng) < 0.7;
    q.widget = tri ? Widget::tri_state : Widget::checkbox;
    q.allow_unknown = tri;
    if (tri) {
      const double r = uniform01(rng);
      s.priors[*q.feature] = (r < 0.08 && !forced) ? 0.0 : (r < 0.16 && !forced) ? 1.0 : uniform(rng, 0.01, 0.99);
    }
    c.model.main_coefs[*q.feature] = uniform(rng, -2.0, 2.0);

    const double r = uniform01(rng);
    if (forced || (tri && unknowns < max_unknowns && r < 0.6)) {
      ++unknowns;
      c.features.unknown.insert(*q.feature);
      if (r < 0.45) c.answers.answers[q.id] = std::monostate{};  // else left unanswered
    } else {
      const bool on = uniform01(rng) < 0.5;
      c.features.values[*q.feature] = on ? 1.0 : 0.0;
      if (on || uniform01(rng) < 0.5 || tri) c.answers.answers[q.id] = on;
    }
    s.questions.push_back(std::move(q));
  }
  const std::size_t pairs = n < 2 ? 0 : uniform_index(rng, 4);
  std::set<std::pair<std::size_t, std::size_t>> used;
  for (std::size_t k = 0; k < pairs; ++k) {
    std::size_t a = uniform_index(rng, n), b = uniform_index(rng, n);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!used.insert({a, b}).second) continue;
    FeaturePair p{"f" + std::to_string(a), "f" + std::to_string(b)};
    s.interaction_pairs.push_back(p);
    c.model.interaction_coefs[p] = uniform(rng, -1.5, 1.5);
  }
  return c;
}

AnswerSet random_answers(const QuestionnaireSchema& schema, std::mt19937_64& rng) {
  AnswerSet a;
  a.schema_id = schema.id;
  for (const auto& q : schema.questions) {
    bool must = q.required || q.role == QuestionRole::contact_type;
    if (q.widget == Widget::dropdown) {
      must = must || std::none_of(q.options.begin(), q.options.end(), [](const Option& o) { return !o.feature; });
    }
    if (!must && uniform01(rng) < 0.25) continue;
    switch (q.widget) {
      case Widget::checkbox: a.answers[q.id] = uniform01(rng) < 0.5; break;
      case Widget::tri_state: {
        const double r = uniform01(rng);
        if (r < 0.3) a.answers[q.id] = std::monostate{};
        else a.answers[q.id] = r < 0.65;
        break;
      }
      case Widget::dropdown: a.answers[q.id] = q.options[uniform_index(rng, q.options.size())].value; break;
      case Widget::slider: {
        const auto& b = *q.bounds;
        double v = uniform(rng, b.lo, b.hi);
        if (b.step > 0 && uniform01(rng) < 0.5) {
          const auto steps = static_cast<std::size_t>(std::floor((b.hi - b.lo) / b.step));
          v = b.lo + b.step * static_cast<double>(uniform_index(rng, steps + 1));
        }
        a.answers[q.id] = v;
        break;
      }
    }
  }
  return a;
}

CohortDataset synthetic_cohort(std::size_t n, std::uint64_t seed, const Generator& g) {
  std::mt19937_64 rng(seed);
  CohortDataset ds;
  ds.schema_id = "synthetic";
  ds.feature_ids = {"x1", "x2"};
  ds.interaction_pairs = {{"x1", "x2"}};
  ds.provenance = "synthetic generator";
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = standard_normal(rng), x2 = standard_normal(rng);
    const double eta = g.intercept + g.x1 * x1 + g.x2 * x2 + g.x1_x2 * x1 * x2;
    const double p = 1.0 / (1.0 + std::exp(-eta));
    CohortRow row;
    row.features.values = {{"x1", x1}, {"x2", x2}};
    row.outcome = uniform01(rng) < p ? 1 : 0;
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

CohortDataset random_cohort(std::mt19937_64& rng, std::size_t rows, std::size_t features) {
  CohortDataset ds;
  ds.schema_id = "random";
  for (std::size_t j = 0; j < features; ++j) ds.feature_ids.push_back("x" + std::to_string(j));
  if (features >= 2 && uniform01(rng) < 0.5) ds.interaction_pairs.push_back({"x0", "x1"});
  std::vector<double> beta(1 + features + ds.interaction_pairs.size());
  for (auto& b : beta) b = uniform(rng, -2.0, 2.0);
  const double scale = uniform(rng, 0.5, 2.0);
  const bool binary = uniform01(rng) < 0.3;
  for (std::size_t i = 0; i < rows; ++i) {
    CohortRow row;
    std::vector<double> x;
    for (std::size_t j = 0; j < features; ++j) {
      const double v = binary ? (uniform01(rng) < 0.5 ? 1.0 : 0.0) : scale * standard_normal(rng);
      row.features.values[ds.feature_ids[j]] = v;
      x.push_back(v);
    }
    double eta = beta[0];
    for (std::size_t j = 0; j < features; ++j) eta += beta[1 + j] * x[j];
    if (!ds.interaction_pairs.empty()) eta += beta.back() * x[0] * x[1];
    row.outcome = uniform01(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
    ds.rows.push_back(std::move(row));
  }
  // Both classes present so an unpenalized fit is well posed.
  ds.rows[0].outcome = 1;
  ds.rows[1].outcome = 0;
  return ds;
}

std::vector<double> coefficient_vector(const LogisticModel& m, const CohortDataset& ds) {
  std::vector<double> beta{m.intercept};
  for (const auto& f : ds.feature_ids) beta.push_back(m.main_coefs.at(f));
  for (const auto& p : ds.interaction_pairs) beta.push_back(m.interaction_coefs.at(p));
  return beta;
}

LogisticModel model_from_vector(const std::vector<double>& beta, const CohortDataset& ds) {
  LogisticModel m;
  m.schema_id = ds.schema_id;
  std::size_t j = 0;
  m.intercept = beta.at(j++);
  for (const auto& f : ds.feature_ids) m.main_coefs[f] = beta.at(j++);
  for (const auto& p : ds.interaction_pairs) m.interaction_coefs[p] = beta.at(j++);
  return m;
}

long double reference_objective(const CohortDataset& ds, const std::vector<double>& beta, double lambda) {
  long double total = 0.0L;
  for (const auto& r : ds.rows) {
    auto v = [&](const std::string& id) -> long double {
      auto it = r.features.values.find(id);
      return it == r.features.values.end() ? 0.0L : it->second;
    };
    long double eta = beta[0];
    std::size_t j = 1;
    for (const auto& f : ds.feature_ids) eta += beta[j++] * v(f);
    for (const auto& p : ds.interaction_pairs) eta += beta[j++] * v(p.first) * v(p.second);
    // log(1 + e^eta) without overflow
    const long double softplus = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    total += r.outcome * eta - softplus;
  }
  long double sq = 0.0L;
  for (double b : beta) sq += static_cast<long double>(b) * b;
  return total - 0.5L * lambda * sq;
}

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "infrisk-test-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path TempDir::write(const std::string& name, const std::string& content) const {
  const fs::path p = path_ / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CommandResult run_command(const std::vector<std::string>& argv) {
  TempDir tmp;
  const fs::path out = tmp.path() / "stdout", err = tmp.path() / "stderr";
  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    if (!freopen(out.c_str(), "w", stdout) || !freopen(err.c_str(), "w", stderr)) _exit(127);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execv(args[0], args.data());
    _exit(127);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

int free_loopback_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error("socket failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  socklen_t len = sizeof(addr);
  const bool ok = ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0 &&
                  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0;
  ::close(fd);
  if (!ok) throw std::runtime_error("cannot find a free port");
  return ntohs(addr.sin_port);
}

}  // namespace infrisk::testing
