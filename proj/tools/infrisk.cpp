// infrisk: assess, calibrate, validate, serve.
//
// Exit codes: 0 success, 1 validation or domain error, 2 usage error.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <pthread.h>

#include "data_dir.hpp"
#include "infrisk/calibration/cohort.hpp"
#include "infrisk/calibration/fit.hpp"
#include "infrisk/engine.hpp"
#include "infrisk/error.hpp"
#include "infrisk/model_io.hpp"
#include "infrisk/schema.hpp"
#include "infrisk/service/server.hpp"

namespace fs = std::filesystem;
using namespace infrisk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void report(const Error& e) {
  std::cerr << "error: " << e.what() << "\n";
  for (const auto& d : e.details()) std::cerr << "  - " << d << "\n";
}

// --schema accepts a file path or the id of a shipped schema.
QuestionnaireSchema resolve_schema(const std::string& arg) {
  if (fs::is_regular_file(arg)) return load_schema_file(arg);
  const fs::path shipped = cli::data_dir() / "schemas" / (arg + ".json");
  if (fs::is_regular_file(shipped)) return load_schema_file(shipped);
  throw UsageError("--schema: '" + arg + "' is neither a file nor a shipped schema id");
}

RiskModel resolve_model(const std::string& arg, const QuestionnaireSchema& schema) {
  const fs::path file = arg.empty() ? cli::data_dir() / "models" / (schema.id + ".json") : fs::path(arg);
  if (!fs::is_regular_file(file)) throw UsageError("no model file at " + file.string());
  return load_model_file(file);
}

std::string percentage_points(double delta) {
  std::ostringstream ss;
  ss << std::showpos << std::setprecision(3) << delta * 100.0 << " pp";
  return ss.str();
}

std::string text_report(const RiskAssessment& a, const QuestionnaireSchema& schema) {
  std::ostringstream out;
  out << "Risk: " << a.display << " (" << to_string(a.band) << ")\n";
  if (a.interval) {
    out << "95% interval: " << format_percentage(a.interval->lo) << " - " << format_percentage(a.interval->hi) << "\n";
  }
  if (a.factor_deltas.empty()) {
    out << "No modifiable factors to change.\n";
    return out.str();
  }
  out << "Top modifiable factors:\n";
  const std::size_t shown = std::min<std::size_t>(3, a.factor_deltas.size());
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& d = a.factor_deltas[i];
    std::string label;
    if (const auto* q = schema.find_question(d.factor)) {
      auto it = q->labels.find("en");
      if (it == q->labels.end()) it = q->labels.find("pl");
      if (it != q->labels.end()) label = "  " + it->second;
    }
    out << "  " << d.factor << "  " << percentage_points(d.delta) << label << "\n";
  }
  return out.str();
}

int cmd_assess(const std::string& schema_arg, const std::string& answers_file, const std::string& model_arg,
               const std::string& format) {
  const auto schema = resolve_schema(schema_arg);
  const auto model = resolve_model(model_arg, schema);
  if (auto problems = check_model_against_schema(model, schema); !problems.empty()) {
    throw Error(ErrorCode::schema_mismatch, "model does not fit schema '" + schema.id + "'", problems);
  }
  AnswerSet answers = parse_answer_set(read_text(answers_file));
  if (answers.schema_id.empty()) answers.schema_id = schema.id;
  if (answers.schema_id != schema.id) {
    throw Error(ErrorCode::validation, "answers are for schema '" + answers.schema_id + "', not '" + schema.id + "'");
  }
  const auto assessment = assess(schema, model, answers);
  if (format == "json") std::cout << assessment_body(assessment);
  else std::cout << text_report(assessment, schema);
  return kExitOk;
}

int cmd_calibrate(const std::string& schema_arg, const std::string& data, const std::string& out_file,
                  const FitConfig& cfg) {
  const auto schema = resolve_schema(schema_arg);
  if (schema.model_kind != ModelKind::logistic) {
    throw Error(ErrorCode::validation, "schema '" + schema.id + "' is not backed by a logistic model");
  }
  const auto ingested = ingest_cohort_csv_file(data, schema);
  for (const auto& w : ingested.warnings) std::cerr << "warning: " << w << "\n";
  const auto report = fit_logistic(ingested.dataset, cfg);

  std::cout << "rows: " << report.rows << "\n"
            << "iterations: " << report.iterations << "\n"
            << "converged: " << (report.converged ? "yes" : "no") << "\n"
            << "max |gradient|: " << std::scientific << std::setprecision(3) << report.max_gradient_norm << "\n"
            << "penalty: " << report.penalty_used << "\n"
            << std::defaultfloat << std::setprecision(10) << "log-likelihood: " << report.log_likelihood << "\n";

  if (cfg.ridge_lambda == 0.0 && report.penalty_used > 0.0) {
    std::cerr << "error: unpenalized fit did not converge (quasi-separation or singular design); "
                 "rerun with --ridge <lambda>, e.g. --ridge 0.001\n";
    return kExitInvalid;
  }
  if (!report.converged) {
    std::cerr << "error: fit did not converge within " << cfg.max_iters
              << " iterations; raise --max-iters or add --ridge <lambda>\n";
    return kExitInvalid;
  }

  std::cout << "coefficients (estimate, standard error):\n";
  const auto cols = design_columns(ingested.dataset);
  const auto& m = report.coefficients;
  for (const auto& c : cols) {
    double v = m.intercept;
    if (auto it = m.main_coefs.find(c); it != m.main_coefs.end()) v = it->second;
    for (const auto& [pair, coef] : m.interaction_coefs) {
      if (pair.name() == c) v = coef;
    }
    auto se = report.standard_errors.find(c);
    std::cout << "  " << std::left << std::setw(28) << c << std::right << std::fixed << std::setprecision(6)
              << std::setw(12) << v << std::setw(12) << (se == report.standard_errors.end() ? 0.0 : se->second)
              << "\n";
  }

  std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + out_file);
  out << fit_report_to_json(report).dump(2) << "\n";
  if (!out) throw Error(ErrorCode::io, "write failed for " + out_file);
  std::cout << "model written to " << out_file << "\n";
  return kExitOk;
}

int cmd_validate(const std::vector<std::string>& files, const std::string& model_file) {
  int status = kExitOk;
  std::optional<QuestionnaireSchema> last;
  for (const auto& f : files) {
    try {
      last = parse_schema(read_text(f));
      std::cout << "ok: " << f << " (" << last->id << ")\n";
    } catch (const Error& e) {
      status = kExitInvalid;
      std::cout << "invalid: " << f << "\n";
      std::cout << "  " << e.what() << "\n";
      for (const auto& d : e.details()) std::cout << "  - " << d << "\n";
      last.reset();
    }
  }
  if (!model_file.empty()) {
    if (files.size() != 1) throw UsageError("--model needs exactly one --schema");
    if (!last) return kExitInvalid;
    try {
      const auto problems = check_model_against_schema(load_model_file(model_file), *last);
      if (problems.empty()) {
        std::cout << "ok: " << model_file << " fits " << last->id << "\n";
      } else {
        status = kExitInvalid;
        std::cout << "invalid: " << model_file << "\n";
        for (const auto& p : problems) std::cout << "  - " << p << "\n";
      }
    } catch (const Error& e) {
      status = kExitInvalid;
      std::cout << "invalid: " << model_file << "\n  " << e.what() << "\n";
      for (const auto& d : e.details()) std::cout << "  - " << d << "\n";
    }
  }
  return status;
}

int cmd_serve(const std::string& config_file, const std::string& listen, const std::string& registry) {
  std::map<std::string, std::string> file_values;
  if (!config_file.empty()) file_values = service::read_env_file(config_file);

  service::ServiceConfig defaults;
  defaults.schema_dir = cli::data_dir() / "schemas";
  defaults.models_dir = cli::data_dir() / "models";
  defaults.registry_root.clear();
  // Process environment wins over the config file; flags win over both.
  auto cfg = service::config_from(
      [&](const std::string& key) -> std::optional<std::string> {
        if (const char* v = std::getenv(key.c_str())) return std::string(v);
        if (auto it = file_values.find(key); it != file_values.end()) return it->second;
        return std::nullopt;
      },
      defaults);
  if (!listen.empty()) cfg = service::config_from([&](const std::string& k) -> std::optional<std::string> {
    if (k == "INFRISK_LISTEN") return listen;
    return std::nullopt;
  }, cfg);
  if (!registry.empty()) cfg.registry_root = registry;
  if (cfg.registry_root.empty()) throw UsageError("serve needs a registry root (--registry or INFRISK_REGISTRY_ROOT)");

  service::ModelRegistry reg(cfg.registry_root, SchemaCatalog::load_directory(cfg.schema_dir));
  if (!cfg.models_dir.empty() && fs::is_directory(cfg.models_dir)) reg.seed_defaults(cfg.models_dir);
  service::Api api(reg, cfg);
  service::HttpServer server(api);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const int port = server.bind(cfg.host, cfg.port);
  std::thread worker([&] { server.run(); });
  server.wait_until_ready();
  std::cout << "listening on http://" << cfg.host << ":" << port << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  worker.join();
  std::cout << "stopped" << std::endl;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infection risk assessment"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "infrisk 0.1.0");

  std::string schema_arg, answers_file, model_arg, format = "text";
  auto* assess_cmd = app.add_subcommand("assess", "Assess risk for an answers file");
  assess_cmd->add_option("--schema", schema_arg, "Schema file or shipped schema id")->required();
  assess_cmd->add_option("--answers", answers_file, "AnswerSet JSON file")->required()->check(CLI::ExistingFile);
  assess_cmd->add_option("--model", model_arg, "Model file (default: shipped model for the schema)")
      ->check(CLI::ExistingFile);
  assess_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));

  std::string data_file, out_file;
  FitConfig fit_cfg;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit logistic coefficients from a cohort CSV");
  calibrate_cmd->add_option("--schema", schema_arg, "Schema file or shipped schema id")->required();
  calibrate_cmd->add_option("--data", data_file, "Cohort CSV")->required()->check(CLI::ExistingFile);
  calibrate_cmd->add_option("--out", out_file, "Output model file")->required();
  calibrate_cmd->add_option("--ridge", fit_cfg.ridge_lambda, "Ridge penalty lambda")->check(CLI::NonNegativeNumber);
  calibrate_cmd->add_option("--max-iters", fit_cfg.max_iters, "IRLS iteration limit")->check(CLI::PositiveNumber);
  calibrate_cmd->add_option("--tolerance", fit_cfg.tolerance, "Gradient tolerance")->check(CLI::PositiveNumber);

  std::vector<std::string> schema_files;
  std::string validate_model;
  auto* validate_cmd = app.add_subcommand("validate", "Check schema files and report every violation");
  validate_cmd->add_option("--schema", schema_files, "Schema file(s)")->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--model", validate_model, "Also check a model against the schema")
      ->check(CLI::ExistingFile);

  std::string config_file, listen, registry;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service until interrupted");
  serve_cmd->add_option("--config", config_file, "KEY=VALUE file of INFRISK_* settings")->check(CLI::ExistingFile);
  serve_cmd->add_option("--listen", listen, "host:port (overrides INFRISK_LISTEN)");
  serve_cmd->add_option("--registry", registry, "Registry root (overrides INFRISK_REGISTRY_ROOT)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*assess_cmd) return cmd_assess(schema_arg, answers_file, model_arg, format);
    if (*calibrate_cmd) return cmd_calibrate(schema_arg, data_file, out_file, fit_cfg);
    if (*validate_cmd) return cmd_validate(schema_files, validate_model);
    if (*serve_cmd) return cmd_serve(config_file, listen, registry);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    report(e);
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitUsage;
}
