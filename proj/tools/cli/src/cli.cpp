#include "concierge_cli/cli.hpp"

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "concierge/config.hpp"
#include "concierge/error.hpp"
#include "concierge/generation.hpp"
#include "concierge/http_api.hpp"
#include "concierge/resources.hpp"
#include "concierge/serialization.hpp"
#include "concierge/session_service.hpp"
#include "concierge/speech_markup.hpp"
#include "concierge_cli/persona.hpp"

namespace concierge::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Flags {
  std::optional<std::string> config_file;
  std::optional<std::string> backend;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold_km;
  std::optional<int> runs;
  std::optional<std::string> persona;
  std::optional<std::string> data_dir;
  std::optional<std::string> storage_dir;
  std::optional<std::string> script;
  std::optional<std::string> endpoint;
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<std::string> url;
  std::optional<std::string> session;
  bool keep_store = false;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BackendUnavailable:
    case ErrorCode::ConnectError: return kExitConnectivity;
    case ErrorCode::SchemaError:
    case ErrorCode::DuplicateId:
    case ErrorCode::InvalidRequest:
    case ErrorCode::SessionNotFound: return kExitFindings;
    default: return kExitInternal;
  }
}

std::optional<ErrorCode> parse_error_code(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::InvalidRequest); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    if (to_string(code) == name) return code;
  }
  return std::nullopt;
}

AppConfig resolve_config(const Flags& f) {
  std::optional<fs::path> file;
  if (f.config_file) file = *f.config_file;
  AppConfig cfg = load_config(file);
  if (f.backend) cfg.backend = parse_backend_kind(*f.backend);
  if (f.seed) cfg.seed = *f.seed;
  if (f.threshold_km) cfg.threshold_km = *f.threshold_km;
  if (f.data_dir) cfg.data_dir = *f.data_dir;
  if (f.storage_dir) cfg.storage_dir = *f.storage_dir;
  if (f.script) cfg.script_file = *f.script;
  if (f.endpoint) cfg.backend_endpoint = *f.endpoint;
  if (f.host) cfg.host = *f.host;
  if (f.port) cfg.port = *f.port;
  if (cfg.data_dir.empty()) cfg.data_dir = default_data_dir();
  return cfg;
}

std::shared_ptr<SessionService> make_service(const AppConfig& cfg) {
  auto resources = std::make_shared<const Resources>(Resources::load(cfg.data_dir));
  return std::make_shared<SessionService>(
      to_service_config(cfg), std::move(resources), make_backend(cfg),
      cfg.seed ? seeded_id_generator(*cfg.seed) : random_id_generator());
}

// Uniform view over an embedded service or a remote one reached by URL; both
// speak the HTTP API's JSON shapes.
class Driver {
 public:
  virtual ~Driver() = default;
  virtual json create() = 0;
  virtual json turn(const std::string& id, const std::string& text) = 0;
  virtual json get(const std::string& id) = 0;
};

class EmbeddedDriver : public Driver {
 public:
  explicit EmbeddedDriver(std::shared_ptr<SessionService> s) : service_(std::move(s)) {}
  json create() override { return get(service_->create_session()); }
  json turn(const std::string& id, const std::string& text) override {
    return service_->post_user_turn(id, text);
  }
  json get(const std::string& id) override {
    const auto s = service_->get_session(id);
    return session_json(s, service_->candidate_cards(s));
  }

 private:
  std::shared_ptr<SessionService> service_;
};

class RemoteDriver : public Driver {
 public:
  explicit RemoteDriver(const std::string& url) : client_(url) {
    client_.set_connection_timeout(5);
    client_.set_read_timeout(60);
  }
  json create() override { return check(client_.Post("/sessions", "", "application/json")); }
  json turn(const std::string& id, const std::string& text) override {
    return check(client_.Post("/sessions/" + id + "/turns", json{{"text", text}}.dump(),
                              "application/json"));
  }
  json get(const std::string& id) override { return check(client_.Get("/sessions/" + id)); }

 private:
  json check(const httplib::Result& r) {
    if (!r) {
      throw Error(ErrorCode::ConnectError,
                  "service unreachable: " + httplib::to_string(r.error()));
    }
    json body = json::parse(r->body, nullptr, false);
    if (r->status >= 400) {
      auto code = ErrorCode::InvariantViolation;
      std::string message = r->body;
      if (body.is_object()) {
        if (auto c = parse_error_code(body.value("error", ""))) code = *c;
        message = body.value("message", message);
      }
      throw Error(code, message);
    }
    if (body.is_discarded()) throw Error(ErrorCode::InvariantViolation, "service sent non-JSON");
    return body;
  }

  httplib::Client client_;
};

std::string fmt_km(double km) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << km << " km";
  return os.str();
}

void print_cards(std::ostream& out, const json& cards) {
  int i = 1;
  for (const auto& c : cards) {
    out << "  " << i++ << ". " << c.value("name", "") << " (" << c.value("reading", "") << ")";
    if (c.contains("distance_from_first_km") && c["distance_from_first_km"].is_number()) {
      out << " [" << fmt_km(c["distance_from_first_km"].get<double>()) << " from first]";
    }
    out << "\n     " << c.value("reason", "") << "\n";
  }
}

void print_plan(std::ostream& out, const json& plan) {
  if (!plan.is_object()) return;
  out << "plan: " << plan["first_spot"].value("name", "") << " -> "
      << plan["second_spot"].value("name", "") << " ("
      << fmt_km(plan.value("inter_spot_distance_km", 0.0)) << ")\n";
}

int cmd_interactive(const Flags& f, std::istream& in, std::ostream& out, std::ostream& err) {
  std::unique_ptr<Driver> driver;
  if (f.url) {
    driver = std::make_unique<RemoteDriver>(*f.url);
  } else {
    driver = std::make_unique<EmbeddedDriver>(make_service(resolve_config(f)));
  }
  json view = f.session ? driver->get(*f.session) : driver->create();
  const std::string id = view.value("session_id", "");
  std::string state = view.value("state", "");
  out << "session " << id << " (" << state << ")\n";
  if (f.session && view.contains("candidates")) print_cards(out, view["candidates"]);
  if (state == "End") {
    print_plan(out, view.value("plan", json()));
    out << "this session has already ended\n";
    return kExitOk;
  }
  std::string line;
  while (true) {
    out << "you> " << std::flush;
    if (!std::getline(in, line)) {
      out << "\nsession saved; resume with: concierge interactive --session " << id << "\n";
      return kExitOk;
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line == "/quit") {
      out << "session saved; resume with: concierge interactive --session " << id << "\n";
      return kExitOk;
    }
    json r;
    try {
      r = driver->turn(id, line);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidRequest) {
        err << "rejected: " << e.what() << "\n";
        continue;
      }
      throw;
    }
    const std::string next = r.value("state", "");
    out << "system: " << r.value("system_text", "") << "\n";
    out << "        [" << state << " -> " << next << ", " << r.value("act", "")
        << (r.value("fallback", false) ? ", fallback" : "") << "]\n";
    if (r.contains("candidates")) print_cards(out, r["candidates"]);
    state = next;
    if (state == "End") {
      print_plan(out, r.value("plan", json()));
      out << "session complete\n";
      return kExitOk;
    }
  }
}

std::atomic<HttpApi*> g_serving{nullptr};

int cmd_serve(const Flags& f, std::ostream& out) {
  const auto cfg = resolve_config(f);
  HttpApi api(make_service(cfg));
  const int port = api.bind(cfg.host, cfg.port);
  out << "listening on http://" << cfg.host << ":" << port << "\n" << std::flush;

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  g_serving = &api;
  std::thread([set] {
    int sig = 0;
    sigwait(&set, &sig);
    if (auto* a = g_serving.load()) a->stop();
  }).detach();
  api.listen();
  g_serving = nullptr;
  return kExitOk;
}

int cmd_metrics(const Flags& f, std::ostream& out) {
  const auto cfg = resolve_config(f);
  out << json(compute_metrics(cfg.storage_dir, cfg.threshold_km)).dump(2) << "\n";
  return kExitOk;
}

int cmd_personas(const Flags& f, std::ostream& out) {
  auto cfg = resolve_config(f);
  const auto persona = load_persona(f.persona.value_or("balanced"), cfg.data_dir);
  SimulationOptions opt;
  opt.runs = f.runs.value_or(100);
  opt.seed = cfg.seed.value_or(0);
  if (opt.runs < 0) throw Error(ErrorCode::InvalidRequest, "--runs must be >= 0");

  std::string tmpl = (fs::temp_directory_path() / "concierge-personas-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw Error(ErrorCode::StorageError, "cannot create temp store");
  const fs::path store = tmpl;
  cfg.storage_dir = store;
  auto resources = std::make_shared<const Resources>(Resources::load(cfg.data_dir));
  SimulationResult result;
  try {
    result = simulate(persona, resources, to_service_config(cfg), opt);
  } catch (...) {
    if (!f.keep_store) fs::remove_all(store);
    throw;
  }
  json report = {{"persona", persona.name},
                 {"runs", opt.runs},
                 {"seed", opt.seed},
                 {"abandoned", result.abandoned},
                 {"mean_turns", opt.runs ? static_cast<double>(result.total_turns) / opt.runs : 0.0},
                 {"metrics", result.metrics}};
  if (f.keep_store) report["store"] = store.string();
  else fs::remove_all(store);
  out << report.dump(2) << "\n";
  return kExitOk;
}

// --- validate ---------------------------------------------------------------

struct Findings {
  std::vector<std::string> lines;
  void add(const fs::path& file, const std::string& what) {
    lines.push_back(file.filename().string() + ": " + what);
  }
};

std::optional<json> read_json(const fs::path& path, Findings& findings) {
  std::ifstream in(path);
  if (!in) {
    findings.add(path, "cannot read file");
    return std::nullopt;
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    findings.add(path, std::string("invalid JSON: ") + e.what());
    return std::nullopt;
  }
}

void check_string_list(const fs::path& path, Findings& findings) {
  auto doc = read_json(path, findings);
  if (!doc) return;
  if (!doc->is_array()) {
    findings.add(path, "must be an array of strings");
    return;
  }
  for (std::size_t i = 0; i < doc->size(); ++i) {
    const auto& v = (*doc)[i];
    if (!v.is_string() || v.get<std::string>().empty()) {
      findings.add(path, "row " + std::to_string(i) + ": must be a non-empty string");
    }
  }
}

int cmd_validate(const Flags& f, std::ostream& out) {
  const auto cfg = resolve_config(f);
  const fs::path dir = cfg.data_dir;
  Findings findings;

  if (auto doc = read_json(dir / "kyoto_spots.json", findings)) {
    for (const auto& finding : validate_catalog(*doc)) {
      findings.add("kyoto_spots.json", "row " + std::to_string(finding.row) + " " +
                                           finding.field + ": " + finding.message);
    }
  }
  if (auto doc = read_json(dir / "emphasis_profile.json", findings)) {
    for (const auto& p : validate_profile(*doc)) findings.add("emphasis_profile.json", p);
  }
  if (read_json(dir / "genres.json", findings)) {
    try {
      load_genre_list(dir / "genres.json");
    } catch (const Error& e) {
      findings.add("genres.json", e.what());
    }
  }
  if (auto doc = read_json(dir / "keyword_lexicon.json", findings)) {
    const auto& entries = doc->is_object() ? doc->value("entries", json()) : json();
    if (!entries.is_array()) {
      findings.add("keyword_lexicon.json", "'entries' must be an array");
    } else {
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        for (const char* key : {"surface", "keyword"}) {
          if (!e.is_object() || !e.contains(key) || !e[key].is_string() ||
              e[key].get<std::string>().empty()) {
            findings.add("keyword_lexicon.json",
                         "row " + std::to_string(i) + " " + key + ": missing or empty");
          }
        }
      }
    }
  }
  check_string_list(dir / "person_names.json", findings);
  check_string_list(dir / "greetings.json", findings);
  if (auto doc = read_json(dir / "motion_config.json", findings)) {
    try {
      MotionConfig::from_json(*doc);
    } catch (const Error& e) {
      findings.add("motion_config.json", e.what());
    }
  }
  std::error_code ec;
  if (fs::is_directory(dir / "personas", ec)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir / "personas")) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
      if (auto doc = read_json(p, findings)) {
        for (const auto& problem : validate_persona(*doc)) {
          findings.add(p, problem);
        }
      }
    }
  }

  for (const auto& line : findings.lines) out << line << "\n";
  out << (findings.lines.empty() ? "ok: " : "findings: ") << findings.lines.size() << " in "
      << dir.string() << "\n";
  return findings.lines.empty() ? kExitOk : kExitFindings;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Kyoto two-spot travel consultation engine", "concierge"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--backend", f.backend, "Generation backend")
      ->check(CLI::IsMember({"scripted", "remote"}));
  app.add_option("--seed", f.seed, "Seed for ids and simulations");
  app.add_option("--threshold-km", f.threshold_km, "Feasibility threshold in km")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--data-dir", f.data_dir, "Directory with catalog and lexicons");
  app.add_option("--storage-dir", f.storage_dir, "Session event-log directory");
  app.add_option("--script", f.script, "Scripted-backend table (JSON)");
  app.add_option("--endpoint", f.endpoint, "Remote backend endpoint URL");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--host", f.host, "Bind address");
  serve->add_option("--port", f.port, "Bind port (0 = any)");

  auto* interactive = app.add_subcommand("interactive", "Talk to the concierge on the terminal");
  interactive->add_option("--url", f.url, "Use a running service instead of an embedded one");
  interactive->add_option("--session", f.session, "Resume an existing session");

  auto* personas = app.add_subcommand("personas", "Simulate persona sessions and report metrics");
  personas->add_option("--persona", f.persona, "Persona name or file")->default_str("balanced");
  personas->add_option("--runs", f.runs, "Number of sessions")->default_str("100");
  personas->add_flag("--keep-store", f.keep_store, "Keep the temporary event-log store");

  auto* validate = app.add_subcommand("validate", "Check catalog, profile and lexicons");
  auto* metrics = app.add_subcommand("metrics", "Plan-rate proxy over the session store");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "concierge: " << e.what() << "\n" << "run 'concierge --help' for usage\n";
    return kExitFindings;
  }

  try {
    if (serve->parsed()) return cmd_serve(f, out);
    if (interactive->parsed()) return cmd_interactive(f, in, out, err);
    if (personas->parsed()) return cmd_personas(f, out);
    if (validate->parsed()) return cmd_validate(f, out);
    if (metrics->parsed()) return cmd_metrics(f, out);
  } catch (const Error& e) {
    err << "concierge: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "concierge: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace concierge::cli
