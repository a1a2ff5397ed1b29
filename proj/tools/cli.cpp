#include "cli.hpp"

#include "imitation/error.hpp"
#include "imitation/gateway/config.hpp"
#include "imitation/gateway/runner.hpp"
#include "imitation/gateway/server.hpp"
#include "imitation/gesture/template_io.hpp"
#include "imitation/io/live.hpp"
#include "imitation/io/openpose.hpp"
#include "imitation/io/replay.hpp"
#include "imitation/io/scenario.hpp"
#include "imitation/store/codec.hpp"
#include "imitation/store/report.hpp"
#include "imitation/store/store.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

namespace imitation::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::string store_path;

  std::string scenario;
  std::optional<std::uint64_t> seed;
  bool report = false;
  bool as_json = false;

  std::string dir;
  double fps = 15.0;
  std::string script;

  std::string listen;
  std::string pose_listen;
  std::string source = "live";
  double speed = 1.0;
  std::string participant;
  std::string profile;

  std::string file;
  std::string kind = "openpose";
};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedJson, path.string() + ": " + e.what());
  }
}

gateway::GatewayConfig effective_config(const Options& o) {
  gateway::GatewayConfig c = o.config_path.empty() ? gateway::GatewayConfig{}
                                                   : gateway::load_config(o.config_path);
  gateway::apply_env_overrides(c);
  if (!o.store_path.empty()) c.store = o.store_path;
  if (!o.listen.empty()) c.listen = o.listen;
  if (!o.pose_listen.empty()) c.pose_listen = o.pose_listen;
  return c;
}

void print_result(const gateway::RunResult& r, const Options& o, std::ostream& out) {
  const auto row = store::report_row(r.record);
  if (o.as_json) {
    out << store::report_json(std::span(&row, 1)).dump(2) << '\n';
  } else if (o.report) {
    out << store::compact_row(row) << '\n';
  } else {
    out << store::render_table(std::span(&row, 1));
  }
}

int simulate(const Options& o, std::ostream& out) {
  auto script = io::load_scenario(o.scenario);
  if (o.seed) script.seed = *o.seed;
  auto config = effective_config(o);
  std::optional<store::SessionStore> store;
  if (config.store) store.emplace(*config.store);
  const auto result = gateway::run_scenario(script, config, store ? &*store : nullptr);
  print_result(result, o, out);
  return 0;
}

int replay(const Options& o, std::ostream& out) {
  auto config = effective_config(o);
  const auto frames = io::replay_directory(o.dir, o.fps);
  const auto script = io::load_scenario(o.script);
  std::optional<store::SessionStore> store;
  if (config.store) store.emplace(*config.store);
  const auto result = gateway::run_frames(frames, script, config, store ? &*store : nullptr);
  print_result(result, o, out);
  return 0;
}

int report(const Options& o, std::ostream& out) {
  const store::SessionStore store(o.store_path);
  const auto records = store.load_all();
  const auto rows = store::report(records);
  if (o.as_json) {
    out << store::report_json(rows).dump(2) << '\n';
  } else {
    out << store::render_table(rows);
  }
  return 0;
}

int validate_file(const Options& o, std::ostream& out) {
  if (o.kind == "openpose") {
    std::ifstream in(o.file);
    if (!in) throw Error(Errc::Io, "cannot open " + o.file);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto people = io::parse_openpose_frame(buffer.str());
    out << "ok: " << people.size() << " skeleton(s)\n";
  } else if (o.kind == "config") {
    (void)gateway::load_config(o.file);
    out << "ok: config\n";
  } else if (o.kind == "scenario") {
    const auto s = io::load_scenario(o.file);
    out << "ok: scenario " << s.name << " (" << s.timeline.size() << " entries)\n";
  } else if (o.kind == "template") {
    const auto t = gesture::load_templates(o.file);
    out << "ok: " << t.size() << " template(s)\n";
  } else if (o.kind == "profile") {
    const auto p = store::profile_from_json(read_json(o.file));
    out << "ok: participant " << p.id << '\n';
  }
  return 0;
}

int serve(const Options& o, std::ostream& out, std::atomic<bool>* stop) {
  auto config = effective_config(o);
  gateway::ServeOptions options;
  options.stop = stop;
  options.speed = o.speed;

  std::optional<store::ParticipantProfile> participant;
  if (o.source == "live") {
    options.source = gateway::ServeOptions::Source::Live;
  } else if (o.source.rfind("simulate:", 0) == 0) {
    options.source = gateway::ServeOptions::Source::Simulate;
    options.scenario = o.source.substr(9);
    participant = io::load_scenario(options.scenario).participant;
  } else {
    throw CLI::ValidationError("--source", "expected live or simulate:<scenario.json>");
  }
  if (!o.profile.empty()) {
    participant = store::profile_from_json(read_json(o.profile));
  } else if (!participant) {
    if (o.participant.empty() || !config.store) {
      throw CLI::ValidationError("--participant",
                                 "live sessions need --profile, or --participant with --store");
    }
    participant = store::SessionStore(*config.store).registry().at(o.participant);
  }

  const auto host_of = [](const std::string& endpoint) {
    const auto host = io::parse_endpoint(endpoint).first;
    return host.empty() ? std::string("*") : host;
  };
  options.on_ready = [&out, console_host = host_of(config.listen),
                      pose_host = host_of(config.pose_listen)](std::uint16_t console, std::uint16_t pose) {
    out << "console ws://" << console_host << ':' << console;
    if (pose != 0) out << "  pose tcp://" << pose_host << ':' << pose;
    out << std::endl;
  };
  const auto record = gateway::serve(config, *participant, options);
  out << store::compact_row(store::report_row(record)) << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        std::atomic<bool>* stop) {
  CLI::App app{"Gesture imitation session gateway"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Run a scripted scenario headless");
  sim->add_option("--scenario", o.scenario, "Scenario script (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", o.seed, "Override the script's RNG seed");
  sim->add_flag("--report", o.report, "Print the compact report row");
  sim->add_flag("--json", o.as_json, "Print the report row as JSON");
  sim->add_option("--store", o.store_path, "Session store directory");
  sim->add_option("--config", o.config_path, "Gateway config file")->check(CLI::ExistingFile);

  auto* rep = app.add_subcommand("replay", "Replay a directory of OpenPose frames");
  rep->add_option("--dir", o.dir, "Directory of per-frame OpenPose JSON files")->required();
  rep->add_option("--fps", o.fps, "Capture frame rate")->capture_default_str()->check(CLI::PositiveNumber);
  rep->add_option("--script", o.script, "Scenario script with the operator events")
      ->required()
      ->check(CLI::ExistingFile);
  rep->add_flag("--report", o.report, "Print the compact report row");
  rep->add_flag("--json", o.as_json, "Print the report row as JSON");
  rep->add_option("--store", o.store_path, "Session store directory");
  rep->add_option("--config", o.config_path, "Gateway config file")->check(CLI::ExistingFile);

  auto* srv = app.add_subcommand("serve", "Run one session with the operator console attached");
  srv->add_option("--listen", o.listen, "Console address host:port");
  srv->add_option("--pose-listen", o.pose_listen, "Live pose stream address host:port");
  srv->add_option("--source", o.source, "live | simulate:<scenario.json>")->capture_default_str();
  srv->add_option("--speed", o.speed, "Simulated seconds per wall second")->check(CLI::PositiveNumber);
  srv->add_option("--participant", o.participant, "Registered participant id (live)");
  srv->add_option("--profile", o.profile, "Participant profile JSON (live)")->check(CLI::ExistingFile);
  srv->add_option("--store", o.store_path, "Session store directory");
  srv->add_option("--config", o.config_path, "Gateway config file")->check(CLI::ExistingFile);

  auto* rpt = app.add_subcommand("report", "Per-session results table from a store");
  rpt->add_option("--store", o.store_path, "Session store directory")->required();
  rpt->add_flag("--json", o.as_json, "JSON instead of a table");

  auto* val = app.add_subcommand("validate", "Parse-check a file");
  val->add_option("--file", o.file, "File to check")->required();
  val->add_option("--kind", o.kind, "openpose | config | scenario | template | profile")
      ->capture_default_str()
      ->check(CLI::IsMember({"openpose", "config", "scenario", "template", "profile"}));

  auto* cfg = app.add_subcommand("config", "Print the effective configuration");
  bool dump = false;
  cfg->add_flag("--dump", dump, "Print as JSON");
  cfg->add_option("--config", o.config_path, "Gateway config file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*sim) return simulate(o, out);
    if (*rep) return replay(o, out);
    if (*srv) return serve(o, out, stop);
    if (*rpt) return report(o, out);
    if (*val) return validate_file(o, out);
    if (*cfg) {
      out << gateway::to_json(effective_config(o)).dump(2) << '\n';
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace imitation::cli
