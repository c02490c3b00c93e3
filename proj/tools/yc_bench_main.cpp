#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ycbench/analytics.hpp"
#include "ycbench/config.hpp"
#include "ycbench/harness.hpp"
#include "ycbench/runlog.hpp"
#include "ycbench/session.hpp"
#include "ycbench/snapshot.hpp"

using nlohmann::json;
using namespace ycbench;

namespace {

const std::set<std::string> kAgentNouns{"company", "employee", "market", "task",
                                        "client",  "finance",  "sim",    "scratchpad"};

/// Agent-facing commands: one invocation = one command against the active session.
int run_agent_command(std::vector<std::string> args) {
  std::optional<std::string> session_flag;
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--session" && i + 1 < args.size()) {
      session_flag = args[++i];
    } else if (args[i].rfind("--session=", 0) == 0) {
      session_flag = args[i].substr(10);
    } else {
      tokens.push_back(args[i]);
    }
  }
  std::string line;
  for (const auto& t : tokens) {
    if (!line.empty()) line += ' ';
    const bool plain = !t.empty() && t.find_first_of(" \t\"'\\") == std::string::npos;
    if (plain) {
      line += t;
    } else {
      line += '"';
      for (char c : t) {
        if (c == '"' || c == '\\') line += '\\';
        line += c;
      }
      line += '"';
    }
  }
  try {
    Session session = Session::open(resolve_session_dir(session_flag));
    const CommandResult r = session.run(line);
    std::cout << r.to_text() << "\n";
    return r.ok ? 0 : 1;
  } catch (const SessionError& e) {
    std::cout << CommandResult::failure("session_error", e.what()).to_text() << "\n";
    return 2;
  }
}

std::unique_ptr<Agent> make_agent(const std::string& builtin, const std::string& model_cmd, const std::string& listen,
                                  const BenchConfig& cfg, std::chrono::milliseconds timeout) {
  if (!model_cmd.empty())
    return std::make_unique<WireAgent>(ChildProcessChannel::spawn(model_cmd), "process", timeout);
  if (!listen.empty())
    return std::make_unique<WireAgent>(UnixSocketChannel::listen(listen, std::chrono::minutes(5)), "socket", timeout);
  if (builtin == "greedy") return std::make_unique<GreedyBaselineAgent>(cfg.employees);
  if (builtin == "silent") return std::make_unique<SilentAgent>();
  throw CLI::ValidationError("--builtin", "unknown builtin agent '" + builtin + "' (greedy, silent)");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::size_t first = 0;
  while (first < args.size() && (args[first] == "--session" || args[first].rfind("--session=", 0) == 0))
    first += args[first] == "--session" ? 2 : 1;
  if (first < args.size() && kAgentNouns.count(args[first])) return run_agent_command(args);

  CLI::App app{"yc-bench: a long-horizon startup simulation for evaluating agents"};
  app.name("yc-bench");
  app.require_subcommand(1);

  // session management
  auto* session_cmd = app.add_subcommand("session", "Create and manage CLI sessions");
  session_cmd->require_subcommand(1);
  std::string session_dir;
  std::uint64_t seed = 1;
  std::string config_name = "default";

  auto* create = session_cmd->add_subcommand("create", "Create a session (or reopen an existing one)");
  create->add_option("--session", session_dir, "Session directory (default: $YC_SESSION_DIR)");
  create->add_option("--seed", seed, "World seed");
  create->add_option("--config", config_name, "Preset name or config file");
  auto* info = session_cmd->add_subcommand("info", "Print session metadata");
  info->add_option("--session", session_dir);
  auto* next = session_cmd->add_subcommand("turn", "Close the current turn and open the next one");
  next->add_option("--session", session_dir);
  auto* rebuild = session_cmd->add_subcommand("rebuild", "Rebuild the snapshot from the run log");
  rebuild->add_option("--session", session_dir);

  // episodes
  auto* run = app.add_subcommand("run", "Run a full episode");
  std::string builtin;
  std::string model_cmd;
  std::string listen;
  std::string out_dir;
  std::string label;
  int context_window = 0;
  int timeout_ms = 300'000;
  int max_turns = 0;
  run->add_option("--builtin", builtin, "Built-in agent: greedy or silent");
  run->add_option("--model-cmd", model_cmd, "Agent command speaking the wire protocol on stdio");
  run->add_option("--listen", listen, "Unix socket path to wait for an agent on");
  run->add_option("--seed", seed);
  run->add_option("--config", config_name);
  run->add_option("--context-window", context_window, "History turns kept (default from config)");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--label", label, "Run label used for grouping (default: agent name)");
  run->add_option("--timeout-ms", timeout_ms, "Per-turn agent timeout");
  run->add_option("--max-turns", max_turns, "Stop after this many turns (testing only)");

  auto* stats = app.add_subcommand("stats", "Compute statistics over run directories or logs");
  std::vector<std::string> runs;
  stats->add_option("runs", runs, "Run directories or runlog.jsonl files")->required();
  stats->add_option("--out", out_dir, "Output directory for CSV tables")->required();

  auto* replay_cmd = app.add_subcommand("replay", "Replay a run log and check the final snapshot hash");
  std::string replay_path;
  replay_cmd->add_option("run", replay_path, "Run directory or runlog.jsonl")->required();

  auto* conformance = app.add_subcommand("conformance", "Check an agent implementation against the wire protocol");
  conformance->add_option("--model-cmd", model_cmd, "Agent command")->required();
  conformance->add_option("--timeout-ms", timeout_ms);
  int conformance_turns = 6;
  conformance->add_option("--turns", conformance_turns);

  auto* config_cmd = app.add_subcommand("config", "Print the resolved configuration");
  config_cmd->add_option("--config", config_name);

  // a leading --session belongs to the session subcommand that follows
  std::vector<std::string> cli_args(args.begin() + static_cast<std::ptrdiff_t>(first), args.end());
  cli_args.insert(cli_args.end(), args.begin(), args.begin() + static_cast<std::ptrdiff_t>(first));
  std::reverse(cli_args.begin(), cli_args.end());
  try {
    app.parse(cli_args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (session_cmd->parsed()) {
      const auto dir = resolve_session_dir(session_dir.empty() ? std::nullopt : std::optional<std::string>(session_dir));
      if (create->parsed()) {
        Session s = Session::open_or_create(dir, seed, load_config_or_preset(config_name));
        std::cout << json{{"session", dir.string()},
                          {"seed", s.state().seed},
                          {"snapshot_sha256", snapshot_hash(s.state())}}
                         .dump()
                  << "\n";
      } else if (info->parsed()) {
        Session s = Session::open(dir);
        std::cout << session_meta(s.episode(), s.id()).dump() << "\n";
      } else if (next->parsed()) {
        Session s = Session::open(dir);
        std::cout << s.next_turn().dump() << "\n";
      } else if (rebuild->parsed()) {
        Session s = Session::rebuild(dir);
        std::cout << json{{"session", dir.string()}, {"snapshot_sha256", snapshot_hash(s.state())}}.dump() << "\n";
      }
      return 0;
    }
    if (run->parsed()) {
      const BenchConfig cfg = load_config_or_preset(config_name);
      auto agent = make_agent(builtin.empty() && model_cmd.empty() && listen.empty() ? "greedy" : builtin, model_cmd,
                              listen, cfg, std::chrono::milliseconds(timeout_ms));
      RunOptions opts;
      opts.out_dir = out_dir;
      opts.label = label.empty() ? agent->name() : label;
      if (context_window > 0) opts.context_window = context_window;
      if (max_turns > 0) opts.max_turns = max_turns;
      const EpisodeReport report = run_episode(seed, cfg, *agent, opts);
      std::cout << json{{"outcome", to_string(report.outcome)},
                        {"final_funds", report.final_funds.to_string()},
                        {"turns", report.turns},
                        {"out", out_dir},
                        {"transport_error", report.transport_error ? json(*report.transport_error) : json(nullptr)}}
                       .dump()
                << "\n";
      return report.transport_error ? 3 : 0;
    }
    if (stats->parsed()) {
      std::vector<RunStats> all;
      for (const auto& path : runs) {
        const RunArtifacts a = load_run(path);
        all.push_back(compute_stats(a.log, a.snapshot ? &*a.snapshot : nullptr, a.report ? &*a.report : nullptr));
      }
      aggregate(all, out_dir);
      std::cout << json{{"runs", all.size()}, {"out", out_dir}}.dump() << "\n";
      return 0;
    }
    if (replay_cmd->parsed()) {
      const std::filesystem::path p = replay_path;
      const RunLog log = read_run_log(std::filesystem::is_directory(p) ? p / "runlog.jsonl" : p);
      const ReplayResult r = replay(log);
      const std::string got = snapshot_hash(r.state);
      std::string expected;
      if (log.complete) expected = log.records.back().value("snapshot_sha256", "");
      const bool match = !expected.empty() && got == expected;
      std::cout << json{{"records", log.records.size()},
                        {"complete", log.complete},
                        {"replayed_sha256", got},
                        {"recorded_sha256", expected},
                        {"match", match},
                        {"divergent_commands", r.divergent_seqs}}
                       .dump()
                << "\n";
      return match ? 0 : 1;
    }
    if (conformance->parsed()) {
      auto channel = ChildProcessChannel::spawn(model_cmd);
      const auto checks = run_conformance(*channel, std::chrono::milliseconds(timeout_ms), conformance_turns);
      bool all_ok = true;
      for (const auto& c : checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
        all_ok = all_ok && c.passed;
      }
      return all_ok ? 0 : 1;
    }
    if (config_cmd->parsed()) {
      std::cout << config_to_json(load_config_or_preset(config_name)).dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "yc-bench: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
