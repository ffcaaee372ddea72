// aspctl command line: scenario runner, interactive console, and the
// standalone reactive solving service.

#include <CLI11.hpp>
#include <iostream>

#include "aspctl/runner.hpp"
#include "aspctl/server.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "aspctl: reactive answer-set task control over an in-process message bus"};

  aspctl::RunConfig cfg;
  bool interactive = false;
  std::string serve_endpoint;

  app.add_option("--program", cfg.program_paths,
                 "reactive logic program file(s), concatenated in order");
  app.add_option("--world", cfg.world_path, "world file");
  app.add_option("--tags", cfg.tags_path, "tag table (label x y theta per line)");
  app.add_option("--scenario", cfg.scenario_path, "timed event script");
  app.add_option("--expect", cfg.expect_path, "expected per-cycle plan trace");
  app.add_option("--max-cycles", cfg.max_cycles, "cycle budget before giving up");
  app.add_option("--idle-poll-ms", cfg.idle_poll_ms,
                 "interactive wait between input polls, in milliseconds");
  app.add_option("--report", cfg.report_path, "write the cycle report here");
  app.add_option("--report-kv", cfg.report_kv_path, "also write key=value records here");
  app.add_option("--adapters", cfg.adapters_path, "adapter registry file");
  app.add_flag("--check-minimality", cfg.check_minimality,
               "re-check horizon minimality after every solve");
  app.add_flag("--interactive", interactive, "read request/cancel/block commands from stdin");
  app.add_option("--serve", serve_endpoint,
                 "run the solving service alone on '-', 'tcp:<port>' or a port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!serve_endpoint.empty()) {
      if (cfg.program_paths.empty()) {
        std::cerr << "--serve requires --program\n";
        return 64;
      }
      std::string text;
      for (const std::string& path : cfg.program_paths) {
        std::ifstream in(path);
        if (!in) {
          std::cerr << "cannot open program '" << path << "'\n";
          return 66;
        }
        std::ostringstream chunk;
        chunk << in.rdbuf();
        text += chunk.str() + "\n";
      }
      aspctl::ReactiveServer server(aspctl::parse_program(text));
      aspctl::serve_endpoint(server, serve_endpoint);
      return 0;
    }

    if (cfg.program_paths.empty() || cfg.world_path.empty() || cfg.tags_path.empty()) {
      std::cerr << "need --program, --world and --tags (see --help)\n";
      return 64;
    }

    if (interactive) {
      aspctl::Runner runner(cfg);
      runner.interactive(std::cin, std::cout);
      return 0;
    }

    cfg.echo = cfg.report_path.empty();
    return aspctl::run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 70;
  }
}
