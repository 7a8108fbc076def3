// minkray [command] [--config PATH] [--out DIR] [--workers N] [--seed S]
// Exit status: 0 all checks pass, 1 a stage or check failed, 2 usage or
// configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "minkray/cli.hpp"

using namespace minkray;

int main(int argc, char** argv) {
  CLI::App app{"Light ray transform of symmetric 2-tensors on Minkowski space"};
  std::string command, config_path, out, workers;
  std::uint64_t seed = 0;
  std::string names;
  for (const std::string& c : command_names()) names += (names.empty() ? "" : ", ") + c;
  app.add_option("command", command, "One of: " + names + " (may also be set in the config file)");
  app.add_option("--config,-c", config_path, "Configuration file (key = value with [sections])")->check(CLI::ExistingFile);
  app.add_option("--out,-o", out, "Output directory for artifacts and reports");
  app.add_option("--workers,-j", workers, "Worker threads, or 'auto'");
  auto* seed_opt = app.add_option("--seed,-s", seed, "Random seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const LogLevel log = parse_log_level(std::getenv("MINKRAY_LOG"));
    std::string text;
    if (!config_path.empty()) {
      std::ifstream is(config_path, std::ios::binary);
      std::ostringstream ss;
      ss << is.rdbuf();
      text = ss.str();
      if (text.find_first_not_of(" \t\r\n") == std::string::npos && command.empty())
        throw ConfigError("command", "configuration file " + config_path + " is empty and no command was given");
    }
    ConfigOverrides ov;
    if (!command.empty()) ov.command = command;
    if (*seed_opt) ov.seed = seed;
    if (!out.empty()) ov.out = out;
    if (!workers.empty()) {
      if (workers == "auto") {
        ov.workers = 0;
      } else {
        try {
          std::size_t used = 0;
          const int w = std::stoi(workers, &used);
          if (used != workers.size() || w < 1) throw std::invalid_argument(workers);
          ov.workers = w;
        } catch (const std::logic_error&) {
          throw ConfigError("workers", "expected a positive integer or 'auto', got '" + workers + "'");
        }
      }
    }
    const ExperimentConfig cfg = parse_config(text, ov);
    const RunReport report = run(cfg, log);
    for (const CheckResult& c : report.checks)
      std::cout << "check " << c.id << " " << (c.passed ? "PASS" : "FAIL") << "  " << c.title << "\n";
    for (const StageRecord& s : report.stages)
      if (!s.ok) std::cout << "stage " << s.id << " FAILED: " << s.error << "\n";
    std::cout << (report.passed() ? "PASS" : "FAIL") << " (report in " << cfg.out << "/report.txt)\n";
    return report.passed() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "minkray: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "minkray: " << e.what() << "\n";
    return 2;
  }
}
