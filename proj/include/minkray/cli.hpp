#ifndef MINKRAY_CLI_HPP
#define MINKRAY_CLI_HPP

#include <string>
#include <utility>
#include <vector>

#include "minkray/checks.hpp"
#include "minkray/config.hpp"

namespace minkray {

enum class LogLevel { Quiet, Error, Warn, Info, Debug };

/// "quiet", "error", "warn", "info", "debug" or 0..4; null or empty gives Warn.
/// Throws InvalidArgument on anything else.
LogLevel parse_log_level(const char* text);

struct StageRecord {
  std::string id;
  bool ok = true;
  double seconds = 0.0;
  std::string error;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<StageRecord> stages;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, std::string>> values;  // stage outputs, in order
  std::vector<std::string> artifacts;                       // file names under config.out
  std::vector<std::string> table;                           // preformatted rows, e2e only

  /// Every stage ran and every enabled check passed.
  bool passed() const;
  /// Human-readable report: configuration echo, stages, checks, artifacts.
  std::string text() const;
  /// One `key=value` per line. Lines starting with `time.` carry timings;
  /// everything else is a function of the configuration and seed.
  std::string kv() const;
};

/// Runs the configured command, writes artifacts plus report.txt and
/// report.kv under config.out, and returns the report. Stage errors are
/// recorded rather than thrown; only failure to write the reports throws.
RunReport run(const ExperimentConfig& config, LogLevel log = LogLevel::Warn);

}  // namespace minkray

#endif  // MINKRAY_CLI_HPP
