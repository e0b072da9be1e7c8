#pragma once

// Command-line front end: subcommands, experiment configs and JSON reports.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "convfold/io.hpp"

namespace convfold::cli {

/// Exit codes of run().
enum Exit : int { kPass = 0, kFail = 1, kUsage = 2 };

/// Effective settings of one subcommand: config file entries overridden by flags.
class ExperimentConfig {
 public:
  ExperimentConfig(std::string command, ConfigEntries entries) : command_(std::move(command)), entries_(std::move(entries)) {}

  const std::string& command() const { return command_; }
  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& fallback) const;
  double num(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<std::string> strs(const std::string& key, const std::vector<std::string>& fallback) const;
  std::vector<double> nums(const std::string& key, const std::vector<double>& fallback) const;
  /// Entries echoed into reports; output paths are left out so reports compare byte for byte.
  nlohmann::json to_json() const;

 private:
  std::string command_;
  ConfigEntries entries_;
};

struct Outcome {
  int code = kPass;
  nlohmann::json report;
  std::string out_path;  // empty: report goes to the output stream
};

/// Parses and runs one invocation (args exclude the program name). Usage problems give
/// kUsage with a message on err; computation failures are recorded in the report.
Outcome execute(const std::vector<std::string>& args, std::ostream& err);

/// execute() plus report emission: the JSON goes to --out, or to out when no path is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Serializes a report the way run() writes it.
std::string dump_report(const nlohmann::json& report);

}  // namespace convfold::cli
