#pragma once

#include <map>
#include <string>
#include <vector>

#include "pqlab/config.hpp"
#include "pqlab/report.hpp"

namespace pqlab {

inline constexpr const char* kToolVersion = "0.1.0";

/// Comma-separated results table; every row has one cell per column.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct InstanceStatus {
  std::string key;
  std::string status;  // "ok" or "error:<Kind>"
  std::string message;
  double wall_time = 0.0;
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Outcome of one run; doubles as the manifest.
struct RunResult {
  ExperimentConfig config;
  std::map<std::string, Table> tables;  // keyed by file name
  std::vector<InstanceStatus> instances;
  std::vector<Verdict> verdicts;
  std::vector<EstimateReport> reports;
  std::vector<std::string> summary;
  std::vector<std::string> files;
  double wall_time = 0.0;

  bool ok() const;
};

/// Runs every instance of the experiment on `config.workers` threads. Throws
/// ConfigInvalid when validation fails; instance failures are recorded in
/// the result and never abort the run. Tables are merged in instance order,
/// so identical configs give identical tables.
RunResult run(const ExperimentConfig& config);

/// Writes the tables, manifest.json and summary.txt into `directory`
/// (created if needed). Throws IoFailure.
void emit(RunResult& result, const std::string& directory);

std::string format_number(double value);
std::string to_csv(const Table& table);

}  // namespace pqlab
