#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dvfinv/solver.hpp"
#include "dvfinv/stats.hpp"

namespace dvfinv {

struct ReportStep {
  int step = 0;
  std::optional<double> mu;
  PercentileSummary residual;
  std::size_t frozen = 0;
};

struct InversionReport {
  std::map<std::string, std::string> parameters;
  std::optional<double> initial_mu;
  PercentileSummary initial_residual;
  std::vector<ReportStep> steps;
  std::map<std::string, PercentileSummary> summaries;  // final named summaries
};

InversionReport make_report(const InversionRun& run, std::map<std::string, std::string> parameters,
                            std::map<std::string, PercentileSummary> summaries = {});

// JSON report; NaN values are written as null and read back as NaN.
void write_report(const std::filesystem::path& json_path, const InversionReport& report);
InversionReport read_report(const std::filesystem::path& json_path);

// One row per (step, level): step,level,residual,invalid_fraction,mu.
// Step 0 holds the initial residual.
void write_step_table(const std::filesystem::path& csv_path, const InversionReport& report);

struct StepTableRow {
  int step = 0;
  double level = 0.0;
  double residual = 0.0;
  double invalid_fraction = 0.0;
  std::optional<double> mu;
};
std::vector<StepTableRow> read_step_table(const std::filesystem::path& csv_path);

}  // namespace dvfinv
