#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "popsize/grid.hpp"

namespace popsize {

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Advisory checks are reported but do not decide the verdict.
  bool advisory = false;
  std::string detail;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string name;
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  std::vector<Series> series;
};

struct ExperimentReport {
  std::string name;
  std::vector<CheckResult> checks;
  std::vector<Table> tables;
  std::vector<std::pair<std::string, Field>> fields;
  std::vector<Plot> plots;
  std::vector<std::string> notes;

  void check(std::string check_name, bool ok, std::string detail, bool advisory = false);
  /// Every non-advisory check passed.
  bool passed() const;
};

/// Line plot of one or more series.
void write_svg(std::ostream& os, const Plot& plot);
/// 1D fields become a profile plot, 2D fields a heat map.
void write_field_svg(std::ostream& os, const Field& u, const std::string& title);

/// Writes summary.txt and verdicts.csv under `outdir`, plus one directory per
/// report with its tables (.csv and .dat), fields (.csv and .svg) and plots
/// (.svg).  Returns the written paths.  I/O failures throw Error naming the path.
std::vector<std::string> emit_report(const std::vector<ExperimentReport>& results, const std::string& outdir);

}  // namespace popsize
