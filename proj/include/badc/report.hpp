#pragma once

// Reading an exploration output directory back and deriving the
// flash / binary / pruned area comparison.

#include <string>
#include <vector>

#include "badc/explorer.hpp"

namespace badc {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReportInput {
  int adc_bits = 3;
  double baseline_accuracy = 0.0;
  long flash_system = 0;   // transistors
  long binary_system = 0;  // transistors
  std::vector<std::string> feature_names;
  std::vector<ParetoPoint> points;
};

// Throws ReportError for missing or corrupt artifacts.
ReportInput load_report_input(const std::string& dir);
std::vector<ParetoPoint> parse_pareto_csv(const std::string& text, int adc_bits);

struct Gains {
  double flash_to_binary = 0.0;
  double binary_to_pruned = 0.0;
  double flash_to_pruned = 0.0;
};

Gains compute_gains(long flash_system, long binary_system, long pruned_system);

// Columns accuracy,normalized_area,label. Area is normalized to the flash
// system; the flash and full-binary baselines are included as labelled rows.
std::string plotdata_csv(const ReportInput& in);

struct ReportOutcome {
  std::string text;  // human-readable summary
  bool found = false;
  ParetoPoint best;
  Gains gains;
};

ReportOutcome make_report(const ReportInput& in, double max_drop);

}  // namespace badc
