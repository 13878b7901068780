#pragma once

// Runs a configured analysis and renders the result as JSON or CSV. The
// command line tool and the HTTP service both go through these functions,
// so the same configuration gives the same numbers on either path.

#include <string>

#include "assuredx/config.hpp"

namespace assuredx {

inline constexpr const char* kEngineVersion = "0.3.0";

// Rounds to the given number of significant digits.
double round_significant(double v, int digits = 12);

// Copy of j with every floating point value rounded to 12 significant digits.
Json rounded(const Json& j);

// Thrown when an analysis cannot be carried out with valid inputs, for
// example when every contour angle leaves the parameter space.
class InfeasibleAnalysis : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunResult {
  Json result;
  bool found = true;  // false when a sample size search hit its cap
};

RunResult run_sample_size(const RunConfig& c);
Json run_curve(const RunConfig& c);
Json run_sensitivity(const RunConfig& c);
Json run_conflict(const RunConfig& c);
Json run_compare(const RunConfig& c, const ProgressFn& progress = {});
Json run_case_study_vap(const RunConfig& c);

// CSV renderings of run_curve and run_compare results.
std::string curve_csv(const Json& curve);
std::string compare_csv(const Json& compare);

// Formats a number the way every CSV column does: 12 significant digits.
std::string format_number(double v);

}  // namespace assuredx
