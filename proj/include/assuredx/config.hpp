#pragma once

// Run configuration shared by the command line tool and the HTTP service.
// A single JSON document with sections {priors, design, study, output};
// unknown keys are rejected with the path of the offending field.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "assuredx/assurance.hpp"
#include "assuredx/beta.hpp"
#include "assuredx/comparators.hpp"
#include "assuredx/robustness.hpp"

namespace assuredx {

using Json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SensitivityOptions {
  PriorSlot vary = PriorSlot::sens;
  double epsilon = 0.00354;
  int angles = kDefaultAngles;
  std::optional<std::int64_t> n_eval;  // defaults to n* under the base priors
};

struct ConflictOptions {
  std::optional<ContingencyTable> observed;
  double suspect_level = kDefaultSuspectLevel;
  double conflict_level = kDefaultConflictLevel;
};

enum class CompareStudy { grid, widths };

struct CompareOptions {
  CompareStudy study = CompareStudy::grid;
  GridSpec grid;
  WidthStudySpec widths;
};

struct OutputOptions {
  std::optional<std::string> path;
  std::optional<std::string> format;  // json or csv; unset means the command default
  bool include_curve = false;
};

struct RunConfig {
  PriorSet priors;
  DesignSpec design;
  std::int64_t cap = kDefaultSampleSizeCap;
  std::int64_t n_t_max = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  SensitivityOptions sensitivity;
  ConflictOptions conflict;
  CompareOptions compare;
  OutputOptions output;
};

// A prior is one of {"a", "b"}, {"mean", "ess"} or
// {"base": prior, "successes", "failures", "discount"?}.
BetaParams parse_prior(const Json& j, const std::string& path);

// Throws ConfigError naming the field.
RunConfig parse_config(const Json& j);

// Canonical form: every field explicit, priors as {"a", "b"}.
Json config_to_json(const RunConfig& c);

// Priors and design of the ventilator associated pneumonia case study.
RunConfig vap_config();

}  // namespace assuredx
