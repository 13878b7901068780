#pragma once

// Local prior sensitivity over distance contours, and prior predictive
// checks for prior-data conflict.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "assuredx/assurance.hpp"
#include "assuredx/beta.hpp"
#include "assuredx/parallel.hpp"

namespace assuredx {

// 1 - B((a1+a2)/2, (b1+b2)/2) / sqrt(B(a1,b1) B(a2,b2)).
// This is one minus the Bhattacharyya coefficient, i.e. the squared
// Hellinger distance under the usual 1/2 normalisation.
double hellinger_squared(const BetaParams& p1, const BetaParams& p2);

// Square root of hellinger_squared.
double hellinger_distance(const BetaParams& p1, const BetaParams& p2);

// hellinger_squared between N(0, 1) and N(shift, 1): 1 - exp(-shift^2 / 8).
double epsilon_from_normal_shift(double shift);

struct ContourPoint {
  double phi = 0.0;
  double r = 0.0;
  BetaParams params;
  bool feasible = true;  // false when a shape hits zero before the distance reaches epsilon
};

inline constexpr int kDefaultAngles = 64;

// Priors at hellinger_squared distance epsilon from base, one per angle on
// a uniform grid over [-pi, pi). Offsets are (r cos phi, r sin phi).
std::vector<ContourPoint> epsilon_contour(const BetaParams& base, double epsilon,
                                          int n_angles = kDefaultAngles);

enum class PriorSlot { sens, spec, prev };

struct SensitivityPoint {
  ContourPoint point;
  std::optional<std::int64_t> n_star;
  double assurance_at_eval = 0.0;
};

struct SensitivityReport {
  PriorSlot vary = PriorSlot::sens;
  double epsilon = 0.0;
  std::int64_t n_eval = 0;
  // Extrema over feasible points whose search found n*.
  std::int64_t n_min = 0;
  std::int64_t n_max = 0;
  double a_min = 0.0;
  double a_max = 0.0;
  std::int64_t infeasible = 0;
  std::int64_t not_found = 0;
  std::vector<SensitivityPoint> points;
};

// Thrown when every contour angle is blocked by the positivity constraint.
class InfeasibleContour : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Replaces the varied design prior with each contour prior. An analysis
// prior that was left unset follows the design prior.
SensitivityReport sensitivity_scan(const PriorSet& priors, const DesignSpec& design, PriorSlot vary,
                                   double epsilon, int n_angles, std::int64_t n_eval,
                                   std::int64_t cap = kDefaultSampleSizeCap, ExecOptions exec = {});

enum class ConflictFlag { consistent, suspect, conflict };

std::string to_string(ConflictFlag f);
std::string to_string(PriorSlot s);

struct ConflictReport {
  std::int64_t observed = 0;
  std::int64_t n = 0;
  BetaParams prior;
  double tail_upper = 0.0;  // Pr(Y >= observed)
  double percentile = 0.0;  // Pr(Y <= observed)
  double pmf_observed = 0.0;
  ConflictFlag flag = ConflictFlag::consistent;
};

inline constexpr double kDefaultSuspectLevel = 0.95;
inline constexpr double kDefaultConflictLevel = 0.99;

// The smaller tail is compared with 1 - level: at or below 1 - conflict_level
// is a conflict, at or below 1 - suspect_level is suspect.
ConflictReport prior_predictive_check(std::int64_t observed, std::int64_t n, const BetaParams& prior,
                                      double suspect_level = kDefaultSuspectLevel,
                                      double conflict_level = kDefaultConflictLevel);

}  // namespace assuredx
