#pragma once

// Assurance for interval-width targets on sensitivity, specificity or both.
//
// For a total sample size n_T the number of diseased patients n_T1 is
// beta-binomial under the prevalence prior. Given a group size, the
// probability that the posterior interval meets its width target depends
// only on that group size, so it is tabulated once per group size and
// reused for every n_T.

#include <cstdint>
#include <optional>
#include <vector>

#include "assuredx/beta.hpp"
#include "assuredx/interval.hpp"
#include "assuredx/parallel.hpp"

namespace assuredx {

enum class Measure { sensitivity, specificity, both };

struct DesignSpec {
  Measure measure = Measure::sensitivity;
  double w_star_sens = 0.16;
  std::optional<double> w_star_spec;
  IntervalSpec interval;
  double assurance_target = 0.8;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct PriorSet {
  BetaParams sens;
  BetaParams spec;
  BetaParams prev;
  std::optional<BetaParams> analysis_sens;
  std::optional<BetaParams> analysis_spec;

  BetaParams analysis_sensitivity() const { return analysis_sens.value_or(sens); }
  BetaParams analysis_specificity() const { return analysis_spec.value_or(spec); }
};

struct AssurancePoint {
  std::int64_t n_t = 0;
  double assurance = 0.0;
};

struct AssuranceCurve {
  std::vector<AssurancePoint> points;
  std::optional<std::int64_t> n_star;
};

inline constexpr std::int64_t kDefaultSampleSizeCap = 10000;

// Probability, under the design prior, that a group of group_size patients
// yields a count in the critical set built from the analysis prior.
double assurance_conditional(std::int64_t group_size, const BetaParams& design_prior,
                             const BetaParams& analysis_prior, double w_star,
                             const IntervalSpec& interval);

// Conditional assurance tabulated by group size and grown on demand.
class ConditionalAssuranceTable {
 public:
  ConditionalAssuranceTable(BetaParams design_prior, BetaParams analysis_prior, double w_star,
                            IntervalSpec interval);

  // Fills entries 0..max_group_size, in parallel when threads > 1.
  void extend_to(std::int64_t max_group_size, unsigned threads = 1);

  // Entry for one group size; extends the table if needed.
  double at(std::int64_t group_size);
  // Entry for an already tabulated group size; throws std::out_of_range otherwise.
  double value(std::int64_t group_size) const;
  const CriticalSet& critical_set_at(std::int64_t group_size);

  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }

 private:
  BetaParams design_;
  BetaParams analysis_;
  double w_star_;
  IntervalSpec interval_;
  std::vector<double> values_;
  std::vector<CriticalSet> sets_;
};

// Evaluates assurance for one (priors, design) configuration. Holds the
// conditional tables, so repeated queries at different n_T are cheap.
// Instances are not thread-safe; use one per task.
class AssuranceEngine {
 public:
  AssuranceEngine(PriorSet priors, DesignSpec design, ExecOptions exec = {});

  double assurance(std::int64_t n_t);
  AssuranceCurve curve(std::int64_t n_t_max);

  // Smallest n_T <= cap with assurance >= target; nullopt if none.
  std::optional<std::int64_t> min_sample_size(std::int64_t cap = kDefaultSampleSizeCap);

  const PriorSet& priors() const { return priors_; }
  const DesignSpec& design() const { return design_; }

 private:
  void prepare(std::int64_t n_t_max);
  double evaluate(std::int64_t n_t) const;

  PriorSet priors_;
  DesignSpec design_;
  ExecOptions exec_;
  std::optional<ConditionalAssuranceTable> sens_table_;
  std::optional<ConditionalAssuranceTable> spec_table_;
};

double assurance_sensitivity(std::int64_t n_t, const PriorSet& priors, const DesignSpec& design);
double assurance_specificity(std::int64_t n_t, const PriorSet& priors, const DesignSpec& design);
double assurance_joint(std::int64_t n_t, const PriorSet& priors, const DesignSpec& design);
AssuranceCurve assurance_curve(std::int64_t n_t_max, const PriorSet& priors, const DesignSpec& design,
                               ExecOptions exec = {});
std::optional<std::int64_t> min_sample_size(const PriorSet& priors, const DesignSpec& design,
                                            std::int64_t cap = kDefaultSampleSizeCap,
                                            ExecOptions exec = {});

// Simulation estimate of the assurance at n_t; standard error at most
// sqrt(0.25 / reps).
double monte_carlo_assurance(std::int64_t n_t, const PriorSet& priors, const DesignSpec& design,
                             std::int64_t reps, std::uint64_t seed);

}  // namespace assuredx
