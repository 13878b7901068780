#pragma once

// Frequentist binomial intervals and sample-size methods, the prevalence
// scaling from group size to total size, and two comparison studies that
// set them against the assurance method.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "assuredx/parallel.hpp"

namespace assuredx {

// Called with (completed, total) as work items finish; calls are serialised.
// Throwing from the callback abandons the run.
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

enum class IntervalMethod { wald, clopper_pearson, agresti_coull };

std::string to_string(IntervalMethod m);

struct FreqInterval {
  double lower = 0.0;
  double upper = 0.0;
  IntervalMethod method = IntervalMethod::wald;

  double width() const { return upper - lower; }
};

// Standard normal quantile.
double normal_quantile(double p);

FreqInterval wald_interval(std::int64_t x, std::int64_t n, double alpha);
FreqInterval clopper_pearson_interval(std::int64_t x, std::int64_t n, double alpha);
FreqInterval agresti_coull_interval(std::int64_t x, std::int64_t n, double alpha);
FreqInterval freq_interval(IntervalMethod method, std::int64_t x, std::int64_t n, double alpha);

// ceil(((z_{1-alpha/2} + z_beta)^2 lambda (1 - lambda)) / (w/2)^2) with
// z_beta = Phi^{-1}(beta).
std::int64_t wald_sample_size(double lambda_hat, double alpha, double beta, double w_star);

enum class Group { disease, non_disease };

// Total size whose expected group size is n_group.
std::int64_t total_from_group(std::int64_t n_group, double prev_hat, Group group);

struct SimulationOptions {
  std::int64_t reps = 10000;
  std::uint64_t seed = 0;
  std::uint64_t scenario = 0;
  std::int64_t cap = 100000;
  // A zero-width Wald interval (x = 0 or x = n) carries no information about
  // precision; by default it does not count as meeting the target.
  bool count_degenerate = false;
};

// Fraction of simulated studies of size n whose interval width is <= w_star.
// Draws come from the stream keyed (seed, scenario, n).
double empirical_power(IntervalMethod method, std::int64_t n, double lambda_hat, double alpha,
                       double w_star, const SimulationOptions& opts);

// Smallest group size with empirical power >= beta, found by doubling then
// bisection; nullopt when nothing up to opts.cap qualifies.
std::optional<std::int64_t> simulated_sample_size(IntervalMethod method, double lambda_hat,
                                                  double alpha, double beta, double w_star,
                                                  const SimulationOptions& opts = {});

// Priors for the assurance method built from an analytical validity study of
// av_size subjects whose counts match (lambda, rho) exactly:
// sensitivity Beta(n lambda rho, n rho (1 - lambda)), prevalence Beta(n rho, n (1 - rho)).
struct ScenarioPriors {
  double sens_a, sens_b, prev_a, prev_b;
};
ScenarioPriors scenario_priors(double lambda, double rho, double av_size);

struct GridSpec {
  std::vector<double> lambdas{0.6, 0.7, 0.8, 0.9};
  std::vector<double> rhos{0.15, 0.15 + 0.8 / 3.0, 0.15 + 1.6 / 3.0, 0.95};
  std::vector<int> av_sizes{25, 50, 75};
  int flat_design_av_size = 25;
  double alpha = 0.05;
  double beta = 0.8;
  double w_star = 0.18;
  std::int64_t reps = 10000;
  std::uint64_t seed = 1;
  std::int64_t cap = 10000;
};

struct ScenarioRow {
  std::string method;  // wald_formula, wald, clopper_pearson, agresti_coull, bam, bam_flat
  double lambda = 0.0;
  double rho = 0.0;
  int av_size = 0;  // prior study size for the bam rows, 0 otherwise
  std::optional<std::int64_t> n_group;
  std::optional<std::int64_t> n_total;
};

std::vector<ScenarioRow> scenario_grid(const GridSpec& grid, ExecOptions exec = {},
                                       const ProgressFn& progress = {});

struct WidthStudySpec {
  double alpha = 0.05;
  double beta = 0.8;
  double w_star = 0.18;
  int av_size = 50;
  std::int64_t reps = 100;
  std::uint64_t seed = 1;
  double lambda_lo = 0.6, lambda_hi = 0.9;
  double rho_lo = 0.15, rho_hi = 0.95;
  std::int64_t sim_reps = 10000;
  std::int64_t cap = 10000;
};

struct WidthSample {
  std::string method;
  std::int64_t rep = 0;
  double lambda = 0.0;
  double rho = 0.0;
  std::optional<std::int64_t> n_total;
  double width = 1.0;  // realised interval width; 1 for a frequentist interval with no diseased subjects
};

struct WidthSummary {
  std::string method;
  std::int64_t count = 0;
  std::int64_t missing = 0;  // reps whose sample size search failed
  double median = 0.0;
  double q25 = 0.0;
  double q70 = 0.0;
  double q75 = 0.0;
};

struct WidthStudyResult {
  std::vector<WidthSample> samples;
  std::vector<WidthSummary> summary;
};

// Methods: bam, bam_flat (flat analysis prior), and the simulated wald,
// clopper_pearson and agresti_coull sizes.
WidthStudyResult width_study(const WidthStudySpec& spec, ExecOptions exec = {},
                             const ProgressFn& progress = {});

// Linear-interpolated sample quantile (type 7).
double sample_quantile(std::vector<double> values, double q);

}  // namespace assuredx
