#pragma once

// Beta and beta-binomial distribution machinery.
//
// Everything here is a pure function of its arguments. Probability mass is
// evaluated in log space; products of gamma functions overflow long before
// the group sizes that realistic study designs need.

#include <cstdint>
#include <utility>
#include <vector>

namespace assuredx {

// Shape pair of a beta distribution over a probability.
struct BetaParams {
  double a = 1.0;
  double b = 1.0;

  BetaParams() = default;
  // Throws std::domain_error unless both shapes are finite and positive.
  BetaParams(double a_, double b_);

  // Mean/effective-sample-size form: a = mean * ess, b = (1 - mean) * ess.
  static BetaParams from_mean_ess(double mean, double ess);

  double mean() const { return a / (a + b); }
  double variance() const;

  friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

// Cell pseudo-counts of a Dirichlet prior over the four cells of a 2x2 table,
// indexed (test result, disease status) like the table itself.
struct DirichletParams {
  double alpha11 = 1.0;
  double alpha12 = 1.0;
  double alpha21 = 1.0;
  double alpha22 = 1.0;

  DirichletParams() = default;
  DirichletParams(double a11, double a12, double a21, double a22);
};

// Counts of a diagnostic accuracy study.
//              disease   no disease
//   test +       n11        n12
//   test -       n21        n22
struct ContingencyTable {
  std::int64_t n11 = 0;
  std::int64_t n12 = 0;
  std::int64_t n21 = 0;
  std::int64_t n22 = 0;

  ContingencyTable() = default;
  ContingencyTable(std::int64_t n11_, std::int64_t n12_, std::int64_t n21_,
                   std::int64_t n22_);

  std::int64_t diseased() const { return n11 + n21; }
  std::int64_t non_diseased() const { return n12 + n22; }
  std::int64_t total() const { return diseased() + non_diseased(); }
  std::int64_t test_positive() const { return n11 + n12; }
  std::int64_t test_negative() const { return n21 + n22; }
};

// log B(a, b). Throws std::domain_error for non-positive or non-finite input.
double log_beta_fn(double a, double b);

// log of the beta density at x in (0, 1).
double beta_log_pdf(double x, const BetaParams& p);

// Regularized incomplete beta I_x(a, b).
double beta_cdf(double x, const BetaParams& p);

// Inverse of beta_cdf in p for p in (0, 1); accurate to 1e-10 absolute.
double beta_quantile(double p, const BetaParams& params);

// log of C(n, y) B(a + y, b + n - y) / B(a, b).
double beta_binomial_log_pmf(std::int64_t y, std::int64_t n, const BetaParams& p);

// Pr(Y <= y) for Y ~ BetaBinomial(n, a, b).
double beta_binomial_cdf(std::int64_t y, std::int64_t n, const BetaParams& p);

// Probability masses for y = 0..n, normalised to sum to one. Evaluated by the
// ratio recurrence, so the cost is linear in n with no per-term log-gamma.
std::vector<double> beta_binomial_pmf_series(std::int64_t n, const BetaParams& p);

// Pr(lo <= Y <= hi), clamping the range to 0..n.
double beta_binomial_range_mass(std::int64_t lo, std::int64_t hi, std::int64_t n,
                                const BetaParams& p);

// Conjugate update with a power-prior discount in [0, 1]. A discount of one
// pools the new counts fully; zero returns the prior unchanged.
BetaParams posterior_update(const BetaParams& prior, double successes,
                            double failures, double discount = 1.0);

// Sensitivity and specificity margins of a Dirichlet prior on the 2x2 cells.
struct DirichletMargins {
  BetaParams sensitivity;
  BetaParams specificity;
};
DirichletMargins dirichlet_margins(const DirichletParams& d);

}  // namespace assuredx
