#include "assuredx/beta.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace assuredx {

namespace {

// Reentrant log-gamma for positive arguments (glibc's lgamma writes signgam).
double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_shape(double a, double b, const char* what) {
  if (!positive_finite(a) || !positive_finite(b)) {
    throw std::domain_error(std::string(what) + ": shape parameters must be finite and > 0 (got a=" +
                            std::to_string(a) + ", b=" + std::to_string(b) + ")");
  }
}

// Continued fraction for the incomplete beta (modified Lentz). Converges
// quickly for x < (a + 1) / (a + b + 2).
double incomplete_beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  return h;  // best effort; only reachable for absurdly large shapes
}

double log_choose(std::int64_t n, std::int64_t k) {
  return log_gamma(static_cast<double>(n) + 1.0) - log_gamma(static_cast<double>(k) + 1.0) -
         log_gamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

BetaParams::BetaParams(double a_, double b_) : a(a_), b(b_) { require_shape(a, b, "BetaParams"); }

BetaParams BetaParams::from_mean_ess(double mean, double ess) {
  if (!(mean > 0.0 && mean < 1.0)) throw std::domain_error("BetaParams: mean must lie in (0, 1)");
  if (!positive_finite(ess)) throw std::domain_error("BetaParams: effective sample size must be > 0");
  return BetaParams(mean * ess, (1.0 - mean) * ess);
}

double BetaParams::variance() const {
  const double s = a + b;
  return a * b / (s * s * (s + 1.0));
}

DirichletParams::DirichletParams(double a11, double a12, double a21, double a22)
    : alpha11(a11), alpha12(a12), alpha21(a21), alpha22(a22) {
  if (!positive_finite(a11) || !positive_finite(a12) || !positive_finite(a21) ||
      !positive_finite(a22)) {
    throw std::domain_error("DirichletParams: all cell pseudo-counts must be finite and > 0");
  }
}

ContingencyTable::ContingencyTable(std::int64_t n11_, std::int64_t n12_, std::int64_t n21_,
                                   std::int64_t n22_)
    : n11(n11_), n12(n12_), n21(n21_), n22(n22_) {
  if (n11 < 0 || n12 < 0 || n21 < 0 || n22 < 0) {
    throw std::domain_error("ContingencyTable: counts must be non-negative");
  }
}

double log_beta_fn(double a, double b) {
  require_shape(a, b, "log_beta_fn");
  // The log-gamma difference cancels badly when one shape is small and the
  // other large. Boost evaluates B itself to a few ulps, so use it whenever
  // the value is comfortably inside the double range.
  const double direct = log_gamma(a) + log_gamma(b) - log_gamma(a + b);
  if (direct > -600.0 && direct < 600.0) return std::log(boost::math::beta(a, b));
  return direct;
}

double beta_log_pdf(double x, const BetaParams& p) {
  if (!(x > 0.0 && x < 1.0)) throw std::domain_error("beta_log_pdf: x must lie in (0, 1)");
  return (p.a - 1.0) * std::log(x) + (p.b - 1.0) * std::log1p(-x) - log_beta_fn(p.a, p.b);
}

double beta_cdf(double x, const BetaParams& p) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("beta_cdf: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double a = p.a;
  const double b = p.b;
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta_fn(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::clamp(std::exp(log_front) * incomplete_beta_cf(a, b, x) / a, 0.0, 1.0);
  }
  return std::clamp(1.0 - std::exp(log_front) * incomplete_beta_cf(b, a, 1.0 - x) / b, 0.0, 1.0);
}

double beta_quantile(double p, const BetaParams& params) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("beta_quantile: p must lie in (0, 1)");
  const double a = params.a;
  const double b = params.b;
  const double log_b = log_beta_fn(a, b);

  // Starting point: Cornish-Fisher style guess for a, b >= 1, power-law tail
  // approximations otherwise.
  double x;
  if (a >= 1.0 && b >= 1.0) {
    const double pp = p < 0.5 ? p : 1.0 - p;
    const double t = std::sqrt(-2.0 * std::log(pp));
    double z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
    if (p < 0.5) z = -z;
    const double al = (z * z - 3.0) / 6.0;
    const double h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
    const double w = (z * std::sqrt(al + h) / h) -
                     (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
    x = a / (a + b * std::exp(2.0 * w));
  } else {
    const double lna = std::log(a / (a + b));
    const double lnb = std::log(b / (a + b));
    const double t = std::exp(a * lna) / a;
    const double u = std::exp(b * lnb) / b;
    const double w = t + u;
    if (p < t / w) {
      x = std::pow(a * w * p, 1.0 / a);
    } else {
      x = 1.0 - std::pow(b * w * (1.0 - p), 1.0 / b);
    }
  }

  // Safeguarded Halley iteration inside a shrinking bracket.
  double lo = 0.0;
  double hi = 1.0;
  if (!(x > 0.0 && x < 1.0) || !std::isfinite(x)) x = 0.5;
  for (int iter = 0; iter < 300; ++iter) {
    const double f = beta_cdf(x, params) - p;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double log_pdf = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_b;
    const double pdf = std::exp(log_pdf);
    double next;
    if (pdf > 0.0 && std::isfinite(pdf)) {
      const double u = f / pdf;
      const double curvature = (a - 1.0) / x - (b - 1.0) / (1.0 - x);
      const double step = u / (1.0 - 0.5 * std::min(1.0, u * curvature));
      next = x - step;
    } else {
      next = std::numeric_limits<double>::quiet_NaN();
    }
    if (!(next > lo && next < hi)) {
      // Bisect; geometrically when the bracket spans orders of magnitude so
      // that deep tails near 0 or 1 are reached in few steps.
      if (lo > 0.0 && hi / lo > 4.0) {
        next = std::sqrt(lo * hi);
      } else if (hi < 1.0 && lo < 1.0 && (1.0 - lo) / (1.0 - hi) > 4.0) {
        next = 1.0 - std::sqrt((1.0 - lo) * (1.0 - hi));
      } else if (lo == 0.0 && hi < 1e-3) {
        next = hi * 1e-3;
      } else {
        next = 0.5 * (lo + hi);
      }
    }
    const double change = std::fabs(next - x);
    x = next;
    // Tolerances scale with the distance to the nearer end, since near 1 a
    // few ulps of x already move the cdf by a lot.
    const double scale = std::max(std::min(x, 1.0 - x), 1e-300);
    if (change <= 1e-15 * scale || hi - lo <= 1e-16 * std::max(std::min(hi, 1.0 - lo), 1e-300)) break;
  }
  return x;
}

double beta_binomial_log_pmf(std::int64_t y, std::int64_t n, const BetaParams& p) {
  if (n < 0 || y < 0 || y > n) throw std::domain_error("beta_binomial_log_pmf: require 0 <= y <= n");
  const double yd = static_cast<double>(y);
  const double fd = static_cast<double>(n - y);
  return log_choose(n, y) + log_beta_fn(p.a + yd, p.b + fd) - log_beta_fn(p.a, p.b);
}

namespace {

// Walks f(y) for y = from..to with the ratio recurrence
//   f(y+1)/f(y) = (n-y)(a+y) / ((y+1)(b+n-y-1)),
// anchored at the exact log mass of f(from). Masses below ~1e-280 are
// tracked in log space until they recover, so an underflowing stretch never
// zeroes the rest of the walk. visit(y, mass) sees every y in order.
template <class Visit>
void walk_beta_binomial(std::int64_t from, std::int64_t to, std::int64_t n, const BetaParams& p,
                        Visit&& visit) {
  constexpr double kFloor = 1e-280;
  constexpr double kLogFloor = -644.0;  // log(1e-280)
  double log_mass = beta_binomial_log_pmf(from, n, p);
  bool in_log = log_mass < kLogFloor;
  double mass = in_log ? 0.0 : std::exp(log_mass);
  const double nd = static_cast<double>(n);
  for (std::int64_t y = from;; ++y) {
    visit(y, in_log ? 0.0 : mass);
    if (y == to) break;
    const double yd = static_cast<double>(y);
    const double ratio = ((nd - yd) * (p.a + yd)) / ((yd + 1.0) * (p.b + nd - yd - 1.0));
    if (in_log) {
      log_mass += std::log(ratio);
      if (log_mass >= kLogFloor) {
        in_log = false;
        mass = std::exp(log_mass);
      }
    } else {
      mass *= ratio;
      if (mass < kFloor) {
        in_log = true;
        log_mass = mass > 0.0 ? std::log(mass) : -745.0;
      }
    }
  }
}

}  // namespace

std::vector<double> beta_binomial_pmf_series(std::int64_t n, const BetaParams& p) {
  if (n < 0) throw std::domain_error("beta_binomial_pmf_series: n must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  double total = 0.0;
  walk_beta_binomial(0, n, n, p, [&](std::int64_t y, double mass) {
    out[static_cast<std::size_t>(y)] = mass;
    total += mass;
  });
  for (double& v : out) v /= total;
  return out;
}

double beta_binomial_range_mass(std::int64_t lo, std::int64_t hi, std::int64_t n,
                                const BetaParams& p) {
  if (n < 0) throw std::domain_error("beta_binomial_range_mass: n must be >= 0");
  lo = std::max<std::int64_t>(lo, 0);
  hi = std::min(hi, n);
  if (lo > hi) return 0.0;
  double total = 0.0;
  walk_beta_binomial(lo, hi, n, p, [&](std::int64_t, double mass) { total += mass; });
  return std::min(total, 1.0);
}

double beta_binomial_cdf(std::int64_t y, std::int64_t n, const BetaParams& p) {
  if (n < 0 || y < 0 || y > n) throw std::domain_error("beta_binomial_cdf: require 0 <= y <= n");
  if (y == n) return 1.0;
  // log-sum-exp over the shorter tail.
  const bool lower = y < n - y;
  const std::int64_t from = lower ? 0 : y + 1;
  const std::int64_t to = lower ? y : n;
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(to - from + 1));
  double peak = -std::numeric_limits<double>::infinity();
  for (std::int64_t k = from; k <= to; ++k) {
    logs.push_back(beta_binomial_log_pmf(k, n, p));
    peak = std::max(peak, logs.back());
  }
  double acc = 0.0;
  for (double v : logs) acc += std::exp(v - peak);
  const double tail = std::exp(peak + std::log(acc));
  return std::clamp(lower ? tail : 1.0 - tail, 0.0, 1.0);
}

BetaParams posterior_update(const BetaParams& prior, double successes, double failures,
                            double discount) {
  if (!(successes >= 0.0) || !(failures >= 0.0) || !std::isfinite(successes) ||
      !std::isfinite(failures)) {
    throw std::domain_error("posterior_update: counts must be finite and >= 0");
  }
  if (!(discount >= 0.0 && discount <= 1.0)) {
    throw std::domain_error("posterior_update: discount must lie in [0, 1]");
  }
  return BetaParams(prior.a + discount * successes, prior.b + discount * failures);
}

DirichletMargins dirichlet_margins(const DirichletParams& d) {
  return {BetaParams(d.alpha11, d.alpha21), BetaParams(d.alpha22, d.alpha12)};
}

}  // namespace assuredx
