#include "assuredx/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace assuredx {

double hellinger_squared(const BetaParams& p1, const BetaParams& p2) {
  const double log_ratio = log_beta_fn((p1.a + p2.a) / 2.0, (p1.b + p2.b) / 2.0) -
                           0.5 * (log_beta_fn(p1.a, p1.b) + log_beta_fn(p2.a, p2.b));
  // log_ratio <= 0 by Cauchy-Schwarz; rounding can push it a hair above.
  return std::clamp(-std::expm1(log_ratio), 0.0, 1.0);
}

double hellinger_distance(const BetaParams& p1, const BetaParams& p2) {
  return std::sqrt(hellinger_squared(p1, p2));
}

double epsilon_from_normal_shift(double shift) { return -std::expm1(-shift * shift / 8.0); }

namespace {

constexpr double kRadiusTol = 1e-10;

// Largest radius that keeps both shapes positive along phi.
double radius_limit(const BetaParams& base, double c, double s) {
  double limit = std::numeric_limits<double>::infinity();
  if (c < 0.0) limit = std::min(limit, base.a / -c);
  if (s < 0.0) limit = std::min(limit, base.b / -s);
  return limit;
}

ContourPoint solve_ray(const BetaParams& base, double epsilon, double phi) {
  ContourPoint out;
  out.phi = phi;
  out.params = base;
  if (epsilon == 0.0) return out;
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  auto at = [&](double r) { return BetaParams(base.a + r * c, base.b + r * s); };
  auto dist = [&](double r) { return hellinger_squared(at(r), base); };

  const double limit = radius_limit(base, c, s);
  const double ceiling = std::isfinite(limit) ? limit * (1.0 - 1e-12) : limit;
  double lo = 0.0;
  double hi = std::min(1e-3 * std::min(base.a, base.b), ceiling);
  double d_prev = 0.0;
  for (;;) {
    const double d = dist(hi);
    if (d < d_prev) throw std::runtime_error("epsilon_contour: distance not increasing along ray");
    d_prev = d;
    if (d >= epsilon) break;
    if (hi >= ceiling) {
      out.feasible = false;
      out.r = hi;
      out.params = at(hi);
      return out;
    }
    lo = hi;
    hi = std::min(2.0 * hi, ceiling);
    if (!std::isfinite(hi) || hi > 1e12) {
      out.feasible = false;
      out.r = lo;
      out.params = at(lo);
      return out;
    }
  }
  while (hi - lo > kRadiusTol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (dist(mid) < epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.r = 0.5 * (lo + hi);
  out.params = at(out.r);
  return out;
}

}  // namespace

std::vector<ContourPoint> epsilon_contour(const BetaParams& base, double epsilon, int n_angles) {
  if (!(epsilon >= 0.0)) throw std::domain_error("epsilon_contour: epsilon must be >= 0");
  if (epsilon >= 1.0) throw std::domain_error("epsilon_contour: epsilon must be < 1");
  if (n_angles < 4) throw std::domain_error("epsilon_contour: n_angles must be >= 4");
  std::vector<ContourPoint> out;
  out.reserve(static_cast<std::size_t>(n_angles));
  for (int k = 0; k < n_angles; ++k) {
    const double phi = -std::numbers::pi + 2.0 * std::numbers::pi * k / n_angles;
    out.push_back(solve_ray(base, epsilon, phi));
  }
  return out;
}

std::string to_string(ConflictFlag f) {
  switch (f) {
    case ConflictFlag::consistent: return "consistent";
    case ConflictFlag::suspect: return "suspect";
    case ConflictFlag::conflict: return "conflict";
  }
  return "consistent";
}

std::string to_string(PriorSlot s) {
  switch (s) {
    case PriorSlot::sens: return "sens";
    case PriorSlot::spec: return "spec";
    case PriorSlot::prev: return "prev";
  }
  return "sens";
}

SensitivityReport sensitivity_scan(const PriorSet& priors, const DesignSpec& design, PriorSlot vary,
                                   double epsilon, int n_angles, std::int64_t n_eval,
                                   std::int64_t cap, ExecOptions exec) {
  design.validate();
  if (n_eval < 1) throw std::domain_error("sensitivity_scan: n_eval must be >= 1");
  const BetaParams base = vary == PriorSlot::sens ? priors.sens
                          : vary == PriorSlot::spec ? priors.spec
                                                    : priors.prev;
  SensitivityReport report;
  report.vary = vary;
  report.epsilon = epsilon;
  report.n_eval = n_eval;
  for (const auto& p : epsilon_contour(base, epsilon, n_angles)) report.points.push_back({p, {}, 0.0});

  parallel_for(report.points.size(), exec.threads, [&](std::size_t i) {
    auto& sp = report.points[i];
    if (!sp.point.feasible) return;
    PriorSet varied = priors;
    switch (vary) {
      case PriorSlot::sens: varied.sens = sp.point.params; break;
      case PriorSlot::spec: varied.spec = sp.point.params; break;
      case PriorSlot::prev: varied.prev = sp.point.params; break;
    }
    AssuranceEngine engine(varied, design);
    sp.n_star = engine.min_sample_size(cap);
    sp.assurance_at_eval = engine.assurance(n_eval);
  });

  bool any_feasible = false;
  bool any_found = false;
  for (const auto& sp : report.points) {
    if (!sp.point.feasible) {
      ++report.infeasible;
      continue;
    }
    if (!any_feasible) {
      report.a_min = report.a_max = sp.assurance_at_eval;
      any_feasible = true;
    }
    report.a_min = std::min(report.a_min, sp.assurance_at_eval);
    report.a_max = std::max(report.a_max, sp.assurance_at_eval);
    if (!sp.n_star) {
      ++report.not_found;
      continue;
    }
    if (!any_found) {
      report.n_min = report.n_max = *sp.n_star;
      any_found = true;
    }
    report.n_min = std::min(report.n_min, *sp.n_star);
    report.n_max = std::max(report.n_max, *sp.n_star);
  }
  if (!any_feasible) throw InfeasibleContour("sensitivity_scan: every contour angle is infeasible");
  return report;
}

ConflictReport prior_predictive_check(std::int64_t observed, std::int64_t n, const BetaParams& prior,
                                      double suspect_level, double conflict_level) {
  if (n < 0 || observed < 0 || observed > n) {
    throw std::domain_error("prior_predictive_check: need 0 <= observed <= n");
  }
  if (!(suspect_level > 0.5 && suspect_level < conflict_level && conflict_level < 1.0)) {
    throw std::domain_error("prior_predictive_check: need 0.5 < suspect_level < conflict_level < 1");
  }
  ConflictReport r;
  r.observed = observed;
  r.n = n;
  r.prior = prior;
  r.pmf_observed = std::exp(beta_binomial_log_pmf(observed, n, prior));
  r.percentile = beta_binomial_cdf(observed, n, prior);
  r.tail_upper = observed == 0 ? 1.0 : 1.0 - beta_binomial_cdf(observed - 1, n, prior);
  const double tail = std::min(r.percentile, r.tail_upper);
  if (tail <= 1.0 - conflict_level) {
    r.flag = ConflictFlag::conflict;
  } else if (tail <= 1.0 - suspect_level) {
    r.flag = ConflictFlag::suspect;
  } else {
    r.flag = ConflictFlag::consistent;
  }
  return r;
}

}  // namespace assuredx
