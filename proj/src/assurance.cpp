#include "assuredx/assurance.hpp"

#include <boost/random/beta_distribution.hpp>
#include <boost/random/binomial_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "assuredx/rng.hpp"

namespace assuredx {

namespace {

void require_open_unit(double v, const char* field) {
  if (!(v > 0.0 && v < 1.0)) {
    throw std::invalid_argument(std::string(field) + " must lie in (0, 1)");
  }
}

// Mass of the critical set under the design prior.
double critical_mass(const CriticalSet& set, const BetaParams& design) {
  if (set.is_empty()) return 0.0;
  if (set.is_complete()) return 1.0;
  const double lower = beta_binomial_range_mass(0, set.c1, set.group_size, design);
  const double upper = beta_binomial_range_mass(set.c2, set.group_size, set.group_size, design);
  return std::min(lower + upper, 1.0);
}

}  // namespace

void DesignSpec::validate() const {
  require_open_unit(w_star_sens, "design.width");
  require_open_unit(assurance_target, "design.assurance");
  require_open_unit(interval.alpha, "design.alpha");
  if (measure != Measure::sensitivity) {
    if (!w_star_spec) throw std::invalid_argument("design.width_spec is required for this measure");
    require_open_unit(*w_star_spec, "design.width_spec");
  }
}

double assurance_conditional(std::int64_t group_size, const BetaParams& design_prior,
                             const BetaParams& analysis_prior, double w_star,
                             const IntervalSpec& interval) {
  if (group_size < 0) throw std::domain_error("assurance_conditional: group_size must be >= 0");
  return critical_mass(critical_set(analysis_prior, group_size, w_star, interval), design_prior);
}

ConditionalAssuranceTable::ConditionalAssuranceTable(BetaParams design_prior,
                                                     BetaParams analysis_prior, double w_star,
                                                     IntervalSpec interval)
    : design_(design_prior), analysis_(analysis_prior), w_star_(w_star), interval_(interval) {
  require_open_unit(w_star, "width target");
}

void ConditionalAssuranceTable::extend_to(std::int64_t max_group_size, unsigned threads) {
  const auto current = values_.size();
  const auto wanted = static_cast<std::size_t>(std::max<std::int64_t>(max_group_size + 1, 0));
  if (wanted <= current) return;
  values_.resize(wanted);
  sets_.resize(wanted);
  // Contiguous chunks, each walked by its own tracker. Critical sets are
  // unique, so the chunking does not affect the result.
  const std::size_t count = wanted - current;
  const std::size_t chunks = std::min<std::size_t>(std::max(1u, threads), (count + 63) / 64);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = current + count * c / chunks;
    const std::size_t end = current + count * (c + 1) / chunks;
    CriticalSetTracker tracker(analysis_, w_star_, interval_);
    for (std::size_t i = begin; i < end; ++i) {
      sets_[i] = tracker.next(static_cast<std::int64_t>(i));
      values_[i] = critical_mass(sets_[i], design_);
    }
  });
}

double ConditionalAssuranceTable::at(std::int64_t group_size) {
  if (group_size < 0) throw std::domain_error("conditional assurance: negative group size");
  extend_to(group_size);
  return values_[static_cast<std::size_t>(group_size)];
}

double ConditionalAssuranceTable::value(std::int64_t group_size) const {
  return values_.at(static_cast<std::size_t>(group_size));
}

const CriticalSet& ConditionalAssuranceTable::critical_set_at(std::int64_t group_size) {
  if (group_size < 0) throw std::domain_error("conditional assurance: negative group size");
  extend_to(group_size);
  return sets_[static_cast<std::size_t>(group_size)];
}

AssuranceEngine::AssuranceEngine(PriorSet priors, DesignSpec design, ExecOptions exec)
    : priors_(priors), design_(design), exec_(exec) {
  design_.validate();
  if (design_.measure != Measure::specificity) {
    sens_table_.emplace(priors_.sens, priors_.analysis_sensitivity(), design_.w_star_sens,
                        design_.interval);
  }
  if (design_.measure != Measure::sensitivity) {
    spec_table_.emplace(priors_.spec, priors_.analysis_specificity(), *design_.w_star_spec,
                        design_.interval);
  }
}

void AssuranceEngine::prepare(std::int64_t n_t_max) {
  if (sens_table_) sens_table_->extend_to(n_t_max, exec_.threads);
  if (spec_table_) spec_table_->extend_to(n_t_max, exec_.threads);
}

double AssuranceEngine::evaluate(std::int64_t n_t) const {
  const auto weights = beta_binomial_pmf_series(n_t, priors_.prev);
  double total = 0.0;
  for (std::int64_t m = 0; m <= n_t; ++m) {
    double term = weights[static_cast<std::size_t>(m)];
    if (sens_table_) term *= sens_table_->value(m);
    if (spec_table_) term *= spec_table_->value(n_t - m);
    total += term;
  }
  return std::clamp(total, 0.0, 1.0);
}

double AssuranceEngine::assurance(std::int64_t n_t) {
  if (n_t < 0) throw std::domain_error("assurance: n_t must be >= 0");
  prepare(n_t);
  return evaluate(n_t);
}

AssuranceCurve AssuranceEngine::curve(std::int64_t n_t_max) {
  if (n_t_max < 1) throw std::domain_error("assurance_curve: n_t_max must be >= 1");
  prepare(n_t_max);
  AssuranceCurve out;
  out.points.resize(static_cast<std::size_t>(n_t_max));
  parallel_for(out.points.size(), exec_.threads, [&](std::size_t i) {
    const auto n = static_cast<std::int64_t>(i) + 1;
    out.points[i] = {n, evaluate(n)};
  });
  for (const auto& p : out.points) {
    if (p.assurance >= design_.assurance_target) {
      out.n_star = p.n_t;
      break;
    }
  }
  return out;
}

std::optional<std::int64_t> AssuranceEngine::min_sample_size(std::int64_t cap) {
  if (cap < 1) throw std::domain_error("min_sample_size: cap must be >= 1");
  const double target = design_.assurance_target;

  // Exponential bracket, then bisection on the bracket.
  std::int64_t lo = 0;  // assurance(lo) < target; n_t = 0 never counts
  std::int64_t hi = 1;
  while (true) {
    if (assurance(hi) >= target) break;
    if (hi >= cap) return std::nullopt;
    lo = hi;
    hi = std::min(hi * 2, cap);
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (assurance(mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  // Verify the crossing, then confirm no earlier n_t already reaches the
  // target; monotonicity of the curve is observed, not guaranteed.
  if (assurance(hi) < target || (hi > 1 && assurance(hi - 1) >= target)) {
    throw std::logic_error("min_sample_size: bisection invariant violated");
  }
  std::vector<double> below(static_cast<std::size_t>(hi - 1));
  parallel_for(below.size(), exec_.threads,
               [&](std::size_t i) { below[i] = evaluate(static_cast<std::int64_t>(i) + 1); });
  for (std::size_t i = 0; i < below.size(); ++i) {
    if (below[i] >= target) return static_cast<std::int64_t>(i) + 1;
  }
  return hi;
}

namespace {

DesignSpec with_measure(DesignSpec d, Measure m) {
  d.measure = m;
  return d;
}

}  // namespace

double assurance_sensitivity(std::int64_t n_t, const PriorSet& priors, const DesignSpec& design) {
  return AssuranceEngine(priors, with_measure(design, Measure::sensitivity)).assurance(n_t);
}

double assurance_specificity(std::int64_t n_t, const PriorSet& priors, const DesignSpec& design) {
  return AssuranceEngine(priors, with_measure(design, Measure::specificity)).assurance(n_t);
}

double assurance_joint(std::int64_t n_t, const PriorSet& priors, const DesignSpec& design) {
  if (!design.w_star_spec) {
    throw std::invalid_argument("design.width_spec is required for the joint assurance");
  }
  return AssuranceEngine(priors, with_measure(design, Measure::both)).assurance(n_t);
}

AssuranceCurve assurance_curve(std::int64_t n_t_max, const PriorSet& priors, const DesignSpec& design,
                               ExecOptions exec) {
  return AssuranceEngine(priors, design, exec).curve(n_t_max);
}

std::optional<std::int64_t> min_sample_size(const PriorSet& priors, const DesignSpec& design,
                                            std::int64_t cap, ExecOptions exec) {
  return AssuranceEngine(priors, design, exec).min_sample_size(cap);
}

double monte_carlo_assurance(std::int64_t n_t, const PriorSet& priors, const DesignSpec& design,
                             std::int64_t reps, std::uint64_t seed) {
  design.validate();
  if (reps < 1) throw std::domain_error("monte_carlo_assurance: reps must be >= 1");
  if (n_t < 0) throw std::domain_error("monte_carlo_assurance: n_t must be >= 0");

  CounterRng rng(seed, 0, static_cast<std::uint64_t>(n_t));
  boost::random::beta_distribution<double> draw_prev(priors.prev.a, priors.prev.b);
  boost::random::beta_distribution<double> draw_sens(priors.sens.a, priors.sens.b);
  boost::random::beta_distribution<double> draw_spec(priors.spec.a, priors.spec.b);

  const bool check_sens = design.measure != Measure::specificity;
  const bool check_spec = design.measure != Measure::sensitivity;
  const BetaParams analysis_sens = priors.analysis_sensitivity();
  const BetaParams analysis_spec = priors.analysis_specificity();

  // Widths are memoised per (group size, count); they are deterministic.
  std::unordered_map<std::uint64_t, bool> sens_ok;
  std::unordered_map<std::uint64_t, bool> spec_ok;
  auto meets = [&](std::unordered_map<std::uint64_t, bool>& memo, const BetaParams& prior,
                   std::int64_t group, std::int64_t count, double w_star) {
    const std::uint64_t key = (static_cast<std::uint64_t>(group) << 32) | static_cast<std::uint64_t>(count);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const BetaParams post(prior.a + static_cast<double>(count), prior.b + static_cast<double>(group - count));
    const bool ok = interval_width(post, design.interval) <= w_star;
    memo.emplace(key, ok);
    return ok;
  };

  std::int64_t successes = 0;
  for (std::int64_t r = 0; r < reps; ++r) {
    const double rho = draw_prev(rng);
    const std::int64_t diseased = boost::random::binomial_distribution<std::int64_t>(n_t, rho)(rng);
    const std::int64_t healthy = n_t - diseased;
    bool ok = true;
    if (check_sens) {
      const double lambda = draw_sens(rng);
      const std::int64_t tp = boost::random::binomial_distribution<std::int64_t>(diseased, lambda)(rng);
      ok = meets(sens_ok, analysis_sens, diseased, tp, design.w_star_sens);
    }
    if (check_spec) {
      const double theta = draw_spec(rng);
      const std::int64_t tn = boost::random::binomial_distribution<std::int64_t>(healthy, theta)(rng);
      ok = ok && meets(spec_ok, analysis_spec, healthy, tn, *design.w_star_spec);
    }
    if (ok) ++successes;
  }
  return static_cast<double>(successes) / static_cast<double>(reps);
}

}  // namespace assuredx
