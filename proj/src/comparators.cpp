#include "assuredx/comparators.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "assuredx/assurance.hpp"
#include "assuredx/beta.hpp"
#include "assuredx/rng.hpp"

namespace assuredx {

namespace {

void check_counts(std::int64_t x, std::int64_t n) {
  if (n < 1) throw std::domain_error("interval: n must be >= 1");
  if (x < 0 || x > n) throw std::domain_error("interval: need 0 <= x <= n");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("interval: alpha must lie in (0, 1)");
}

FreqInterval clamp_interval(double lo, double hi, IntervalMethod m) {
  return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0), m};
}

}  // namespace

std::string to_string(IntervalMethod m) {
  switch (m) {
    case IntervalMethod::wald: return "wald";
    case IntervalMethod::clopper_pearson: return "clopper_pearson";
    case IntervalMethod::agresti_coull: return "agresti_coull";
  }
  return "wald";
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

FreqInterval wald_interval(std::int64_t x, std::int64_t n, double alpha) {
  check_counts(x, n);
  check_alpha(alpha);
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double p = static_cast<double>(x) / static_cast<double>(n);
  const double half = z * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return clamp_interval(p - half, p + half, IntervalMethod::wald);
}

FreqInterval clopper_pearson_interval(std::int64_t x, std::int64_t n, double alpha) {
  check_counts(x, n);
  check_alpha(alpha);
  const auto xd = static_cast<double>(x);
  const auto nd = static_cast<double>(n);
  const double lo = x == 0 ? 0.0 : beta_quantile(alpha / 2.0, BetaParams(xd, nd - xd + 1.0));
  const double hi = x == n ? 1.0 : beta_quantile(1.0 - alpha / 2.0, BetaParams(xd + 1.0, nd - xd));
  return clamp_interval(lo, hi, IntervalMethod::clopper_pearson);
}

FreqInterval agresti_coull_interval(std::int64_t x, std::int64_t n, double alpha) {
  check_counts(x, n);
  check_alpha(alpha);
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double n_tilde = static_cast<double>(n) + z * z;
  const double p_tilde = (static_cast<double>(x) + z * z / 2.0) / n_tilde;
  const double half = z * std::sqrt(p_tilde * (1.0 - p_tilde) / n_tilde);
  return clamp_interval(p_tilde - half, p_tilde + half, IntervalMethod::agresti_coull);
}

FreqInterval freq_interval(IntervalMethod method, std::int64_t x, std::int64_t n, double alpha) {
  switch (method) {
    case IntervalMethod::wald: return wald_interval(x, n, alpha);
    case IntervalMethod::clopper_pearson: return clopper_pearson_interval(x, n, alpha);
    case IntervalMethod::agresti_coull: return agresti_coull_interval(x, n, alpha);
  }
  throw std::invalid_argument("freq_interval: unknown method");
}

std::int64_t wald_sample_size(double lambda_hat, double alpha, double beta, double w_star) {
  if (!(lambda_hat > 0.0 && lambda_hat < 1.0)) {
    throw std::domain_error("wald_sample_size: lambda_hat must lie in (0, 1)");
  }
  check_alpha(alpha);
  if (!(w_star > 0.0 && w_star < 1.0)) throw std::domain_error("wald_sample_size: w_star must lie in (0, 1)");
  const double z = normal_quantile(1.0 - alpha / 2.0) + normal_quantile(beta);
  const double n = z * z * lambda_hat * (1.0 - lambda_hat) / ((w_star / 2.0) * (w_star / 2.0));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(n - 1e-9)));
}

std::int64_t total_from_group(std::int64_t n_group, double prev_hat, Group group) {
  if (!(prev_hat > 0.0 && prev_hat < 1.0)) {
    throw std::domain_error("total_from_group: prev_hat must lie in (0, 1)");
  }
  if (n_group < 0) throw std::domain_error("total_from_group: n_group must be >= 0");
  const double share = group == Group::disease ? prev_hat : 1.0 - prev_hat;
  // The small offset keeps exact quotients such as 76 / 0.76 from rounding up.
  return static_cast<std::int64_t>(std::ceil(static_cast<double>(n_group) / share - 1e-9));
}

double empirical_power(IntervalMethod method, std::int64_t n, double lambda_hat, double alpha,
                       double w_star, const SimulationOptions& opts) {
  if (n < 1) throw std::domain_error("empirical_power: n must be >= 1");
  if (opts.reps < 1) throw std::domain_error("empirical_power: reps must be >= 1");
  CounterRng rng(opts.seed, opts.scenario, static_cast<std::uint64_t>(n));
  boost::random::binomial_distribution<std::int64_t> draw(n, lambda_hat);
  std::vector<signed char> ok(static_cast<std::size_t>(n) + 1, -1);
  std::int64_t hits = 0;
  for (std::int64_t r = 0; r < opts.reps; ++r) {
    const std::int64_t x = draw(rng);
    auto& slot = ok[static_cast<std::size_t>(x)];
    if (slot < 0) {
      const double w = freq_interval(method, x, n, alpha).width();
      slot = (w <= w_star && (opts.count_degenerate || w > 0.0)) ? 1 : 0;
    }
    hits += slot;
  }
  return static_cast<double>(hits) / static_cast<double>(opts.reps);
}

std::optional<std::int64_t> simulated_sample_size(IntervalMethod method, double lambda_hat,
                                                  double alpha, double beta, double w_star,
                                                  const SimulationOptions& opts) {
  if (!(lambda_hat > 0.0 && lambda_hat < 1.0)) {
    throw std::domain_error("simulated_sample_size: lambda_hat must lie in (0, 1)");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("simulated_sample_size: beta must lie in (0, 1)");
  auto passes = [&](std::int64_t n) {
    return empirical_power(method, n, lambda_hat, alpha, w_star, opts) >= beta;
  };
  std::int64_t lo = 0;  // fails, or 0
  std::int64_t hi = 1;
  while (!passes(hi)) {
    if (hi >= opts.cap) return std::nullopt;
    lo = hi;
    hi = std::min(2 * hi, opts.cap);
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (passes(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

ScenarioPriors scenario_priors(double lambda, double rho, double av_size) {
  return {av_size * lambda * rho, av_size * rho * (1.0 - lambda), av_size * rho, av_size * (1.0 - rho)};
}

namespace {

DesignSpec sens_design(double alpha, double beta, double w_star) {
  DesignSpec d;
  d.measure = Measure::sensitivity;
  d.w_star_sens = w_star;
  d.interval = IntervalSpec(alpha, Sidedness::two_sided);
  d.assurance_target = beta;
  return d;
}

PriorSet sens_priors(const ScenarioPriors& sp) {
  PriorSet p;
  p.sens = BetaParams(sp.sens_a, sp.sens_b);
  p.prev = BetaParams(sp.prev_a, sp.prev_b);
  return p;
}

class ProgressTicker {
 public:
  ProgressTicker(const ProgressFn& fn, std::size_t total) : fn_(fn), total_(total) {}
  void tick() {
    if (!fn_) return;
    std::lock_guard lock(mutex_);
    fn_(++done_, total_);
  }

 private:
  const ProgressFn& fn_;
  std::size_t total_;
  std::size_t done_ = 0;
  std::mutex mutex_;
};

constexpr IntervalMethod kSimulated[] = {IntervalMethod::wald, IntervalMethod::clopper_pearson,
                                         IntervalMethod::agresti_coull};

}  // namespace

std::vector<ScenarioRow> scenario_grid(const GridSpec& grid, ExecOptions exec,
                                       const ProgressFn& progress) {
  struct Point {
    double lambda, rho;
  };
  std::vector<Point> points;
  for (double l : grid.lambdas) {
    for (double r : grid.rhos) points.push_back({l, r});
  }
  const DesignSpec design = sens_design(grid.alpha, grid.beta, grid.w_star);
  design.validate();

  std::vector<std::vector<ScenarioRow>> blocks(points.size());
  ProgressTicker ticker(progress, points.size());
  parallel_for(points.size(), exec.threads, [&](std::size_t i) {
    const auto [lambda, rho] = points[i];
    auto& rows = blocks[i];

    const std::int64_t wf = wald_sample_size(lambda, grid.alpha, grid.beta, grid.w_star);
    rows.push_back({"wald_formula", lambda, rho, 0, wf, total_from_group(wf, rho, Group::disease)});

    for (std::size_t m = 0; m < std::size(kSimulated); ++m) {
      SimulationOptions opts;
      opts.reps = grid.reps;
      opts.seed = grid.seed;
      opts.scenario = i * std::size(kSimulated) + m;
      const auto ng = simulated_sample_size(kSimulated[m], lambda, grid.alpha, grid.beta, grid.w_star, opts);
      ScenarioRow row{to_string(kSimulated[m]), lambda, rho, 0, ng, std::nullopt};
      if (ng) row.n_total = total_from_group(*ng, rho, Group::disease);
      rows.push_back(row);
    }

    for (int av : grid.av_sizes) {
      AssuranceEngine engine(sens_priors(scenario_priors(lambda, rho, av)), design);
      rows.push_back({"bam", lambda, rho, av, std::nullopt, engine.min_sample_size(grid.cap)});
    }

    PriorSet flat = sens_priors(scenario_priors(lambda, rho, grid.flat_design_av_size));
    flat.analysis_sens = BetaParams(1.0, 1.0);
    AssuranceEngine engine(flat, design);
    rows.push_back({"bam_flat", lambda, rho, grid.flat_design_av_size, std::nullopt,
                    engine.min_sample_size(grid.cap)});
    ticker.tick();
  });

  std::vector<ScenarioRow> out;
  for (auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  return out;
}

double sample_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::domain_error("sample_quantile: no values");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

const char* const kStudyMethods[] = {"bam", "bam_flat", "wald", "clopper_pearson", "agresti_coull"};

struct AvData {
  double lambda, rho;
  std::int64_t diseased, true_pos;
};

// Draws (lambda, rho) and an analytical validity study; redraws the study
// until both estimates lie strictly inside (0, 1).
AvData draw_av(const WidthStudySpec& spec, std::int64_t rep) {
  CounterRng rng(spec.seed, static_cast<std::uint64_t>(rep), 0);
  boost::random::uniform_real_distribution<double> u_lambda(spec.lambda_lo, spec.lambda_hi);
  boost::random::uniform_real_distribution<double> u_rho(spec.rho_lo, spec.rho_hi);
  AvData d{u_lambda(rng), u_rho(rng), 0, 0};
  for (;;) {
    d.diseased = boost::random::binomial_distribution<std::int64_t>(spec.av_size, d.rho)(rng);
    d.true_pos = boost::random::binomial_distribution<std::int64_t>(d.diseased, d.lambda)(rng);
    const bool ok = d.diseased > 0 && d.diseased < spec.av_size && d.true_pos > 0 && d.true_pos < d.diseased;
    if (ok) return d;
  }
}

}  // namespace

WidthStudyResult width_study(const WidthStudySpec& spec, ExecOptions exec,
                             const ProgressFn& progress) {
  if (spec.reps < 1) throw std::domain_error("width_study: reps must be >= 1");
  if (spec.av_size < 2) throw std::domain_error("width_study: av_size must be >= 2");
  const DesignSpec design = sens_design(spec.alpha, spec.beta, spec.w_star);
  design.validate();
  constexpr std::size_t kMethods = std::size(kStudyMethods);

  std::vector<WidthSample> samples(static_cast<std::size_t>(spec.reps) * kMethods);
  ProgressTicker ticker(progress, static_cast<std::size_t>(spec.reps));
  parallel_for(static_cast<std::size_t>(spec.reps), exec.threads, [&](std::size_t i) {
    const auto rep = static_cast<std::int64_t>(i);
    const AvData av = draw_av(spec, rep);
    const double rho_hat = static_cast<double>(av.diseased) / spec.av_size;
    const double lambda_hat = static_cast<double>(av.true_pos) / static_cast<double>(av.diseased);

    PriorSet priors;
    priors.sens = posterior_update(BetaParams(1.0, 1.0), static_cast<double>(av.true_pos),
                                   static_cast<double>(av.diseased - av.true_pos));
    priors.prev = posterior_update(BetaParams(1.0, 1.0), static_cast<double>(av.diseased),
                                   static_cast<double>(spec.av_size - av.diseased));

    for (std::size_t m = 0; m < kMethods; ++m) {
      const std::string method = kStudyMethods[m];
      WidthSample& s = samples[i * kMethods + m];
      s.method = method;
      s.rep = rep;
      s.lambda = av.lambda;
      s.rho = av.rho;

      std::optional<IntervalMethod> freq;
      PriorSet method_priors = priors;
      if (method == "bam_flat") method_priors.analysis_sens = BetaParams(1.0, 1.0);
      if (m < 2) {
        s.n_total = AssuranceEngine(method_priors, design).min_sample_size(spec.cap);
      } else {
        freq = m == 2 ? IntervalMethod::wald : m == 3 ? IntervalMethod::clopper_pearson
                                                      : IntervalMethod::agresti_coull;
        SimulationOptions opts;
        opts.reps = spec.sim_reps;
        opts.seed = spec.seed;
        opts.scenario = (static_cast<std::uint64_t>(rep) << 8) | m;
        const auto ng = simulated_sample_size(*freq, lambda_hat, spec.alpha, spec.beta, spec.w_star, opts);
        if (ng) s.n_total = total_from_group(*ng, rho_hat, Group::disease);
      }
      if (!s.n_total) continue;

      CounterRng rng(spec.seed, static_cast<std::uint64_t>(rep), 1 + m);
      const std::int64_t diseased =
          boost::random::binomial_distribution<std::int64_t>(*s.n_total, av.rho)(rng);
      const std::int64_t true_pos =
          boost::random::binomial_distribution<std::int64_t>(diseased, av.lambda)(rng);
      if (freq) {
        s.width = diseased == 0 ? 1.0 : freq_interval(*freq, true_pos, diseased, spec.alpha).width();
      } else {
        s.width = interval_width(posterior_update(method_priors.analysis_sensitivity(), static_cast<double>(true_pos),
                                                  static_cast<double>(diseased - true_pos)),
                                 design.interval);
      }
    }
    ticker.tick();
  });

  WidthStudyResult result;
  for (std::size_t m = 0; m < kMethods; ++m) {
    WidthSummary sum;
    sum.method = kStudyMethods[m];
    std::vector<double> widths;
    for (std::size_t i = 0; i < static_cast<std::size_t>(spec.reps); ++i) {
      const auto& s = samples[i * kMethods + m];
      if (s.n_total) {
        widths.push_back(s.width);
      } else {
        ++sum.missing;
      }
    }
    sum.count = static_cast<std::int64_t>(widths.size());
    if (!widths.empty()) {
      sum.median = sample_quantile(widths, 0.5);
      sum.q25 = sample_quantile(widths, 0.25);
      sum.q70 = sample_quantile(widths, 0.70);
      sum.q75 = sample_quantile(widths, 0.75);
    }
    result.summary.push_back(sum);
  }
  result.samples = std::move(samples);
  return result;
}

}  // namespace assuredx
