// Acceptance run: one PASS/FAIL line per criterion, with the measured
// values. Lines starting with "info" are diagnostics and never fail.

#include <boost/random/gamma_distribution.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "assuredx/assurance.hpp"
#include "assuredx/beta.hpp"
#include "assuredx/comparators.hpp"
#include "assuredx/interval.hpp"
#include "assuredx/robustness.hpp"
#include "oracles.hpp"

using namespace assuredx;

namespace {

int failures = 0;

void verdict(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void info(const std::string& s) {
  std::printf("info  %s\n", s.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within(double v, double target, double tol) { return std::fabs(v - target) <= tol + 1e-12; }

PriorSet vap_priors() {
  PriorSet p;
  p.sens = posterior_update(BetaParams::from_mean_ess(0.9, 11), 16, 1);
  p.prev = posterior_update({12, 43}, 17, 55);
  p.spec = posterior_update({1, 1}, 20, 35);
  return p;
}

DesignSpec vap_design() {
  DesignSpec d;
  d.measure = Measure::sensitivity;
  d.w_star_sens = 0.16;
  d.interval = {0.05, Sidedness::two_sided};
  d.assurance_target = 0.8;
  return d;
}

const ExecOptions kAll{default_thread_count()};

void vap_sample_size() {
  const auto t0 = std::chrono::steady_clock::now();
  AssuranceEngine engine(vap_priors(), vap_design(), {1});
  const auto n = engine.min_sample_size();
  const double a150 = engine.assurance(150);
  const double secs = seconds_since(t0);
  const bool ok = n == 106 && within(a150, 0.88, 0.005) && secs < 10.0;
  verdict(ok, "vap-sample-size",
          fmt("n*=%lld (want 106), A(150)=%.4f (want 0.88+-0.005), %.2fs single-threaded (want <10s)",
              n ? static_cast<long long>(*n) : -1LL, a150, secs));
  if (n) {
    info(fmt("vap: A(n*-1)=%.6f A(n*)=%.6f A(105)=%.6f A(106)=%.6f", engine.assurance(*n - 1), engine.assurance(*n),
             engine.assurance(105), engine.assurance(106)));
  }
}

void posterior_intervals() {
  const BetaParams sens(76.9, 4.1);
  const double lo = beta_quantile(0.025, sens), hi = beta_quantile(0.975, sens);
  const ContingencyTable t(51, 55, 2, 42);
  const BetaParams flat = posterior_update({1, 1}, t.diseased(), t.non_diseased());
  const BetaParams inf = posterior_update(vap_priors().prev, t.diseased(), t.non_diseased());
  const double flo = beta_quantile(0.025, flat), fhi = beta_quantile(0.975, flat);
  const bool ok = within(lo, 0.893, 0.001) && within(hi, 0.986, 0.001) && within(flat.mean(), 0.355, 0.002) &&
                  within(flo, 0.281, 0.002) && within(fhi, 0.433, 0.002) && within(inf.mean(), 0.296, 0.002);
  verdict(ok, "posterior-intervals",
          fmt("sens (%.4f, %.4f); flat prevalence mean %.4f (%.4f, %.4f); informative mean %.4f", lo, hi,
              flat.mean(), flo, fhi, inf.mean()));
}

SensitivityReport scan(PriorSlot slot, double eps, int angles, std::int64_t n_eval) {
  return sensitivity_scan(vap_priors(), vap_design(), slot, eps, angles, n_eval, kDefaultSampleSizeCap, kAll);
}

void sensitivity_ranges() {
  const double eps = 0.00354;
  const std::int64_t n_eval = 106;
  // The sensitivity contour is a thin needle; 64 angles miss its tips.
  const auto sc = scan(PriorSlot::sens, eps, 128, n_eval);
  const auto pc = scan(PriorSlot::prev, eps, 128, n_eval);
  const auto sf = scan(PriorSlot::sens, eps, 256, n_eval);
  const auto pf = scan(PriorSlot::prev, eps, 256, n_eval);
  const bool stable = std::abs(sc.n_min - sf.n_min) < 2 && std::abs(sc.n_max - sf.n_max) < 2 &&
                      std::abs(pc.n_min - pf.n_min) < 2 && std::abs(pc.n_max - pf.n_max) < 2;
  const bool sens_ok = within(sc.a_min, 0.73, 0.02) && within(sc.a_max, 0.86, 0.02) &&
                       within(static_cast<double>(sc.n_min), 82, 6) && within(static_cast<double>(sc.n_max), 130, 6);
  const bool prev_ok = within(pc.a_min, 0.80, 0.01) && within(pc.a_max, 0.81, 0.01) &&
                       within(static_cast<double>(pc.n_min), 104, 2) && within(static_cast<double>(pc.n_max), 108, 2);
  verdict(sens_ok && prev_ok && stable, "prior-sensitivity-ranges",
          fmt("eps=%.5f n_eval=%lld angles=128: sens A [%.3f, %.3f] n* [%lld, %lld]; prev A [%.3f, %.3f] "
              "n* [%lld, %lld]; 256-angle n* sens [%lld, %lld] prev [%lld, %lld]",
              eps, static_cast<long long>(n_eval), sc.a_min, sc.a_max, static_cast<long long>(sc.n_min),
              static_cast<long long>(sc.n_max), pc.a_min, pc.a_max, static_cast<long long>(pc.n_min),
              static_cast<long long>(pc.n_max), static_cast<long long>(sf.n_min),
              static_cast<long long>(sf.n_max), static_cast<long long>(pf.n_min),
              static_cast<long long>(pf.n_max)));
  const double eps_shift = epsilon_from_normal_shift(0.1);
  const auto s = scan(PriorSlot::sens, eps_shift, 128, n_eval);
  const auto p = scan(PriorSlot::prev, eps_shift, 128, n_eval);
  info(fmt("prior sensitivity at eps=%.6f (normal mean shift 0.1): sens A [%.3f, %.3f] n* [%lld, %lld]; "
           "prev A [%.3f, %.3f] n* [%lld, %lld]",
           eps_shift, s.a_min, s.a_max, static_cast<long long>(s.n_min), static_cast<long long>(s.n_max), p.a_min,
           p.a_max, static_cast<long long>(p.n_min), static_cast<long long>(p.n_max)));
}

void conflict_percentiles() {
  const auto prev = prior_predictive_check(53, 150, {29, 98});
  const auto sens = prior_predictive_check(51, 53, vap_priors().sens);
  const bool ok = prev.percentile >= 0.985 && prev.percentile <= 0.995 && sens.percentile >= 0.73 &&
                  sens.percentile <= 0.79;
  verdict(ok, "conflict-percentiles",
          fmt("prevalence %.4f (%s), sensitivity %.4f (%s)", prev.percentile, to_string(prev.flag).c_str(),
              sens.percentile, to_string(sens.flag).c_str()));
}

void low_prevalence_sizes() {
  const double rhos[] = {0.1, 0.05, 0.01};
  const std::int64_t want[] = {681, 1643, 2770};
  std::optional<std::int64_t> got[3];
  parallel_for(3, kAll.threads, [&](std::size_t i) {
    const auto sp = scenario_priors(0.9, rhos[i], 50);
    PriorSet p;
    p.sens = {sp.sens_a, sp.sens_b};
    p.prev = {sp.prev_a, sp.prev_b};
    DesignSpec d;
    d.w_star_sens = 0.18;
    got[i] = min_sample_size(p, d, 100000);
  });
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    const long long g = got[i] ? static_cast<long long>(*got[i]) : -1LL;
    ok = ok && got[i] && std::fabs(static_cast<double>(g - want[i])) <= 0.02 * want[i];
    detail += fmt("rho=%.2f n*=%lld (want %lld+-2%%)  ", rhos[i], g, static_cast<long long>(want[i]));
  }
  verdict(ok, "low-prevalence-sizes", detail);
}

// Assurance by enumerating every outcome.
double brute_force(std::int64_t n_t, const PriorSet& p, const DesignSpec& d) {
  const bool two = d.interval.sidedness == Sidedness::two_sided;
  double total = 0.0;
  for (std::int64_t m = 0; m <= n_t; ++m) {
    double term = oracle::bb_pmf(m, n_t, p.prev.a, p.prev.b);
    if (d.measure != Measure::specificity) {
      const BetaParams an = p.analysis_sensitivity();
      term *= oracle::conditional_brute(m, p.sens.a, p.sens.b, an.a, an.b, d.w_star_sens, d.interval.alpha, two);
    }
    if (d.measure != Measure::sensitivity) {
      const BetaParams an = p.analysis_specificity();
      term *= oracle::conditional_brute(n_t - m, p.spec.a, p.spec.b, an.a, an.b, *d.w_star_spec, d.interval.alpha,
                                        two);
    }
    total += term;
  }
  return total;
}

void oracle_equivalence() {
  std::mt19937_64 gen(20240601);
  std::uniform_real_distribution<double> u(0.0, 3.5), wd(0.12, 0.45);
  double worst = 0.0;
  int cases = 0;
  for (int c = 0; c < 6; ++c) {
    PriorSet p = c == 0 ? vap_priors() : PriorSet{};
    if (c > 0) {
      p.sens = {std::exp(u(gen)), std::exp(u(gen))};
      p.spec = {std::exp(u(gen)), std::exp(u(gen))};
      p.prev = {std::exp(u(gen)), std::exp(u(gen))};
      if (c % 2) p.analysis_sens = BetaParams(1, 1);
    }
    DesignSpec d = vap_design();
    if (c > 0) d.w_star_sens = wd(gen);
    d.w_star_spec = c > 0 ? wd(gen) : 0.2;
    if (c == 5) d.interval = {0.1, Sidedness::one_sided_lower};
    for (Measure m : {Measure::sensitivity, Measure::specificity, Measure::both}) {
      d.measure = m;
      AssuranceEngine engine(p, d);
      for (std::int64_t n = 1; n <= 60; ++n) {
        worst = std::max(worst, std::fabs(engine.assurance(n) - brute_force(n, p, d)));
        ++cases;
      }
    }
  }
  const std::int64_t reps = 100000;
  double worst_z = 0.0;
  std::vector<double> zs(20);
  std::vector<std::tuple<PriorSet, DesignSpec, std::int64_t>> configs;
  for (int i = 0; i < 20; ++i) {
    PriorSet p;
    p.sens = {std::exp(u(gen)), std::exp(u(gen))};
    p.spec = {std::exp(u(gen)), std::exp(u(gen))};
    p.prev = {std::exp(u(gen)), std::exp(u(gen))};
    DesignSpec d;
    d.measure = static_cast<Measure>(i % 3);
    d.w_star_sens = wd(gen);
    d.w_star_spec = wd(gen);
    configs.emplace_back(p, d, 10 + static_cast<std::int64_t>(gen() % 300));
  }
  parallel_for(configs.size(), kAll.threads, [&](std::size_t i) {
    const auto& [p, d, n] = configs[i];
    const double exact = AssuranceEngine(p, d).assurance(n);
    const double mc = monte_carlo_assurance(n, p, d, reps, 77 + i);
    const double se = std::sqrt(std::max(exact * (1 - exact), 1e-6) / reps);
    zs[i] = std::fabs(mc - exact) / se;
  });
  for (double z : zs) worst_z = std::max(worst_z, z);
  verdict(worst <= 1e-10 && worst_z <= 3.0, "oracle-equivalence",
          fmt("enumeration: %d cases, max |diff| %.2e (want <=1e-10); Monte Carlo 1e5 reps: max |z| %.2f over 20 "
              "configurations (want <=3)",
              cases, worst, worst_z));
}

void comparator_grid() {
  GridSpec g;  // 4x4 grid, av sizes 25/50/75
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = scenario_grid(g, kAll);
  const double secs = seconds_since(t0);
  using Key = std::pair<double, double>;
  std::map<Key, std::map<std::string, std::int64_t>> freq;
  std::map<Key, std::map<int, std::int64_t>> bam;
  std::map<Key, std::int64_t> flat;
  int missing = 0;
  for (const auto& r : rows) {
    if (!r.n_total) {
      ++missing;
      continue;
    }
    const Key k{r.lambda, r.rho};
    if (r.method == "bam") {
      bam[k][r.av_size] = *r.n_total;
    } else if (r.method == "bam_flat") {
      flat[k] = *r.n_total;
    } else {
      freq[k][r.method] = *r.n_total;
    }
  }
  int cp_violations = 0, monotone_violations = 0, high_prev_violations = 0, high_prev_checks = 0,
      flat_below = 0;
  for (const auto& [k, m] : freq) {
    if (m.at("clopper_pearson") < m.at("agresti_coull") || m.at("clopper_pearson") < m.at("wald")) ++cp_violations;
    const auto& b = bam[k];
    if (b.at(25) < b.at(50) || b.at(50) < b.at(75)) ++monotone_violations;
    if (k.second >= 0.5) {
      for (const auto& [method, n] : m) {
        for (const auto& [av, nb] : b) {
          ++high_prev_checks;
          if (n <= nb) {
            ++high_prev_violations;
            info(fmt("grid: lambda=%.2f rho=%.3f %s=%lld not above bam(av=%d)=%lld", k.first, k.second,
                     method.c_str(), static_cast<long long>(n), av, static_cast<long long>(nb)));
          }
        }
      }
      for (const auto& [method, n] : m) {
        if (flat.count(k) && n <= flat[k]) ++flat_below;
      }
    }
  }
  verdict(missing == 0 && cp_violations == 0 && monotone_violations == 0 && high_prev_violations == 0 &&
              freq.size() == 16,
          "comparator-grid-structure",
          fmt("%zu points in %.1fs; CP below AC/Wald at %d points; BAM increasing in prior size at %d points; "
              "frequentist not above BAM in %d of %d high-prevalence comparisons; %d missing",
              freq.size(), secs, cp_violations, monotone_violations, high_prev_violations, high_prev_checks,
              missing));
  info(fmt("grid: frequentist sizes not above the flat-analysis-prior BAM size in %d high-prevalence comparisons",
           flat_below));
}

void width_studies() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (double w : {0.14, 0.18, 0.22}) {
    for (double beta : {0.5, 0.8}) {
      WidthStudySpec s;
      s.w_star = w;
      s.beta = beta;
      s.reps = 100;
      const auto res = width_study(s, kAll);
      for (const auto& m : res.summary) {
        const bool pass = m.count > 0 && (beta == 0.5 ? within(m.median, w, 0.03) : w >= m.q70);
        info(fmt("widths w*=%.2f beta=%.1f %-16s median %.4f q70 %.4f q75 %.4f n=%lld missing=%lld %s", w, beta,
                 m.method.c_str(), m.median, m.q70, m.q75, static_cast<long long>(m.count),
                 static_cast<long long>(m.missing), pass ? "ok" : "MISS"));
        if (!pass) {
          ok = false;
          detail += fmt("[w*=%.2f beta=%.1f %s %s=%.4f] ", w, beta, m.method.c_str(), beta == 0.5 ? "median" : "q70",
                        beta == 0.5 ? m.median : m.q70);
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 300.0;
  verdict(ok, "width-study", fmt("%.1fs (want <300s); %s", secs, detail.empty() ? "all methods on target" : detail.c_str()));
}

void property_suites() {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-1.0, 5.0);
  double norm_err = 0.0, inv_err = 0.0;
  int unimodal_bad = 0, flat_points = 0;
  for (int i = 0; i < 50; ++i) {
    const BetaParams p(std::exp(u(gen)), std::exp(u(gen)));
    const std::int64_t n = static_cast<std::int64_t>(gen() % 2000);
    double total = 0.0;
    for (std::int64_t y = 0; y <= n; ++y) total += std::exp(beta_binomial_log_pmf(y, n, p));
    norm_err = std::max(norm_err, std::fabs(total - 1.0));
    for (int k = 1; k < 100; ++k) {
      const double x = k / 100.0;
      const double c = beta_cdf(x, p);
      if (c <= 0.0 || c >= 1.0) continue;
      const double q = beta_quantile(c, p);
      // Where the cdf is flat to within rounding of c every point of the
      // flat stretch is an exact inverse.
      if (std::fabs(q - x) > 1e-8 && std::fabs(beta_cdf(q, p) - c) <= 4e-16) {
        ++flat_points;
        continue;
      }
      inv_err = std::max(inv_err, std::fabs(q - x));
    }
    const auto w = width_over_counts(p, 1 + n % 400, {});
    const auto peak = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    for (std::size_t y = 1; y < w.size(); ++y) {
      if (y <= peak ? w[y] < w[y - 1] - 1e-12 : w[y] > w[y - 1] + 1e-12) {
        ++unimodal_bad;
        break;
      }
    }
  }
  double worst_ks = 0.0;
  std::uniform_real_distribution<double> ud(-1.0, 3.5);
  for (int k = 0; k < 20; ++k) {
    const DirichletParams d(std::exp(ud(gen)), std::exp(ud(gen)), std::exp(ud(gen)), std::exp(ud(gen)));
    const BetaParams margin = dirichlet_margins(d).sensitivity;
    boost::random::gamma_distribution<double> g11(d.alpha11), g21(d.alpha21);
    std::vector<double> xs(100000);
    for (auto& x : xs) {
      const double a = g11(gen), b = g21(gen);
      x = a / (a + b);
    }
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double f = beta_cdf(std::clamp(xs[i], 0.0, 1.0), margin);
      ks = std::max({ks, f - i / n, (i + 1) / n - f});
    }
    worst_ks = std::max(worst_ks, ks);
  }
  const auto curve = assurance_curve(200, vap_priors(), vap_design(), kAll);
  double worst_drop = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    worst_drop = std::max(worst_drop, curve.points[i - 1].assurance - curve.points[i].assurance);
  }
  const bool ok = norm_err <= 1e-10 && inv_err <= 1e-8 && unimodal_bad == 0 && worst_ks < 0.02 &&
                  worst_drop <= 1e-12;
  verdict(ok, "property-suites",
          fmt("normalisation err %.1e; quantile inversion err %.1e (%d points on flat cdf stretches); non-unimodal width profiles %d; Dirichlet KS "
              "max %.4f; largest VAP curve drop %.2e",
              norm_err, inv_err, flat_points, unimodal_bad, worst_ks, worst_drop));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  vap_sample_size();
  posterior_intervals();
  sensitivity_ranges();
  conflict_percentiles();
  low_prevalence_sizes();
  oracle_equivalence();
  comparator_grid();
  width_studies();
  property_suites();
  std::printf("%d criteria failed, %.1fs total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
