#include "assuredx/interval.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <unordered_map>

namespace assuredx {

IntervalSpec::IntervalSpec(double alpha_, Sidedness sidedness_)
    : alpha(alpha_), sidedness(sidedness_) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("IntervalSpec: alpha must lie in (0, 1)");
}

CriticalSet CriticalSet::empty(std::int64_t group_size) { return {-1, group_size + 1, group_size}; }

CriticalSet CriticalSet::complete(std::int64_t group_size) {
  return {group_size, group_size + 1, group_size};
}

std::int64_t CriticalSet::size() const {
  if (is_complete()) return group_size + 1;
  const std::int64_t lower = c1 + 1;
  const std::int64_t upper = group_size - c2 + 1;
  return (lower > 0 ? lower : 0) + (upper > 0 ? upper : 0);
}

double interval_width(const BetaParams& posterior, const IntervalSpec& spec) {
  if (spec.sidedness == Sidedness::two_sided) {
    return beta_quantile(1.0 - spec.alpha / 2.0, posterior) - beta_quantile(spec.alpha / 2.0, posterior);
  }
  return beta_quantile(0.5, posterior) - beta_quantile(spec.alpha, posterior);
}

namespace {

double width_at(const BetaParams& prior, std::int64_t group_size, std::int64_t y,
                const IntervalSpec& spec) {
  return interval_width(
      BetaParams(prior.a + static_cast<double>(y), prior.b + static_cast<double>(group_size - y)), spec);
}

void require_target(double w_star) {
  if (!(w_star > 0.0 && w_star < 1.0)) throw std::domain_error("critical_set: w_star must lie in (0, 1)");
}

}  // namespace

std::vector<double> width_over_counts(const BetaParams& prior, std::int64_t group_size,
                                      const IntervalSpec& spec) {
  if (group_size < 0) throw std::domain_error("width_over_counts: group_size must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(group_size) + 1);
  for (std::int64_t y = 0; y <= group_size; ++y) {
    out[static_cast<std::size_t>(y)] = width_at(prior, group_size, y, spec);
  }
  return out;
}

CriticalSet critical_set_scan(const BetaParams& prior, std::int64_t group_size, double w_star,
                              const IntervalSpec& spec) {
  require_target(w_star);
  const auto widths = width_over_counts(prior, group_size, spec);
  std::int64_t first_fail = -1;
  std::int64_t last_fail = -1;
  for (std::int64_t y = 0; y <= group_size; ++y) {
    if (widths[static_cast<std::size_t>(y)] > w_star) {
      if (first_fail < 0) first_fail = y;
      last_fail = y;
    }
  }
  if (first_fail < 0) return CriticalSet::complete(group_size);
  for (std::int64_t y = first_fail; y <= last_fail; ++y) {
    if (widths[static_cast<std::size_t>(y)] <= w_star) {
      throw std::logic_error("critical_set: failing counts are not contiguous");
    }
  }
  return {first_fail - 1, last_fail + 1, group_size};
}

namespace {

// Width evaluations memoised for one group size.
class WidthProbe {
 public:
  WidthProbe(const BetaParams& prior, std::int64_t group_size, const IntervalSpec& spec)
      : prior_(prior), group_size_(group_size), spec_(spec) {}

  double operator()(std::int64_t y) {
    auto it = memo_.find(y);
    if (it != memo_.end()) return it->second;
    const double w = width_at(prior_, group_size_, y, spec_);
    memo_.emplace(y, w);
    return w;
  }

 private:
  BetaParams prior_;
  std::int64_t group_size_;
  IntervalSpec spec_;
  std::unordered_map<std::int64_t, double> memo_;
};

constexpr std::int64_t kMaxWalk = 48;

std::int64_t ternary_peak(WidthProbe& W, std::int64_t lo, std::int64_t hi) {
  while (hi - lo > 2) {
    const std::int64_t m1 = lo + (hi - lo) / 3;
    const std::int64_t m2 = hi - (hi - lo) / 3;
    if (W(m1) < W(m2)) {
      lo = m1 + 1;
    } else {
      hi = m2;
    }
  }
  std::int64_t peak = lo;
  for (std::int64_t y = lo + 1; y <= hi; ++y) {
    if (W(y) > W(peak)) peak = y;
  }
  return peak;
}

// Hill climb from a guess; falls back to ternary search after kMaxWalk steps.
std::int64_t find_peak(WidthProbe& W, std::int64_t group_size, std::optional<std::int64_t> guess) {
  if (!guess) return ternary_peak(W, 0, group_size);
  std::int64_t p = std::clamp<std::int64_t>(*guess, 0, group_size);
  for (std::int64_t steps = 0; steps < kMaxWalk; ++steps) {
    if (p + 1 <= group_size && W(p + 1) > W(p)) {
      ++p;
    } else if (p - 1 >= 0 && W(p - 1) > W(p)) {
      --p;
    } else {
      return p;
    }
  }
  return ternary_peak(W, 0, group_size);
}

// Smallest y in [lo, hi] with W(y) > w_star, given W(hi) > w_star and W
// rising on [lo, hi].
std::int64_t first_failing(WidthProbe& W, std::int64_t lo, std::int64_t hi, double w_star,
                           std::optional<std::int64_t> guess) {
  if (guess) {
    std::int64_t f = std::clamp(*guess, lo, hi);
    for (std::int64_t steps = 0; steps < kMaxWalk; ++steps) {
      if (W(f) > w_star) {
        if (f == lo || W(f - 1) <= w_star) return f;
        --f;
      } else {
        ++f;  // f < hi since W(hi) > w_star
      }
    }
  }
  if (W(lo) > w_star) return lo;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (W(mid) > w_star) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// Largest y in [lo, hi] with W(y) > w_star, given W(lo) > w_star and W
// falling on [lo, hi].
std::int64_t last_failing(WidthProbe& W, std::int64_t lo, std::int64_t hi, double w_star,
                          std::optional<std::int64_t> guess) {
  if (guess) {
    std::int64_t l = std::clamp(*guess, lo, hi);
    for (std::int64_t steps = 0; steps < kMaxWalk; ++steps) {
      if (W(l) > w_star) {
        if (l == hi || W(l + 1) <= w_star) return l;
        ++l;
      } else {
        --l;
      }
    }
  }
  if (W(hi) > w_star) return hi;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (W(mid) > w_star) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

struct Located {
  CriticalSet set;
  std::int64_t peak;
};

Located locate(const BetaParams& prior, std::int64_t group_size, double w_star,
               const IntervalSpec& spec, std::optional<std::int64_t> peak_guess,
               std::optional<std::int64_t> first_guess, std::optional<std::int64_t> last_guess) {
  WidthProbe W(prior, group_size, spec);
  const std::int64_t peak = find_peak(W, group_size, peak_guess);
  if (W(peak) <= w_star) return {CriticalSet::complete(group_size), peak};
  const std::int64_t first = first_failing(W, 0, peak, w_star, first_guess);
  const std::int64_t last = last_failing(W, peak, group_size, w_star, last_guess);
  return {{first - 1, last + 1, group_size}, peak};
}

}  // namespace

CriticalSet critical_set_bisect(const BetaParams& prior, std::int64_t group_size, double w_star,
                                const IntervalSpec& spec) {
  require_target(w_star);
  if (group_size < 0) throw std::domain_error("critical_set: group_size must be >= 0");
  return locate(prior, group_size, w_star, spec, std::nullopt, std::nullopt, std::nullopt).set;
}

CriticalSetTracker::CriticalSetTracker(BetaParams prior, double w_star, IntervalSpec spec)
    : prior_(prior), w_star_(w_star), spec_(spec) {
  require_target(w_star);
}

CriticalSet CriticalSetTracker::next(std::int64_t group_size) {
  if (group_size < 0) throw std::domain_error("critical_set: group_size must be >= 0");
  std::optional<std::int64_t> peak_guess;
  std::optional<std::int64_t> first_guess;
  std::optional<std::int64_t> last_guess;
  if (peak_) {
    peak_guess = *peak_;
    if (last_ && !last_->is_complete()) {
      first_guess = last_->c1 + 1;
      last_guess = last_->c2 - 1 + (group_size - last_->group_size);
    }
  }
  const Located found = locate(prior_, group_size, w_star_, spec_, peak_guess, first_guess, last_guess);
  last_ = found.set;
  peak_ = found.peak;
  return found.set;
}

CriticalSet critical_set(const BetaParams& prior, std::int64_t group_size, double w_star,
                         const IntervalSpec& spec) {
  if (group_size <= kScanLimit) return critical_set_scan(prior, group_size, w_star, spec);
  return critical_set_bisect(prior, group_size, w_star, spec);
}

}  // namespace assuredx
