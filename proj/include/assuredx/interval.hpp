#pragma once

// Posterior interval widths and the critical sets of success counts that
// meet a width target at a fixed group size.

#include <cstdint>
#include <optional>
#include <vector>

#include "assuredx/beta.hpp"

namespace assuredx {

enum class Sidedness {
  two_sided,        // upper minus lower limit of the equal-tailed interval
  one_sided_lower,  // posterior median minus lower limit
};

struct IntervalSpec {
  double alpha = 0.05;
  Sidedness sidedness = Sidedness::two_sided;

  IntervalSpec() = default;
  IntervalSpec(double alpha_, Sidedness sidedness_);
};

// Success counts y in 0..group_size that meet the width target are exactly
// those with y <= c1 or y >= c2.
//   empty set:    c1 = -1, c2 = group_size + 1
//   complete set: c1 = group_size, c2 = group_size + 1
struct CriticalSet {
  std::int64_t c1 = -1;
  std::int64_t c2 = 1;
  std::int64_t group_size = 0;

  static CriticalSet empty(std::int64_t group_size);
  static CriticalSet complete(std::int64_t group_size);

  bool contains(std::int64_t y) const { return y <= c1 || y >= c2; }
  bool is_empty() const { return c1 < 0 && c2 > group_size; }
  bool is_complete() const { return c1 >= group_size || c2 <= 0; }
  std::int64_t size() const;

  friend bool operator==(const CriticalSet&, const CriticalSet&) = default;
};

double interval_width(const BetaParams& posterior, const IntervalSpec& spec);

// W(y) for y = 0..group_size under the fully pooled posterior.
std::vector<double> width_over_counts(const BetaParams& prior, std::int64_t group_size,
                                      const IntervalSpec& spec);

// Full scan of W(y). Membership uses W(y) <= w_star.
CriticalSet critical_set_scan(const BetaParams& prior, std::int64_t group_size, double w_star,
                              const IntervalSpec& spec);

// Locates the peak of W and bisects either flank. Relies on the failing
// counts forming one contiguous run around the peak.
CriticalSet critical_set_bisect(const BetaParams& prior, std::int64_t group_size, double w_star,
                                const IntervalSpec& spec);

// Critical sets for a run of group sizes. Each call seeds the peak and the
// two boundaries from the previous result and walks them locally, which is
// a handful of width evaluations per group size when sizes are consecutive.
// Falls back to the bisection search when the walk does not settle.
class CriticalSetTracker {
 public:
  CriticalSetTracker(BetaParams prior, double w_star, IntervalSpec spec);
  CriticalSet next(std::int64_t group_size);

 private:
  BetaParams prior_;
  double w_star_;
  IntervalSpec spec_;
  std::optional<CriticalSet> last_;
  std::optional<std::int64_t> peak_;
};

// Scan up to kScanLimit, bisection beyond.
inline constexpr std::int64_t kScanLimit = 512;
CriticalSet critical_set(const BetaParams& prior, std::int64_t group_size, double w_star,
                         const IntervalSpec& spec);

}  // namespace assuredx
