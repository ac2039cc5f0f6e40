#pragma once

#include <vector>

namespace cgrep {

/// One row of a right-continuous survival step function. Every observed time
/// gets a point; censored observations carry a censor mark and leave the
/// survival value unchanged.
struct CurvePoint {
  double time = 0.0;
  double survival = 1.0;
  int n_at_risk = 0;
  bool censor_mark = false;
};

/// Non-increasing step estimate of S(t) with S(0-) = 1.
struct StepSurvivalCurve {
  std::vector<CurvePoint> points;  // sorted by time

  /// S(t): value of the last point with time <= t, or 1 before the first.
  double at(double t) const;
  /// Largest observed time (0 for an empty curve).
  double max_time() const;
  std::size_t censor_mark_count() const;
};

}  // namespace cgrep
