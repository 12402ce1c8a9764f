// Hard decisions from soft activity estimates, missed-detection / false-alarm
// rates against ground truth, and threshold sweeps for trade-off curves.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "covact/scenario.hpp"

namespace covact {

struct DecisionResult {
  std::vector<std::uint8_t> decisions;  // decisions[i] = 1 iff a[i] > threshold
  double threshold = 0.5;
};

// rates are NaN when their denominator class is empty (no actives / no
// inactives in the truth)
struct ErrorRates {
  double pm = 0.0;   // missed actives / actives
  double pfa = 0.0;  // false positives / inactives
};

struct ErrorCounts {
  std::int64_t missed = 0;
  std::int64_t actives = 0;
  std::int64_t false_alarms = 0;
  std::int64_t inactives = 0;
};

struct RocPoint {
  double threshold = 0.0;
  double pm = 0.0;
  double pfa = 0.0;
};

// strict-greater thresholding: threshold 1.0 yields no positives and 0.0
// flags every strictly positive score
DecisionResult decide(std::span<const double> a, double threshold);

ErrorCounts error_counts(const DecisionResult& dec, const GroundTruth& truth);
ErrorRates error_rates(const DecisionResult& dec, const GroundTruth& truth);

// one (threshold, pm, pfa) per threshold; thresholds must be ascending, so pm
// is nondecreasing and pfa nonincreasing along the sweep
std::vector<RocPoint> roc_sweep(std::span<const double> a, const GroundTruth& truth,
                                std::span<const double> thresholds);

// mean of per-trial rates, skipping NaN entries (all-NaN stays NaN)
ErrorRates aggregate_mean(std::span<const ErrorRates> rates);

// pooled-count aggregation across trials
ErrorRates aggregate_pooled(std::span<const ErrorCounts> counts);

}  // namespace covact
