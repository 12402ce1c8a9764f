#include "covact/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "covact/errors.hpp"

namespace covact {

namespace {
constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();
}

DecisionResult decide(std::span<const double> a, double threshold) {
  if (!(threshold >= 0.0) || !(threshold <= 1.0))
    throw DomainViolation("decision threshold must lie in [0,1]");
  DecisionResult out;
  out.threshold = threshold;
  out.decisions.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.decisions[i] = a[i] > threshold ? 1 : 0;
  return out;
}

ErrorCounts error_counts(const DecisionResult& dec, const GroundTruth& truth) {
  if (dec.decisions.size() != truth.active.size())
    throw DimensionMismatch("decision and truth lengths differ");
  ErrorCounts c;
  for (std::size_t i = 0; i < truth.active.size(); ++i) {
    if (truth.active[i]) {
      ++c.actives;
      if (!dec.decisions[i]) ++c.missed;
    } else {
      ++c.inactives;
      if (dec.decisions[i]) ++c.false_alarms;
    }
  }
  return c;
}

ErrorRates error_rates(const DecisionResult& dec, const GroundTruth& truth) {
  const ErrorCounts c = error_counts(dec, truth);
  ErrorRates r;
  r.pm = c.actives > 0 ? static_cast<double>(c.missed) / c.actives : kAbsent;
  r.pfa = c.inactives > 0 ? static_cast<double>(c.false_alarms) / c.inactives : kAbsent;
  return r;
}

std::vector<RocPoint> roc_sweep(std::span<const double> a, const GroundTruth& truth,
                                std::span<const double> thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw DomainViolation("roc thresholds must be ascending");
  std::vector<RocPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const ErrorRates r = error_rates(decide(a, t), truth);
    out.push_back({t, r.pm, r.pfa});
  }
  return out;
}

ErrorRates aggregate_mean(std::span<const ErrorRates> rates) {
  double pm_sum = 0.0, pfa_sum = 0.0;
  int pm_n = 0, pfa_n = 0;
  for (const ErrorRates& r : rates) {
    if (!std::isnan(r.pm)) {
      pm_sum += r.pm;
      ++pm_n;
    }
    if (!std::isnan(r.pfa)) {
      pfa_sum += r.pfa;
      ++pfa_n;
    }
  }
  ErrorRates out;
  out.pm = pm_n > 0 ? pm_sum / pm_n : kAbsent;
  out.pfa = pfa_n > 0 ? pfa_sum / pfa_n : kAbsent;
  return out;
}

ErrorRates aggregate_pooled(std::span<const ErrorCounts> counts) {
  ErrorCounts total;
  for (const ErrorCounts& c : counts) {
    total.missed += c.missed;
    total.actives += c.actives;
    total.false_alarms += c.false_alarms;
    total.inactives += c.inactives;
  }
  ErrorRates out;
  out.pm = total.actives > 0 ? static_cast<double>(total.missed) / total.actives : kAbsent;
  out.pfa = total.inactives > 0
                ? static_cast<double>(total.false_alarms) / total.inactives
                : kAbsent;
  return out;
}

}  // namespace covact
