// inference.hpp -- within-source bootstrap intervals. Each replicate
// resamples every source with replacement at its own size (the composite
// source shares carry no information, so they stay fixed) and reruns the
// whole estimation pipeline, nuisance refits included.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "extcomp/dataset.hpp"
#include "extcomp/estimators.hpp"

namespace extcomp {

struct BootstrapSpec {
  std::size_t replicates = 1000;  // >= 2
  std::uint64_t seed = 0;
  enum class Interval { Percentile, Normal } method = Interval::Percentile;
  double level = 0.95;  // in (0, 1)
  int threads = 1;
  // Replicates may fail (an empty resampled cell, say); the interval is
  // computed over successes as long as failures stay under this fraction.
  double max_failure_fraction = 0.02;
};

// Replicate estimates in replicate order; nullopt marks a failed replicate.
struct BootstrapResult {
  EstimateReport report;  // base-data estimate with the interval attached
  std::vector<std::optional<double>> replicate_points;
  std::size_t failures = 0;
};

// The callable sees the resampled dataset and returns the full report; for a
// contrast it evaluates both legs on the same resample.
using EstimateFn = std::function<EstimateReport(const CompositeDataset&)>;

BootstrapResult bootstrap(const CompositeDataset& data, const EstimateFn& fn,
                          const BootstrapSpec& spec);

// Deterministic resample of replicate `index` under `seed`.
CompositeDataset resample_within_source(const CompositeDataset& data,
                                        std::uint64_t seed, std::uint64_t index);

// Type-7 (linearly interpolated) quantile of a sorted vector.
double sorted_quantile(const std::vector<double>& sorted, double q);

}  // namespace extcomp
