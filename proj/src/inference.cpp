#include "extcomp/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "extcomp/rng.hpp"

namespace extcomp {

namespace {

// Acklam's rational approximation to the standard normal quantile, accurate
// to ~1e-9 over (0,1); plenty for interval endpoints.
double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > 1 - plow) return -normal_quantile(1 - p);
  double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

}  // namespace

double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(ErrorKind::EmptySubset, "quantile of nothing");
  if (sorted.size() == 1) return sorted.front();
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1 - frac) + sorted[hi] * frac;
}

CompositeDataset resample_within_source(const CompositeDataset& data,
                                        std::uint64_t seed,
                                        std::uint64_t index) {
  CompositeDataset out;
  out.schema = data.schema;
  out.treatment_sets = data.treatment_sets;
  out.outcome_kind = data.outcome_kind;
  out.records.reserve(data.records.size());

  std::map<int, std::vector<std::size_t>> by_source;
  for (std::size_t i = 0; i < data.records.size(); ++i)
    by_source[data.records[i].s].push_back(i);

  CounterRng rng(CounterRng::derive(seed, index));
  for (const auto& [s, idx] : by_source)  // map order keeps draws schedule-free
    for (std::size_t k = 0; k < idx.size(); ++k)
      out.records.push_back(data.records[idx[rng.next_below(idx.size())]]);
  return out;
}

BootstrapResult bootstrap(const CompositeDataset& data, const EstimateFn& fn,
                          const BootstrapSpec& spec) {
  if (spec.replicates < 2)
    throw Error(ErrorKind::InvalidSpec, "bootstrap needs at least 2 replicates");
  if (!(spec.level > 0.0 && spec.level < 1.0))
    throw Error(ErrorKind::InvalidSpec, "confidence level must lie in (0,1)");

  BootstrapResult result;
  result.report = fn(data);
  result.replicate_points.assign(spec.replicates, std::nullopt);

  auto run_replicate = [&](std::size_t i) {
    try {
      CompositeDataset resampled = resample_within_source(data, spec.seed, i);
      result.replicate_points[i] = fn(resampled).point;
    } catch (const Error&) {
      // counted below; slot stays empty
    }
  };

  int threads = std::max(1, spec.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < spec.replicates; ++i) run_replicate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < spec.replicates;
             i = next.fetch_add(1))
          run_replicate(i);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<double> points;
  points.reserve(spec.replicates);
  for (const auto& p : result.replicate_points) {
    if (p) points.push_back(*p);
    else ++result.failures;
  }
  double failure_frac = static_cast<double>(result.failures) /
                        static_cast<double>(spec.replicates);
  if (failure_frac > spec.max_failure_fraction || points.empty())
    throw Error(ErrorKind::TooManyReplicateFailures,
                std::to_string(result.failures) + " of " +
                    std::to_string(spec.replicates) +
                    " bootstrap replicates failed");
  if (result.failures > 0)
    result.report.warnings.push_back(
        std::to_string(result.failures) + " bootstrap replicate(s) failed; "
        "interval computed over the remainder");

  result.report.interval_level = spec.level;
  if (spec.method == BootstrapSpec::Interval::Percentile) {
    std::sort(points.begin(), points.end());
    double alpha = (1.0 - spec.level) / 2.0;
    result.report.interval = {sorted_quantile(points, alpha),
                              sorted_quantile(points, 1.0 - alpha)};
  } else {
    double mean = 0;
    for (double p : points) mean += p;
    mean /= static_cast<double>(points.size());
    double ss = 0;
    for (double p : points) ss += (p - mean) * (p - mean);
    double sd = points.size() > 1
                    ? std::sqrt(ss / static_cast<double>(points.size() - 1))
                    : 0.0;
    double z = normal_quantile(1.0 - (1.0 - spec.level) / 2.0);
    result.report.interval = {result.report.point - z * sd,
                              result.report.point + z * sd};
  }
  return result;
}

}  // namespace extcomp
