#include "cfcs/metrics.hpp"

#include <cmath>
#include <cstring>

#include "cfcs/error.hpp"

namespace cfcs {

double recovery_error(const Signald& truth, const VectorXd& estimate, double sigma) {
  if (truth.size() != estimate.size()) {
    throw UsageError("estimate length " + std::to_string(estimate.size()) +
                     " does not match truth length " + std::to_string(truth.size()));
  }
  double d = 0.0;
  if (truth.kind == SignalKind::kSparse) {
    if (!(sigma > 0.0)) throw UsageError("ideal recovery error needs sigma > 0");
    const double s2 = sigma * sigma;
    d = truth.values.array().square().min(s2).sum();
  } else {
    d = truth.values.squaredNorm();
  }
  if (!(d > 0.0)) throw UsageError("recovery error undefined: normalizer d(x) is zero");
  return std::sqrt((truth.values - estimate).squaredNorm() / d);
}

ErrorSummary aggregate_error(std::span<const double> errors) {
  if (errors.empty()) throw UsageError("aggregate error of an empty list");
  ErrorSummary out;
  out.count = errors.size();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double e : errors) {
    if (!std::isfinite(e)) throw UsageError("aggregate error requires finite values");
    sum += e;
    sum_sq += e * e;
  }
  const double n = static_cast<double>(errors.size());
  out.rms = std::sqrt(sum_sq / n);
  if (errors.size() > 1) {
    const double mean = sum / n;
    double var = 0.0;
    for (double e : errors) var += (e - mean) * (e - mean);
    out.stddev = std::sqrt(var / (n - 1.0));
  }
  return out;
}

double recovery_index(Index s, Index m, Index n) {
  if (m < 1 || n < 1) throw UsageError("recovery index needs m, n >= 1");
  return static_cast<double>(s) / static_cast<double>(m) * std::log(static_cast<double>(n));
}

std::uint64_t scenario_digest(const Problemd& problem) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t dims[2] = {problem.rows(), problem.cols()};
  mix(dims, sizeof dims);
  const auto& h_entries = problem.matrix().entries();
  mix(h_entries.data(), sizeof(double) * static_cast<std::size_t>(h_entries.size()));
  mix(problem.observations().data(),
      sizeof(double) * static_cast<std::size_t>(problem.observations().size()));
  return h;
}

}  // namespace cfcs
