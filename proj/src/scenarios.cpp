#include "cfcs/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cfcs/error.hpp"
#include "cfcs/metrics.hpp"
#include "cfcs/random.hpp"

namespace cfcs {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEffectiveFraction = 0.05;

// First `count` entries of a uniformly shuffled [0, n).
std::vector<Index> sample_without_replacement(Rng& rng, Index n, Index count) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index(0));
  for (Index i = 0; i < count; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

struct Twiddles {
  std::vector<double> cos, sin;
  explicit Twiddles(Index n) : cos(static_cast<std::size_t>(n)), sin(static_cast<std::size_t>(n)) {
    for (Index t = 0; t < n; ++t) {
      const double a = kTwoPi * static_cast<double>(t) / static_cast<double>(n);
      cos[static_cast<std::size_t>(t)] = std::cos(a);
      sin[static_cast<std::size_t>(t)] = std::sin(a);
    }
  }
};

ComplexVector dft(const ComplexVector& in, double sign) {
  const Index n = in.size();
  const Twiddles tw(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  ComplexVector out(n);
  for (Index k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (Index j = 0; j < n; ++j) {
      const auto t = static_cast<std::size_t>((j * k) % n);
      acc += in(j) * std::complex<double>(tw.cos[t], sign * tw.sin[t]);
    }
    out(k) = acc * scale;
  }
  return out;
}

void add_noise(Rng& rng, double sigma, VectorXd& y) {
  if (sigma <= 0.0) return;
  for (Index i = 0; i < y.size(); ++i) y(i) += sigma * rng.normal();
}

struct Ellipse {
  double intensity, a, b, x0, y0, phi_deg;
};

// Modified Shepp-Logan (higher-contrast intensities).
constexpr Ellipse kSheppLogan[] = {
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},        {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0}, {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},  {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
};

void check_side(int side) {
  if (side != 32 && side != 64 && side != 128) {
    throw UsageError("phantom side must be 32, 64 or 128, got " + std::to_string(side));
  }
}

}  // namespace

const char* to_string(ScenarioFamily family) {
  switch (family) {
    case ScenarioFamily::kGaussianSparse: return "gaussian";
    case ScenarioFamily::kDftUndersampled: return "dft";
    case ScenarioFamily::kPhantomRadial: return "phantom";
  }
  return "?";
}

ScenarioFamily parse_family(const std::string& name) {
  if (name == "gaussian" || name == "gaussian-sparse") return ScenarioFamily::kGaussianSparse;
  if (name == "dft" || name == "dft-undersampled") return ScenarioFamily::kDftUndersampled;
  if (name == "phantom" || name == "phantom-radial") return ScenarioFamily::kPhantomRadial;
  throw UsageError("unknown scenario family '" + name + "'");
}

Index recovery_index_to_s(double index, Index m, Index n) {
  if (!(index > 0.0)) throw UsageError("recovery index must be > 0");
  if (m < 1 || n < 2) throw UsageError("recovery index needs m >= 1 and n >= 2");
  const double raw = index * static_cast<double>(m) / std::log(static_cast<double>(n));
  const auto s = std::max<Index>(1, static_cast<Index>(std::llround(raw)));
  if (s >= n) {
    throw UsageError("recovery index " + std::to_string(index) + " gives s = " +
                     std::to_string(s) + " >= n = " + std::to_string(n));
  }
  return s;
}

Index effective_sparseness(const VectorXd& x, double fraction) {
  if (x.size() == 0) throw UsageError("effective sparseness of an empty vector");
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("fraction must lie in (0, 1)");
  const double peak = x.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0;
  const double threshold = fraction * peak;
  return x.size() - (x.array().abs() <= threshold).count();
}

Problemd gen_gaussian_sparse(const ScenarioSpec& spec) {
  const Index m = spec.m;
  const Index n = spec.n;
  if (m < 1 || n < 1) throw UsageError("gaussian scenario needs m, n >= 1");
  if (spec.noise_sigma < 0) throw UsageError("noise sigma must be >= 0");
  Index s = 0;
  if (spec.sparsity) {
    s = *spec.sparsity;
  } else if (spec.recovery_index) {
    s = recovery_index_to_s(*spec.recovery_index, m, n);
  } else {
    throw UsageError("gaussian scenario needs a sparsity or a recovery index");
  }
  if (s < 0 || s >= n) {
    throw UsageError("sparsity s = " + std::to_string(s) + " must lie in [0, n = " +
                     std::to_string(n) + ")");
  }

  Rng rng(spec.seed);
  RowMajorMatrixXd h(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) h(i, j) = scale * rng.normal();
  }

  VectorXd x = VectorXd::Zero(n);
  for (Index j : sample_without_replacement(rng, n, s)) {
    double v = 0.0;
    while (v == 0.0) v = rng.uniform(-1.0, 1.0);
    x(j) = v;
  }

  VectorXd y = h * x;
  add_noise(rng, spec.noise_sigma, y);
  return Problemd(Matrixd(std::move(h)), std::move(y), Signald{std::move(x), SignalKind::kSparse},
                  spec.noise_sigma);
}

ComplexVector unitary_dft(const ComplexVector& y) { return dft(y, -1.0); }
ComplexVector inverse_unitary_dft(const ComplexVector& x) { return dft(x, +1.0); }

VectorXd embed_complex(const ComplexVector& x) {
  VectorXd u(2 * x.size());
  u.head(x.size()) = x.real();
  u.tail(x.size()) = x.imag();
  return u;
}

ComplexVector unembed_complex(const VectorXd& u) {
  if (u.size() % 2 != 0) throw UsageError("embedded vector must have even length");
  const Index n = u.size() / 2;
  ComplexVector x(n);
  x.real() = u.head(n);
  x.imag() = u.tail(n);
  return x;
}

Problemd gen_dft_undersampled(const ScenarioSpec& spec) {
  const Index n = spec.n;
  const Index m = spec.m;
  if (n < 2 || m < 1) throw UsageError("dft scenario needs n >= 2 and m >= 1");
  if (m > n) {
    throw UsageError("dft scenario cannot sample m = " + std::to_string(m) +
                     " of n = " + std::to_string(n) + " time points");
  }
  if (spec.frequency_count < 1) throw UsageError("frequency count must be >= 1");
  if (spec.noise_sigma < 0) throw UsageError("noise sigma must be >= 0");

  Rng rng(spec.seed);
  std::vector<double> omega(static_cast<std::size_t>(spec.frequency_count));
  for (double& w : omega) w = rng.uniform(1.0, 10.0 * std::numbers::pi);

  // t_k = k for k = 1..n, stored at 0-based position k − 1.
  ComplexVector series(n);
  for (Index k = 0; k < n; ++k) {
    double v = 0.0;
    for (double w : omega) v += std::sin(w * static_cast<double>(k + 1));
    series(k) = v;
  }
  const ComplexVector coeffs = unitary_dft(series);

  std::vector<Index> times = sample_without_replacement(rng, n, m);
  std::sort(times.begin(), times.end());

  const Twiddles tw(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  RowMajorMatrixXd h(m, 2 * n);
  VectorXd y(m);
  for (Index r = 0; r < m; ++r) {
    const Index j = times[static_cast<std::size_t>(r)];
    for (Index k = 0; k < n; ++k) {
      const auto t = static_cast<std::size_t>((j * k) % n);
      h(r, k) = scale * tw.cos[t];
      h(r, n + k) = -scale * tw.sin[t];
    }
    y(r) = series(j).real();
  }
  add_noise(rng, spec.noise_sigma, y);
  return Problemd(Matrixd(std::move(h)), std::move(y),
                  Signald{embed_complex(coeffs), SignalKind::kCompressible}, spec.noise_sigma);
}

VectorXd shepp_logan(int side) {
  if (side < 1) throw UsageError("phantom side must be >= 1");
  VectorXd img = VectorXd::Zero(static_cast<Index>(side) * side);
  for (int a = 0; a < side; ++a) {
    const double py = 1.0 - (2.0 * a + 1.0) / side;
    for (int b = 0; b < side; ++b) {
      const double px = (2.0 * b + 1.0) / side - 1.0;
      double v = 0.0;
      for (const Ellipse& e : kSheppLogan) {
        const double phi = e.phi_deg * std::numbers::pi / 180.0;
        const double dx = px - e.x0;
        const double dy = py - e.y0;
        const double u = (dx * std::cos(phi) + dy * std::sin(phi)) / e.a;
        const double w = (-dx * std::sin(phi) + dy * std::cos(phi)) / e.b;
        if (u * u + w * w <= 1.0) v += e.intensity;
      }
      img(static_cast<Index>(a) * side + b) = v;
    }
  }
  return img;
}

double radial_angle_offset(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x5ad1a1));
  return rng.uniform(0.0, std::numbers::pi);
}

std::vector<std::pair<int, int>> radial_mask(int side, int lines, double angle_offset) {
  if (side < 2) throw UsageError("mask side must be >= 2");
  if (lines < 1) throw UsageError("line count must be >= 1");
  const int half = side / 2;
  std::vector<char> keep(static_cast<std::size_t>(side) * side, 0);
  for (int l = 0; l < lines; ++l) {
    const double theta = angle_offset + std::numbers::pi * l / lines;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    // Quarter-pixel steps visit every grid cell the line crosses.
    for (double t = -half; t <= half; t += 0.25) {
      const long fy = std::lround(t * s);
      const long fx = std::lround(t * c);
      if (fy < -half || fy > side - half - 1 || fx < -half || fx > side - half - 1) continue;
      const int u = static_cast<int>((fy + side) % side);
      const int v = static_cast<int>((fx + side) % side);
      keep[static_cast<std::size_t>(u) * side + v] = 1;
    }
  }
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < side; ++u) {
    for (int v = 0; v < side; ++v) {
      if (keep[static_cast<std::size_t>(u) * side + v]) out.emplace_back(u, v);
    }
  }
  return out;
}

Problemd gen_phantom_radial(const ScenarioSpec& spec) {
  check_side(spec.side);
  const int side = spec.side;
  const Index n = static_cast<Index>(side) * side;

  std::vector<std::pair<int, int>> freqs;
  if (spec.full_mask) {
    for (int u = 0; u < side; ++u) {
      for (int v = 0; v < side; ++v) freqs.emplace_back(u, v);
    }
  } else {
    if (spec.lines < 1) throw UsageError("phantom needs at least one radial line");
    freqs = radial_mask(side, spec.lines, radial_angle_offset(spec.seed));
  }

  // For a real image F(−u, −v) = conj F(u, v): keep one member of each
  // conjugate pair, and only the real part of self-conjugate frequencies.
  std::vector<char> in_mask(static_cast<std::size_t>(n), 0);
  for (auto [u, v] : freqs) in_mask[static_cast<std::size_t>(u) * side + v] = 1;
  struct RowSpec {
    int u, v;
    bool imag;
  };
  std::vector<RowSpec> rows;
  for (auto [u, v] : freqs) {
    const int cu = (side - u) % side;
    const int cv = (side - v) % side;
    const long self = static_cast<long>(u) * side + v;
    const long conj = static_cast<long>(cu) * side + cv;
    if (conj == self) {
      rows.push_back({u, v, false});
      continue;
    }
    if (conj < self && in_mask[static_cast<std::size_t>(conj)]) continue;
    rows.push_back({u, v, false});
    rows.push_back({u, v, true});
  }

  const Twiddles tw(side);
  const double scale = 1.0 / side;
  const VectorXd img = shepp_logan(side);
  RowMajorMatrixXd h(static_cast<Index>(rows.size()), n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const RowSpec& rs = rows[r];
    for (int a = 0; a < side; ++a) {
      for (int b = 0; b < side; ++b) {
        const auto t = static_cast<std::size_t>((rs.u * a + rs.v * b) % side);
        // Unitary 2-D DFT: F(u, v) = side⁻¹ Σ img(a, b) exp(−2πi(ua + vb)/side).
        h(static_cast<Index>(r), static_cast<Index>(a) * side + b) =
            rs.imag ? -scale * tw.sin[t] : scale * tw.cos[t];
      }
    }
  }
  VectorXd y = h * img;
  Rng rng(derive_seed(spec.seed, 1));
  add_noise(rng, spec.noise_sigma, y);
  return Problemd(Matrixd(std::move(h)), std::move(y),
                  Signald{img, SignalKind::kCompressible}, spec.noise_sigma);
}

Problemd generate(const ScenarioSpec& spec) {
  switch (spec.family) {
    case ScenarioFamily::kGaussianSparse: return gen_gaussian_sparse(spec);
    case ScenarioFamily::kDftUndersampled: return gen_dft_undersampled(spec);
    case ScenarioFamily::kPhantomRadial: return gen_phantom_radial(spec);
  }
  throw UsageError("unknown scenario family");
}

Signald gen_compressible(const CompressibleModel& model, Index n, std::uint64_t seed) {
  if (!(model.radius > 0.0) || !(model.decay > 0.0)) {
    throw UsageError("compressible model needs radius > 0 and decay > 0");
  }
  if (n < 1) throw UsageError("signal length must be >= 1");
  Rng rng(seed);
  const std::vector<Index> position = sample_without_replacement(rng, n, n);
  VectorXd x(n);
  for (Index i = 0; i < n; ++i) {
    const double mag = model.radius * std::pow(static_cast<double>(i + 1), -1.0 / model.decay);
    const double sign = (rng.next_u64() >> 63) ? -1.0 : 1.0;
    x(position[static_cast<std::size_t>(i)]) = sign * mag;
  }
  return Signald{std::move(x), SignalKind::kCompressible};
}

ScenarioSummary summarize(const ScenarioSpec& spec, const Problemd& problem) {
  ScenarioSummary out;
  if (!problem.truth()) return out;
  const VectorXd& x = problem.truth()->values;
  const Index m = problem.rows();
  switch (spec.family) {
    case ScenarioFamily::kGaussianSparse:
      out.sparsity = problem.truth()->support_size();
      out.recovery_index = recovery_index(out.sparsity, m, problem.cols());
      break;
    case ScenarioFamily::kDftUndersampled: {
      const VectorXd magnitudes = unembed_complex(x).cwiseAbs();
      const Index s_complex = effective_sparseness(magnitudes, kEffectiveFraction);
      out.recovery_index = recovery_index(s_complex, m, magnitudes.size());
      out.sparsity = effective_sparseness(x, kEffectiveFraction);
      break;
    }
    case ScenarioFamily::kPhantomRadial: {
      out.sparsity = effective_sparseness(x, kEffectiveFraction);
      out.recovery_index = recovery_index(out.sparsity, m, problem.cols());
      const std::size_t kept =
          spec.full_mask ? static_cast<std::size_t>(x.size())
                         : radial_mask(spec.side, spec.lines, radial_angle_offset(spec.seed)).size();
      out.sampled_fraction = static_cast<double>(kept) / static_cast<double>(x.size());
      break;
    }
  }
  return out;
}

}  // namespace cfcs
