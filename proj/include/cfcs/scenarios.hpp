#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfcs/model.hpp"

namespace cfcs {

enum class ScenarioFamily { kGaussianSparse, kDftUndersampled, kPhantomRadial };

const char* to_string(ScenarioFamily family);
ScenarioFamily parse_family(const std::string& name);

struct ScenarioSpec {
  ScenarioFamily family = ScenarioFamily::kGaussianSparse;
  Index m = 0;
  Index n = 0;
  std::optional<Index> sparsity;         // s, gaussian-sparse
  std::optional<double> recovery_index;  // alternative to s, gaussian-sparse
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  int frequency_count = 1;  // n_f, dft-undersampled
  int side = 64;            // phantom-radial, n = side²
  int lines = 64;           // phantom-radial
  bool full_mask = false;   // phantom-radial: keep every frequency
};

/// Power-law compressible coefficients |x_(i)| = κ i^(−1/r).
struct CompressibleModel {
  double radius = 1.0;  // κ
  double decay = 1.0;   // r
};

/// s = max(1, round(index · m / ln n)). Throws UsageError when s >= n.
Index recovery_index_to_s(double index, Index m, Index n);

/// n − card{i : |x_i| <= fraction · max_j |x_j|}; 0 for the zero vector.
Index effective_sparseness(const VectorXd& x, double fraction);

/// Gaussian sensing matrix (entries N(0, 1/m)), s-sparse truth with values
/// uniform on [−1, 1] at distinct uniform indices, y = Hx + N(0, σ²) noise.
Problemd gen_gaussian_sparse(const ScenarioSpec& spec);

/// Partial inverse-DFT problem in real-embedded form (unknowns (Re x, Im x)).
/// spec.n is the time-series length; the problem has 2n columns.
Problemd gen_dft_undersampled(const ScenarioSpec& spec);

/// Shepp-Logan phantom observed through 2-D unitary DFT samples on radial
/// lines; the unknown is the side×side image in row-major order.
Problemd gen_phantom_radial(const ScenarioSpec& spec);

Problemd generate(const ScenarioSpec& spec);

Signald gen_compressible(const CompressibleModel& model, Index n, std::uint64_t seed);

// Building blocks, exposed for tests and the command line tool.

using ComplexVector = Eigen::VectorXcd;

/// x_k = n^(−1/2) Σ_j y_j exp(−2πi jk/n).
ComplexVector unitary_dft(const ComplexVector& y);
ComplexVector inverse_unitary_dft(const ComplexVector& x);

/// (Re x, Im x) ∈ R^(2n) and back.
VectorXd embed_complex(const ComplexVector& x);
ComplexVector unembed_complex(const VectorXd& u);

/// Row-major side×side modified Shepp-Logan phantom, point-sampled at pixel
/// centers on [−1, 1]².
VectorXd shepp_logan(int side);

/// Frequencies (u, v) in DFT index coordinates [0, side)² lying on `lines`
/// radial lines through the DC term at angles offset + πk/lines.
std::vector<std::pair<int, int>> radial_mask(int side, int lines, double angle_offset);

/// Angle offset in [0, π) drawn for a seed. It does not depend on the line
/// count, so a 2L-line mask contains the L-line mask for the same seed.
double radial_angle_offset(std::uint64_t seed);

struct ScenarioSummary {
  Index sparsity = 0;            // s, or effective sparseness of the truth
  double recovery_index = 0.0;   // (s/m) ln n in the family's natural units
  double sampled_fraction = 0.0; // phantom only
};

/// Sparseness and recovery index of a generated instance. For the DFT family
/// the index uses the complex coefficients and the series length, while
/// `sparsity` counts the real-embedded entries the solver sees.
ScenarioSummary summarize(const ScenarioSpec& spec, const Problemd& problem);

}  // namespace cfcs
