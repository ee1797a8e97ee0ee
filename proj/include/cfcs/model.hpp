#pragma once

#include <optional>
#include <string>
#include <utility>

#include "cfcs/error.hpp"
#include "cfcs/types.hpp"

namespace cfcs {

/// Dense row-major sensing matrix with cached squared row norms.
///
/// Every solver in this library is a row-action method, so rows are stored
/// contiguously and their squared Euclidean norms are kept alongside. The
/// cache is recomputed by every mutating member; there is no way to obtain a
/// mutable reference to the underlying storage.
template <typename Scalar>
class DenseMatrix {
 public:
  using Storage = RowMajorMatrix<Scalar>;

  DenseMatrix() = default;

  explicit DenseMatrix(Storage entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.cols() < 1) {
      throw UsageError("matrix must have at least one row and one column, got " +
                       std::to_string(entries_.rows()) + "x" +
                       std::to_string(entries_.cols()));
    }
    row_norms_ = entries_.rowwise().squaredNorm();
  }

  template <typename Derived>
  static DenseMatrix from(const Eigen::MatrixBase<Derived>& m) {
    return DenseMatrix(Storage(m));
  }

  Index rows() const noexcept { return entries_.rows(); }
  Index cols() const noexcept { return entries_.cols(); }

  const Storage& entries() const noexcept { return entries_; }
  auto row(Index i) const { return entries_.row(i); }
  Scalar operator()(Index i, Index j) const { return entries_(i, j); }

  /// ‖h_i‖₂², cached.
  Scalar row_squared_norm(Index i) const { return row_norms_(i); }
  const Vector<Scalar>& row_squared_norms() const noexcept { return row_norms_; }

  void set(Index i, Index j, Scalar value) {
    check_row(i);
    if (j < 0 || j >= cols()) throw UsageError("column index out of range");
    entries_(i, j) = value;
    row_norms_(i) = entries_.row(i).squaredNorm();
  }

  template <typename Derived>
  void set_row(Index i, const Eigen::MatrixBase<Derived>& values) {
    check_row(i);
    if (values.size() != cols()) {
      throw UsageError("row length " + std::to_string(values.size()) +
                       " does not match column count " + std::to_string(cols()));
    }
    entries_.row(i) = values.transpose();
    row_norms_(i) = entries_.row(i).squaredNorm();
  }

  /// Index of the first row with zero norm, if any.
  std::optional<Index> first_zero_row() const {
    for (Index i = 0; i < rows(); ++i) {
      if (row_norms_(i) == Scalar(0)) return i;
    }
    return std::nullopt;
  }

  bool operator==(const DenseMatrix& other) const {
    return entries_.rows() == other.entries_.rows() &&
           entries_.cols() == other.entries_.cols() &&
           entries_ == other.entries_;
  }

 private:
  void check_row(Index i) const {
    if (i < 0 || i >= rows()) throw UsageError("row index out of range");
  }

  Storage entries_;
  Vector<Scalar> row_norms_;
};

enum class SignalKind { kSparse, kCompressible };

inline const char* to_string(SignalKind kind) {
  return kind == SignalKind::kSparse ? "sparse" : "compressible";
}

template <typename Scalar>
struct Signal {
  Vector<Scalar> values;
  SignalKind kind = SignalKind::kSparse;

  Index size() const noexcept { return values.size(); }

  /// ‖x‖₀
  Index support_size() const { return (values.array() != Scalar(0)).count(); }

  bool operator==(const Signal& other) const {
    return kind == other.kind && values.size() == other.values.size() &&
           values == other.values;
  }
};

/// One recovery instance: y = Hx + noise.
template <typename Scalar>
class Problem {
 public:
  Problem(DenseMatrix<Scalar> matrix, Vector<Scalar> observations,
          std::optional<Signal<Scalar>> truth = std::nullopt,
          Scalar noise_sigma = Scalar(0))
      : matrix_(std::move(matrix)),
        observations_(std::move(observations)),
        truth_(std::move(truth)),
        noise_sigma_(noise_sigma) {
    if (observations_.size() != matrix_.rows()) {
      throw UsageError("observation length " + std::to_string(observations_.size()) +
                       " does not match row count " + std::to_string(matrix_.rows()));
    }
    if (truth_ && truth_->size() != matrix_.cols()) {
      throw UsageError("ground truth length " + std::to_string(truth_->size()) +
                       " does not match column count " + std::to_string(matrix_.cols()));
    }
    if (!(noise_sigma_ >= Scalar(0))) throw UsageError("noise sigma must be >= 0");
  }

  const DenseMatrix<Scalar>& matrix() const noexcept { return matrix_; }
  const Vector<Scalar>& observations() const noexcept { return observations_; }
  const std::optional<Signal<Scalar>>& truth() const noexcept { return truth_; }
  Scalar noise_sigma() const noexcept { return noise_sigma_; }

  Index rows() const noexcept { return matrix_.rows(); }
  Index cols() const noexcept { return matrix_.cols(); }

  /// Genuine compressed-sensing instances have fewer measurements than
  /// unknowns; square or tall systems are accepted but callers may warn.
  bool underdetermined() const noexcept { return rows() < cols(); }

  bool operator==(const Problem& other) const {
    return matrix_ == other.matrix_ &&
           observations_.size() == other.observations_.size() &&
           observations_ == other.observations_ && truth_ == other.truth_ &&
           noise_sigma_ == other.noise_sigma_;
  }

 private:
  DenseMatrix<Scalar> matrix_;
  Vector<Scalar> observations_;
  std::optional<Signal<Scalar>> truth_;
  Scalar noise_sigma_;
};

using Matrixd = DenseMatrix<double>;
using Signald = Signal<double>;
using Problemd = Problem<double>;

/// ⟨h_i, z⟩
template <typename Scalar, typename Derived>
Scalar row_dot(const DenseMatrix<Scalar>& m, Index i, const Eigen::MatrixBase<Derived>& z) {
  if (i < 0 || i >= m.rows()) {
    throw UsageError("row index " + std::to_string(i) + " out of range [0, " +
                     std::to_string(m.rows()) + ")");
  }
  if (z.size() != m.cols()) {
    throw UsageError("vector length " + std::to_string(z.size()) +
                     " does not match column count " + std::to_string(m.cols()));
  }
  return m.row(i).dot(z.transpose());
}

/// y − Hz
template <typename Scalar, typename Derived>
Vector<Scalar> residual(const Problem<Scalar>& p, const Eigen::MatrixBase<Derived>& z) {
  if (z.size() != p.cols()) {
    throw UsageError("vector length " + std::to_string(z.size()) +
                     " does not match column count " + std::to_string(p.cols()));
  }
  return p.observations() - p.matrix().entries() * z;
}

}  // namespace cfcs
