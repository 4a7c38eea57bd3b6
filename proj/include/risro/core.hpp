#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace risro {

using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/** Seeded random stream used by every stochastic component.
 *
 * Normal variates come from an explicit Box-Muller transform on top of
 * mt19937_64 so that a given seed reproduces the same stream on any
 * standard library. Bounded integers use rejection sampling for the same
 * reason.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  double uniform();                        // in [0, 1)
  double normal();                         // standard normal
  std::uint64_t next_below(std::uint64_t bound);

  /// i.i.d. N(0,1) entries, filled column by column.
  Matrix gaussian(Index rows, Index cols);
  Vector gaussian_vector(Index n);

  /// Q factor of a Gaussian matrix, R forced to positive diagonal.
  Matrix haar_orthonormal(Index p, Index r);

  /// k distinct values in [0, n) via a partial Fisher-Yates shuffle.
  std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k);

private:
  std::uint64_t next_u64();
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

enum class OperatorKind { DenseSensing, EntrySampling, SymmetricRankOne };

/** Linear measurement map X -> [<A_1,X>, ..., <A_n,X>].
 *
 * Three structural variants share one interface:
 *  - DenseSensing: explicit measurement matrices, stored stacked as
 *    vec(A_i) rows (column-major vec) in an n x (p1*p2) matrix;
 *  - EntrySampling: A_i = e_{i_k} e_{j_k}^T for an ordered index set;
 *  - SymmetricRankOne: A_i = a_i a_i^T with p1 = p2.
 */
class SensingOperator {
public:
  SensingOperator() = default;  // empty; fill via a factory before use

  static SensingOperator dense(const std::vector<Matrix>& mats);
  static SensingOperator dense_stacked(RowMatrix stacked_rows, Index p1, Index p2);
  static SensingOperator entry_sampling(Index p1, Index p2,
                                        std::vector<std::pair<Index, Index>> omega);
  static SensingOperator rank_one(Matrix a_columns);  // p x n, column i = a_i

  OperatorKind kind() const { return kind_; }
  Index p1() const { return p1_; }
  Index p2() const { return p2_; }
  Index n() const { return n_; }

  /// The stacked vec(A_i) rows (DenseSensing only).
  const RowMatrix& stacked() const { return stacked_; }
  /// Measurement vectors as columns (SymmetricRankOne only).
  const Matrix& vectors() const { return vectors_; }
  const std::vector<std::pair<Index, Index>>& omega() const { return omega_; }

  /// Materializes A_i as a dense matrix (any variant; test/diagnostic use).
  Matrix measurement_matrix(Index i) const;

private:
  OperatorKind kind_ = OperatorKind::DenseSensing;
  Index p1_ = 0, p2_ = 0, n_ = 0;
  RowMatrix stacked_;
  Matrix vectors_;
  std::vector<std::pair<Index, Index>> omega_;
};

struct ProblemInstance {
  SensingOperator op;
  Vector y;
  Index rank = 1;
  std::optional<Matrix> truth;  // ground truth, for error reporting only
};

/** Rank-r iterate stored as X = U C V^T with orthonormal U, V.
 *
 * C is a general r x r core; it is diagonal only after to_svd().
 */
struct FactoredMatrix {
  Matrix U;  // p1 x r, orthonormal columns
  Matrix V;  // p2 x r, orthonormal columns
  Matrix C;  // r x r core

  Index p1() const { return U.rows(); }
  Index p2() const { return V.rows(); }
  Index rank() const { return C.rows(); }
  Matrix value() const { return U * C * V.transpose(); }

  /// Frobenius distance between factor Gramians and the identity.
  double orthonormality_defect() const;
};

/// Re-expresses X with a diagonal core and the deterministic sign convention.
FactoredMatrix to_svd(const FactoredMatrix& X);

enum class SolveStatus { Converged, MaxIter, Degenerate };

struct IterationRecord {
  int iter = 0;
  double wall_time_s = 0.0;
  double objective = 0.0;       // 0.5 * ||y - A(X)||^2
  double rel_rmse = 0.0;        // ||X - X*||_F / ||X*||_F when truth known, else NaN
  double dist_to_final = 0.0;   // online: rel change ||X^t - X^{t-1}||_F / ||X^{t-1}||_F
  double grad_norm = 0.0;       // ||P_T A*(A(X) - y)||_F

  // Not part of the CSV schema: per-step numerical flags and certificates.
  bool ls_rank_deficient = false;
  double gn_residual = 0.0;     // ||P_T A*(A(X + eta) - y)||_F, when certified
  double descent_inner = 0.0;   // <grad f, eta>
  double step_image_sq = 0.0;   // ||A(eta)||^2
};

struct SolveTrace {
  std::vector<IterationRecord> records;
  SolveStatus status = SolveStatus::MaxIter;
};

/// Sampled surrogate for the restricted isometry spectrum at rank k.
struct RipEstimate {
  Index rank = 0;
  int num_samples = 0;
  double empirical_lower = 0.0;  // min ||A(Z)||^2 over unit-Frobenius rank-k Z
  double empirical_upper = 0.0;  // max of the same
};

Vector apply(const SensingOperator& op, const Matrix& X);
Matrix adjoint(const SensingOperator& op, const Vector& w);

/** Best rank-r approximation via truncated SVD.
 *
 * Sign convention: the first entry of each left singular vector whose
 * magnitude exceeds a scale-relative cutoff is made positive, so repeated
 * runs produce identical factors.
 */
FactoredMatrix best_rank_r(const Matrix& M, Index r);

/// Householder completion of U to a square orthogonal [U U_perp].
Matrix orthonormal_complement(const Matrix& U);

/// Largest principal angle sine between two column spans.
double sin_theta(const Matrix& U1, const Matrix& U2);

RipEstimate estimate_rip_spectrum(const SensingOperator& op, Index k, int num_samples,
                                  std::uint64_t seed);

/// Least squares via column-pivoted QR; falls back to the SVD pseudo-inverse
/// (minimum-norm solution) when numerically rank-deficient. The flag reports
/// the fallback.
std::pair<Vector, bool> min_norm_least_squares(const Matrix& G, const Vector& y);

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace risro
