#include "risro/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "risro/kernels.hpp"

namespace risro {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::uint64_t Rng::next_u64() {
  // splitmix64 step; small state, robust for seeding-by-integer use
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  spare_ = radius * std::sin(kTwoPi * u2);
  have_spare_ = true;
  return radius * std::cos(kTwoPi * u2);
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
  require(bound > 0, "next_below: bound must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % bound;
}

Matrix Rng::gaussian(Index rows, Index cols) {
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = normal();
  return M;
}

Vector Rng::gaussian_vector(Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal();
  return v;
}

Matrix Rng::haar_orthonormal(Index p, Index r) {
  const Matrix G = gaussian(p, r);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(p, r);
  const Matrix R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (Index j = 0; j < r; ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

std::vector<std::uint64_t> Rng::sample_without_replacement(std::uint64_t n, std::uint64_t k) {
  require(k <= n, "sample_without_replacement: k > n");
  std::vector<std::uint64_t> pool(n);
  for (std::uint64_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<std::uint64_t> out(k);
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t j = i + next_below(n - i);
    std::swap(pool[i], pool[j]);
    out[i] = pool[i];
  }
  return out;
}

SensingOperator SensingOperator::dense(const std::vector<Matrix>& mats) {
  require(!mats.empty(), "dense: need at least one measurement matrix");
  const Index p1 = mats[0].rows(), p2 = mats[0].cols();
  RowMatrix stacked(static_cast<Index>(mats.size()), p1 * p2);
  for (Index i = 0; i < stacked.rows(); ++i) {
    require(mats[i].rows() == p1 && mats[i].cols() == p2, "dense: inconsistent shapes");
    stacked.row(i) = Eigen::Map<const Vector>(mats[i].data(), p1 * p2);
  }
  return dense_stacked(std::move(stacked), p1, p2);
}

SensingOperator SensingOperator::dense_stacked(RowMatrix stacked_rows, Index p1, Index p2) {
  require(stacked_rows.cols() == p1 * p2, "dense_stacked: column count != p1*p2");
  SensingOperator op;
  op.kind_ = OperatorKind::DenseSensing;
  op.p1_ = p1;
  op.p2_ = p2;
  op.n_ = stacked_rows.rows();
  op.stacked_ = std::move(stacked_rows);
  return op;
}

SensingOperator SensingOperator::entry_sampling(Index p1, Index p2,
                                                std::vector<std::pair<Index, Index>> omega) {
  require(!omega.empty(), "entry_sampling: empty index set");
  std::vector<char> seen(static_cast<std::size_t>(p1 * p2), 0);
  for (const auto& [i, j] : omega) {
    require(i >= 0 && i < p1 && j >= 0 && j < p2, "entry_sampling: index out of bounds");
    char& flag = seen[static_cast<std::size_t>(j * p1 + i)];
    require(!flag, "entry_sampling: duplicate index pair");
    flag = 1;
  }
  SensingOperator op;
  op.kind_ = OperatorKind::EntrySampling;
  op.p1_ = p1;
  op.p2_ = p2;
  op.n_ = static_cast<Index>(omega.size());
  op.omega_ = std::move(omega);
  return op;
}

SensingOperator SensingOperator::rank_one(Matrix a_columns) {
  require(a_columns.cols() > 0, "rank_one: need at least one vector");
  SensingOperator op;
  op.kind_ = OperatorKind::SymmetricRankOne;
  op.p1_ = a_columns.rows();
  op.p2_ = a_columns.rows();
  op.n_ = a_columns.cols();
  op.vectors_ = std::move(a_columns);
  return op;
}

Matrix SensingOperator::measurement_matrix(Index i) const {
  require(i >= 0 && i < n_, "measurement_matrix: index out of range");
  switch (kind_) {
    case OperatorKind::DenseSensing: {
      Matrix A(p1_, p2_);
      Eigen::Map<Vector>(A.data(), A.size()) = stacked_.row(i).transpose();
      return A;
    }
    case OperatorKind::EntrySampling: {
      Matrix A = Matrix::Zero(p1_, p2_);
      A(omega_[i].first, omega_[i].second) = 1.0;
      return A;
    }
    case OperatorKind::SymmetricRankOne:
      return vectors_.col(i) * vectors_.col(i).transpose();
  }
  return {};
}

double FactoredMatrix::orthonormality_defect() const {
  const Index r = rank();
  const double du = (U.transpose() * U - Matrix::Identity(r, r)).norm();
  const double dv = (V.transpose() * V - Matrix::Identity(r, r)).norm();
  return std::max(du, dv);
}

FactoredMatrix to_svd(const FactoredMatrix& X) {
  Eigen::JacobiSVD<Matrix> svd(X.C, Eigen::ComputeFullU | Eigen::ComputeFullV);
  FactoredMatrix out;
  out.U = X.U * svd.matrixU();
  out.V = X.V * svd.matrixV();
  out.C = svd.singularValues().asDiagonal();
  for (Index k = 0; k < out.C.rows(); ++k) {
    const double scale = out.U.col(k).cwiseAbs().maxCoeff();
    for (Index i = 0; i < out.U.rows(); ++i) {
      if (std::abs(out.U(i, k)) > 1e-12 * scale) {
        if (out.U(i, k) < 0) {
          out.U.col(k) = -out.U.col(k);
          out.V.col(k) = -out.V.col(k);
        }
        break;
      }
    }
  }
  return out;
}

Vector apply(const SensingOperator& op, const Matrix& X) {
  require(X.rows() == op.p1() && X.cols() == op.p2(), "apply: dimension mismatch");
  switch (op.kind()) {
    case OperatorKind::DenseSensing:
      return kernels::dense_apply(op.stacked(), X);
    case OperatorKind::EntrySampling:
      return kernels::entry_apply(op.omega(), X);
    case OperatorKind::SymmetricRankOne:
      return kernels::rank_one_apply(op.vectors(), X);
  }
  return {};
}

Matrix adjoint(const SensingOperator& op, const Vector& w) {
  require(w.size() == op.n(), "adjoint: length mismatch");
  switch (op.kind()) {
    case OperatorKind::DenseSensing:
      return kernels::dense_adjoint(op.stacked(), op.p1(), op.p2(), w);
    case OperatorKind::EntrySampling:
      return kernels::entry_adjoint(op.omega(), op.p1(), op.p2(), w);
    case OperatorKind::SymmetricRankOne:
      return kernels::rank_one_adjoint(op.vectors(), w);
  }
  return {};
}

FactoredMatrix best_rank_r(const Matrix& M, Index r) {
  require(r >= 1 && r <= std::min(M.rows(), M.cols()), "best_rank_r: invalid rank");
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  FactoredMatrix out;
  out.U = svd.matrixU().leftCols(r);
  out.V = svd.matrixV().leftCols(r);
  out.C = Matrix::Zero(r, r);
  out.C.diagonal() = svd.singularValues().head(r);
  for (Index k = 0; k < r; ++k) {
    const double scale = out.U.col(k).cwiseAbs().maxCoeff();
    if (scale == 0.0) continue;
    for (Index i = 0; i < out.U.rows(); ++i) {
      if (std::abs(out.U(i, k)) > 1e-12 * scale) {
        if (out.U(i, k) < 0) {
          out.U.col(k) = -out.U.col(k);
          out.V.col(k) = -out.V.col(k);
        }
        break;
      }
    }
  }
  return out;
}

Matrix orthonormal_complement(const Matrix& U) {
  const Index p = U.rows(), r = U.cols();
  require(r <= p, "orthonormal_complement: more columns than rows");
  const double defect = (U.transpose() * U - Matrix::Identity(r, r)).norm();
  require(defect <= 1e-8, "orthonormal_complement: input not orthonormal");
  if (p == r) return Matrix(p, 0);
  Eigen::HouseholderQR<Matrix> qr(U);
  Matrix full = qr.householderQ() * Matrix::Identity(p, p);
  return full.rightCols(p - r);
}

double sin_theta(const Matrix& U1, const Matrix& U2) {
  require(U1.rows() == U2.rows() && U1.cols() == U2.cols(), "sin_theta: shape mismatch");
  Eigen::JacobiSVD<Matrix> svd(U1.transpose() * U2);
  const Index r = U1.cols();
  double smin = r == 0 ? 1.0 : svd.singularValues()(r - 1);
  smin = std::clamp(smin, 0.0, 1.0);
  return std::sqrt(std::max(0.0, 1.0 - smin * smin));
}

std::pair<Vector, bool> min_norm_least_squares(const Matrix& G, const Vector& y) {
  require(G.rows() == y.size(), "min_norm_least_squares: row count mismatch");
  Eigen::ColPivHouseholderQR<Matrix> qr(G);
  if (qr.rank() == G.cols()) return {qr.solve(y), false};
  Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.solve(y), true};
}

RipEstimate estimate_rip_spectrum(const SensingOperator& op, Index k, int num_samples,
                                  std::uint64_t seed) {
  require(k >= 1 && k <= std::min(op.p1(), op.p2()), "estimate_rip_spectrum: invalid rank");
  require(num_samples >= 1, "estimate_rip_spectrum: need samples");
  RipEstimate est;
  est.rank = k;
  est.num_samples = num_samples;
  est.empirical_lower = std::numeric_limits<double>::infinity();
  est.empirical_upper = 0.0;
  std::vector<double> ratios(num_samples);
#pragma omp parallel for schedule(static)
  for (int s = 0; s < num_samples; ++s) {
    Rng rng(seed + static_cast<std::uint64_t>(s));
    const Matrix L = rng.gaussian(op.p1(), k);
    const Matrix R = rng.gaussian(op.p2(), k);
    Matrix Z = L * R.transpose();
    Z /= Z.norm();
    ratios[s] = apply(op, Z).squaredNorm();
  }
  for (double v : ratios) {
    est.empirical_lower = std::min(est.empirical_lower, v);
    est.empirical_upper = std::max(est.empirical_upper, v);
  }
  return est;
}

}  // namespace risro
