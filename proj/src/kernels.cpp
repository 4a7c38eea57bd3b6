#include "risro/kernels.hpp"

#include <algorithm>

namespace risro::kernels {

namespace {

constexpr Index kAdjointBlock = 512;  // output entries per accumulation block

inline void dense_adjoint_block(const RowMatrix& stacked, const Vector& w, double* out,
                                Index total, Index b) {
  const Index e0 = b * kAdjointBlock;
  const Index len = std::min(kAdjointBlock, total - e0);
  Eigen::Map<Vector> seg(out + e0, len);
  seg.setZero();
  for (Index i = 0; i < stacked.rows(); ++i)
    seg += w(i) * stacked.row(i).segment(e0, len).transpose();
}

inline void dense_sketch_row(const RowMatrix& stacked, const Matrix& U, const Matrix& Up,
                             const Matrix& V, const Matrix& Vp, Matrix& G, Index i) {
  const Index p1 = U.rows(), p2 = V.rows();
  Eigen::Map<const Matrix> Ai(stacked.row(i).data(), p1, p2);
  const Matrix AiV = Ai * V;                // p1 x r
  const Matrix AitU = Ai.transpose() * U;   // p2 x r
  const Matrix b0 = U.transpose() * AiV;    // r x r
  const Matrix b1 = Up.transpose() * AiV;   // (p1-r) x r
  const Matrix b2 = Vp.transpose() * AitU;  // (p2-r) x r
  Index c = 0;
  for (Index k = 0; k < b0.size(); ++k) G(i, c++) = b0.data()[k];
  for (Index k = 0; k < b1.size(); ++k) G(i, c++) = b1.data()[k];
  for (Index k = 0; k < b2.size(); ++k) G(i, c++) = b2.data()[k];
}

inline void entry_sketch_row(const std::pair<Index, Index>& ij, const Matrix& U,
                             const Matrix& Up, const Matrix& V, const Matrix& Vp, Matrix& G,
                             Index k) {
  const Index r = U.cols(), q1 = Up.cols(), q2 = Vp.cols();
  const Index i = ij.first, j = ij.second;
  Index c = 0;
  for (Index b = 0; b < r; ++b)
    for (Index a = 0; a < r; ++a) G(k, c++) = U(i, a) * V(j, b);
  for (Index b = 0; b < r; ++b)
    for (Index a = 0; a < q1; ++a) G(k, c++) = Up(i, a) * V(j, b);
  for (Index a = 0; a < r; ++a)
    for (Index b = 0; b < q2; ++b) G(k, c++) = U(i, a) * Vp(j, b);
}

inline void rank_one_sketch_row(const Matrix& a_columns, const Matrix& U, const Matrix& Up,
                                const Matrix& V, const Matrix& Vp, Matrix& G, Index i) {
  const auto a = a_columns.col(i);
  const Vector s = U.transpose() * a;
  const Vector t = V.transpose() * a;
  const Vector su = Up.transpose() * a;
  const Vector sv = Vp.transpose() * a;
  const Index r = s.size();
  Index c = 0;
  for (Index b = 0; b < r; ++b)
    for (Index a2 = 0; a2 < r; ++a2) G(i, c++) = s(a2) * t(b);
  for (Index b = 0; b < r; ++b)
    for (Index a2 = 0; a2 < su.size(); ++a2) G(i, c++) = su(a2) * t(b);
  for (Index a2 = 0; a2 < r; ++a2)
    for (Index b = 0; b < sv.size(); ++b) G(i, c++) = sv(b) * s(a2);
}

}  // namespace

Vector dense_apply(const RowMatrix& stacked, const Matrix& X) {
  Eigen::Map<const Vector> x(X.data(), X.size());
  Vector y(stacked.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < stacked.rows(); ++i) y(i) = stacked.row(i).dot(x);
  return y;
}

Vector dense_apply_serial(const RowMatrix& stacked, const Matrix& X) {
  Eigen::Map<const Vector> x(X.data(), X.size());
  Vector y(stacked.rows());
  for (Index i = 0; i < stacked.rows(); ++i) y(i) = stacked.row(i).dot(x);
  return y;
}

Matrix dense_adjoint(const RowMatrix& stacked, Index p1, Index p2, const Vector& w) {
  Matrix out(p1, p2);
  const Index total = p1 * p2;
  const Index blocks = (total + kAdjointBlock - 1) / kAdjointBlock;
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) dense_adjoint_block(stacked, w, out.data(), total, b);
  return out;
}

Matrix dense_adjoint_serial(const RowMatrix& stacked, Index p1, Index p2, const Vector& w) {
  Matrix out(p1, p2);
  const Index total = p1 * p2;
  const Index blocks = (total + kAdjointBlock - 1) / kAdjointBlock;
  for (Index b = 0; b < blocks; ++b) dense_adjoint_block(stacked, w, out.data(), total, b);
  return out;
}

Vector entry_apply(const std::vector<std::pair<Index, Index>>& omega, const Matrix& X) {
  Vector y(static_cast<Index>(omega.size()));
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < y.size(); ++k) y(k) = X(omega[k].first, omega[k].second);
  return y;
}

Vector entry_apply_serial(const std::vector<std::pair<Index, Index>>& omega, const Matrix& X) {
  Vector y(static_cast<Index>(omega.size()));
  for (Index k = 0; k < y.size(); ++k) y(k) = X(omega[k].first, omega[k].second);
  return y;
}

Matrix entry_adjoint(const std::vector<std::pair<Index, Index>>& omega, Index p1, Index p2,
                     const Vector& w) {
  Matrix out = Matrix::Zero(p1, p2);
  // index pairs are unique, so the scatter is race-free
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < w.size(); ++k) out(omega[k].first, omega[k].second) = w(k);
  return out;
}

Matrix entry_adjoint_serial(const std::vector<std::pair<Index, Index>>& omega, Index p1,
                            Index p2, const Vector& w) {
  Matrix out = Matrix::Zero(p1, p2);
  for (Index k = 0; k < w.size(); ++k) out(omega[k].first, omega[k].second) = w(k);
  return out;
}

Vector rank_one_apply(const Matrix& a_columns, const Matrix& X) {
  Vector y(a_columns.cols());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < a_columns.cols(); ++i)
    y(i) = a_columns.col(i).dot(X * a_columns.col(i));
  return y;
}

Vector rank_one_apply_serial(const Matrix& a_columns, const Matrix& X) {
  Vector y(a_columns.cols());
  for (Index i = 0; i < a_columns.cols(); ++i)
    y(i) = a_columns.col(i).dot(X * a_columns.col(i));
  return y;
}

Matrix rank_one_adjoint(const Matrix& a_columns, const Vector& w) {
  const Index p = a_columns.rows();
  Matrix out(p, p);
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < p; ++k) {
    const Vector v = w.cwiseProduct(a_columns.row(k).transpose());
    out.col(k) = a_columns * v;
  }
  return out;
}

Matrix rank_one_adjoint_serial(const Matrix& a_columns, const Vector& w) {
  const Index p = a_columns.rows();
  Matrix out(p, p);
  for (Index k = 0; k < p; ++k) {
    const Vector v = w.cwiseProduct(a_columns.row(k).transpose());
    out.col(k) = a_columns * v;
  }
  return out;
}

Matrix dense_sketch(const RowMatrix& stacked, const Matrix& U, const Matrix& Up,
                    const Matrix& V, const Matrix& Vp) {
  const Index dof = (U.rows() + V.rows() - U.cols()) * U.cols();
  Matrix G(stacked.rows(), dof);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < stacked.rows(); ++i) dense_sketch_row(stacked, U, Up, V, Vp, G, i);
  return G;
}

Matrix dense_sketch_serial(const RowMatrix& stacked, const Matrix& U, const Matrix& Up,
                           const Matrix& V, const Matrix& Vp) {
  const Index dof = (U.rows() + V.rows() - U.cols()) * U.cols();
  Matrix G(stacked.rows(), dof);
  for (Index i = 0; i < stacked.rows(); ++i) dense_sketch_row(stacked, U, Up, V, Vp, G, i);
  return G;
}

Matrix entry_sketch(const std::vector<std::pair<Index, Index>>& omega, const Matrix& U,
                    const Matrix& Up, const Matrix& V, const Matrix& Vp) {
  const Index dof = (U.rows() + V.rows() - U.cols()) * U.cols();
  Matrix G(static_cast<Index>(omega.size()), dof);
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < G.rows(); ++k) entry_sketch_row(omega[k], U, Up, V, Vp, G, k);
  return G;
}

Matrix entry_sketch_serial(const std::vector<std::pair<Index, Index>>& omega, const Matrix& U,
                           const Matrix& Up, const Matrix& V, const Matrix& Vp) {
  const Index dof = (U.rows() + V.rows() - U.cols()) * U.cols();
  Matrix G(static_cast<Index>(omega.size()), dof);
  for (Index k = 0; k < G.rows(); ++k) entry_sketch_row(omega[k], U, Up, V, Vp, G, k);
  return G;
}

Matrix rank_one_sketch(const Matrix& a_columns, const Matrix& U, const Matrix& Up,
                       const Matrix& V, const Matrix& Vp) {
  const Index dof = (U.rows() + V.rows() - U.cols()) * U.cols();
  Matrix G(a_columns.cols(), dof);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < G.rows(); ++i) rank_one_sketch_row(a_columns, U, Up, V, Vp, G, i);
  return G;
}

Matrix rank_one_sketch_serial(const Matrix& a_columns, const Matrix& U, const Matrix& Up,
                              const Matrix& V, const Matrix& Vp) {
  const Index dof = (U.rows() + V.rows() - U.cols()) * U.cols();
  Matrix G(a_columns.cols(), dof);
  for (Index i = 0; i < G.rows(); ++i) rank_one_sketch_row(a_columns, U, Up, V, Vp, G, i);
  return G;
}

}  // namespace risro::kernels
