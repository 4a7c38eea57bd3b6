#pragma once

#include "risro/core.hpp"

namespace risro::kernels {

// Data-parallel inner loops of the measurement map and the sketch build.
// Every kernel has a *_serial twin with the identical per-element body and
// no OpenMP pragma; tests assert the pair agrees and the kernel benchmark
// compares their wall time. Each output element is accumulated in a fixed
// index order by exactly one thread, so results do not depend on the
// thread count.

Vector dense_apply(const RowMatrix& stacked, const Matrix& X);
Vector dense_apply_serial(const RowMatrix& stacked, const Matrix& X);

Matrix dense_adjoint(const RowMatrix& stacked, Index p1, Index p2, const Vector& w);
Matrix dense_adjoint_serial(const RowMatrix& stacked, Index p1, Index p2, const Vector& w);

Vector entry_apply(const std::vector<std::pair<Index, Index>>& omega, const Matrix& X);
Vector entry_apply_serial(const std::vector<std::pair<Index, Index>>& omega, const Matrix& X);

Matrix entry_adjoint(const std::vector<std::pair<Index, Index>>& omega, Index p1, Index p2,
                     const Vector& w);
Matrix entry_adjoint_serial(const std::vector<std::pair<Index, Index>>& omega, Index p1,
                            Index p2, const Vector& w);

Vector rank_one_apply(const Matrix& a_columns, const Matrix& X);
Vector rank_one_apply_serial(const Matrix& a_columns, const Matrix& X);

Matrix rank_one_adjoint(const Matrix& a_columns, const Vector& w);
Matrix rank_one_adjoint_serial(const Matrix& a_columns, const Vector& w);

// Sketched covariate rows for the reduced least squares. Column layout
// matches the intrinsic coefficient order [vec(Zb), vec(Zd1), vec(Zd2)].
Matrix dense_sketch(const RowMatrix& stacked, const Matrix& U, const Matrix& Up,
                    const Matrix& V, const Matrix& Vp);
Matrix dense_sketch_serial(const RowMatrix& stacked, const Matrix& U, const Matrix& Up,
                           const Matrix& V, const Matrix& Vp);

Matrix entry_sketch(const std::vector<std::pair<Index, Index>>& omega, const Matrix& U,
                    const Matrix& Up, const Matrix& V, const Matrix& Vp);
Matrix entry_sketch_serial(const std::vector<std::pair<Index, Index>>& omega, const Matrix& U,
                           const Matrix& Up, const Matrix& V, const Matrix& Vp);

Matrix rank_one_sketch(const Matrix& a_columns, const Matrix& U, const Matrix& Up,
                       const Matrix& V, const Matrix& Vp);
Matrix rank_one_sketch_serial(const Matrix& a_columns, const Matrix& U, const Matrix& Up,
                              const Matrix& V, const Matrix& Vp);

}  // namespace risro::kernels
