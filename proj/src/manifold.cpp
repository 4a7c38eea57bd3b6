#include "risro/manifold.hpp"

#include <cmath>
#include <functional>

#include <Eigen/SVD>

#include "risro/kernels.hpp"

namespace risro::manifold {

namespace {

std::pair<Matrix, Matrix> thin_qr_positive(const Matrix& M) {
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix Q = qr.householderQ() * Matrix::Identity(M.rows(), M.cols());
  Matrix R = qr.matrixQR().topRows(M.cols()).triangularView<Eigen::Upper>();
  for (Index j = 0; j < R.rows(); ++j) {
    if (R(j, j) < 0) {
      Q.col(j) = -Q.col(j);
      R.row(j) = -R.row(j);
    }
  }
  return {std::move(Q), std::move(R)};
}

}  // namespace

Frame::Frame(const FactoredMatrix& X) : U(X.U), V(X.V), qr_u(X.U), qr_v(X.V) {
  const Index r = U.cols();
  require(X.orthonormality_defect() <= 1e-8, "Frame: factors not orthonormal");
  Matrix eu = Matrix::Zero(p1(), p1() - r);
  eu.bottomRows(p1() - r).setIdentity();
  Uperp = qr_u.householderQ() * eu;
  Matrix ev = Matrix::Zero(p2(), p2() - r);
  ev.bottomRows(p2() - r).setIdentity();
  Vperp = qr_v.householderQ() * ev;
}

Matrix Frame::uperp_times(const Matrix& Z) const {
  if (Z.rows() == 0) return Matrix::Zero(p1(), Z.cols());
  Matrix ext = Matrix::Zero(p1(), Z.cols());
  ext.bottomRows(Z.rows()) = Z;
  return qr_u.householderQ() * ext;
}

Matrix Frame::uperp_adjoint_times(const Matrix& M) const {
  if (p1() == rank()) return Matrix(0, M.cols());
  Matrix full = qr_u.householderQ().transpose() * M;
  return full.bottomRows(p1() - rank());
}

Matrix Frame::vperp_times(const Matrix& Z) const {
  if (Z.rows() == 0) return Matrix::Zero(p2(), Z.cols());
  Matrix ext = Matrix::Zero(p2(), Z.cols());
  ext.bottomRows(Z.rows()) = Z;
  return qr_v.householderQ() * ext;
}

Matrix Frame::vperp_adjoint_times(const Matrix& M) const {
  if (p2() == rank()) return Matrix(0, M.cols());
  Matrix full = qr_v.householderQ().transpose() * M;
  return full.bottomRows(p2() - rank());
}

double TangentVector::frob_norm() const {
  return std::sqrt(Zb.squaredNorm() + Zd1.squaredNorm() + Zd2.squaredNorm());
}

TangentVector& TangentVector::operator+=(const TangentVector& o) {
  Zb += o.Zb;
  Zd1 += o.Zd1;
  Zd2 += o.Zd2;
  return *this;
}

TangentVector TangentVector::scaled(double s) const { return {s * Zb, s * Zd1, s * Zd2}; }

TangentVector zero_tangent(const Frame& F) {
  const Index r = F.rank();
  return {Matrix::Zero(r, r), Matrix::Zero(F.p1() - r, r), Matrix::Zero(F.p2() - r, r)};
}

Matrix embed(const Frame& F, const TangentVector& Z) {
  return (F.U * Z.Zb + F.Uperp * Z.Zd1) * F.V.transpose() +
         F.U * Z.Zd2.transpose() * F.Vperp.transpose();
}

TangentVector tangent_project(const Frame& F, const Matrix& Z) {
  require(Z.rows() == F.p1() && Z.cols() == F.p2(), "tangent_project: shape mismatch");
  TangentVector out;
  const Matrix ZV = Z * F.V;
  out.Zb = F.U.transpose() * ZV;
  out.Zd1 = F.Uperp.transpose() * ZV;
  out.Zd2 = F.Vperp.transpose() * (Z.transpose() * F.U);
  return out;
}

double tangent_inner(const TangentVector& a, const TangentVector& b) {
  return a.Zb.cwiseProduct(b.Zb).sum() + a.Zd1.cwiseProduct(b.Zd1).sum() +
         a.Zd2.cwiseProduct(b.Zd2).sum();
}

IntrinsicVector to_intrinsic(const TangentVector& Z) {
  IntrinsicVector out;
  out.r = Z.Zb.rows();
  out.p1 = Z.Zd1.rows() + out.r;
  out.p2 = Z.Zd2.rows() + out.r;
  out.coeffs.resize(Z.Zb.size() + Z.Zd1.size() + Z.Zd2.size());
  Index c = 0;
  out.coeffs.segment(c, Z.Zb.size()) = Eigen::Map<const Vector>(Z.Zb.data(), Z.Zb.size());
  c += Z.Zb.size();
  out.coeffs.segment(c, Z.Zd1.size()) = Eigen::Map<const Vector>(Z.Zd1.data(), Z.Zd1.size());
  c += Z.Zd1.size();
  out.coeffs.segment(c, Z.Zd2.size()) = Eigen::Map<const Vector>(Z.Zd2.data(), Z.Zd2.size());
  return out;
}

TangentVector from_intrinsic(const Vector& coeffs, Index p1, Index p2, Index r) {
  require(coeffs.size() == (p1 + p2 - r) * r, "from_intrinsic: length mismatch");
  TangentVector Z;
  Index c = 0;
  Z.Zb = Eigen::Map<const Matrix>(coeffs.data() + c, r, r);
  c += r * r;
  Z.Zd1 = Eigen::Map<const Matrix>(coeffs.data() + c, p1 - r, r);
  c += (p1 - r) * r;
  Z.Zd2 = Eigen::Map<const Matrix>(coeffs.data() + c, p2 - r, r);
  return Z;
}

TangentVector riemannian_gradient(const ProblemInstance& prob, const FactoredMatrix& X,
                                  const Frame& F) {
  const Vector res = apply(prob.op, X.value()) - prob.y;
  return tangent_project(F, adjoint(prob.op, res));
}

TangentVector riemannian_hessian_apply(const ProblemInstance& prob, const FactoredMatrix& X,
                                       const Frame& F, const TangentVector& Z) {
  Matrix offdiag = X.C;
  offdiag.diagonal().setZero();
  require(offdiag.norm() <= 1e-10 * (1.0 + X.C.norm()),
          "riemannian_hessian_apply: core must be in SVD (diagonal) form");
  const double sigma_min = X.C.diagonal().minCoeff();
  if (sigma_min <= 0.0)
    throw DegenerateError("riemannian_hessian_apply: singular value hit zero");

  const Vector res = apply(prob.op, X.value()) - prob.y;
  const Matrix W = adjoint(prob.op, res);
  TangentVector out = tangent_project(F, adjoint(prob.op, apply(prob.op, embed(F, Z))));

  const Vector sigma_inv = X.C.diagonal().cwiseInverse();
  // curvature terms; vanish at zero residual
  const Matrix Vp = F.Vperp * Z.Zd2;  // p2 x r
  const Matrix Up = F.Uperp * Z.Zd1;  // p1 x r
  out.Zd1 += F.Uperp.transpose() * (W * Vp) * sigma_inv.asDiagonal();
  out.Zd2 += F.Vperp.transpose() * (W.transpose() * Up) * sigma_inv.asDiagonal();
  return out;
}

RetractResult orthographic_retract(const FactoredMatrix& X, const Frame& F,
                                   const SketchBlocks& blocks, double pinv_threshold) {
  const Index r = X.rank();
  require(blocks.B.rows() == r && blocks.B.cols() == r, "orthographic_retract: B shape");
  require(blocks.D1.rows() == F.p1() - r && blocks.D2.rows() == F.p2() - r,
          "orthographic_retract: D shape");

  Eigen::JacobiSVD<Matrix> svd(blocks.B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double thresh =
      (pinv_threshold >= 0.0 ? pinv_threshold
                             : static_cast<double>(r) * std::numeric_limits<double>::epsilon()) *
      smax;

  RetractResult out;
  out.b_sigma_min = sv.size() ? sv(sv.size() - 1) : 0.0;
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh && sv(i) > 0.0)
      inv(i) = 1.0 / sv(i);
    else
      out.rank_deficient = true;
  }
  const Matrix B_pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();

  const Matrix XU = F.U * blocks.B + F.Uperp * blocks.D1;
  const Matrix XV = F.V * blocks.B.transpose() + F.Vperp * blocks.D2;
  auto [QU, RU] = thin_qr_positive(XU);
  auto [QV, RV] = thin_qr_positive(XV);

  out.X.U = std::move(QU);
  out.X.V = std::move(QV);
  out.X.C = RU * B_pinv * RV.transpose();
  return out;
}

FactoredMatrix retract_tangent(const FactoredMatrix& X, const Frame& F,
                               const TangentVector& eta, double scale) {
  if (scale == 0.0) return X;
  SketchBlocks blocks{X.C + scale * eta.Zb, scale * eta.Zd1, scale * eta.Zd2};
  return orthographic_retract(X, F, blocks).X;
}

namespace {

// Structured application of w |-> intrinsic(P_T A^*(w)) and of the tangent
// measurement map for EntrySampling (the O(n r + p r^2) path).
struct EntryTangentOps {
  const std::vector<std::pair<Index, Index>>& omega;
  const Frame& F;
  OpCounter* counter;

  Vector measure(const TangentVector& Z) const {
    const Index r = F.rank();
    const Matrix T1 = F.U * Z.Zb + F.uperp_times(Z.Zd1);  // p1 x r
    const Matrix Vp = F.vperp_times(Z.Zd2);               // p2 x r
    Vector w(static_cast<Index>(omega.size()));
    for (Index k = 0; k < w.size(); ++k) {
      const auto& [i, j] = omega[k];
      w(k) = T1.row(i).dot(F.V.row(j)) + F.U.row(i).dot(Vp.row(j));
    }
    if (counter)
      counter->madds += static_cast<std::uint64_t>(2 * w.size() * r) +
                        static_cast<std::uint64_t>(3 * (F.p1() + F.p2()) * r * r);
    return w;
  }

  Vector project_adjoint(const Vector& w) const {
    const Index r = F.rank();
    Matrix SV = Matrix::Zero(F.p1(), r);
    Matrix StU = Matrix::Zero(F.p2(), r);
    for (Index k = 0; k < w.size(); ++k) {
      const auto& [i, j] = omega[k];
      SV.row(i) += w(k) * F.V.row(j);
      StU.row(j) += w(k) * F.U.row(i);
    }
    TangentVector Z;
    Z.Zb = F.U.transpose() * SV;
    Z.Zd1 = F.uperp_adjoint_times(SV);
    Z.Zd2 = F.vperp_adjoint_times(StU);
    if (counter)
      counter->madds += static_cast<std::uint64_t>(2 * w.size() * r) +
                        static_cast<std::uint64_t>(3 * (F.p1() + F.p2()) * r * r);
    return to_intrinsic(Z).coeffs;
  }
};

}  // namespace

GaussNewtonResult gauss_newton_cg(const ProblemInstance& prob, const FactoredMatrix& X,
                                  const Frame& F, double tol, int max_cg_iters,
                                  OpCounter* counter) {
  const Index p1 = F.p1(), p2 = F.p2(), r = F.rank();
  const Index dof = F.dof();
  if (max_cg_iters <= 0) max_cg_iters = static_cast<int>(4 * dof);

  GaussNewtonResult out;
  out.eta = zero_tangent(F);

  std::function<Vector(const Vector&)> normal_op;
  Vector b(dof);

  const bool entry = prob.op.kind() == OperatorKind::EntrySampling;
  Matrix G;  // sketched design, non-entry variants only
  EntryTangentOps ops{prob.op.omega(), F, counter};

  if (entry) {
    // residual at X without materializing the dense iterate
    const Matrix W1 = X.U * X.C;
    Vector res(prob.op.n());
    for (Index k = 0; k < res.size(); ++k) {
      const auto& [i, j] = prob.op.omega()[k];
      res(k) = W1.row(i).dot(X.V.row(j)) - prob.y(k);
    }
    b = -ops.project_adjoint(res);
    normal_op = [&ops, p1, p2, r](const Vector& v) {
      return ops.project_adjoint(ops.measure(from_intrinsic(v, p1, p2, r)));
    };
  } else {
    G = prob.op.kind() == OperatorKind::DenseSensing
            ? kernels::dense_sketch(prob.op.stacked(), F.U, F.Uperp, F.V, F.Vperp)
            : kernels::rank_one_sketch(prob.op.vectors(), F.U, F.Uperp, F.V, F.Vperp);
    const Vector res = apply(prob.op, X.value()) - prob.y;
    b = -(G.transpose() * res);
    normal_op = [&G, counter](const Vector& v) {
      if (counter) counter->madds += static_cast<std::uint64_t>(2 * G.rows() * G.cols());
      return Vector(G.transpose() * (G * v));
    };
  }

  const double bnorm = b.norm();
  if (bnorm == 0.0) return out;

  Vector x = Vector::Zero(dof);
  Vector resid = b;
  Vector p = resid;
  double rs = resid.squaredNorm();
  double best = std::sqrt(rs);
  int since_improve = 0;

  for (int it = 0; it < max_cg_iters; ++it) {
    const Vector q = normal_op(p);
    const double pq = p.dot(q);
    if (pq <= 0.0) {
      out.degenerate = true;
      break;
    }
    const double alpha = rs / pq;
    x += alpha * p;
    resid -= alpha * q;
    const double rs_new = resid.squaredNorm();
    out.iterations = it + 1;
    if (counter) counter->cg_iterations = out.iterations;
    const double rnorm = std::sqrt(rs_new);
    if (rnorm <= tol * bnorm) {
      rs = rs_new;
      break;
    }
    if (rnorm < best * (1.0 - 1e-9)) {
      best = rnorm;
      since_improve = 0;
    } else if (++since_improve >= 20) {
      out.degenerate = true;
      break;
    }
    p = resid + (rs_new / rs) * p;
    rs = rs_new;
  }

  out.rel_residual = resid.norm() / bnorm;
  out.eta = from_intrinsic(x, p1, p2, r);
  return out;
}

}  // namespace risro::manifold
