#pragma once

// Quadratic phase data and the derived geometry of the weighted space H_Phi.
//
// The phase is phi(X, y) = <X,AX>/2 + <X,By> + <y,Cy>/2 with the bilinear
// pairing <X,Y> = sum X_j Y_j. Everything downstream (weight, polarization,
// basis normalization, canonical map) is a closed-form function of (A, B, C).

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>

#include "hphi/core.hpp"

namespace hphi {

struct PhaseMatrices {
  int n = 0;
  CMat A, B, C;
};

struct SpaceContext {
  PhaseMatrices phase;
  double h = 1.0;

  RMat CI, CR;
  RMat CI_inv, CI_sqrt, CI_inv_sqrt;
  CMat B_inv, BT_inv;

  CMat PhiXXbar;       // B CI^{-1} conj(B)^T / 4, Hermitian positive definite
  CMat PhiXX;          // -B CI^{-1} B^T / 4 - A / (2i), complex symmetric
  CMat PhiXXbar_inv;   // (PhiXXbar)^{-1}
  CMat PhiXbarX_inv;   // (conj PhiXXbar)^{-1}

  CMat R, R_inv, RT_inv;  // R = CI^{-1/2} B^T / 2
  double det_R2 = 1.0;    // |det R|^2

  double Cphi = 0.0;  // transform normalization
  double CPhi = 0.0;  // projector normalization

  int n() const { return phase.n; }
};

namespace detail {

inline double rel_scale(const CMat& m) { return std::max(1.0, max_abs(m)); }

inline double cond2(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) == 0.0 ? INFINITY : s(0) / s(s.size() - 1);
}

}  // namespace detail

inline constexpr double kMaxCondition = 1e12;

/// Validates the phase data and derives every geometric quantity. The
/// internal consistency identities (two forms of C_Phi, R*R against the
/// Hessian of the weight, the weight decomposition) are checked here and
/// reported as InvariantViolation.
inline SpaceContext build_context(const PhaseMatrices& phase, double h) {
  const int n = phase.n;
  if (n < 1) throw Error(Errc::InvalidArgument, "dimension must be positive");
  if (phase.A.rows() != n || phase.A.cols() != n || phase.B.rows() != n || phase.B.cols() != n ||
      phase.C.rows() != n || phase.C.cols() != n)
    throw Error(Errc::InvalidArgument, "phase matrices must be n x n");
  if (!(h > 0.0 && h <= 1.0)) throw Error(Errc::InvalidArgument, "h must lie in (0, 1]");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (phase.A(i, j) != phase.A(j, i)) throw Error(Errc::NonSymmetric, "A is not symmetric");
      if (phase.C(i, j) != phase.C(j, i)) throw Error(Errc::NonSymmetric, "C is not symmetric");
    }

  SpaceContext ctx;
  ctx.phase = phase;
  ctx.h = h;

  const cplx detB = phase.B.determinant();
  const double b_scale = std::pow(max_abs(phase.B), n);
  if (!(std::abs(detB) > 1e-12 * b_scale) || b_scale == 0.0)
    throw Error(Errc::SingularB, "det B = " + std::to_string(std::abs(detB)));
  if (detail::cond2(phase.B) > kMaxCondition)
    throw Error(Errc::SingularB, "B is too ill-conditioned");

  ctx.CR = phase.C.real();
  ctx.CI = phase.C.imag();
  Eigen::SelfAdjointEigenSolver<RMat> es(ctx.CI);
  const RVec ev = es.eigenvalues();
  if (!(ev.minCoeff() > 1e-10)) {
    std::ostringstream os;
    os << "C_I has eigenvalue " << ev.minCoeff();
    throw Error(Errc::NonPositiveCI, os.str());
  }
  if (ev.maxCoeff() / ev.minCoeff() > kMaxCondition) {
    std::ostringstream os;
    os << "C_I is too ill-conditioned (smallest eigenvalue " << ev.minCoeff() << ")";
    throw Error(Errc::NonPositiveCI, os.str());
  }
  const RMat& V = es.eigenvectors();
  ctx.CI_sqrt = V * ev.cwiseSqrt().asDiagonal() * V.transpose();
  ctx.CI_inv_sqrt = V * ev.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
  ctx.CI_inv = V * ev.cwiseInverse().asDiagonal() * V.transpose();

  const CMat& A = phase.A;
  const CMat& B = phase.B;
  const CMat CIinv = ctx.CI_inv.cast<cplx>();
  ctx.B_inv = B.inverse();
  ctx.BT_inv = B.transpose().inverse();

  ctx.PhiXXbar = B * CIinv * B.conjugate().transpose() / 4.0;
  ctx.PhiXXbar = (ctx.PhiXXbar + ctx.PhiXXbar.adjoint()).eval() / 2.0;
  ctx.PhiXX = -B * CIinv * B.transpose() / 4.0 - A / (2.0 * kI);
  ctx.PhiXX = (ctx.PhiXX + ctx.PhiXX.transpose()).eval() / 2.0;
  ctx.PhiXXbar_inv = ctx.PhiXXbar.inverse();
  ctx.PhiXbarX_inv = ctx.PhiXXbar.conjugate().inverse();

  ctx.R = ctx.CI_inv_sqrt.cast<cplx>() * B.transpose() / 2.0;
  ctx.R_inv = ctx.R.inverse();
  ctx.RT_inv = ctx.R.transpose().inverse();
  ctx.det_R2 = std::norm(ctx.R.determinant());

  const double detCI = ev.prod();
  ctx.Cphi = std::pow(2.0, -0.5 * n) * std::pow(kPi, -0.75 * n) * std::abs(detB) *
             std::pow(detCI, -0.25);
  ctx.CPhi = std::pow(2.0 / kPi, n) * ctx.PhiXXbar.determinant().real();

  // Consistency of the derived quantities.
  const double tol = 1e-12;
  const CMat RsR = ctx.R.adjoint() * ctx.R;
  if (max_abs(RsR - ctx.PhiXXbar.conjugate()) > tol * detail::rel_scale(ctx.PhiXXbar))
    throw Error(Errc::InvariantViolation, "R*R differs from conj(PhiXXbar)");
  const double CPhi_alt = std::pow(2.0 * kPi, -n) * std::norm(detB) / detCI;
  if (std::abs(ctx.CPhi - CPhi_alt) > tol * std::max(ctx.CPhi, CPhi_alt))
    throw Error(Errc::InvariantViolation, "the two forms of C_Phi disagree");
  Eigen::SelfAdjointEigenSolver<CMat> hs(ctx.PhiXXbar);
  if (!(hs.eigenvalues().minCoeff() > 0.0))
    throw Error(Errc::InvariantViolation, "PhiXXbar is not positive definite");
  return ctx;
}

/// Phi(X) = <X, PhiXXbar conj X> + Re <X, PhiXX X>.
inline double weight(const SpaceContext& ctx, const CVec& X) {
  const cplx herm = bilinear(X, ctx.PhiXXbar * X.conjugate());
  return herm.real() + bilinear(X, ctx.PhiXX * X).real();
}

/// Holomorphic polarization Psi(X, Y) with Psi(X, conj X) = Phi(X).
inline cplx polarized_weight(const SpaceContext& ctx, const CVec& X, const CVec& Y) {
  return bilinear(X, ctx.PhiXXbar * Y) + 0.5 * bilinear(X, ctx.PhiXX * X) +
         0.5 * bilinear(Y, ctx.PhiXX.conjugate() * Y);
}

/// The phase phi(X, y); y may be complex (analytic continuation).
inline cplx phase_function(const SpaceContext& ctx, const CVec& X, const CVec& y) {
  const auto& p = ctx.phase;
  return 0.5 * bilinear(X, p.A * X) + bilinear(X, p.B * y) + 0.5 * bilinear(y, p.C * y);
}

/// Linear canonical map of the transform, sending R^{2n} onto Lambda_Phi.
inline std::pair<CVec, CVec> canonical_map(const SpaceContext& ctx, const RVec& x, const RVec& xi) {
  const auto& p = ctx.phase;
  const CVec xc = x.cast<cplx>();
  const CVec w = ctx.BT_inv * (p.C * xc + xi.cast<cplx>());
  CVec X = -w;
  CVec Theta = p.B * xc - p.A.transpose() * w;
  return {std::move(X), std::move(Theta)};
}

/// Fiber coordinate of Lambda_Phi over X: (2/i) dPhi/dX.
inline CVec lagrangian_fiber(const SpaceContext& ctx, const CVec& X) {
  return (2.0 / kI) * (ctx.PhiXXbar * X.conjugate() + ctx.PhiXX * X);
}

// Standard phase fixtures.

/// phi(X,Y) = i beta (X^2/2 - 2XY + Y^2) in each coordinate: the classical Fock space.
inline PhaseMatrices fock_phase(double beta, int n = 1) {
  PhaseMatrices p;
  p.n = n;
  const CMat I = CMat::Identity(n, n);
  p.A = kI * beta * I;
  p.B = -2.0 * kI * beta * I;
  p.C = 2.0 * kI * beta * I;
  return p;
}

/// phi(X,Y) = i (X - Y)^2 / 2: the heat kernel transform.
inline PhaseMatrices heat_kernel_phase(int n = 1) {
  PhaseMatrices p;
  p.n = n;
  const CMat I = CMat::Identity(n, n);
  p.A = kI * I;
  p.B = -kI * I;
  p.C = kI * I;
  return p;
}

/// Seeded random admissible phase. Entries are O(1); C_I has eigenvalues in
/// [0.5, 2] and B is diagonally dominated so that it is well conditioned.
inline PhaseMatrices random_admissible_phase(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  auto rnd = [&](int r, int c) {
    CMat m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = cplx(u(gen), u(gen));
    return m;
  };
  PhaseMatrices p;
  p.n = n;
  const CMat a = rnd(n, n);
  p.A = a + a.transpose();
  p.B = rnd(n, n) + cplx(1.0, 0.7) * CMat::Identity(n, n);
  RMat q = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q(i, j) = u(gen);
  Eigen::HouseholderQR<RMat> qr(q + RMat::Identity(n, n));
  const RMat Q = qr.householderQ();
  RVec lam(n);
  for (int i = 0; i < n; ++i) lam(i) = 1.25 + 1.5 * u(gen);
  RMat ci = Q * lam.asDiagonal() * Q.transpose();
  ci = ((ci + ci.transpose()) / 2.0).eval();
  RMat cr(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cr(i, j) = u(gen);
  cr = (cr + cr.transpose()).eval();
  p.C = CMat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.C(i, j) = cplx(cr(i, j), ci(i, j));
  return p;
}

}  // namespace hphi
