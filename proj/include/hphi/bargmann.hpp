#pragma once

// The transform T: L^2(R^n) -> H_Phi, its adjoint, the projector TT*, real
// side Weyl operators of plane waves, and the combined Egorov check.
//
// Functions on C^n that grow like exp(Phi/h) are handled in scaled form:
// a "scaled" value is exp(-Phi(X)/h) times the actual value.

#include <cmath>
#include <functional>
#include <vector>

#include "hphi/basis.hpp"
#include "hphi/core.hpp"
#include "hphi/geometry.hpp"
#include "hphi/heat.hpp"
#include "hphi/parallel.hpp"
#include "hphi/quadrature.hpp"
#include "hphi/symbols.hpp"

namespace hphi {

/// u(y) = amplitude * exp(i <p0, y>) * exp(-|y - y0|^2 / (2 width^2)); the
/// same formula continues u to complex y.
struct GaussianTestFn {
  RVec center;
  double width = 1.0;
  RVec modulation;
  cplx amplitude = 1.0;

  int dim() const { return static_cast<int>(center.size()); }

  cplx operator()(const CVec& y) const {
    if (!(width > 0.0)) throw Error(Errc::InvalidArgument, "Gaussian width must be positive");
    const CVec d = y - center.cast<cplx>();
    const cplx e = kI * bilinear(modulation.cast<cplx>(), y) - bilinear(d, d) / (2.0 * width * width);
    return amplitude * std::exp(e);
  }

  cplx operator()(const RVec& y) const { return (*this)(CVec(y.cast<cplx>())); }

  double l1_norm() const { return std::abs(amplitude) * std::pow(2.0 * kPi, 0.5 * dim()) * std::pow(width, dim()); }
};

using RealFunction = std::function<cplx(const RVec&)>;
using ScaledFunction = std::function<cplx(const CVec&)>;

/// Centre -CI^{-1} Im(B^T X) of the y-Gaussian in the transform integral.
inline RVec transform_center(const SpaceContext& ctx, const CVec& X) {
  const RVec im = (ctx.phase.B.transpose() * X).imag();
  return -ctx.CI_inv * im;
}

/// exp(-Phi(X)/h) Tu(X) with Tu(X) = C_phi h^{-3n/4} int exp(i phi(X, y)/h) u(y) dy.
/// The modulus of exp(i phi/h) is exp(Phi(X)/h) times a Gaussian in y around
/// transform_center(X) with covariance h CI^{-1}; quadrature runs in those coordinates.
inline cplx bargmann_transform_scaled(const SpaceContext& ctx, const RealFunction& u, const CVec& X,
                                      const QuadratureRule& rule) {
  const int n = ctx.n();
  const double h = ctx.h;
  const RVec yc = transform_center(ctx, X);
  const double root = std::sqrt(2.0 * h);
  const double phi_x = weight(ctx, X);
  const double jac = std::pow(root, n) * ctx.CI_inv_sqrt.determinant();
  const cplx v = integrate_gaussian(
      [&](std::span<const double> s) {
        RVec sv(n);
        for (int j = 0; j < n; ++j) sv(j) = s[j];
        const RVec y = yc + root * (ctx.CI_inv_sqrt * sv);
        const cplx e = kI * phase_function(ctx, X, y.cast<cplx>()) / h - phi_x / h + sv.squaredNorm();
        return std::exp(e) * u(y);
      },
      n, 1.0, rule);
  return ctx.Cphi * std::pow(h, -0.75 * n) * jac * v;
}

inline cplx bargmann_transform_scaled(const SpaceContext& ctx, const GaussianTestFn& u, const CVec& X,
                                      const QuadratureRule& rule) {
  return bargmann_transform_scaled(ctx, RealFunction([&u](const RVec& y) { return u(y); }), X, rule);
}

/// Tu(X).
inline cplx bargmann_transform(const SpaceContext& ctx, const GaussianTestFn& u, const CVec& X,
                               const QuadratureRule& rule) {
  return std::exp(weight(ctx, X) / ctx.h) * bargmann_transform_scaled(ctx, u, X, rule);
}

inline cplx bargmann_transform(const SpaceContext& ctx, const RealFunction& u, const CVec& X,
                               const QuadratureRule& rule) {
  return std::exp(weight(ctx, X) / ctx.h) * bargmann_transform_scaled(ctx, u, X, rule);
}

/// exp(-Phi(X)/h) u_alpha(X), computed without forming exp(Phi/h).
inline cplx basis_eval_scaled(const SpaceContext& ctx, const MultiIndex& alpha, const CVec& X) {
  const int n = ctx.n();
  const double h = ctx.h;
  const int k = degree(alpha);
  const double log_norm =
      0.5 * (std::log(ctx.CPhi) - n * std::log(h) + k * std::log(2.0 / h) - log_factorial(alpha));
  const CVec W = ctx.R * X;
  cplx mono = 1.0;
  for (int j = 0; j < n; ++j) mono *= std::pow(W(j), alpha[static_cast<std::size_t>(j)]);
  return std::exp(log_norm + bilinear(X, ctx.PhiXX * X) / h - weight(ctx, X) / h) * mono;
}

inline cplx eval_scaled(const HSpaceVector& v, const CVec& X) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < v.truncation.size(); ++i) {
    const cplx c = v.coeffs(static_cast<Eigen::Index>(i));
    if (c != 0.0) s += c * basis_eval_scaled(*v.ctx, v.truncation[i], X);
  }
  return s;
}

/// (T* v)(y) = C_phi h^{-3n/4} int conj(exp(i phi(X, y)/h)) v(X) exp(-2 Phi(X)/h) L(dX),
/// integrated in W = RX with W = sqrt(h) s.
inline cplx bargmann_adjoint_apply(const SpaceContext& ctx, const HSpaceVector& v, const RVec& y,
                                   const QuadratureRule& rule) {
  const int n = ctx.n();
  const double h = ctx.h;
  const double root = std::sqrt(h);
  const CVec yc = y.cast<cplx>();
  const cplx total = integrate_gaussian(
      [&](std::span<const double> s) {
        CVec W(n);
        for (int j = 0; j < n; ++j) W(j) = root * cplx(s[2 * j], s[2 * j + 1]);
        const CVec X = ctx.R_inv * W;
        const double phi = weight(ctx, X);
        const cplx e = std::conj(kI * phase_function(ctx, X, yc)) / h - phi / h + norm2(W) / h;
        return std::exp(e) * eval_scaled(v, X);
      },
      2 * n, 1.0, rule);
  const double jac = std::pow(h, n) / ctx.det_R2;
  return ctx.Cphi * std::pow(h, -0.75 * n) * jac * total;
}

/// Scaled value at X of TT*(b g) = C_Phi/h^n int exp([2 Psi(X, conj Y) - 2 Phi(Y)]/h) b(Y) g(Y) L(dY),
/// g given in scaled form. The modulus of the combined exponential is
/// exp(-|R(X - Y)|^2/h) after scaling, so Y = X + R^{-1} sqrt(h) s.
inline cplx toeplitz_apply_scaled(const SpaceContext& ctx, const Symbol& b, const ScaledFunction& g,
                                  const CVec& X, const QuadratureRule& rule) {
  const int n = ctx.n();
  const double h = ctx.h;
  const double root = std::sqrt(h);
  const double phi_x = weight(ctx, X);
  const cplx total = integrate_gaussian(
      [&](std::span<const double> s) {
        CVec W(n);
        for (int j = 0; j < n; ++j) W(j) = root * cplx(s[2 * j], s[2 * j + 1]);
        const CVec Y = X + ctx.R_inv * W;
        const double phi_y = weight(ctx, Y);
        const cplx e = (2.0 * polarized_weight(ctx, X, Y.conjugate()) - phi_y - phi_x) / h + norm2(W) / h;
        return std::exp(e) * eval(b, Y) * g(Y);
      },
      2 * n, 1.0, rule);
  return ctx.CPhi / ctx.det_R2 * total;
}

/// Scaled value of TT* g at X.
inline cplx projector_apply_scaled(const SpaceContext& ctx, const ScaledFunction& g, const CVec& X,
                                   const QuadratureRule& rule) {
  return toeplitz_apply_scaled(ctx, Symbol::constant(ctx.n(), 1.0), g, X, rule);
}

/// <f, g>_{H_Phi} = int f conj(g) exp(-2 Phi/h) L(dX) for scaled f, g, integrated
/// in W = RX around `center` with W - R center = spread sqrt(h) s.
inline cplx hphi_inner_scaled(const SpaceContext& ctx, const ScaledFunction& f, const ScaledFunction& g,
                              const QuadratureRule& rule, const CVec& center, double spread = 0.5) {
  const int n = ctx.n();
  const double step = spread * std::sqrt(ctx.h);
  const cplx total = integrate_gaussian(
      [&](std::span<const double> s) {
        CVec S(n);
        for (int j = 0; j < n; ++j) S(j) = cplx(s[2 * j], s[2 * j + 1]);
        const CVec X = center + ctx.R_inv * (step * S);
        return f(X) * std::conj(g(X)) * std::exp(norm2(S));
      },
      2 * n, 1.0, rule);
  return std::pow(step, 2 * n) / ctx.det_R2 * total;
}

/// <Tu, Tv>_{H_Phi} by quadrature, for comparison with <u, v>_{L^2}.
inline cplx transform_inner(const SpaceContext& ctx, const GaussianTestFn& u, const GaussianTestFn& v,
                            const QuadratureRule& outer, const QuadratureRule& inner, double spread = 0.5) {
  auto tu = [&](const CVec& X) { return bargmann_transform_scaled(ctx, u, X, inner); };
  auto tv = [&](const CVec& X) { return bargmann_transform_scaled(ctx, v, X, inner); };
  return hphi_inner_scaled(ctx, tu, tv, outer, CVec::Zero(ctx.n()), spread);
}

/// Op_h^W of exp(i(<x, p> + <q, xi>)) applied to a Gaussian:
/// exp(i<x, p> + i h <q, p>/2) u(x + h q), continued analytically for complex q.
inline cplx real_weyl_planewave_apply(double h, const CVec& p, const CVec& q, const GaussianTestFn& u,
                                      const RVec& x) {
  const CVec xc = x.cast<cplx>();
  return std::exp(kI * bilinear(xc, p) + 0.5 * kI * h * bilinear(q, p)) * u(CVec(xc + h * q));
}

/// Plane-wave terms of the Guillemin symbol of b_{1/2} pulled back to R^{2n}.
inline std::vector<PhaseSpaceWave> egorov_waves(const SpaceContext& ctx, const Symbol& b) {
  return pull_back(ctx, guillemin_symbol(ctx, polarize_heated(ctx, b, 0.5)));
}

struct EgorovPoint {
  CVec X;
  cplx lhs_scaled;  // exp(-Phi/h) (T_b T u)(X)
  cplx rhs_scaled;  // exp(-Phi/h) T(Op_h^W(...) u)(X)
  double rel_error = 0.0;
};

struct EgorovReport {
  std::vector<EgorovPoint> points;
  double max_rel_error = 0.0;
};

/// Compares T_b(Tu) with T(Op_h^W(b'_{1/2} o kappa_T) u) on X_grid. The relative
/// error |L - R|/(1 + |L|) is evaluated from scaled values.
inline EgorovReport egorov_guillemin_report(const SpaceContext& ctx, const Symbol& b, const GaussianTestFn& u,
                                            const std::vector<CVec>& X_grid, const QuadratureRule& rule) {
  if (!b.is_plane_wave_sum()) throw Error(Errc::UnsupportedSymbol, "Egorov check needs a plane-wave symbol");
  const auto waves = egorov_waves(ctx, b);
  const double h = ctx.h;
  RealFunction op_u = [&](const RVec& x) {
    cplx s = 0.0;
    for (const auto& w : waves) s += w.c * real_weyl_planewave_apply(h, w.p, w.q, u, x);
    return s;
  };
  ScaledFunction tu = [&](const CVec& Y) { return bargmann_transform_scaled(ctx, u, Y, rule); };
  EgorovReport rep;
  rep.points.resize(X_grid.size());
  parallel_for(X_grid.size(), [&](std::size_t i) {
    const CVec& X = X_grid[i];
    EgorovPoint pt{X, toeplitz_apply_scaled(ctx, b, tu, X, rule), bargmann_transform_scaled(ctx, op_u, X, rule)};
    const double damp = std::exp(-weight(ctx, X) / h);
    pt.rel_error = std::abs(pt.lhs_scaled - pt.rhs_scaled) / (damp + std::abs(pt.lhs_scaled));
    rep.points[i] = std::move(pt);
  });
  for (const auto& p : rep.points) rep.max_rel_error = std::max(rep.max_rel_error, p.rel_error);
  return rep;
}

inline double egorov_guillemin_check(const SpaceContext& ctx, const Symbol& b, const GaussianTestFn& u,
                                     const std::vector<CVec>& X_grid, const QuadratureRule& rule) {
  return egorov_guillemin_report(ctx, b, u, X_grid, rule).max_rel_error;
}

}  // namespace hphi
