#pragma once

// Galerkin matrices of Berezin-Toeplitz operators and Weyl unitaries over the
// basis u_alpha, operator norms, and the operator-level identity checks.
//
// Matrix convention: entries(beta, alpha) = <A u_alpha, u_beta>_{H_Phi}, so the
// matrix acts on coefficient vectors and products of matrices compose.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "hphi/basis.hpp"
#include "hphi/core.hpp"
#include "hphi/geometry.hpp"
#include "hphi/heat.hpp"
#include "hphi/quadrature.hpp"
#include "hphi/symbols.hpp"

namespace hphi {

struct Provenance {
  std::string what;
  double h = 0.0;
  int order = 0;
  int max_degree = 0;
};

struct OperatorMatrix {
  MultiIndexSet truncation;
  CMat entries;
  Provenance provenance;

  /// Leading block on degrees <= d.
  CMat leading_block(int d) const {
    const auto k = static_cast<Eigen::Index>(truncation.prefix_size(d));
    return entries.topLeftCorner(k, k);
  }
};

/// Toeplitz matrix of b, computed in W = RX coordinates:
///   (2/(pi h))^n (2/h)^{(|a|+|b|)/2} (a! b!)^{-1/2} int b(R^{-1}W) W^a conj(W)^b exp(-2|W|^2/h) L(dW).
inline OperatorMatrix toeplitz_matrix(const SpaceContext& ctx, const Symbol& b,
                                      const MultiIndexSet& trunc, const QuadratureRule& rule) {
  if (!b.in_class_T())
    throw Error(Errc::UnsupportedSymbol, "callable symbol is not declared to be in the symbol class");
  const int n = ctx.n();
  const ComplexGrid grid = complex_grid(n, rule);
  const double scale = std::sqrt(ctx.h / 2.0);
  const double norm = std::pow(kPi, -n);
  CMat M = assemble_sesquilinear(trunc, grid.size(), [&](std::size_t k, NodeSample& ns) {
    CVec W(n);
    for (int j = 0; j < n; ++j) {
      const cplx s = grid.point(k)[j];
      ns.a[static_cast<std::size_t>(j)] = ns.b[static_cast<std::size_t>(j)] = s;
      W(j) = scale * s;
    }
    ns.c = norm * grid.weights[k] * eval(b, ctx.R_inv * W);
  });
  return OperatorMatrix{trunc, std::move(M), {"toeplitz " + b.describe(), ctx.h, rule.order, trunc.max_degree()}};
}

/// Exponent of the Weyl unitary: [2 varphi(X, lambda) - varphi(lambda, lambda)] / h with
/// varphi(X, lambda) = <X, PhiXXbar conj lambda> + <X, PhiXX lambda>.
inline cplx weyl_exponent(const SpaceContext& ctx, const CVec& X, const CVec& lambda) {
  auto vphi = [&](const CVec& Z) {
    return bilinear(Z, ctx.PhiXXbar * lambda.conjugate()) + bilinear(Z, ctx.PhiXX * lambda);
  };
  return (2.0 * vphi(X) - vphi(lambda)) / ctx.h;
}

/// Applies W_lambda to a function on C^n: X -> exp(weyl_exponent) u(X - lambda).
template <class F>
cplx weyl_apply(const SpaceContext& ctx, const CVec& lambda, F&& u, const CVec& X) {
  return std::exp(weyl_exponent(ctx, X, lambda)) * u(X - lambda);
}

/// Matrix of W_lambda. The integrand of <W_lambda u_alpha, u_beta> is a
/// polynomial times exp(-2|W - nu/2|^2/h) times a unimodular factor, nu = R lambda,
/// so the Gauss-Hermite grid is centred at nu/2.
inline OperatorMatrix weyl_unitary_matrix(const SpaceContext& ctx, const CVec& lambda,
                                          const MultiIndexSet& trunc, const QuadratureRule& rule) {
  const int n = ctx.n();
  const double h = ctx.h;
  const ComplexGrid grid = complex_grid(n, rule);
  const double scale = std::sqrt(h / 2.0);
  const double root = std::sqrt(2.0 / h);
  const double norm = std::pow(kPi, -n);
  const CVec nu = ctx.R * lambda;
  CMat M = assemble_sesquilinear(trunc, grid.size(), [&](std::size_t k, NodeSample& ns) {
    CVec s(n);
    for (int j = 0; j < n; ++j) s(j) = grid.point(k)[j];
    const CVec W = 0.5 * nu + scale * s;
    const CVec X = ctx.R_inv * W;
    const CVec Xm = X - lambda;
    const CVec RXm = ctx.R * Xm;
    // Exponential parts of W_lambda, u_alpha(X - lambda), conj u_beta(X) and the weight,
    // divided by the Gauss-Hermite weight exp(-|s|^2).
    const cplx e = weyl_exponent(ctx, X, lambda) + bilinear(Xm, ctx.PhiXX * Xm) / h +
                   std::conj(bilinear(X, ctx.PhiXX * X)) / h - 2.0 * weight(ctx, X) / h + norm2(s);
    for (int j = 0; j < n; ++j) {
      ns.a[static_cast<std::size_t>(j)] = root * RXm(j);
      ns.b[static_cast<std::size_t>(j)] = root * W(j);
    }
    ns.c = norm * grid.weights[k] * std::exp(e);
  });
  return OperatorMatrix{trunc, std::move(M), {"weyl", h, rule.order, trunc.max_degree()}};
}

/// Largest singular value.
inline double operator_norm(const CMat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(M);
  return svd.singularValues()(0);
}

inline double operator_norm(const OperatorMatrix& M) { return operator_norm(M.entries); }

struct NormConvergence {
  double M_norm = 0.0;
  std::vector<std::pair<int, double>> table;
  bool converged = false;  // false is a warning, not an error
};

inline constexpr double kNormCauchyTol = 1e-3;

/// Compression norms along an increasing truncation schedule. Converged when
/// the last relative change is below 1e-3; a single-entry schedule never is.
inline NormConvergence norm_converged(const SpaceContext& ctx, const Symbol& b,
                                      const std::vector<int>& schedule, const QuadratureRule& rule) {
  if (schedule.empty()) throw Error(Errc::InvalidArgument, "empty truncation schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1]) throw Error(Errc::InvalidArgument, "schedule must increase");
  NormConvergence out;
  // One assembly at the largest degree; smaller truncations are leading blocks.
  const OperatorMatrix full = toeplitz_matrix(ctx, b, MultiIndexSet(ctx.n(), schedule.back()), rule);
  for (int N : schedule) out.table.emplace_back(N, operator_norm(full.leading_block(N)));
  out.M_norm = out.table.back().second;
  if (out.table.size() >= 2) {
    const double prev = out.table[out.table.size() - 2].second;
    const double rel = std::abs(out.M_norm - prev) / std::max(out.M_norm, 1e-300);
    out.converged = rel < kNormCauchyTol;
  }
  return out;
}

// Identity checks involving Weyl unitaries. Matrices entering products are
// assembled on degrees <= N + padding; residuals are read on degrees <= N - inner_drop.
struct IdentityCheckOptions {
  int inner_drop = 4;
  int padding = 16;
};

struct WeylIdentityReport {
  double adjoint = 0.0;       // max |Mat(W_l)^* - Mat(W_{-l})|
  double unitarity = 0.0;     // max |Mat(W_l)^* Mat(W_l) - I|
  double conjugation = 0.0;   // max |W^* T_b W - T_{b(.+l)}|
};

inline WeylIdentityReport weyl_identities(const SpaceContext& ctx, const Symbol& b, const CVec& lambda,
                                          int N, const QuadratureRule& rule,
                                          const IdentityCheckOptions& opt = {}) {
  const int inner = N - opt.inner_drop;
  if (inner < 0) throw Error(Errc::InvalidArgument, "truncation too small for the inner block");
  const MultiIndexSet big(ctx.n(), N + opt.padding);
  const auto k = static_cast<Eigen::Index>(big.prefix_size(inner));
  const OperatorMatrix W = weyl_unitary_matrix(ctx, lambda, big, rule);
  const OperatorMatrix Wm = weyl_unitary_matrix(ctx, -lambda, big, rule);
  const OperatorMatrix T = toeplitz_matrix(ctx, b, big, rule);
  const OperatorMatrix Tt = toeplitz_matrix(ctx, translate(b, lambda), big, rule);
  WeylIdentityReport r;
  r.adjoint = max_abs((W.entries.adjoint() - Wm.entries).topLeftCorner(k, k));
  const CMat WsW = W.entries.adjoint() * W.entries;
  r.unitarity = max_abs(WsW.topLeftCorner(k, k) - CMat::Identity(k, k));
  const CMat conj = W.entries.adjoint() * T.entries * W.entries;
  r.conjugation = max_abs((conj - Tt.entries).topLeftCorner(k, k));
  return r;
}

/// max | Mat(W)^* Mat(T_b) Mat(W) - Mat(T_{b(.+lambda)}) | on the inner block.
inline double weyl_conjugation_check(const SpaceContext& ctx, const Symbol& b, const CVec& lambda,
                                     int N, const QuadratureRule& rule,
                                     const IdentityCheckOptions& opt = {}) {
  return weyl_identities(ctx, b, lambda, N, rule, opt).conjugation;
}

/// Sum over |alpha| = k of the diagonal Toeplitz entries.
inline cplx diagonal_degree_sum(const OperatorMatrix& T, int k) {
  cplx s = 0.0;
  for (std::size_t i = T.truncation.prefix_size(k - 1); i < T.truncation.prefix_size(k); ++i)
    s += T.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
  return s;
}

/// C_Phi/h^n int (1/k!) (2|RY|^2/h)^k exp(-2|RY|^2/h) b(Y) L(dY), evaluated
/// directly in Y coordinates with the Gaussian factor exp(-2|RY|^2/h) divided out.
inline cplx diagonal_degree_integral(const SpaceContext& ctx, const Symbol& b, int k,
                                     const QuadratureRule& rule) {
  const int n = ctx.n();
  const double h = ctx.h;
  // Y = R^{-1} W, W = sqrt(h/2) s; the Jacobian and C_Phi combine to (h/2)^n (2/pi)^n / h^n.
  const double scale = std::sqrt(h / 2.0);
  const cplx v = integrate_gaussian(
      [&](std::span<const double> x) {
        CVec W(n);
        for (int j = 0; j < n; ++j) W(j) = scale * cplx(x[2 * j], x[2 * j + 1]);
        const CVec Y = ctx.R_inv * W;
        const double r = 2.0 * norm2(ctx.R * Y) / h;
        return std::exp(k * std::log(std::max(r, 1e-300)) - std::lgamma(k + 1.0)) * eval(b, Y);
      },
      2 * n, 1.0, rule);
  return ctx.CPhi / std::pow(h, n) / ctx.det_R2 * std::pow(h / 2.0, n) * v;
}

struct BoundRow {
  double t = 0.0;
  double lhs = 0.0;  // sampled sup |b_t|
  double rhs = 0.0;  // (1 + slack) M_N / (2t - 1)^n
  bool pass = false;
};

struct BoundReport {
  NormConvergence norms;
  double slack = 0.02;
  std::vector<BoundRow> rows;
  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return !rows.empty();
  }
};

inline constexpr double kDefaultBoundSlack = 0.02;

/// Checks sup|b_t| <= ||T_b|| / (2t-1)^n on t in (1/2, 1] with the compression
/// norm M_N in place of ||T_b|| and a relative slack for its one-sided error.
inline BoundReport bound_report(const SpaceContext& ctx, const Symbol& b, const std::vector<double>& t_grid,
                                const std::vector<CVec>& X_grid, const std::vector<int>& schedule,
                                const QuadratureRule& rule, double slack = kDefaultBoundSlack) {
  for (double t : t_grid)
    if (!(t > 0.5 && t <= 1.0)) throw Error(Errc::InvalidArgument, "t must lie in (1/2, 1]");
  if (!b.bounded()) throw Error(Errc::UnsupportedSymbol, "bound check needs a bounded symbol");
  BoundReport rep;
  rep.slack = slack;
  rep.norms = norm_converged(ctx, b, schedule, rule);
  for (double t : t_grid) {
    BoundRow row;
    row.t = t;
    row.lhs = sampled_sup(heat_flow(ctx, b, t), X_grid);
    row.rhs = rep.norms.M_norm * (1.0 + slack) / std::pow(2.0 * t - 1.0, ctx.n());
    row.pass = row.lhs <= row.rhs;
    rep.rows.push_back(row);
  }
  return rep;
}

struct DeformationResiduals {
  double r1 = 0.0;  // || T_a T_b - T_ab + (h/2) T_Q(a,b) ||
  double r2 = 0.0;  // || [T_a, T_b] - (ih/2) T_{a,b} ||
};

/// Both residual norms on the leading block of degrees <= N - inner_drop.
inline DeformationResiduals deformation_residuals(const SpaceContext& ctx, const Symbol& a, const Symbol& b,
                                                  const MultiIndexSet& trunc, const QuadratureRule& rule,
                                                  int inner_drop = 4) {
  if (!a.is_plane_wave_sum() || !b.is_plane_wave_sum())
    throw Error(Errc::UnsupportedSymbol, "deformation residuals need plane-wave symbols");
  const int inner = trunc.max_degree() - inner_drop;
  if (inner < 0) throw Error(Errc::InvalidArgument, "truncation too small for the inner block");
  const double h = ctx.h;
  const CMat Ta = toeplitz_matrix(ctx, a, trunc, rule).entries;
  const CMat Tb = toeplitz_matrix(ctx, b, trunc, rule).entries;
  const CMat Tab = toeplitz_matrix(ctx, multiply(a, b), trunc, rule).entries;
  const CMat TQ = toeplitz_matrix(ctx, q_form(ctx, a, b), trunc, rule).entries;
  const CMat TP = toeplitz_matrix(ctx, poisson(ctx, a, b), trunc, rule).entries;
  const auto k = static_cast<Eigen::Index>(trunc.prefix_size(inner));
  const CMat AB = Ta * Tb;
  const CMat BA = Tb * Ta;
  const CMat D1 = AB - Tab + (h / 2.0) * TQ;
  const CMat D2 = AB - BA - (kI * h / 2.0) * TP;
  return {operator_norm(CMat(D1.topLeftCorner(k, k))), operator_norm(CMat(D2.topLeftCorner(k, k)))};
}

struct DeformationSweep {
  std::vector<double> h;
  std::vector<DeformationResiduals> residuals;
  double slope_r1 = std::numeric_limits<double>::quiet_NaN();
  double slope_r2 = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr double kSlopeFloor = 1e-12;

/// Least-squares slope of log r against log h; NaN when any residual is at
/// round-off level (below kSlopeFloor), where the fit has no meaning.
inline double loglog_slope(const std::vector<double>& h, const std::vector<double>& r) {
  const std::size_t m = h.size();
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(r[i] > kSlopeFloor)) return std::numeric_limits<double>::quiet_NaN();
    const double x = std::log(h[i]), y = std::log(r[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = m * sxx - sx * sx;
  return (m * sxy - sx * sy) / den;
}

/// Residuals over a decreasing h list, one fresh context per h.
inline DeformationSweep deformation_sweep(const PhaseMatrices& phase, const Symbol& a, const Symbol& b,
                                          const std::vector<double>& h_list, const MultiIndexSet& trunc,
                                          const QuadratureRule& rule, int inner_drop = 4) {
  if (h_list.size() < 4) throw Error(Errc::InvalidArgument, "h sweep needs at least four values");
  for (std::size_t i = 1; i < h_list.size(); ++i)
    if (!(h_list[i] < h_list[i - 1])) throw Error(Errc::InvalidArgument, "h values must strictly decrease");
  DeformationSweep out;
  std::vector<double> r1, r2;
  for (double h : h_list) {
    const SpaceContext ctx = build_context(phase, h);
    const auto r = deformation_residuals(ctx, a, b, trunc, rule, inner_drop);
    out.h.push_back(h);
    out.residuals.push_back(r);
    r1.push_back(r.r1);
    r2.push_back(r.r2);
  }
  out.slope_r1 = loglog_slope(out.h, r1);
  out.slope_r2 = loglog_slope(out.h, r2);
  return out;
}

}  // namespace hphi
