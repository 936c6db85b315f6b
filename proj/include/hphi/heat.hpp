#pragma once

// Heat flow b_t = exp(t h Delta) b on symbols, the Berezin symbol b_1, and the
// modulated-Berezin-symbol integrability diagnostic.

#include <cmath>
#include <memory>
#include <vector>

#include "hphi/core.hpp"
#include "hphi/geometry.hpp"
#include "hphi/quadrature.hpp"
#include "hphi/symbols.hpp"

namespace hphi {

struct HeatParams {
  double t = 1.0;
  double radius_factor = 6.0;  // only used by sanity checks on callable sampling
  int order = 40;              // per-axis quadrature order for callable symbols
};

/// |(R^T)^{-1} lambda|^2, the frequency scale of the heat semigroup.
inline double heat_frequency2(const SpaceContext& ctx, const CVec& lambda) {
  return norm2(ctx.RT_inv * lambda);
}

/// exp(-t h |(R^T)^{-1} lambda|^2 / 8), the heat multiplier on exp(i Re <X, lambda>).
inline double heat_multiplier(const SpaceContext& ctx, const CVec& lambda, double t) {
  return std::exp(-t * ctx.h * heat_frequency2(ctx, lambda) / 8.0);
}

/// Gaussian smoothing with kernel C_Phi/(th)^n exp(-2|R(X-Y)|^2/(th)).
/// Closed form on plane waves; quadrature in W = R(X - Y) for callables.
inline Symbol heat_flow(const SpaceContext& ctx, const Symbol& b, const HeatParams& params) {
  const double t = params.t;
  if (!(t >= 0.0 && t <= 1.0)) throw Error(Errc::InvalidArgument, "heat time must lie in [0, 1]");
  if (t == 0.0) return b;
  if (b.is_plane_wave_sum()) {
    PlaneWaveSum s = b.plane_waves();
    for (auto& term : s.terms) term.c *= heat_multiplier(ctx, term.lambda, t);
    return Symbol(std::move(s));
  }
  if (!b.in_class_T() && !b.bounded())
    throw Error(Errc::UnsupportedSymbol, "heat flow of a callable needs a declared bound");
  const int n = ctx.n();
  auto rule = std::make_shared<const QuadratureRule>(gauss_hermite_rule(params.order));
  const CMat Rinv = ctx.R_inv;
  const double scale = std::sqrt(t * ctx.h / 2.0);
  const double norm = std::pow(kPi, -n);
  auto inner = b.callable();
  CallableSymbol c = inner;
  c.fn = [inner, rule, Rinv, scale, norm, n](const CVec& X) {
    const cplx v = integrate_gaussian(
        [&](std::span<const double> s) {
          CVec W(n);
          for (int j = 0; j < n; ++j) W(j) = scale * cplx(s[2 * j], s[2 * j + 1]);
          return inner.fn(X - Rinv * W);
        },
        2 * n, 1.0, *rule);
    return norm * v;
  };
  c.label = "heat(" + inner.label + ")";
  return Symbol(std::move(c));
}

inline Symbol heat_flow(const SpaceContext& ctx, const Symbol& b, double t) {
  HeatParams p;
  p.t = t;
  return heat_flow(ctx, b, p);
}

/// Berezin symbol b_1.
inline Symbol berezin_symbol(const SpaceContext& ctx, const Symbol& b) { return heat_flow(ctx, b, 1.0); }

/// Polarization of b_t for plane-wave b.
inline PolarizedSymbol polarize_heated(const SpaceContext& ctx, const Symbol& b, double t) {
  if (!b.is_plane_wave_sum()) throw Error(Errc::UnsupportedSymbol, "polarization needs a plane-wave symbol");
  return polarize(heat_flow(ctx, b, t));
}

// Grids over C^n.

/// Regular grid of points per complex coordinate over [-radius, radius]^2
/// (endpoints included), flattened lexicographically.
inline std::vector<CVec> complex_box_grid(int n, double radius, int points) {
  if (points < 1) throw Error(Errc::InvalidArgument, "grid needs at least one point per axis");
  std::vector<double> axis(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    axis[static_cast<std::size_t>(i)] = points == 1 ? 0.0 : -radius + 2.0 * radius * i / (points - 1);
  std::size_t total = 1;
  for (int d = 0; d < 2 * n; ++d) total *= static_cast<std::size_t>(points);
  std::vector<CVec> out;
  out.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t r = k;
    std::vector<double> c(static_cast<std::size_t>(2 * n));
    for (int d = 2 * n - 1; d >= 0; --d) {
      c[static_cast<std::size_t>(d)] = axis[r % static_cast<std::size_t>(points)];
      r /= static_cast<std::size_t>(points);
    }
    CVec X(n);
    for (int j = 0; j < n; ++j) X(j) = cplx(c[2 * j], c[2 * j + 1]);
    out.push_back(std::move(X));
  }
  return out;
}

/// Midpoint cells of side `spacing` tiling [-radius, radius]^{2n}.
struct CellGrid {
  std::vector<CVec> centers;
  double cell_volume = 0.0;
};

inline CellGrid complex_cell_grid(int n, double radius, double spacing) {
  if (!(spacing > 0.0) || !(radius > 0.0)) throw Error(Errc::InvalidArgument, "bad cell grid");
  const int cells = std::max(1, static_cast<int>(std::lround(2.0 * radius / spacing)));
  const double step = 2.0 * radius / cells;
  CellGrid g;
  g.cell_volume = std::pow(step, 2 * n);
  std::size_t total = 1;
  for (int d = 0; d < 2 * n; ++d) total *= static_cast<std::size_t>(cells);
  g.centers.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t r = k;
    std::vector<double> c(static_cast<std::size_t>(2 * n));
    for (int d = 2 * n - 1; d >= 0; --d) {
      c[static_cast<std::size_t>(d)] = -radius + step * (static_cast<double>(r % cells) + 0.5);
      r /= static_cast<std::size_t>(cells);
    }
    CVec X(n);
    for (int j = 0; j < n; ++j) X(j) = cplx(c[2 * j], c[2 * j + 1]);
    g.centers.push_back(std::move(X));
  }
  return g;
}

struct WienerDiagnostic {
  std::vector<double> g;  // g(lambda) per grid cell
  double l1_estimate = 0.0;
};

/// g(lambda) = sup_X |(b^lambda)_1(X)| exp(-h |(R^T)^{-1} lambda|^2 / 8), the sup
/// taken over X_grid (a sampled lower bound), and its Riemann sum over the cells.
inline WienerDiagnostic sw_diagnostic(const SpaceContext& ctx, const Symbol& b,
                                      const CellGrid& lambda_grid, const std::vector<CVec>& X_grid) {
  WienerDiagnostic d;
  d.g.resize(lambda_grid.centers.size());
  parallel_for(lambda_grid.centers.size(), [&](std::size_t i) {
    const CVec& lam = lambda_grid.centers[i];
    const Symbol berezin = berezin_symbol(ctx, modulate(b, lam));
    double sup = 0.0;
    for (const auto& X : X_grid) sup = std::max(sup, std::abs(eval(berezin, X)));
    d.g[i] = sup * std::exp(-ctx.h * heat_frequency2(ctx, lam) / 8.0);
  });
  std::vector<double> parts = d.g;
  d.l1_estimate = tree_reduce(std::move(parts), [](double a, double c) { return a + c; }) *
                  lambda_grid.cell_volume;
  return d;
}

}  // namespace hphi
