#include <catch_amalgamated.hpp>

#include <random>

#include "hphi/heat.hpp"

using namespace hphi;
using Catch::Approx;

namespace {

CVec c1(cplx z) {
  CVec v(1);
  v(0) = z;
  return v;
}

// C_Phi/(th) int exp(-2|R(X-Y)|^2/(th)) f(Y) L(dY) for n = 1, trapezoid rule on a
// square around X in Y coordinates.
cplx kernel_trapezoid(const SpaceContext& ctx, const std::function<cplx(const CVec&)>& f, const CVec& X, double t) {
  const double th = t * ctx.h;
  const double r = std::abs(ctx.R(0, 0));
  const double width = std::sqrt(th / 4.0) / r;  // standard deviation per real axis
  const double L = 10.0 * width;
  const int m = 200;
  const double step = 2 * L / m;
  cplx s = 0.0;
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) {
      const CVec Y = c1(X(0) + cplx(-L + i * step, -L + j * step));
      const double w = (i == 0 || i == m ? 0.5 : 1.0) * (j == 0 || j == m ? 0.5 : 1.0);
      s += w * std::exp(-2.0 * norm2(ctx.R * (X - Y)) / th) * f(Y);
    }
  return ctx.CPhi / th * s * step * step;
}

Symbol callable_of(const Symbol& b) {
  CallableSymbol c{b.dim(), [b](const CVec& X) { return eval(b, X); }, true, true, kDefaultFdStep, "c"};
  return Symbol(std::move(c));
}

}  // namespace

TEST_CASE("kernel has unit mass") {
  for (const auto& phase : {fock_phase(1.0), heat_kernel_phase(), random_admissible_phase(1, 5)})
    for (double h : {1.0, 0.1})
      for (double t : {0.25, 1.0}) {
        const auto ctx = build_context(phase, h);
        const cplx m = kernel_trapezoid(ctx, [](const CVec&) { return cplx(1.0); }, c1({0.3, -0.7}), t);
        CHECK(std::abs(m - 1.0) < 1e-10);
      }
}

TEST_CASE("constants and t = 0") {
  const auto ctx = build_context(fock_phase(1.0), 1.0);
  const Symbol three = Symbol::constant(1, 3.0);
  CHECK(std::abs(eval(heat_flow(ctx, three, 0.7), c1(2.0)) - 3.0) < 1e-15);
  CHECK(std::abs(eval(heat_flow(ctx, callable_of(three), 0.7), c1(2.0)) - 3.0) < 1e-12);
  const Symbol b = Symbol::cosine(c1(1.3));
  const Symbol b0 = heat_flow(ctx, b, 0.0);
  CHECK(b0.plane_waves().terms[0].c == b.plane_waves().terms[0].c);
  CHECK_THROWS_AS(heat_flow(ctx, b, 1.5), Error);
  CHECK_THROWS_AS(heat_flow(ctx, b, -0.1), Error);
}

TEST_CASE("damping factors") {
  const auto ctx = build_context(fock_phase(1.0), 1.0);
  const Symbol b1 = heat_flow(ctx, Symbol::plane_wave(1.0, c1(1.0)), 1.0);
  CHECK(b1.plane_waves().terms[0].c.real() == Approx(std::exp(-0.25)).epsilon(1e-14));
  const PolarizedSymbol p = polarize_heated(ctx, Symbol::plane_wave(1.0, c1(2.0)), 0.5);
  CHECK(p.terms[0].c.real() == Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(heat_multiplier(ctx, c1(1.0), 1.0) == Approx(std::exp(-0.25)).epsilon(1e-14));
  CHECK(polarize_heated(ctx, Symbol::constant(1, 1.0), 0.5).terms.size() == 1);
}

TEST_CASE("closed form against kernel quadrature") {
  const Symbol b = Symbol(PlaneWaveSum{1, {{cplx(0.5, 0.2), c1({1.0, 0.5})}, {cplx(-0.3, 0.4), c1({-0.7, 0.0})}}});
  for (const auto& phase : {fock_phase(1.0), heat_kernel_phase()})
    for (double h : {1.0, 0.1})
      for (double t : {0.25, 0.5, 1.0}) {
        const auto ctx = build_context(phase, h);
        const Symbol closed = heat_flow(ctx, b, t);
        const Symbol numeric = heat_flow(ctx, callable_of(b), t);
        for (const cplx x : {cplx(0.0), cplx(0.4, -1.1), cplx(-2.0, 0.6)}) {
          const CVec X = c1(x);
          const cplx ref = kernel_trapezoid(ctx, [&](const CVec& Y) { return eval(b, Y); }, X, t);
          CHECK(std::abs(eval(closed, X) - ref) < 1e-8);
          CHECK(std::abs(eval(numeric, X) - ref) < 1e-8);
        }
      }
}

TEST_CASE("semigroup") {
  const auto ctx = build_context(heat_kernel_phase(), 0.5);
  const Symbol b = Symbol(PlaneWaveSum{1, {{1.0, c1({1.0, 0.3})}, {cplx(0, 1), c1(-2.0)}}});
  const Symbol a = heat_flow(ctx, heat_flow(ctx, b, 0.3), 0.4);
  const Symbol c = heat_flow(ctx, b, 0.7);
  for (std::size_t i = 0; i < c.plane_waves().terms.size(); ++i)
    CHECK(std::abs(a.plane_waves().terms[i].c - c.plane_waves().terms[i].c) < 1e-15);
  HeatParams p;
  p.order = 30;
  p.t = 0.3;
  const Symbol cb = callable_of(b);
  const Symbol inner = heat_flow(ctx, cb, p);
  p.t = 0.4;
  const Symbol twice = heat_flow(ctx, inner, p);
  for (const cplx x : {cplx(0.2, 0.1), cplx(-1.0, 0.5)})
    CHECK(std::abs(eval(twice, c1(x)) - eval(c, c1(x))) < 1e-8);
}

TEST_CASE("contraction and translation commute") {
  std::mt19937_64 g(1);
  std::normal_distribution<double> d;
  const auto ctx = build_context(random_admissible_phase(1, 3), 0.8);
  const Symbol b = Symbol::cosine(c1({1.0, 0.4})) + Symbol::sine(c1({0.3, -1.0}));
  const auto grid = complex_box_grid(1, 6.0, 41);
  CHECK(sampled_sup(heat_flow(ctx, b, 0.6), grid) <= sampled_sup(b, grid) + 1e-10);
  const CVec lam = c1({0.7, -0.2});
  for (int k = 0; k < 10; ++k) {
    const CVec X = c1({d(g), d(g)});
    CHECK(std::abs(eval(heat_flow(ctx, translate(b, lam), 0.5), X) - eval(translate(heat_flow(ctx, b, 0.5), lam), X)) < 1e-13);
    CHECK(std::abs(polarize_heated(ctx, b, 0.5).eval(X, X.conjugate()) - eval(heat_flow(ctx, b, 0.5), X)) < 1e-13);
  }
}

TEST_CASE("Wiener diagnostic") {
  const auto ctx = build_context(fock_phase(1.0), 1.0);
  const auto X_grid = complex_box_grid(1, 6.0, 41);
  const CellGrid cells = complex_cell_grid(1, 6.0, 0.25);
  const WienerDiagnostic one = sw_diagnostic(ctx, Symbol::constant(1, 1.0), cells, X_grid);
  for (std::size_t i = 0; i < cells.centers.size(); i += 97)
    CHECK(one.g[i] == Approx(std::exp(-std::norm(cells.centers[i](0)) / 2)).epsilon(1e-12));
  CHECK(one.l1_estimate == Approx(2 * kPi).epsilon(1e-2));

  const CVec l0 = c1({0.8, 0.3});
  const WienerDiagnostic pw = sw_diagnostic(ctx, Symbol::plane_wave(1.0, l0), cells, X_grid);
  for (std::size_t i = 0; i < cells.centers.size(); i += 53) {
    const CVec& lam = cells.centers[i];
    const double ref = std::exp(-ctx.h * (heat_frequency2(ctx, lam + l0) + heat_frequency2(ctx, lam)) / 8.0);
    CHECK(std::abs(pw.g[i] - ref) < 1e-10);
  }
  // At lambda = 0 the weight is 1 and g is the sampled sup of b_1.
  CellGrid origin{{CVec::Zero(1)}, 1.0};
  const Symbol b = Symbol::cosine(c1(1.0));
  const WienerDiagnostic at0 = sw_diagnostic(ctx, b, origin, X_grid);
  CHECK(at0.g[0] == Approx(sampled_sup(berezin_symbol(ctx, b), X_grid)).epsilon(1e-15));
}
