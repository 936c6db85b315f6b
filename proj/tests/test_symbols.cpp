#include <catch_amalgamated.hpp>

#include <functional>
#include <random>

#include "hphi/geometry.hpp"
#include "hphi/symbols.hpp"

using namespace hphi;
using Catch::Approx;

namespace {

using Fn = std::function<cplx(const CVec&)>;

CVec rand_cvec(std::mt19937_64& g, int n, double s = 1.0) {
  std::normal_distribution<double> d(0.0, s);
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(d(g), d(g));
  return v;
}

Symbol rand_planewaves(std::mt19937_64& g, int n, int terms) {
  PlaneWaveSum s{n, {}};
  for (int k = 0; k < terms; ++k) s.terms.push_back({rand_cvec(g, 1)(0), rand_cvec(g, n, 0.8)});
  return Symbol(std::move(s));
}

// Wirtinger derivatives by fourth-order central differences in x_j and y_j.
struct Oracle {
  double h = 1e-3;

  cplx partial(const Fn& f, const CVec& X, const CVec& e) const {
    return (-f(X + 2 * h * e) + 8.0 * f(X + h * e) - 8.0 * f(X - h * e) + f(X - 2 * h * e)) / (12 * h);
  }
  CVec unit(int n, int j, cplx dir) const {
    CVec e = CVec::Zero(n);
    e(j) = dir;
    return e;
  }
  cplx dX(const Fn& f, const CVec& X, int j) const {
    const int n = static_cast<int>(X.size());
    return 0.5 * (partial(f, X, unit(n, j, 1.0)) - kI * partial(f, X, unit(n, j, kI)));
  }
  cplx dXbar(const Fn& f, const CVec& X, int j) const {
    const int n = static_cast<int>(X.size());
    return 0.5 * (partial(f, X, unit(n, j, 1.0)) + kI * partial(f, X, unit(n, j, kI)));
  }
};

Fn as_fn(const Symbol& s) {
  return [s](const CVec& X) { return eval(s, X); };
}

}  // namespace

TEST_CASE("evaluation") {
  CVec X(1);
  X(0) = cplx(0.4, -2.0);
  CHECK(eval(Symbol::constant(1, 1.0), X) == cplx(1.0));
  CVec one(1);
  one(0) = 1.0;
  X(0) = kPi;
  CHECK(std::abs(eval(Symbol::cosine(one), X) + 1.0) < 1e-15);
  CVec lam(1);
  lam(0) = cplx(1, 1);
  X(0) = 1.0;
  CHECK(std::abs(eval(Symbol::plane_wave(cplx(0, 2), lam), X) - cplx(0, 2) * std::exp(kI)) < 1e-15);
  CallableSymbol nan{1, [](const CVec&) { return cplx(std::nan(""), 0.0); }, true, true, std::nullopt, "nan"};
  try {
    eval(Symbol(nan), X);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonFinite);
  }
}

TEST_CASE("canonicalization") {
  CVec l(1);
  l(0) = 0.5;
  PlaneWaveSum s{1, {{1.0, l}, {2.0, l}, {0.0, -l}, {3.0, CVec::Zero(1)}}};
  const Symbol b(s);
  REQUIRE(b.plane_waves().terms.size() == 2);
  const PlaneWaveSum again = canonicalize(b.plane_waves());
  REQUIRE(again.terms.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(again.terms[i].c == b.plane_waves().terms[i].c);
    CHECK(again.terms[i].lambda == b.plane_waves().terms[i].lambda);
  }
}

TEST_CASE("closed-form calculus matches finite differences") {
  std::mt19937_64 g(21);
  const Oracle o;
  for (const auto& phase : {fock_phase(1.0), heat_kernel_phase(), random_admissible_phase(2, 4)}) {
    const auto ctx = build_context(phase, 1.0);
    const int n = ctx.n();
    const CMat Pinv = ctx.PhiXbarX_inv;
    for (int trial = 0; trial < 4; ++trial) {
      const Symbol a = rand_planewaves(g, n, 3), b = rand_planewaves(g, n, 2);
      const Fn fa = as_fn(a), fb = as_fn(b);
      const Symbol q = q_form(ctx, a, b);
      const Symbol lap = laplace(ctx, b);
      for (int k = 0; k < 5; ++k) {
        const CVec X = rand_cvec(g, n);
        CVec da(n), dbb(n);
        for (int j = 0; j < n; ++j) {
          da(j) = o.dX(fa, X, j);
          dbb(j) = o.dXbar(fb, X, j);
        }
        const cplx ref = bilinear(da, Pinv * dbb);
        CHECK(std::abs(eval(q, X) - ref) < 1e-6 * std::max(1.0, std::abs(ref)));
        // Laplacian from nested first derivatives.
        cplx lref = 0.0;
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l) {
            const Fn dbar_l = [&, l](const CVec& Y) { return o.dXbar(fb, Y, l); };
            lref += 0.5 * Pinv(j, l) * o.dX(dbar_l, X, j);
          }
        CHECK(std::abs(eval(lap, X) - lref) < 1e-5 * std::max(1.0, std::abs(lref)));
      }
    }
  }
}

TEST_CASE("Q on the Fock phase") {
  const auto ctx = build_context(fock_phase(1.0), 1.0);
  CVec l(1), m(1);
  l(0) = cplx(0.7, 0.2);
  m(0) = cplx(-0.4, 0.9);
  const Symbol q = q_form(ctx, Symbol::plane_wave(1.0, l), Symbol::plane_wave(1.0, m));
  REQUIRE(q.plane_waves().terms.size() == 1);
  CHECK(std::abs(q.plane_waves().terms[0].c + l(0) * std::conj(m(0)) / 2.0) < 1e-15);
  CHECK(q_form(ctx, Symbol::constant(1, 2.0), Symbol::plane_wave(1.0, m)).plane_waves().terms.empty());
  CVec one(1);
  one(0) = 1.0;
  const Symbol lap = laplace(ctx, Symbol::plane_wave(1.0, one));
  CHECK(std::abs(lap.plane_waves().terms[0].c + 0.25) < 1e-15);
  CHECK(laplace(ctx, Symbol::constant(1, 5.0)).plane_waves().terms.empty());
}

TEST_CASE("Poisson bracket properties") {
  std::mt19937_64 g(2);
  const auto ctx = build_context(random_admissible_phase(2, 11), 0.5);
  for (int trial = 0; trial < 5; ++trial) {
    const Symbol a = rand_planewaves(g, 2, 3), b = rand_planewaves(g, 2, 3);
    const Symbol aa = poisson(ctx, a, a);
    const Symbol ab = poisson(ctx, a, b), ba = poisson(ctx, b, a);
    // Real-valued symbols: a + conj(a).
    const Symbol ra = a + conjugate(a), rb = b + conjugate(b);
    const Symbol rab = poisson(ctx, ra, rb);
    for (int k = 0; k < 10; ++k) {
      const CVec X = rand_cvec(g, 2);
      CHECK(std::abs(eval(aa, X)) < 1e-12);
      CHECK(std::abs(eval(ab, X) + eval(ba, X)) < 1e-12);
      CHECK(std::abs(eval(rab, X).imag()) < 1e-12 * std::max(1.0, std::abs(eval(rab, X))));
      CHECK(std::abs(eval(q_form(ctx, ra, ra), X).imag()) < 1e-12 * std::max(1.0, std::abs(eval(q_form(ctx, ra, ra), X))));
    }
  }
}

TEST_CASE("Q1 against second-order finite differences") {
  std::mt19937_64 g(33);
  const Oracle o;
  for (const auto& phase : {heat_kernel_phase(), random_admissible_phase(2, 6)}) {
    const auto ctx = build_context(phase, 1.0);
    const int n = ctx.n();
    const Symbol a = rand_planewaves(g, n, 2), b = rand_planewaves(g, n, 2);
    const Fn fa = as_fn(a), fb = as_fn(b);
    const Symbol q1 = q1_form(ctx, a, b);
    for (int k = 0; k < 5; ++k) {
      const CVec X = rand_cvec(g, n);
      CMat Ha(n, n), Hb(n, n);
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          const Fn da_l = [&, l](const CVec& Y) { return o.dX(fa, Y, l); };
          const Fn db_l = [&, l](const CVec& Y) { return o.dXbar(fb, Y, l); };
          Ha(j, l) = o.dX(da_l, X, j);
          Hb(j, l) = o.dXbar(db_l, X, j);
        }
      const CMat M = ctx.PhiXXbar_inv * Ha, N = ctx.PhiXbarX_inv * Hb;
      const cplx ref = (M.array() * N.array()).sum();
      CHECK(std::abs(eval(q1, X) - ref) < 1e-4 * std::max(1.0, std::abs(ref)));
    }
    CHECK(q1_form(ctx, Symbol::constant(n, 1.0), b).plane_waves().terms.empty());
  }
  // Not symmetric in general.
  const auto ctx = build_context(random_admissible_phase(1, 3), 1.0);
  CVec l(1), m(1);
  l(0) = cplx(1.0, 0.3);
  m(0) = cplx(-0.5, 0.8);
  const Symbol ab = q1_form(ctx, Symbol::plane_wave(1.0, l), Symbol::plane_wave(1.0, m));
  const Symbol ba = q1_form(ctx, Symbol::plane_wave(1.0, m), Symbol::plane_wave(1.0, l));
  CHECK(std::abs(ab.plane_waves().terms[0].c - ba.plane_waves().terms[0].c) > 1e-3);
}

TEST_CASE("callable fallback agrees with closed forms") {
  std::mt19937_64 g(17);
  const auto ctx = build_context(random_admissible_phase(1, 2), 1.0);
  const Symbol a = rand_planewaves(g, 1, 2), b = rand_planewaves(g, 1, 2);
  const Symbol ca = as_callable(a), cb = as_callable(b);
  for (int k = 0; k < 20; ++k) {
    const CVec X = rand_cvec(g, 1);
    const cplx q = eval(q_form(ctx, a, b), X);
    CHECK(std::abs(eval(q_form(ctx, ca, cb), X) - q) < 1e-6 * std::max(1.0, std::abs(q)));
    const cplx l = eval(laplace(ctx, b), X);
    CHECK(std::abs(eval(laplace(ctx, cb), X) - l) < 1e-5 * std::max(1.0, std::abs(l)));
  }
  CallableSymbol raw{1, [](const CVec& X) { return std::cos(X(0).real()); }, true, true, std::nullopt, "raw"};
  CHECK_THROWS_AS(q_form(ctx, Symbol(raw), b), Error);
}

TEST_CASE("modulation and translation") {
  std::mt19937_64 g(4);
  const Symbol b = rand_planewaves(g, 2, 3);
  const CVec lam = rand_cvec(g, 2);
  const Symbol back = modulate(modulate(b, lam), -lam);
  REQUIRE(back.plane_waves().terms.size() == b.plane_waves().terms.size());
  for (int k = 0; k < 10; ++k) {
    const CVec X = rand_cvec(g, 2);
    CHECK(std::abs(eval(back, X) - eval(b, X)) < 1e-13);
    CHECK(std::abs(eval(translate(b, lam), X) - eval(b, X + lam)) < 1e-13);
    CHECK(std::abs(eval(modulate(Symbol::constant(2, 1.0), lam), X) - std::exp(kI * bilinear(X, lam).real())) < 1e-15);
  }
  CHECK(std::abs(eval(translate(Symbol::constant(2, 3.0), lam), lam) - 3.0) < 1e-15);
  CVec one(1);
  one(0) = 1.0;
  const Symbol mc = modulate(Symbol::cosine(one), CVec::Constant(1, 0.25));
  std::vector<double> freqs;
  for (const auto& t : mc.plane_waves().terms) freqs.push_back(t.lambda(0).real());
  std::sort(freqs.begin(), freqs.end());
  CHECK(freqs == std::vector<double>{-0.75, 1.25});
}

TEST_CASE("polarization and the Guillemin substitution") {
  std::mt19937_64 g(9);
  std::normal_distribution<double> d;
  for (const auto& phase : {fock_phase(1.0), heat_kernel_phase(), random_admissible_phase(2, 8)}) {
    const auto ctx = build_context(phase, 1.0);
    const int n = ctx.n();
    const Symbol b = rand_planewaves(g, n, 3);
    const PolarizedSymbol pb = polarize(b);
    const GuilleminSymbol gs = guillemin_symbol(ctx, pb);
    for (int k = 0; k < 10; ++k) {
      const CVec X = rand_cvec(g, n);
      CHECK(std::abs(pb.eval(X, X.conjugate()) - eval(b, X)) < 1e-13);
      // On Lambda_Phi the second argument is conj X.
      CHECK(std::abs(gs.eval(X, lagrangian_fiber(ctx, X)) - eval(b, X)) < 1e-12);
      // Pulled-back waves agree with direct evaluation at kappa_T(x, xi).
      RVec x(n), xi(n);
      for (int j = 0; j < n; ++j) {
        x(j) = d(g);
        xi(j) = d(g);
      }
      const auto [KX, KT] = canonical_map(ctx, x, xi);
      cplx wave = 0.0;
      for (const auto& w : pull_back(ctx, gs))
        wave += w.c * std::exp(kI * (bilinear(x.cast<cplx>(), w.p) + bilinear(w.q, xi.cast<cplx>())));
      CHECK(std::abs(wave - gs.eval(KX, KT)) < 1e-12 * std::max(1.0, std::abs(wave)));
    }
    const GuilleminSymbol cs = guillemin_symbol(ctx, polarize(Symbol::constant(n, 2.0)));
    CHECK(std::abs(cs.eval(rand_cvec(g, n), rand_cvec(g, n)) - 2.0) < 1e-15);
  }
  CallableSymbol raw{1, [](const CVec&) { return cplx(1.0); }, true, true, std::nullopt, "raw"};
  CHECK_THROWS_AS(polarize(Symbol(raw)), Error);
}

TEST_CASE("plane-wave literal parsing") {
  const Symbol b = parse_plane_wave_literal(1, {{1.0, 0.5, 2.0, -1.0}});
  REQUIRE(b.plane_waves().terms.size() == 1);
  CHECK(b.plane_waves().terms[0].c == cplx(1.0, 0.5));
  CHECK(b.plane_waves().terms[0].lambda(0) == cplx(2.0, -1.0));
  CHECK_THROWS_AS(parse_plane_wave_literal(2, {{1.0, 0.0, 1.0}}), Error);
}
