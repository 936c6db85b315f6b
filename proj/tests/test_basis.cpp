#include <catch_amalgamated.hpp>

#include <random>

#include "hphi/basis.hpp"

using namespace hphi;
using Catch::Approx;

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

CVec rand_cvec(std::mt19937_64& g, int n) {
  std::normal_distribution<double> d;
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(d(g), d(g));
  return v;
}

}  // namespace

TEST_CASE("multi-index enumeration") {
  CHECK(MultiIndexSet(2, 3).size() == 10);
  const MultiIndexSet z(1, 0);
  REQUIRE(z.size() == 1);
  CHECK(z[0] == MultiIndex{0});
  const MultiIndexSet s(3, 2);
  CHECK(s[0] == MultiIndex{0, 0, 0});
  CHECK(s[1] == MultiIndex{1, 0, 0});
  CHECK(s[2] == MultiIndex{0, 1, 0});
  CHECK(s[3] == MultiIndex{0, 0, 1});
  for (int n : {1, 2, 3, 4})
    for (int N : {0, 1, 5, 9}) {
      const MultiIndexSet m(n, N);
      CHECK(m.size() == static_cast<std::size_t>(binomial(N + n, n)));
      for (std::size_t i = 1; i < m.size(); ++i) CHECK(degree(m[i]) >= degree(m[i - 1]));
      for (std::size_t i = 0; i < m.size(); ++i) CHECK(m.index_of(m[i]) == i);
      // Lower truncations are prefixes.
      const MultiIndexSet lo(n, N / 2);
      CHECK(m.prefix_size(N / 2) == lo.size());
      for (std::size_t i = 0; i < lo.size(); ++i) CHECK(lo[i] == m[i]);
    }
  CHECK_THROWS_AS(MultiIndexSet(0, 3), Error);
}

TEST_CASE("basis element values") {
  const auto ctx = build_context(fock_phase(1.0), 1.0);
  std::mt19937_64 g(3);
  for (int k = 0; k < 10; ++k) {
    const CVec X = rand_cvec(g, 1);
    CHECK(std::abs(basis_eval(ctx, {0}, X) - 1.0 / std::sqrt(kPi)) < 1e-15);
  }
  for (std::uint64_t seed : {1u, 4u}) {
    const auto c = build_context(random_admissible_phase(2, seed), 0.6);
    CHECK(std::abs(basis_eval(c, {0, 0}, CVec::Zero(2)) - std::sqrt(c.CPhi / std::pow(c.h, 2))) < 1e-14);
  }
}

TEST_CASE("weight reduction identity") {
  std::mt19937_64 g(8);
  for (const auto& phase : {fock_phase(1.0), heat_kernel_phase()}) {
    for (double h : {1.0, 0.3}) {
      const auto ctx = build_context(phase, h);
      for (int a = 0; a < 6; ++a) {
        const CVec X = rand_cvec(g, 1);
        const double lhs = std::norm(basis_eval(ctx, {a}, X)) * std::exp(-2 * weight(ctx, X) / h);
        const double r2 = norm2(ctx.R * X);
        const double rhs = ctx.CPhi / h * std::pow(2.0 / h, a) / std::tgamma(a + 1.0) * std::pow(r2, a) *
                           std::exp(-2 * r2 / h);
        CHECK(lhs == Approx(rhs).epsilon(1e-11).margin(1e-300));
      }
    }
  }
}

TEST_CASE("Gram matrix is the identity") {
  const auto rule = gauss_hermite_rule(60);
  for (const auto& phase : {fock_phase(1.0), heat_kernel_phase(), random_admissible_phase(1, 7)}) {
    const auto ctx = build_context(phase, 1.0);
    const MultiIndexSet t(1, 10);
    const CMat G = gram_matrix(ctx, t, rule);
    CHECK(max_abs(G - CMat::Identity(G.rows(), G.cols())) < 1e-8);
  }
  const auto ctx = build_context(heat_kernel_phase(), 1.0);
  const CMat G0 = gram_matrix(ctx, MultiIndexSet(1, 0), rule);
  CHECK(std::abs(G0(0, 0) - 1.0) < 1e-13);
}

TEST_CASE("Gram matrix in two dimensions and degree grading") {
  const auto rule = gauss_hermite_rule(30);
  const auto ctx = build_context(random_admissible_phase(2, 3), 0.8);
  const MultiIndexSet t(2, 6);
  const CMat G = gram_matrix(ctx, t, rule);
  CHECK(max_abs(G - CMat::Identity(G.rows(), G.cols())) < 1e-6);
  double cross = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j)
      if (degree(t[i]) != degree(t[j])) cross = std::max(cross, std::abs(G(i, j)));
  CHECK(cross < 1e-12);
}

TEST_CASE("coefficient round trip") {
  // Expanding u_gamma against the basis by quadrature returns e_gamma.
  const auto ctx = build_context(heat_kernel_phase(), 1.0);
  const MultiIndexSet t(1, 8);
  const auto rule = gauss_hermite_rule(60);
  const CMat G = gram_matrix(ctx, t, rule);
  for (int gamma : {0, 3, 8}) {
    const HSpaceVector v = unit_vector(ctx, t, {gamma});
    const CVec coeffs = G.transpose() * v.coeffs;
    CHECK((coeffs - v.coeffs).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(v.norm() == 1.0);
    CVec X(1);
    X(0) = cplx(0.3, -0.2);
    CHECK(std::abs(v.eval(X) - basis_eval(ctx, {gamma}, X)) < 1e-15);
  }
}
