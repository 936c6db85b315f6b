#pragma once

// Gauss-Hermite rules and tensor-product integration against Gaussian weights.

#include <cmath>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hphi/core.hpp"
#include "hphi/parallel.hpp"

namespace hphi {

struct QuadratureRule {
  int order = 0;
  std::vector<double> nodes;    // abscissae for the weight exp(-s^2)
  std::vector<double> weights;  // positive, summing to sqrt(pi)
};

inline constexpr int kMinOrder = 2;
inline constexpr int kMaxOrder = 256;

namespace detail {

// Orthonormal Hermite polynomials p_k w.r.t. exp(-x^2) at x; returns p_{n-1}
// and p_n, and accumulates sum_{k<n} p_k^2 into christoffel.
inline void hermite_orthonormal(int n, double x, double& pnm1, double& pn, double& christoffel) {
  double p_prev = 0.0;
  double p = std::pow(kPi, -0.25);
  christoffel = 0.0;
  for (int k = 0; k < n; ++k) {
    christoffel += p * p;
    const double next = std::sqrt(2.0 / (k + 1)) * x * p - std::sqrt(double(k) / (k + 1)) * p_prev;
    p_prev = p;
    p = next;
  }
  pnm1 = p_prev;
  pn = p;
}

}  // namespace detail

/// Gauss-Hermite rule by Golub-Welsch, polished by Newton steps on the
/// orthonormal three-term recurrence. Weights are the Christoffel numbers.
inline QuadratureRule gauss_hermite_rule(int order) {
  if (order < kMinOrder || order > kMaxOrder)
    throw Error(Errc::OrderOutOfRange, "order " + std::to_string(order) + " outside [2, 256]");
  const int n = order;
  RVec diag = RVec::Zero(n);
  RVec sub(n - 1);
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<RMat> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  RVec x = es.eigenvalues();

  QuadratureRule rule;
  rule.order = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double xi = x(i);
    for (int it = 0; it < 8; ++it) {
      double pnm1, pn, c;
      detail::hermite_orthonormal(n, xi, pnm1, pn, c);
      const double dpn = std::sqrt(2.0 * n) * pnm1;
      const double step = pn / dpn;
      xi -= step;
      if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(xi))) break;
    }
    rule.nodes[i] = xi;
  }
  // Exact symmetry about the origin.
  for (int i = 0; i < n / 2; ++i) {
    const double s = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    rule.nodes[i] = -s;
    rule.nodes[n - 1 - i] = s;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  for (int i = 0; i < n; ++i) {
    double pnm1, pn, c;
    detail::hermite_orthonormal(n, rule.nodes[i], pnm1, pn, c);
    rule.weights[i] = 1.0 / c;
  }
  for (int i = 0; i < n / 2; ++i) {
    const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  return rule;
}

/// Tensor-product grid over R^m, enumerated lexicographically (last axis fastest).
class TensorGrid {
 public:
  TensorGrid(const QuadratureRule& rule, int m) : rule_(&rule), m_(m) {
    size_ = 1;
    for (int d = 0; d < m; ++d) size_ *= static_cast<std::size_t>(rule.order);
  }

  std::size_t size() const { return size_; }
  int dim() const { return m_; }

  /// Writes the node for flat index k into out (length m) and returns its weight.
  double node(std::size_t k, std::span<double> out) const {
    const auto q = static_cast<std::size_t>(rule_->order);
    double w = 1.0;
    for (int d = m_ - 1; d >= 0; --d) {
      const std::size_t digit = k % q;
      k /= q;
      out[d] = rule_->nodes[digit];
      w *= rule_->weights[digit];
    }
    return w;
  }

 private:
  const QuadratureRule* rule_;
  int m_;
  std::size_t size_;
};

/// Approximates the integral over R^m of f(s) exp(-|s|^2 / sigma^2) ds. The
/// caller passes f without the Gaussian; the substitution s = sigma * node is
/// applied here. Summation order is fixed (see parallel.hpp).
template <class F>
cplx integrate_gaussian(F&& f, int m, double sigma, const QuadratureRule& rule) {
  if (m < 1) throw Error(Errc::InvalidArgument, "dimension must be positive");
  if (!(sigma > 0.0)) throw Error(Errc::InvalidArgument, "sigma must be positive");
  const TensorGrid grid(rule, m);
  const double scale = std::pow(sigma, m);
  const ChunkPlan plan = plan_chunks(grid.size());
  std::vector<cplx> parts(plan.chunks());
  parallel_for(plan.chunks(), [&](std::size_t c) {
    std::vector<double> s(static_cast<std::size_t>(m));
    cplx acc = 0.0;
    for (std::size_t k = plan.begin(c); k < plan.end(c); ++k) {
      const double w = grid.node(k, s);
      for (double& v : s) v *= sigma;
      const cplx val = cplx(f(std::span<const double>(s)));
      if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
        throw Error(Errc::NonFiniteSample, "integrand is not finite at a quadrature node");
      acc += w * val;
    }
    parts[c] = acc;
  });
  const cplx total = tree_reduce(std::move(parts), [](cplx a, cplx b) { return a + b; });
  return scale * total;
}

/// Complex-coordinate view of a tensor grid over R^{2n}: node k as s in C^n
/// with s_j = x_{2j} + i x_{2j+1}, together with its weight. The nodes are
/// those of exp(-|s|^2) on C^n.
struct ComplexGrid {
  int n = 0;
  std::vector<cplx> points;  // size() * n, row-major
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  const cplx* point(std::size_t k) const { return points.data() + k * static_cast<std::size_t>(n); }
};

inline ComplexGrid complex_grid(int n, const QuadratureRule& rule) {
  const TensorGrid grid(rule, 2 * n);
  ComplexGrid g;
  g.n = n;
  g.points.resize(grid.size() * static_cast<std::size_t>(n));
  g.weights.resize(grid.size());
  std::vector<double> s(static_cast<std::size_t>(2 * n));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    g.weights[k] = grid.node(k, s);
    for (int j = 0; j < n; ++j) g.points[k * n + j] = cplx(s[2 * j], s[2 * j + 1]);
  }
  return g;
}

/// Default per-axis orders: 60 for n = 1, 30 for n = 2, 12 beyond.
inline int default_order(int n) { return n <= 1 ? 60 : (n == 2 ? 30 : 12); }

}  // namespace hphi
