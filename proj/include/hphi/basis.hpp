#pragma once

// Graded monomial basis u_alpha of H_Phi and sesquilinear Galerkin assembly.
//
// Elements of H_Phi are carried as coefficient vectors over u_alpha. Inner
// products against the basis are evaluated in W = RX coordinates, where the
// weight exp(-2 Phi / h) combined with the exponential factors of u_alpha and
// conj(u_beta) collapses to exp(-2 |W|^2 / h).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "hphi/core.hpp"
#include "hphi/geometry.hpp"
#include "hphi/parallel.hpp"
#include "hphi/quadrature.hpp"

namespace hphi {

using MultiIndex = std::vector<int>;

inline int degree(const MultiIndex& a) {
  int d = 0;
  for (int v : a) d += v;
  return d;
}

/// All multi-indices of length n with |alpha| <= N, graded by degree and, within
/// a degree, ordered with larger leading entries first. Every lower truncation
/// is a prefix of this list.
class MultiIndexSet {
 public:
  MultiIndexSet() = default;
  MultiIndexSet(int n, int N) : n_(n), N_(N) {
    if (n < 1 || N < 0) throw Error(Errc::InvalidArgument, "need n >= 1 and N >= 0");
    MultiIndex cur(static_cast<std::size_t>(n), 0);
    for (int d = 0; d <= N; ++d) {
      degree_start_.push_back(indices_.size());
      fill(cur, 0, d);
    }
    degree_start_.push_back(indices_.size());
    for (std::size_t i = 0; i < indices_.size(); ++i) lookup_[indices_[i]] = i;
  }

  int n() const { return n_; }
  int max_degree() const { return N_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  /// Number of leading indices with degree <= d.
  std::size_t prefix_size(int d) const {
    if (d < 0) return 0;
    return degree_start_[static_cast<std::size_t>(std::min(d, N_) + 1)];
  }

  std::size_t index_of(const MultiIndex& a) const {
    auto it = lookup_.find(a);
    if (it == lookup_.end()) throw Error(Errc::InvalidArgument, "multi-index outside truncation");
    return it->second;
  }

  bool contains(const MultiIndex& a) const { return lookup_.count(a) != 0; }

 private:
  void fill(MultiIndex& cur, int pos, int remaining) {
    if (pos == n_ - 1) {
      cur[static_cast<std::size_t>(pos)] = remaining;
      indices_.push_back(cur);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      cur[static_cast<std::size_t>(pos)] = v;
      fill(cur, pos + 1, remaining - v);
    }
    cur[static_cast<std::size_t>(pos)] = 0;
  }

  int n_ = 0;
  int N_ = 0;
  std::vector<MultiIndex> indices_;
  std::vector<std::size_t> degree_start_;
  std::map<MultiIndex, std::size_t> lookup_;
};

inline MultiIndexSet enumerate_multiindices(int n, int N) { return MultiIndexSet(n, N); }

inline double log_factorial(const MultiIndex& a) {
  double s = 0.0;
  for (int v : a) s += std::lgamma(v + 1.0);
  return s;
}

/// u_alpha(X) = {C_Phi/h^n * 2^|a| / (a! h^|a|)}^{1/2} (RX)^alpha exp(<X, PhiXX X>/h).
inline cplx basis_eval(const SpaceContext& ctx, const MultiIndex& alpha, const CVec& X) {
  const int n = ctx.n();
  const double h = ctx.h;
  const int k = degree(alpha);
  const double log_norm =
      0.5 * (std::log(ctx.CPhi) - n * std::log(h) + k * std::log(2.0 / h) - log_factorial(alpha));
  const CVec W = ctx.R * X;
  cplx mono = 1.0;
  for (int j = 0; j < n; ++j) mono *= std::pow(W(j), alpha[static_cast<std::size_t>(j)]);
  const cplx expo = bilinear(X, ctx.PhiXX * X) / h;
  return std::exp(log_norm + expo) * mono;
}

/// Coefficient representation of an element of H_Phi.
struct HSpaceVector {
  const SpaceContext* ctx = nullptr;
  MultiIndexSet truncation;
  CVec coeffs;

  double norm() const { return coeffs.norm(); }

  cplx eval(const CVec& X) const {
    cplx s = 0.0;
    for (std::size_t i = 0; i < truncation.size(); ++i)
      if (coeffs(static_cast<Eigen::Index>(i)) != 0.0)
        s += coeffs(static_cast<Eigen::Index>(i)) * basis_eval(*ctx, truncation[i], X);
    return s;
  }
};

inline HSpaceVector unit_vector(const SpaceContext& ctx, const MultiIndexSet& trunc,
                                const MultiIndex& alpha) {
  HSpaceVector v{&ctx, trunc, CVec::Zero(static_cast<Eigen::Index>(trunc.size()))};
  v.coeffs(static_cast<Eigen::Index>(trunc.index_of(alpha))) = 1.0;
  return v;
}

/// Per-node data for sesquilinear assembly: the entry is
///   M[beta, alpha] = sum_k c_k * a_k^alpha / sqrt(alpha!) * conj(b_k^beta / sqrt(beta!)).
struct NodeSample {
  std::vector<cplx> a;  // length n
  std::vector<cplx> b;  // length n
  cplx c = 0.0;
};

namespace detail {

// Rows of normalized monomials z^alpha / sqrt(alpha!) for one node.
inline void monomial_row(const MultiIndexSet& trunc, const std::vector<cplx>& z,
                         std::vector<cplx>& powers, cplx* out, std::ptrdiff_t stride) {
  const int n = trunc.n();
  const int N = trunc.max_degree();
  powers.assign(static_cast<std::size_t>(n * (N + 1)), 0.0);
  for (int j = 0; j < n; ++j) {
    cplx* p = powers.data() + j * (N + 1);
    p[0] = 1.0;
    for (int d = 1; d <= N; ++d) p[d] = p[d - 1] * z[static_cast<std::size_t>(j)] / std::sqrt(double(d));
  }
  for (std::size_t i = 0; i < trunc.size(); ++i) {
    cplx v = 1.0;
    const MultiIndex& a = trunc[i];
    for (int j = 0; j < n; ++j) v *= powers[static_cast<std::size_t>(j * (N + 1) + a[static_cast<std::size_t>(j)])];
    out[static_cast<std::ptrdiff_t>(i) * stride] = v;
  }
}

}  // namespace detail

/// Assembles the sesquilinear sum over `count` nodes described by sample(k, out).
/// Chunks are fixed by the node count; partial matrices are tree-reduced.
template <class Sampler>
CMat assemble_sesquilinear(const MultiIndexSet& trunc, std::size_t count, Sampler&& sample) {
  const auto dim = static_cast<Eigen::Index>(trunc.size());
  const ChunkPlan plan = plan_chunks(count, 128, 512);
  std::vector<CMat> parts(plan.chunks());
  parallel_for(plan.chunks(), [&](std::size_t c) {
    const std::size_t lo = plan.begin(c);
    const auto len = static_cast<Eigen::Index>(plan.end(c) - lo);
    CMat Am(len, dim), Bm(len, dim);
    NodeSample ns;
    ns.a.resize(static_cast<std::size_t>(trunc.n()));
    ns.b.resize(static_cast<std::size_t>(trunc.n()));
    std::vector<cplx> powers;
    for (Eigen::Index r = 0; r < len; ++r) {
      sample(lo + static_cast<std::size_t>(r), ns);
      if (!std::isfinite(ns.c.real()) || !std::isfinite(ns.c.imag()))
        throw Error(Errc::NonFiniteSample, "assembly weight is not finite");
      detail::monomial_row(trunc, ns.a, powers, &Am(r, 0), Am.outerStride());
      detail::monomial_row(trunc, ns.b, powers, &Bm(r, 0), Bm.outerStride());
      Am.row(r) *= ns.c;
    }
    parts[c] = Bm.adjoint() * Am;
  });
  if (parts.empty()) return CMat::Zero(dim, dim);
  return tree_reduce(std::move(parts), [](const CMat& x, const CMat& y) -> CMat { return x + y; });
}

/// Gram matrix G[alpha, beta] = <u_alpha, u_beta>_{H_Phi}. The integrand is
/// built from basis_eval's ingredients (RX, the PhiXX exponent and the weight
/// Phi) at X = R^{-1} W, so the geometry itself is exercised.
inline CMat gram_matrix(const SpaceContext& ctx, const MultiIndexSet& trunc,
                        const QuadratureRule& rule) {
  const int n = ctx.n();
  const double h = ctx.h;
  const ComplexGrid grid = complex_grid(n, rule);
  const double scale_w = std::sqrt(h / 2.0);
  // L(dX) = |det R|^{-2} (h/2)^n L(ds); prefactor C_Phi / h^n from the normalization.
  const double pref = ctx.CPhi / std::pow(h, n) / ctx.det_R2 * std::pow(h / 2.0, n);
  const double root = std::sqrt(2.0 / h);
  CMat M = assemble_sesquilinear(trunc, grid.size(), [&](std::size_t k, NodeSample& ns) {
    CVec W(n);
    for (int j = 0; j < n; ++j) W(j) = scale_w * grid.point(k)[j];
    const CVec X = ctx.R_inv * W;
    const CVec RX = ctx.R * X;
    const cplx e = bilinear(X, ctx.PhiXX * X) / h;
    // |exp(e)|^2 exp(-2 Phi/h) divided by the Gaussian weight exp(-|s|^2).
    const double logw = 2.0 * e.real() - 2.0 * weight(ctx, X) / h + 2.0 * norm2(W) / h;
    for (int j = 0; j < n; ++j) ns.a[static_cast<std::size_t>(j)] = ns.b[static_cast<std::size_t>(j)] = root * RX(j);
    ns.c = pref * grid.weights[k] * std::exp(logw);
  });
  // assemble_sesquilinear returns <u_alpha, u_beta> at [beta, alpha].
  return M.transpose();
}

}  // namespace hphi
