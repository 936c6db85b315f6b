#pragma once

// Symbols on C^n and their differential calculus.
//
// The main family is finite plane-wave sums  b(X) = sum_j c_j exp(i Re <X, lambda_j>)
// with the bilinear pairing <X, lambda> = sum X_k lambda_k. The family is closed
// under products, Q(a, b), the Poisson bracket, the Laplacian Delta, Q_1,
// modulation, translation and the heat flow, so all of these are exact here.
// Black-box callables are supported through central finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hphi/core.hpp"
#include "hphi/geometry.hpp"

namespace hphi {

struct PlaneWave {
  cplx c;
  CVec lambda;
};

struct PlaneWaveSum {
  int n = 1;
  std::vector<PlaneWave> terms;
};

struct CallableSymbol {
  int n = 1;
  std::function<cplx(const CVec&)> fn;
  bool declared_bounded = false;
  bool declared_in_T = false;
  std::optional<double> fd_step;  // required for the derivative calculus
  std::string label = "callable";
};

inline constexpr double kDefaultFdStep = 1e-4;

namespace detail {

inline bool lambda_less(const CVec& a, const CVec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
  }
  return false;
}

inline bool lambda_close(const CVec& a, const CVec& b) {
  const double scale = 1.0 + std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() <= 1e-13 * scale;
}

}  // namespace detail

/// Sorts terms by frequency, merges equal frequencies and drops zero coefficients.
inline PlaneWaveSum canonicalize(PlaneWaveSum s) {
  std::stable_sort(s.terms.begin(), s.terms.end(),
                   [](const PlaneWave& x, const PlaneWave& y) { return detail::lambda_less(x.lambda, y.lambda); });
  std::vector<PlaneWave> out;
  for (auto& t : s.terms) {
    if (!out.empty() && detail::lambda_close(out.back().lambda, t.lambda))
      out.back().c += t.c;
    else
      out.push_back(t);
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const PlaneWave& t) { return t.c == 0.0; }),
            out.end());
  s.terms = std::move(out);
  return s;
}

class Symbol {
 public:
  Symbol() : v_(PlaneWaveSum{}) {}
  Symbol(PlaneWaveSum s) : v_(canonicalize(std::move(s))) {}
  Symbol(CallableSymbol c) : v_(std::move(c)) {}

  static Symbol constant(int n, cplx c) {
    return Symbol(PlaneWaveSum{n, {PlaneWave{c, CVec::Zero(n)}}});
  }
  static Symbol plane_wave(cplx c, const CVec& lambda) {
    return Symbol(PlaneWaveSum{static_cast<int>(lambda.size()), {PlaneWave{c, lambda}}});
  }
  /// cos(Re <X, k>) and sin(Re <X, k>) as two-term sums.
  static Symbol cosine(const CVec& k) {
    return Symbol(PlaneWaveSum{static_cast<int>(k.size()), {{0.5, k}, {0.5, -k}}});
  }
  static Symbol sine(const CVec& k) {
    return Symbol(PlaneWaveSum{static_cast<int>(k.size()), {{-0.5 * kI, k}, {0.5 * kI, -k}}});
  }

  bool is_plane_wave_sum() const { return std::holds_alternative<PlaneWaveSum>(v_); }
  const PlaneWaveSum& plane_waves() const {
    if (!is_plane_wave_sum()) throw Error(Errc::UnsupportedSymbol, "symbol is not a plane-wave sum");
    return std::get<PlaneWaveSum>(v_);
  }
  const CallableSymbol& callable() const { return std::get<CallableSymbol>(v_); }

  int dim() const {
    return is_plane_wave_sum() ? std::get<PlaneWaveSum>(v_).n : std::get<CallableSymbol>(v_).n;
  }

  /// Plane-wave sums are always bounded members of the symbol class.
  bool in_class_T() const { return is_plane_wave_sum() || callable().declared_in_T; }
  bool bounded() const { return is_plane_wave_sum() || callable().declared_bounded; }

  std::string describe() const {
    if (!is_plane_wave_sum()) return callable().label;
    std::ostringstream os;
    os.precision(6);
    const auto& s = plane_waves();
    if (s.terms.empty()) return "0";
    for (std::size_t i = 0; i < s.terms.size(); ++i) {
      if (i) os << " + ";
      os << "(" << s.terms[i].c.real() << (s.terms[i].c.imag() < 0 ? "" : "+") << s.terms[i].c.imag() << "i)e[";
      for (Eigen::Index j = 0; j < s.terms[i].lambda.size(); ++j) {
        if (j) os << ",";
        const cplx l = s.terms[i].lambda(j);
        os << l.real() << (l.imag() < 0 ? "" : "+") << l.imag() << "i";
      }
      os << "]";
    }
    return os.str();
  }

 private:
  std::variant<PlaneWaveSum, CallableSymbol> v_;
};

inline cplx eval(const PlaneWaveSum& s, const CVec& X) {
  cplx v = 0.0;
  for (const auto& t : s.terms) v += t.c * std::exp(kI * bilinear(X, t.lambda).real());
  return v;
}

inline cplx eval(const Symbol& b, const CVec& X) {
  if (b.is_plane_wave_sum()) return eval(b.plane_waves(), X);
  const cplx v = b.callable().fn(X);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw Error(Errc::NonFinite, "callable symbol returned a non-finite value");
  return v;
}

// Algebra.

inline Symbol operator+(const Symbol& a, const Symbol& b) {
  if (a.is_plane_wave_sum() && b.is_plane_wave_sum()) {
    PlaneWaveSum s = a.plane_waves();
    for (const auto& t : b.plane_waves().terms) s.terms.push_back(t);
    return Symbol(std::move(s));
  }
  CallableSymbol c{a.dim(), [a, b](const CVec& X) { return eval(a, X) + eval(b, X); },
                   a.bounded() && b.bounded(), a.in_class_T() && b.in_class_T(), std::nullopt,
                   "(" + a.describe() + ")+(" + b.describe() + ")"};
  return Symbol(std::move(c));
}

inline Symbol operator*(cplx k, const Symbol& a) {
  if (a.is_plane_wave_sum()) {
    PlaneWaveSum s = a.plane_waves();
    for (auto& t : s.terms) t.c *= k;
    return Symbol(std::move(s));
  }
  CallableSymbol c = a.callable();
  auto f = c.fn;
  c.fn = [f, k](const CVec& X) { return k * f(X); };
  return Symbol(std::move(c));
}

inline Symbol operator-(const Symbol& a, const Symbol& b) { return a + cplx(-1.0) * b; }

/// Pointwise product.
inline Symbol multiply(const Symbol& a, const Symbol& b) {
  if (a.is_plane_wave_sum() && b.is_plane_wave_sum()) {
    PlaneWaveSum s{a.dim(), {}};
    for (const auto& x : a.plane_waves().terms)
      for (const auto& y : b.plane_waves().terms) s.terms.push_back({x.c * y.c, x.lambda + y.lambda});
    return Symbol(std::move(s));
  }
  CallableSymbol c{a.dim(), [a, b](const CVec& X) { return eval(a, X) * eval(b, X); },
                   a.bounded() && b.bounded(), a.bounded() && b.bounded(), std::nullopt,
                   "(" + a.describe() + ")*(" + b.describe() + ")"};
  return Symbol(std::move(c));
}

/// Pointwise complex conjugate.
inline Symbol conjugate(const Symbol& a) {
  if (a.is_plane_wave_sum()) {
    PlaneWaveSum s = a.plane_waves();
    for (auto& t : s.terms) {
      t.c = std::conj(t.c);
      t.lambda = -t.lambda;
    }
    return Symbol(std::move(s));
  }
  CallableSymbol c = a.callable();
  auto f = c.fn;
  c.fn = [f](const CVec& X) { return std::conj(f(X)); };
  return Symbol(std::move(c));
}

/// b^lambda(X) = exp(i Re <X, lambda>) b(X).
inline Symbol modulate(const Symbol& b, const CVec& lambda) {
  if (b.is_plane_wave_sum()) {
    PlaneWaveSum s = b.plane_waves();
    for (auto& t : s.terms) t.lambda += lambda;
    return Symbol(std::move(s));
  }
  CallableSymbol c = b.callable();
  auto f = c.fn;
  c.fn = [f, lambda](const CVec& X) { return std::exp(kI * bilinear(X, lambda).real()) * f(X); };
  c.label = "modulated(" + c.label + ")";
  return Symbol(std::move(c));
}

/// X -> b(X + lambda).
inline Symbol translate(const Symbol& b, const CVec& lambda) {
  if (b.is_plane_wave_sum()) {
    PlaneWaveSum s = b.plane_waves();
    for (auto& t : s.terms) t.c *= std::exp(kI * bilinear(lambda, t.lambda).real());
    return Symbol(std::move(s));
  }
  CallableSymbol c = b.callable();
  auto f = c.fn;
  c.fn = [f, lambda](const CVec& X) { return f(X + lambda); };
  c.label = "translated(" + c.label + ")";
  return Symbol(std::move(c));
}

/// Sampled sup of |b| over a list of points (a lower bound of the true sup).
inline double sampled_sup(const Symbol& b, const std::vector<CVec>& points) {
  double m = 0.0;
  for (const auto& X : points) m = std::max(m, std::abs(eval(b, X)));
  return m;
}

/// Canonical single-callable view of a plane-wave sum, used as a cross-check
/// of closed-form calculus against finite differences.
inline Symbol as_callable(const Symbol& b, double fd_step = kDefaultFdStep) {
  CallableSymbol c{b.dim(), [b](const CVec& X) { return eval(b, X); }, true, true, fd_step,
                   "callable(" + b.describe() + ")"};
  return Symbol(std::move(c));
}

// Finite-difference Wirtinger calculus for callables.

struct WirtingerJet {
  CVec dX;      // d/dX_j
  CVec dXbar;   // d/dXbar_j
  CMat dXdXbar; // d^2 / dX_j dXbar_k
  CMat dXdX;    // d^2 / dX_j dX_k
  CMat dXbardXbar;
};

/// Central differences in the real coordinates (x_j, y_j), X_j = x_j + i y_j.
inline WirtingerJet wirtinger_jet(const std::function<cplx(const CVec&)>& f, const CVec& X,
                                  double step, bool second_order) {
  const auto n = X.size();
  const Eigen::Index m = 2 * n;
  auto dir = [&](Eigen::Index u) {
    CVec e = CVec::Zero(n);
    e(u / 2) = (u % 2 == 0) ? cplx(1.0) : kI;
    return e;
  };
  Eigen::VectorXcd g(m);
  for (Eigen::Index u = 0; u < m; ++u) {
    const CVec e = dir(u) * step;
    g(u) = (f(X + e) - f(X - e)) / (2.0 * step);
  }
  WirtingerJet jet;
  jet.dX.resize(n);
  jet.dXbar.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    jet.dX(j) = 0.5 * (g(2 * j) - kI * g(2 * j + 1));
    jet.dXbar(j) = 0.5 * (g(2 * j) + kI * g(2 * j + 1));
  }
  if (!second_order) return jet;
  Eigen::MatrixXcd H(m, m);
  const cplx f0 = f(X);
  for (Eigen::Index u = 0; u < m; ++u) {
    const CVec eu = dir(u) * step;
    H(u, u) = (f(X + eu) - 2.0 * f0 + f(X - eu)) / (step * step);
    for (Eigen::Index v = u + 1; v < m; ++v) {
      const CVec ev = dir(v) * step;
      H(u, v) = H(v, u) =
          (f(X + eu + ev) - f(X + eu - ev) - f(X - eu + ev) + f(X - eu - ev)) / (4.0 * step * step);
    }
  }
  jet.dXdXbar.resize(n, n);
  jet.dXdX.resize(n, n);
  jet.dXbardXbar.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) {
      const cplx xx = H(2 * j, 2 * k), xy = H(2 * j, 2 * k + 1), yx = H(2 * j + 1, 2 * k),
                 yy = H(2 * j + 1, 2 * k + 1);
      jet.dXdXbar(j, k) = 0.25 * (xx + kI * xy - kI * yx + yy);
      jet.dXdX(j, k) = 0.25 * (xx - kI * xy - kI * yx - yy);
      jet.dXbardXbar(j, k) = 0.25 * (xx + kI * xy + kI * yx - yy);
    }
  return jet;
}

namespace detail {

inline double require_fd(const Symbol& s) {
  if (s.is_plane_wave_sum()) return kDefaultFdStep;
  if (!s.callable().fd_step)
    throw Error(Errc::UnsupportedSymbol, "callable symbol has no finite-difference step");
  return *s.callable().fd_step;
}

inline std::function<cplx(const CVec&)> as_function(const Symbol& s) {
  return [s](const CVec& X) { return eval(s, X); };
}

// Matrix pairing <M, N> = sum_jk M_jk N_jk.
inline cplx matrix_pairing(const CMat& M, const CMat& N) { return (M.array() * N.array()).sum(); }

}  // namespace detail

/// Q(a,b) = <da/dX, (PhiXbarX)^{-1} db/dXbar>.
inline Symbol q_form(const SpaceContext& ctx, const Symbol& a, const Symbol& b) {
  if (a.is_plane_wave_sum() && b.is_plane_wave_sum()) {
    PlaneWaveSum s{a.dim(), {}};
    for (const auto& x : a.plane_waves().terms)
      for (const auto& y : b.plane_waves().terms) {
        const cplx k = -0.25 * bilinear(x.lambda, ctx.PhiXbarX_inv * y.lambda.conjugate());
        s.terms.push_back({k * x.c * y.c, x.lambda + y.lambda});
      }
    return Symbol(std::move(s));
  }
  const double sa = detail::require_fd(a), sb = detail::require_fd(b);
  auto fa = detail::as_function(a), fb = detail::as_function(b);
  const CMat Pinv = ctx.PhiXbarX_inv;
  CallableSymbol c{a.dim(),
                   [fa, fb, sa, sb, Pinv](const CVec& X) {
                     const auto ja = wirtinger_jet(fa, X, sa, false);
                     const auto jb = wirtinger_jet(fb, X, sb, false);
                     return bilinear(ja.dX, Pinv * jb.dXbar);
                   },
                   true, true, std::min(sa, sb), "Q(" + a.describe() + "," + b.describe() + ")"};
  return Symbol(std::move(c));
}

/// {a,b} = i Q(a,b) - i Q(b,a).
inline Symbol poisson(const SpaceContext& ctx, const Symbol& a, const Symbol& b) {
  return kI * q_form(ctx, a, b) - kI * q_form(ctx, b, a);
}

/// Delta = (1/2) <d/dX, (PhiXbarX)^{-1} d/dXbar>.
inline Symbol laplace(const SpaceContext& ctx, const Symbol& b) {
  if (b.is_plane_wave_sum()) {
    PlaneWaveSum s = b.plane_waves();
    for (auto& t : s.terms)
      t.c *= -0.125 * bilinear(t.lambda, ctx.PhiXbarX_inv * t.lambda.conjugate());
    return Symbol(std::move(s));
  }
  const double sb = detail::require_fd(b);
  auto fb = detail::as_function(b);
  const CMat Pinv = ctx.PhiXbarX_inv;
  CallableSymbol c{b.dim(),
                   [fb, sb, Pinv](const CVec& X) {
                     const auto j = wirtinger_jet(fb, X, sb, true);
                     return 0.5 * detail::matrix_pairing(j.dXdXbar, Pinv);
                   },
                   b.bounded(), b.in_class_T(), sb, "Delta(" + b.describe() + ")"};
  return Symbol(std::move(c));
}

/// Q_1(a,b) = <(PhiXXbar)^{-1} d^2a/dX^2, (PhiXbarX)^{-1} d^2b/dXbar^2>, the
/// pairing of matrices being the full contraction sum_jk M_jk N_jk.
inline Symbol q1_form(const SpaceContext& ctx, const Symbol& a, const Symbol& b) {
  if (a.is_plane_wave_sum() && b.is_plane_wave_sum()) {
    PlaneWaveSum s{a.dim(), {}};
    for (const auto& x : a.plane_waves().terms)
      for (const auto& y : b.plane_waves().terms) {
        const CVec mb = y.lambda.conjugate();
        const cplx k = bilinear(ctx.PhiXXbar_inv * x.lambda, ctx.PhiXbarX_inv * mb) *
                       bilinear(x.lambda, mb) / 16.0;
        s.terms.push_back({k * x.c * y.c, x.lambda + y.lambda});
      }
    return Symbol(std::move(s));
  }
  const double sa = detail::require_fd(a), sb = detail::require_fd(b);
  auto fa = detail::as_function(a), fb = detail::as_function(b);
  const CMat P1 = ctx.PhiXXbar_inv, P2 = ctx.PhiXbarX_inv;
  CallableSymbol c{a.dim(),
                   [fa, fb, sa, sb, P1, P2](const CVec& X) {
                     const auto ja = wirtinger_jet(fa, X, sa, true);
                     const auto jb = wirtinger_jet(fb, X, sb, true);
                     return detail::matrix_pairing(P1 * ja.dXdX, P2 * jb.dXbardXbar);
                   },
                   true, true, std::min(sa, sb), "Q1(" + a.describe() + "," + b.describe() + ")"};
  return Symbol(std::move(c));
}

/// Holomorphic extension of a plane-wave symbol to C^n x C^n:
/// sum c exp(i(<X, lambda> + <Y, conj lambda>)/2), equal to b(X) at Y = conj X.
struct PolarizedSymbol {
  int n = 1;
  std::vector<PlaneWave> terms;

  cplx eval(const CVec& X, const CVec& Y) const {
    cplx v = 0.0;
    for (const auto& t : terms)
      v += t.c * std::exp(0.5 * kI * (bilinear(X, t.lambda) + bilinear(Y, t.lambda.conjugate())));
    return v;
  }
};

inline PolarizedSymbol polarize(const Symbol& b) {
  if (!b.is_plane_wave_sum())
    throw Error(Errc::UnsupportedSymbol, "polarization needs a plane-wave symbol");
  return PolarizedSymbol{b.dim(), b.plane_waves().terms};
}

/// The substituted symbol (X, theta) -> b(X, (PhiXXbar)^{-1}(i theta/2 - PhiXX X))
/// realizing Toeplitz operators as Weyl operators on the Lambda_Phi side.
class GuilleminSymbol {
 public:
  GuilleminSymbol(const SpaceContext& ctx, PolarizedSymbol polar)
      : ctx_(&ctx), polar_(std::move(polar)) {}

  CVec second_argument(const CVec& X, const CVec& theta) const {
    return ctx_->PhiXXbar_inv * (0.5 * kI * theta - ctx_->PhiXX * X);
  }

  cplx eval(const CVec& X, const CVec& theta) const {
    return polar_.eval(X, second_argument(X, theta));
  }

  const PolarizedSymbol& polarized() const { return polar_; }

 private:
  const SpaceContext* ctx_;
  PolarizedSymbol polar_;
};

inline GuilleminSymbol guillemin_symbol(const SpaceContext& ctx, const PolarizedSymbol& polar) {
  return GuilleminSymbol(ctx, polar);
}

/// Real phase-space plane wave c exp(i(<x, p> + <q, xi>)); p, q may be complex.
struct PhaseSpaceWave {
  cplx c;
  CVec p;
  CVec q;
};

/// Pulls the Guillemin symbol back along the canonical map. Each polarized
/// term becomes one phase-space wave whose frequencies are read off the linear
/// exponent at the unit vectors of R^{2n}.
inline std::vector<PhaseSpaceWave> pull_back(const SpaceContext& ctx, const GuilleminSymbol& g) {
  const int n = ctx.n();
  std::vector<PhaseSpaceWave> out;
  for (const auto& t : g.polarized().terms) {
    auto exponent = [&](const RVec& x, const RVec& xi) {
      const auto [X, Theta] = canonical_map(ctx, x, xi);
      const CVec Y = g.second_argument(X, Theta);
      return 0.5 * (bilinear(X, t.lambda) + bilinear(Y, t.lambda.conjugate()));
    };
    PhaseSpaceWave w{t.c, CVec(n), CVec(n)};
    for (int k = 0; k < n; ++k) {
      RVec e = RVec::Zero(n);
      e(k) = 1.0;
      w.p(k) = exponent(e, RVec::Zero(n));
      w.q(k) = exponent(RVec::Zero(n), e);
    }
    out.push_back(std::move(w));
  }
  return out;
}

/// Symbol literal: tuples (re c, im c, re l1, im l1, ..., re ln, im ln).
inline Symbol parse_plane_wave_literal(int n, const std::vector<std::vector<double>>& tuples) {
  PlaneWaveSum s{n, {}};
  for (const auto& t : tuples) {
    if (t.size() != static_cast<std::size_t>(2 + 2 * n))
      throw Error(Errc::InvalidConfig, "plane-wave tuple must have 2 + 2n numbers");
    CVec l(n);
    for (int j = 0; j < n; ++j) l(j) = cplx(t[2 + 2 * j], t[3 + 2 * j]);
    s.terms.push_back({cplx(t[0], t[1]), l});
  }
  return Symbol(std::move(s));
}

}  // namespace hphi
