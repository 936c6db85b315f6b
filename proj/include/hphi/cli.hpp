#pragma once

// Experiment runner behind the hphi command line tool: JSON configuration,
// verification suites, CSV tables and the text report.
//
// Every value a suite reads goes through ConfigReader, which records it (with
// defaults filled in) into the config echo printed with the report.

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hphi/bargmann.hpp"
#include "hphi/basis.hpp"
#include "hphi/core.hpp"
#include "hphi/geometry.hpp"
#include "hphi/heat.hpp"
#include "hphi/operators.hpp"
#include "hphi/quadrature.hpp"
#include "hphi/symbols.hpp"

namespace hphi::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "hphi 0.1.0";

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(std::size_t v) { return std::to_string(v); }

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << "\n";
    }
    return os.str();
  }
};

struct CheckRecord {
  std::string name;
  std::string inputs;
  double measured = 0.0;
  std::string threshold;  // printable, e.g. "<= 1e-08" or "in [1.8, 2.3]"
  bool pass = false;
};

struct RunReport {
  std::string command;
  std::vector<CheckRecord> checks;
  std::vector<std::string> warnings;
  std::vector<CsvTable> tables;
  json config_echo;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  void check(std::string name, std::string inputs, double measured, double tol) {
    checks.push_back({std::move(name), std::move(inputs), measured, "<= " + fmt(tol), measured <= tol});
  }

  std::string text() const {
    std::ostringstream os;
    os << kToolVersion << " " << command << "\n";
    os << "config: " << config_echo.dump() << "\n";
    for (const auto& c : checks)
      os << (c.pass ? "PASS " : "FAIL ") << c.name << " [" << c.inputs << "] measured=" << fmt(c.measured)
         << " threshold " << c.threshold << "\n";
    for (const auto& w : warnings) os << "WARN " << w << "\n";
    os << "result: " << (all_pass() ? "PASS" : "FAIL") << "\n";
    return os.str();
  }
};

/// Reads configuration values and records them, defaults included, in an echo.
class ConfigReader {
 public:
  explicit ConfigReader(json in) : in_(std::move(in)) {
    if (!in_.is_object()) throw Error(Errc::InvalidConfig, "config must be a JSON object");
  }

  bool has(const std::string& path) const { return in_.contains(json::json_pointer(path)); }

  const json& raw(const std::string& path) const {
    if (!has(path)) throw Error(Errc::InvalidConfig, "missing config field " + path);
    return in_.at(json::json_pointer(path));
  }

  template <class T>
  T get(const std::string& path, const T& def) {
    T v = def;
    if (has(path)) {
      try {
        v = raw(path).get<T>();
      } catch (const nlohmann::json::exception&) {
        throw Error(Errc::InvalidConfig, "config field " + path + " has the wrong type");
      }
    }
    echo_[json::json_pointer(path)] = v;
    return v;
  }

  template <class T>
  T require(const std::string& path) {
    if (!has(path)) throw Error(Errc::InvalidConfig, "missing config field " + path);
    return get<T>(path, T{});
  }

  void record(const std::string& path, json v) { echo_[json::json_pointer(path)] = std::move(v); }

  /// Overrides applied by command line flags.
  void set(const std::string& path, json v) { in_[json::json_pointer(path)] = std::move(v); }

  const json& echo() const { return echo_; }

 private:
  json in_;
  json echo_ = json::object();
};

// Parsing helpers.

inline cplx parse_complex(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(Errc::InvalidConfig, "complex numbers are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline CVec parse_cvec(const json& j, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw Error(Errc::InvalidConfig, "expected a vector of " + std::to_string(n) + " complex entries");
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = parse_complex(j[static_cast<std::size_t>(i)]);
  return v;
}

inline RVec parse_rvec(const json& j, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw Error(Errc::InvalidConfig, "expected a vector of " + std::to_string(n) + " reals");
  RVec v(n);
  for (int i = 0; i < n; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw Error(Errc::InvalidConfig, "expected a real number");
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

/// Row-major matrix: either a flat list of n*n [re, im] pairs or a list of n rows.
inline CMat parse_cmat(const json& j, int n) {
  if (!j.is_array()) throw Error(Errc::InvalidConfig, "matrix must be a list");
  CMat M(n, n);
  if (static_cast<int>(j.size()) == n * n && (n > 1 || !j[0][0].is_array())) {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) M(r, c) = parse_complex(j[static_cast<std::size_t>(r * n + c)]);
    return M;
  }
  if (static_cast<int>(j.size()) != n) throw Error(Errc::InvalidConfig, "matrix has the wrong size");
  for (int r = 0; r < n; ++r) M.row(r) = parse_cvec(j[static_cast<std::size_t>(r)], n).transpose();
  return M;
}

inline json cmat_json(const CMat& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(complex_json(M(r, c)));
    rows.push_back(row);
  }
  return rows;
}

inline PhaseMatrices read_phase(ConfigReader& cfg) {
  const std::string preset = cfg.get<std::string>("/phase/preset", "explicit");
  PhaseMatrices p;
  if (preset == "fock") {
    p = fock_phase(cfg.get<double>("/phase/beta", 1.0), cfg.get<int>("/phase/n", 1));
  } else if (preset == "heat_kernel") {
    p = heat_kernel_phase(cfg.get<int>("/phase/n", 1));
  } else if (preset == "random") {
    p = random_admissible_phase(cfg.get<int>("/phase/n", 1), cfg.get<std::uint64_t>("/phase/seed", 1));
  } else if (preset == "explicit") {
    const int n = cfg.require<int>("/phase/n");
    if (n < 1) throw Error(Errc::InvalidConfig, "phase dimension must be positive");
    p.n = n;
    p.A = parse_cmat(cfg.raw("/phase/A"), n);
    p.B = parse_cmat(cfg.raw("/phase/B"), n);
    p.C = parse_cmat(cfg.raw("/phase/C"), n);
  } else {
    throw Error(Errc::InvalidConfig, "unknown phase preset " + preset);
  }
  cfg.record("/phase/n", p.n);
  cfg.record("/phase/A", cmat_json(p.A));
  cfg.record("/phase/B", cmat_json(p.B));
  cfg.record("/phase/C", cmat_json(p.C));
  return p;
}

struct NamedSymbol {
  std::string name;
  Symbol symbol;
};

/// {"name": ..., "terms": [[re c, im c, re l1, im l1, ...], ...]}
inline NamedSymbol parse_symbol(const json& j, int n) {
  if (!j.is_object() || !j.contains("terms")) throw Error(Errc::InvalidConfig, "symbol needs a terms list");
  std::vector<std::vector<double>> tuples;
  try {
    tuples = j.at("terms").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::InvalidConfig, "symbol terms must be lists of numbers");
  }
  return {j.value("name", std::string("b")), parse_plane_wave_literal(n, tuples)};
}

inline std::vector<NamedSymbol> read_symbols(ConfigReader& cfg, const std::string& path, int n,
                                              const json& def) {
  const json list = cfg.has(path) ? cfg.raw(path) : def;
  if (!list.is_array() || list.empty()) throw Error(Errc::InvalidConfig, path + " must be a nonempty list");
  std::vector<NamedSymbol> out;
  for (const auto& s : list) out.push_back(parse_symbol(s, n));
  cfg.record(path, list);
  return out;
}

/// {"radius": r, "points": k} for a k^(2n) box grid, or {"list": [[[re, im], ...], ...]}.
inline std::vector<CVec> read_X_grid(ConfigReader& cfg, const std::string& path, int n, double radius,
                                     int points) {
  if (cfg.has(path + "/list")) {
    const json& l = cfg.raw(path + "/list");
    if (!l.is_array() || l.empty()) throw Error(Errc::InvalidConfig, "X grid list must be nonempty");
    std::vector<CVec> out;
    for (const auto& x : l) out.push_back(parse_cvec(x, n));
    cfg.record(path + "/list", l);
    return out;
  }
  const double r = cfg.get<double>(path + "/radius", radius);
  const int k = cfg.get<int>(path + "/points", points);
  if (!(r >= 0.0) || k < 1) throw Error(Errc::InvalidConfig, "bad X grid");
  return complex_box_grid(n, r, k);
}

inline std::vector<double> read_list(ConfigReader& cfg, const std::string& path, std::vector<double> def) {
  auto v = cfg.get<std::vector<double>>(path, def);
  if (v.empty()) throw Error(Errc::InvalidConfig, path + " must be nonempty");
  return v;
}

inline QuadratureRule read_rule(ConfigReader& cfg, int def) {
  return gauss_hermite_rule(cfg.get<int>("/order", def));
}

inline SpaceContext read_context(ConfigReader& cfg, const PhaseMatrices& p) {
  const double h = cfg.get<double>("/h", 1.0);
  if (!(h > 0.0 && h <= 1.0)) throw Error(Errc::InvalidConfig, "h must lie in (0, 1]");
  return build_context(p, h);
}

inline std::string cvec_str(const CVec& v) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ";" : "") << v(i).real() << (v(i).imag() < 0 ? "" : "+") << v(i).imag() << "i";
  os << ")";
  return os.str();
}

inline json default_symbols_json(int n) {
  auto lam = [n](double l1) {
    std::vector<double> t;
    for (int j = 0; j < n; ++j) {
      t.push_back(j == 0 ? l1 : 0.0);
      t.push_back(0.0);
    }
    return t;
  };
  auto term = [&](double cre, double cim, double l1) {
    std::vector<double> t{cre, cim};
    for (double v : lam(l1)) t.push_back(v);
    return t;
  };
  return json::array({
      json{{"name", "cos"}, {"terms", json::array({term(0.5, 0, 1), term(0.5, 0, -1)})}},
      json{{"name", "one_plus_half_sin"}, {"terms", json::array({term(1, 0, 0), term(0, -0.25, 1), term(0, 0.25, -1)})}},
      json{{"name", "complex_pair"}, {"terms", json::array({term(0.6, 0.3, 1), term(-0.2, 0.5, 0.5)})}},
  });
}

// Suites.

inline RunReport cmd_space_info(ConfigReader& cfg) {
  RunReport rep;
  rep.command = "space-info";
  const PhaseMatrices p = read_phase(cfg);
  const SpaceContext ctx = read_context(cfg, p);
  const double tol = cfg.get<double>("/tolerances/geometry", 1e-10);
  const int samples = cfg.get<int>("/samples", 100);
  const int n = ctx.n();

  CsvTable t{"space_info", {"quantity", "row", "col", "re", "im"}, {}};
  auto put = [&](const std::string& name, const CMat& M) {
    for (Eigen::Index r = 0; r < M.rows(); ++r)
      for (Eigen::Index c = 0; c < M.cols(); ++c)
        t.rows.push_back({name, fmt(int(r)), fmt(int(c)), fmt(M(r, c).real()), fmt(M(r, c).imag())});
  };
  put("A", p.A);
  put("B", p.B);
  put("C", p.C);
  put("CI", ctx.CI.cast<cplx>());
  put("PhiXXbar", ctx.PhiXXbar);
  put("PhiXX", ctx.PhiXX);
  put("R", ctx.R);
  t.rows.push_back({"h", "0", "0", fmt(ctx.h), fmt(0.0)});
  t.rows.push_back({"Cphi", "0", "0", fmt(ctx.Cphi), fmt(0.0)});
  t.rows.push_back({"CPhi", "0", "0", fmt(ctx.CPhi), fmt(0.0)});
  for (int k = 0; k < 2 * n; ++k) {
    RVec x = RVec::Zero(n), xi = RVec::Zero(n);
    (k < n ? x(k) : xi(k - n)) = 1.0;
    const auto [X, Th] = canonical_map(ctx, x, xi);
    const std::string tag = k < n ? "kappa_x" + std::to_string(k) : "kappa_xi" + std::to_string(k - n);
    put(tag + "_X", X);
    put(tag + "_Theta", Th);
  }

  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> nd;
  double membership = 0, psi_diag = 0, iphi = 0, rr = 0;
  for (int s = 0; s < samples; ++s) {
    RVec x(n), xi(n), y(n);
    CVec X(n);
    for (int j = 0; j < n; ++j) {
      x(j) = nd(rng);
      xi(j) = nd(rng);
      y(j) = nd(rng);
      X(j) = cplx(nd(rng), nd(rng));
    }
    const auto [Kx, Kth] = canonical_map(ctx, x, xi);
    membership = std::max(membership, max_abs(Kth - lagrangian_fiber(ctx, Kx)) / std::max(1.0, max_abs(Kth)));
    const double phi = weight(ctx, X);
    psi_diag = std::max(psi_diag, std::abs(polarized_weight(ctx, X, X.conjugate()) - phi) / std::max(1.0, std::abs(phi)));
    const RVec shift = y + ctx.CI_inv * (p.B.transpose() * X).imag();
    const double rhs = phi - 0.5 * (ctx.CI_sqrt * shift).squaredNorm();
    const double lhs = (kI * phase_function(ctx, X, y.cast<cplx>())).real();
    iphi = std::max(iphi, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    rr = std::max(rr, std::abs(norm2(ctx.R * X) + bilinear(X, ctx.PhiXX * X).real() - phi) / std::max(1.0, phi));
  }
  const double rstar = max_abs(ctx.R.adjoint() * ctx.R - ctx.PhiXXbar.conjugate()) / std::max(1.0, max_abs(ctx.PhiXXbar));
  const double cphi_forms =
      std::abs(ctx.CPhi - std::pow(2 * kPi, -n) * std::pow(std::abs(p.B.determinant()), 2) / ctx.CI.determinant()) / ctx.CPhi;
  const std::string in = std::to_string(samples) + " samples";
  rep.check("R*R = conj(PhiXXbar)", "matrices", rstar, tol);
  rep.check("C_Phi printed forms agree", "constants", cphi_forms, tol);
  rep.check("Lambda_Phi membership of kappa_T", in, membership, tol);
  rep.check("Psi(X, conj X) = Phi(X)", in, psi_diag, tol);
  rep.check("Re(i phi) completed square", in, iphi, tol);
  rep.check("Phi = |RX|^2 + Re<X, PhiXX X>", in, rr, tol);
  for (const auto& r : std::vector<std::pair<std::string, double>>{{"rstar", rstar}, {"cphi_forms", cphi_forms},
                                                                    {"membership", membership}, {"psi_diag", psi_diag},
                                                                    {"iphi", iphi}, {"phi_rx", rr}})
    t.rows.push_back({"residual_" + r.first, "0", "0", fmt(r.second), fmt(0.0)});
  rep.tables.push_back(std::move(t));
  rep.config_echo = cfg.echo();
  return rep;
}

inline RunReport verify_gram(ConfigReader& cfg) {
  RunReport rep;
  rep.command = "verify gram";
  const PhaseMatrices p = read_phase(cfg);
  const SpaceContext ctx = read_context(cfg, p);
  const int n = ctx.n();
  const int N = cfg.get<int>("/N", n == 1 ? 10 : 6);
  const QuadratureRule rule = read_rule(cfg, default_order(n));
  const double tol = cfg.get<double>("/tolerances/gram", n == 1 ? 1e-8 : 1e-6);
  const MultiIndexSet trunc(n, N);
  const CMat G = gram_matrix(ctx, trunc, rule);
  const CMat D = G - CMat::Identity(G.rows(), G.cols());
  double off = 0.0, diag = 0.0;
  for (Eigen::Index i = 0; i < D.rows(); ++i)
    for (Eigen::Index j = 0; j < D.cols(); ++j) (i == j ? diag : off) = std::max(i == j ? diag : off, std::abs(D(i, j)));
  CsvTable t{"gram", {"n", "N", "order", "dim", "max_dev", "max_offdiag", "max_diag_dev"}, {}};
  t.rows.push_back({fmt(n), fmt(N), fmt(rule.order), fmt(trunc.size()), fmt(max_abs(D)), fmt(off), fmt(diag)});
  rep.tables.push_back(std::move(t));
  rep.check("Gram matrix = I", "N=" + std::to_string(N) + " order=" + std::to_string(rule.order), max_abs(D), tol);
  rep.config_echo = cfg.echo();
  return rep;
}

inline RunReport verify_weyl(ConfigReader& cfg) {
  RunReport rep;
  rep.command = "verify weyl";
  const PhaseMatrices p = read_phase(cfg);
  const SpaceContext ctx = read_context(cfg, p);
  const int n = ctx.n();
  const int N = cfg.get<int>("/N", 16);
  const QuadratureRule rule = read_rule(cfg, default_order(n));
  const double tol = cfg.get<double>("/tolerances/weyl", 1e-5);
  IdentityCheckOptions opt;
  opt.inner_drop = cfg.get<int>("/inner_drop", 4);
  opt.padding = cfg.get<int>("/padding", 16);
  json one = json::array();
  for (int j = 0; j < n; ++j) one.push_back(json::array({j == 0 ? 1.0 : 0.0, 0.0}));
  json half = json::array();
  for (int j = 0; j < n; ++j) half.push_back(json::array({j == 0 ? 0.5 : 0.0, 0.0}));
  std::vector<double> pw{1.0, 0.0};
  for (int j = 0; j < n; ++j) {
    pw.push_back(j == 0 ? 1.0 : 0.0);
    pw.push_back(0.0);
  }
  const auto syms = read_symbols(cfg, "/symbols", n, json::array({json{{"name", "e1"}, {"terms", json::array({pw})}}}));
  const json lam_list = cfg.has("/lambdas") ? cfg.raw("/lambdas") : json::array({half, one});
  cfg.record("/lambdas", lam_list);
  CsvTable t{"weyl", {"symbol", "lambda", "adjoint", "unitarity", "conjugation"}, {}};
  for (const auto& s : syms) {
    for (const auto& lj : lam_list) {
      const CVec lam = parse_cvec(lj, n);
      const auto r = weyl_identities(ctx, s.symbol, lam, N, rule, opt);
      t.rows.push_back({s.name, cvec_str(lam), fmt(r.adjoint), fmt(r.unitarity), fmt(r.conjugation)});
      const std::string in = s.name + " lambda=" + cvec_str(lam) + " N=" + std::to_string(N);
      rep.check("W* = W(-lambda)", in, r.adjoint, tol);
      rep.check("W* W = I", in, r.unitarity, tol);
      rep.check("W* T_b W = T_{b(.+lambda)}", in, r.conjugation, tol);
    }
  }
  rep.tables.push_back(std::move(t));
  rep.config_echo = cfg.echo();
  return rep;
}

inline RunReport verify_bound(ConfigReader& cfg) {
  RunReport rep;
  rep.command = "verify bound";
  const PhaseMatrices p = read_phase(cfg);
  const SpaceContext ctx = read_context(cfg, p);
  const int n = ctx.n();
  const QuadratureRule rule = read_rule(cfg, default_order(n));
  const auto t_grid = read_list(cfg, "/t_grid", {0.6, 0.75, 0.9, 1.0});
  for (double t : t_grid)
    if (!(t > 0.5 && t <= 1.0)) throw Error(Errc::InvalidConfig, "t must lie in (1/2, 1]");
  const auto sched_d = read_list(cfg, "/N_schedule", {16, 20, 22, 24});
  std::vector<int> schedule;
  for (double v : sched_d) schedule.push_back(static_cast<int>(v));
  const double slack = cfg.get<double>("/tolerances/bound_slack", kDefaultBoundSlack);
  cfg.record("/tolerances/norm_cauchy", kNormCauchyTol);
  const auto X_grid = read_X_grid(cfg, "/X_grid", n, 6.0, n == 1 ? 41 : 13);
  const auto syms = read_symbols(cfg, "/symbols", n, default_symbols_json(n));
  CsvTable t{"bound", {"symbol", "t", "sup_bt", "M_N", "rhs", "converged", "pass"}, {}};
  CsvTable norms{"bound_norms", {"symbol", "N", "norm"}, {}};
  for (const auto& s : syms) {
    const BoundReport br = bound_report(ctx, s.symbol, t_grid, X_grid, schedule, rule, slack);
    for (const auto& [N, v] : br.norms.table) norms.rows.push_back({s.name, fmt(N), fmt(v)});
    if (!br.norms.converged) rep.warnings.push_back("NotConverged: compression norms of " + s.name);
    for (const auto& r : br.rows) {
      t.rows.push_back({s.name, fmt(r.t), fmt(r.lhs), fmt(br.norms.M_norm), fmt(r.rhs), br.norms.converged ? "1" : "0",
                        r.pass ? "1" : "0"});
      rep.checks.push_back({"sup|b_t| <= (1+slack) M_N/(2t-1)^n", s.name + " t=" + fmt(r.t), r.lhs, "<= " + fmt(r.rhs),
                            r.pass});
    }
  }
  rep.tables.push_back(std::move(t));
  rep.tables.push_back(std::move(norms));
  rep.config_echo = cfg.echo();
  return rep;
}

inline RunReport verify_diag(ConfigReader& cfg) {
  RunReport rep;
  rep.command = "verify diag";
  const PhaseMatrices p = read_phase(cfg);
  const SpaceContext ctx = read_context(cfg, p);
  const int n = ctx.n();
  const int N = cfg.get<int>("/N", 6);
  if (N < 2) throw Error(Errc::InvalidConfig, "diag suite needs N >= 2");
  const QuadratureRule rule = read_rule(cfg, default_order(n));
  const int check_order = cfg.get<int>("/check_order", std::min(kMaxOrder, rule.order + 20));
  const QuadratureRule check_rule = gauss_hermite_rule(check_order);
  const double tol = cfg.get<double>("/tolerances/diag", 1e-8);
  const auto syms = read_symbols(cfg, "/symbols", n, default_symbols_json(n));
  const MultiIndexSet trunc(n, N);
  const std::string in = "N=" + std::to_string(N) + " order=" + std::to_string(rule.order);

  CsvTable t{"diag", {"symbol", "check", "k", "matrix_re", "matrix_im", "reference_re", "reference_im", "abs_err"}, {}};
  const OperatorMatrix one = toeplitz_matrix(ctx, Symbol::constant(n, 1.0), trunc, rule);
  const double id_err = max_abs(one.entries - CMat::Identity(one.entries.rows(), one.entries.cols()));
  t.rows.push_back({"one", "identity", "0", fmt(id_err), fmt(0.0), fmt(0.0), fmt(0.0), fmt(id_err)});
  rep.check("T_1 = I", in, id_err, tol);
  for (const auto& s : syms) {
    const OperatorMatrix T = toeplitz_matrix(ctx, s.symbol, trunc, rule);
    const cplx b1 = eval(berezin_symbol(ctx, s.symbol), CVec::Zero(n));
    const double e00 = std::abs(T.entries(0, 0) - b1);
    t.rows.push_back({s.name, "entry00", "0", fmt(T.entries(0, 0).real()), fmt(T.entries(0, 0).imag()), fmt(b1.real()),
                      fmt(b1.imag()), fmt(e00)});
    rep.check("<T_b u_0, u_0> = b_1(0)", s.name + " " + in, e00, tol);
    for (int k = 0; k <= 2; ++k) {
      const cplx lhs = diagonal_degree_sum(T, k);
      const cplx rhs = diagonal_degree_integral(ctx, s.symbol, k, check_rule);
      const double err = std::abs(lhs - rhs);
      t.rows.push_back({s.name, "degree_sum", fmt(k), fmt(lhs.real()), fmt(lhs.imag()), fmt(rhs.real()), fmt(rhs.imag()),
                        fmt(err)});
      rep.check("diagonal sum over |alpha|=k", s.name + " k=" + std::to_string(k) + " check_order=" +
                                                   std::to_string(check_order), err, tol);
    }
  }
  rep.tables.push_back(std::move(t));
  rep.config_echo = cfg.echo();
  return rep;
}

inline RunReport verify_deformation(ConfigReader& cfg) {
  RunReport rep;
  rep.command = "verify deformation";
  const PhaseMatrices p = read_phase(cfg);
  const int n = p.n;
  const int N = cfg.get<int>("/N", 20);
  const int inner_drop = cfg.get<int>("/inner_drop", 4);
  const QuadratureRule rule = read_rule(cfg, default_order(n));
  const auto h_list = read_list(cfg, "/h_list", {0.4, 0.28, 0.2, 0.14, 0.1});
  for (double h : h_list)
    if (!(h > 0.0 && h <= 1.0)) throw Error(Errc::InvalidConfig, "h values must lie in (0, 1]");
  const double lo = cfg.get<double>("/tolerances/slope_min", 1.8);
  const double hi = cfg.get<double>("/tolerances/slope_max", 2.3);
  const double degen_tol = cfg.get<double>("/tolerances/degenerate", 1e-8);
  cfg.record("/tolerances/slope_floor", kSlopeFloor);
  const json defs = default_symbols_json(n);
  json pair_def = json::array({defs[0], json{{"name", "sin"}, {"terms", json::array()}}});
  {
    // sin(Re X_1) = (e^{i Re X_1} - e^{-i Re X_1}) / (2i)
    std::vector<double> a{0.0, -0.5}, b{0.0, 0.5};
    for (int j = 0; j < n; ++j) {
      a.push_back(j == 0 ? 1.0 : 0.0);
      a.push_back(0.0);
      b.push_back(j == 0 ? -1.0 : 0.0);
      b.push_back(0.0);
    }
    pair_def[1]["terms"] = json::array({a, b});
  }
  const auto pair = read_symbols(cfg, "/pair", n, pair_def);
  if (pair.size() != 2) throw Error(Errc::InvalidConfig, "pair must list exactly two symbols");
  const MultiIndexSet trunc(n, N);
  const DeformationSweep sw = deformation_sweep(p, pair[0].symbol, pair[1].symbol, h_list, trunc, rule, inner_drop);

  CsvTable t{"deformation", {"h", "r1", "r2", "slope_r1", "slope_r2"}, {}};
  for (std::size_t i = 0; i < sw.h.size(); ++i)
    t.rows.push_back({fmt(sw.h[i]), fmt(sw.residuals[i].r1), fmt(sw.residuals[i].r2), fmt(sw.slope_r1), fmt(sw.slope_r2)});
  const std::string in = pair[0].name + "," + pair[1].name + " N=" + std::to_string(N);
  const std::string range = "in [" + fmt(lo) + ", " + fmt(hi) + "]";
  rep.checks.push_back({"log-log slope of r1", in, sw.slope_r1, range, sw.slope_r1 >= lo && sw.slope_r1 <= hi});
  rep.checks.push_back({"log-log slope of r2", in, sw.slope_r2, range, sw.slope_r2 >= lo && sw.slope_r2 <= hi});
  if (std::isnan(sw.slope_r1) || std::isnan(sw.slope_r2))
    rep.warnings.push_back("a residual is at round-off level; its slope is undefined");

  // Degenerate cases: constant first factor, and the commutator of a with itself.
  CsvTable d{"deformation_degenerate", {"case", "h", "r1", "r2"}, {}};
  const Symbol konst = Symbol::constant(n, cplx(1.5, -0.5));
  for (double h : h_list) {
    const SpaceContext ctx = build_context(p, h);
    const auto rc = deformation_residuals(ctx, konst, pair[1].symbol, trunc, rule, inner_drop);
    const auto rs = deformation_residuals(ctx, pair[0].symbol, pair[0].symbol, trunc, rule, inner_drop);
    d.rows.push_back({"constant_a", fmt(h), fmt(rc.r1), fmt(rc.r2)});
    d.rows.push_back({"self_commutator", fmt(h), fmt(rs.r1), fmt(rs.r2)});
    rep.check("constant a: r1", "h=" + fmt(h), rc.r1, degen_tol);
    rep.check("constant a: r2", "h=" + fmt(h), rc.r2, degen_tol);
    rep.check("a = b: r2", "h=" + fmt(h), rs.r2, degen_tol);
  }
  rep.tables.push_back(std::move(t));
  rep.tables.push_back(std::move(d));
  rep.config_echo = cfg.echo();
  return rep;
}

inline GaussianTestFn parse_gaussian(const json& j, int n) {
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "Gaussian entry must be an object");
  GaussianTestFn g;
  g.center = j.contains("center") ? parse_rvec(j.at("center"), n) : RVec::Zero(n);
  g.width = j.value("width", 1.0);
  if (!(g.width > 0.0)) throw Error(Errc::InvalidConfig, "Gaussian width must be positive");
  g.modulation = j.contains("modulation") ? parse_rvec(j.at("modulation"), n) : RVec::Zero(n);
  g.amplitude = j.contains("amplitude") ? parse_complex(j.at("amplitude")) : cplx(1.0);
  return g;
}

inline RunReport verify_egorov(ConfigReader& cfg) {
  RunReport rep;
  rep.command = "verify egorov";
  const PhaseMatrices p = read_phase(cfg);
  const SpaceContext ctx = read_context(cfg, p);
  const int n = ctx.n();
  const QuadratureRule rule = read_rule(cfg, n == 1 ? 80 : 24);
  const double tol = cfg.get<double>("/tolerances/egorov", 1e-6);
  const auto X_grid = read_X_grid(cfg, "/X_grid", n, 0.5, 3);
  json e1 = json{{"name", "e1"}, {"terms", json::array()}};
  {
    std::vector<double> t{1.0, 0.0};
    for (int j = 0; j < n; ++j) {
      t.push_back(j == 0 ? 1.0 : 0.0);
      t.push_back(0.0);
    }
    e1["terms"].push_back(t);
  }
  const json d = default_symbols_json(n);
  const auto syms = read_symbols(cfg, "/symbols", n, json::array({e1, d[0], d[2]}));
  json gdef = json::array();
  {
    json c0 = json::array(), c1 = json::array(), m1 = json::array();
    for (int j = 0; j < n; ++j) {
      c0.push_back(0.0);
      c1.push_back(j == 0 ? 0.4 : -0.2);
      m1.push_back(j == 0 ? 0.7 : 0.3);
    }
    gdef.push_back(json{{"name", "centered"}, {"center", c0}, {"width", 1.0}, {"modulation", c0}, {"amplitude", {1.0, 0.0}}});
    gdef.push_back(json{{"name", "shifted"}, {"center", c1}, {"width", 0.8}, {"modulation", m1}, {"amplitude", {0.6, 0.8}}});
  }
  const json glist = cfg.has("/gaussians") ? cfg.raw("/gaussians") : gdef;
  if (!glist.is_array() || glist.empty()) throw Error(Errc::InvalidConfig, "gaussians must be a nonempty list");
  cfg.record("/gaussians", glist);

  CsvTable t{"egorov", {"symbol", "gaussian", "X", "lhs_scaled_re", "lhs_scaled_im", "rhs_scaled_re", "rhs_scaled_im", "rel_error"}, {}};
  for (const auto& s : syms) {
    for (std::size_t gi = 0; gi < glist.size(); ++gi) {
      const GaussianTestFn u = parse_gaussian(glist[gi], n);
      const std::string gname = glist[gi].value("name", "g" + std::to_string(gi));
      const EgorovReport er = egorov_guillemin_report(ctx, s.symbol, u, X_grid, rule);
      for (const auto& pt : er.points)
        t.rows.push_back({s.name, gname, cvec_str(pt.X), fmt(pt.lhs_scaled.real()), fmt(pt.lhs_scaled.imag()),
                          fmt(pt.rhs_scaled.real()), fmt(pt.rhs_scaled.imag()), fmt(pt.rel_error)});
      rep.check("T_b T u = T Op(b'_{1/2} o kappa_T) u", s.name + " " + gname + " order=" + std::to_string(rule.order),
                er.max_rel_error, tol);
    }
  }
  rep.tables.push_back(std::move(t));
  rep.config_echo = cfg.echo();
  return rep;
}

inline RunReport verify_sw(ConfigReader& cfg) {
  RunReport rep;
  rep.command = "verify sw";
  const PhaseMatrices p = read_phase(cfg);
  const SpaceContext ctx = read_context(cfg, p);
  const int n = ctx.n();
  std::vector<double> one{1.0, 0.0};
  for (int j = 0; j < n; ++j) {
    one.push_back(0.0);
    one.push_back(0.0);
  }
  const auto syms = read_symbols(cfg, "/symbols", n, json::array({json{{"name", "one"}, {"terms", json::array({one})}}}));
  const double radius = cfg.get<double>("/lambda_grid/radius", 6.0);
  const auto spacings = read_list(cfg, "/lambda_grid/spacings", {1.0, 0.5, 0.25});
  const auto X_grid = read_X_grid(cfg, "/X_grid", n, 6.0, n == 1 ? 41 : 13);
  const double tol = cfg.get<double>("/tolerances/sw", 0.01);
  const bool has_target = cfg.has("/target");
  const double target = has_target ? cfg.get<double>("/target", 0.0) : 0.0;

  CsvTable t{"sw", {"symbol", "radius", "spacing", "cells", "l1_estimate"}, {}};
  for (const auto& s : syms) {
    std::vector<double> est;
    for (double sp : spacings) {
      const CellGrid g = complex_cell_grid(n, radius, sp);
      const WienerDiagnostic wd = sw_diagnostic(ctx, s.symbol, g, X_grid);
      est.push_back(wd.l1_estimate);
      t.rows.push_back({s.name, fmt(radius), fmt(sp), fmt(g.centers.size()), fmt(wd.l1_estimate)});
    }
    if (est.size() >= 2) {
      const double rel = std::abs(est.back() - est[est.size() - 2]) / std::max(std::abs(est.back()), 1e-300);
      rep.check("L1 estimate stable under refinement", s.name, rel, tol);
    }
    if (has_target)
      rep.check("L1 estimate matches target", s.name + " target=" + fmt(target),
                std::abs(est.back() - target) / std::max(std::abs(target), 1e-300), tol);
  }
  rep.tables.push_back(std::move(t));
  rep.config_echo = cfg.echo();
  return rep;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"gram", "weyl", "bound", "diag", "deformation", "egorov", "sw"};
  return names;
}

inline RunReport cmd_verify(ConfigReader& cfg, const std::string& suite) {
  if (suite == "gram") return verify_gram(cfg);
  if (suite == "weyl") return verify_weyl(cfg);
  if (suite == "bound") return verify_bound(cfg);
  if (suite == "diag") return verify_diag(cfg);
  if (suite == "deformation") return verify_deformation(cfg);
  if (suite == "egorov") return verify_egorov(cfg);
  if (suite == "sw") return verify_sw(cfg);
  throw Error(Errc::InvalidConfig, "unknown suite " + suite);
}

/// Exit code for an error: 2 for invalid input, 1 for failures during a run.
inline int exit_code_for(Errc e) {
  switch (e) {
    case Errc::NonSymmetric:
    case Errc::SingularB:
    case Errc::NonPositiveCI:
    case Errc::OrderOutOfRange:
    case Errc::UnsupportedSymbol:
    case Errc::InvalidArgument:
    case Errc::InvalidConfig:
      return 2;
    default:
      return 1;
  }
}

}  // namespace hphi::cli
