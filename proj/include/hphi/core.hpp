#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hphi {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

enum class Errc {
  NonSymmetric,
  SingularB,
  NonPositiveCI,
  InvariantViolation,
  OrderOutOfRange,
  NonFiniteSample,
  NonFinite,
  UnsupportedSymbol,
  InvalidArgument,
  InvalidConfig,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::NonSymmetric: return "NonSymmetric";
    case Errc::SingularB: return "SingularB";
    case Errc::NonPositiveCI: return "NonPositiveCI";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::OrderOutOfRange: return "OrderOutOfRange";
    case Errc::NonFiniteSample: return "NonFiniteSample";
    case Errc::NonFinite: return "NonFinite";
    case Errc::UnsupportedSymbol: return "UnsupportedSymbol";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Bilinear pairing <x, y> = sum_j x_j y_j (no conjugation).
inline cplx bilinear(const CVec& x, const CVec& y) { return (x.array() * y.array()).sum(); }

// |z|^2 summed over components.
inline double norm2(const CVec& z) { return z.squaredNorm(); }

inline double max_abs(const CMat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace hphi
