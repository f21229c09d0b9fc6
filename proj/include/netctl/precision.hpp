#pragma once

// Extended-precision scalar types and their Eigen integration.
//
// Each precision tier is a fixed-size MPFR number, so a scalar type carries
// its own working precision and no global precision state is involved.

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <type_traits>

#include <boost/multiprecision/mpfr.hpp>
#include <Eigen/Core>

namespace netctl {

namespace bmp = boost::multiprecision;

template <unsigned Digits10>
using MpFloat =
    bmp::number<bmp::mpfr_float_backend<Digits10, bmp::allocate_stack>, bmp::et_off>;

using Float50 = MpFloat<50>;
using Float100 = MpFloat<100>;
using Float200 = MpFloat<200>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using ComplexMatrixX = MatrixX<std::complex<Scalar>>;
template <typename Scalar>
using ComplexVectorX = VectorX<std::complex<Scalar>>;

using Index = Eigen::Index;

/// Working precision, in decimal digits, of the software floating-point
/// format used for Gramian spectra.
struct PrecisionConfig {
  int digits = 100;

  /// Largest digit count backed by a scalar tier.
  static constexpr int kMaxDigits = 200;

  /// Smallest-eigenvalue threshold 10^(-digits/2) below which a Gramian is
  /// treated as singular.
  template <typename Scalar>
  Scalar zero_threshold() const;

  /// Eigen-residual bound 10^(-digits+10).
  template <typename Scalar>
  Scalar residual_tolerance() const;

  /// Interlacing audit bound 10^(-digits+12).
  template <typename Scalar>
  Scalar interlacing_tolerance() const;

  void validate() const;
};

template <typename Scalar>
Scalar pow10(int exponent) {
  using std::pow;
  return pow(Scalar(10), Scalar(exponent));
}

template <typename Scalar>
Scalar PrecisionConfig::zero_threshold() const {
  using std::pow;
  return pow(Scalar(10), Scalar(-digits) / 2);
}

template <typename Scalar>
Scalar PrecisionConfig::residual_tolerance() const {
  return pow10<Scalar>(-digits + 10);
}

template <typename Scalar>
Scalar PrecisionConfig::interlacing_tolerance() const {
  return pow10<Scalar>(-digits + 12);
}

template <typename Scalar>
double to_double(const Scalar& x) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return x;
  } else {
    return x.template convert_to<double>();
  }
}

/// Decimal string with `digits` significant digits in scientific notation.
template <typename Scalar>
std::string to_decimal_string(const Scalar& x, int digits);

template <typename Scalar>
int scalar_digits10() {
  return std::numeric_limits<Scalar>::digits10;
}

/// Calls `fn(std::type_identity<Scalar>{})` with the smallest scalar tier
/// whose precision covers `prec.digits`.
template <typename Fn>
decltype(auto) with_precision(const PrecisionConfig& prec, Fn&& fn) {
  prec.validate();
  if (prec.digits <= 16) return fn(std::type_identity<double>{});
  if (prec.digits <= 50) return fn(std::type_identity<Float50>{});
  if (prec.digits <= 100) return fn(std::type_identity<Float100>{});
  return fn(std::type_identity<Float200>{});
}

}  // namespace netctl

#define NETCTL_FOR_EACH_SCALAR(X) \
  X(double)                       \
  X(::netctl::Float50)            \
  X(::netctl::Float100)           \
  X(::netctl::Float200)

namespace Eigen {

// Boost 1.74 ships Eigen traits that predate Eigen 3.4's infinity/quiet_NaN.
template <class Backend>
struct NumTraits<boost::multiprecision::number<Backend, boost::multiprecision::et_off>>
    : GenericNumTraits<boost::multiprecision::number<Backend, boost::multiprecision::et_off>> {
  using Self = boost::multiprecision::number<Backend, boost::multiprecision::et_off>;
  using Real = Self;
  using NonInteger = Self;
  using Literal = Self;
  using Nested = Self;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 4,
    MulCost = 8
  };
  static Self epsilon() { return std::numeric_limits<Self>::epsilon(); }
  static Self dummy_precision() { return 1000 * epsilon(); }
  static Self highest() { return (std::numeric_limits<Self>::max)(); }
  static Self lowest() { return std::numeric_limits<Self>::lowest(); }
  static int digits10() { return std::numeric_limits<Self>::digits10; }
  static Self infinity() { return std::numeric_limits<Self>::infinity(); }
  static Self quiet_NaN() { return std::numeric_limits<Self>::quiet_NaN(); }
};

}  // namespace Eigen
