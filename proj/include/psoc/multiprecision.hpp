// 100-digit binary float scalar for the library templates.
#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <Eigen/Core>

#include <limits>

namespace psoc {

using Real100 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<100>,
                                              boost::multiprecision::et_off>;

}  // namespace psoc

namespace Eigen {

template <>
struct NumTraits<psoc::Real100> : GenericNumTraits<psoc::Real100> {
  using R = psoc::Real100;
  using Real = R;
  using NonInteger = R;
  using Literal = R;
  using Nested = R;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 4,
    AddCost = 16,
    MulCost = 32
  };
  static Real epsilon() { return std::numeric_limits<R>::epsilon(); }
  static Real dummy_precision() { return 1000 * epsilon(); }
  static Real highest() { return (std::numeric_limits<R>::max)(); }
  static Real lowest() { return std::numeric_limits<R>::lowest(); }
  static int digits10() { return std::numeric_limits<R>::digits10; }
  static Real infinity() { return std::numeric_limits<R>::infinity(); }
  static Real quiet_NaN() { return std::numeric_limits<R>::quiet_NaN(); }
};

}  // namespace Eigen
