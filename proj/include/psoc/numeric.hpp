// Scalar-generic aliases and small numeric helpers shared by every module.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace psoc {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Precondition or domain violation (timelike pair, non-proximal input, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A pairing that must be nonzero fell below the transversality tolerance.
class TransversalityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An eigen/SVD routine failed or a reconstruction residual was too large.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class T>
T eps() {
  return std::numeric_limits<T>::epsilon();
}

template <class T>
T acosh_(const T& x) {
  using std::log;
  using std::sqrt;
  return log(x + sqrt((x - T(1)) * (x + T(1))));
}

template <class T>
T asinh_(const T& x) {
  using std::abs;
  using std::log;
  using std::sqrt;
  T ax = abs(x);
  T r = log(ax + sqrt(ax * ax + T(1)));
  return x < T(0) ? -r : r;
}

template <class T>
T atanh_(const T& x) {
  using std::log;
  return T(0.5) * log((T(1) + x) / (T(1) - x));
}

template <class T>
double to_double(const T& x) {
  return static_cast<double>(x);
}

/// Relative Frobenius distance ‖a − b‖ / max(1, ‖b‖).
template <class T>
T rel_diff(const Mat<T>& a, const Mat<T>& b) {
  T nb = b.norm();
  return (a - b).norm() / (nb > T(1) ? nb : T(1));
}

/// Relative distance between two lifts, minimized over the sign of the lift.
template <class T>
T rel_diff_up_to_sign(const Mat<T>& a, const Mat<T>& b) {
  T plus = rel_diff<T>(a, b);
  T minus = rel_diff<T>(Mat<T>(-a), b);
  return plus < minus ? plus : minus;
}

/// Matrix exponential by scaling and squaring of the Taylor series. Works for
/// any scalar type; Eigen's MatrixFunctions only covers the builtin floats.
template <class T>
Mat<T> expm(const Mat<T>& a) {
  const Eigen::Index n = a.rows();
  T norm = n > 0 ? T(a.cwiseAbs().rowwise().sum().maxCoeff()) : T(0);
  int squarings = 0;
  while (norm > T(0.5)) {
    norm /= T(2);
    ++squarings;
  }
  Mat<T> x = a;
  for (int i = 0; i < squarings; ++i) x /= T(2);
  Mat<T> sum = Mat<T>::Identity(n, n);
  Mat<T> term = Mat<T>::Identity(n, n);
  for (int k = 1; k < 400; ++k) {
    term = Mat<T>(term * x) / T(k);
    sum += term;
    if (term.norm() <= eps<T>() * sum.norm()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = Mat<T>(sum * sum);
  return sum;
}

}  // namespace detail
}  // namespace psoc
