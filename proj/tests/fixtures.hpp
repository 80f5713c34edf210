// Shared test inputs: the reference Schottky groups and frames.
#pragma once

#include "psoc/counting.hpp"
#include "psoc/multiprecision.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <random>

namespace fx {

using psoc::Mat;
using psoc::Vec;

/// Rank-2 Schottky group in SO(2,1): perpendicular axes through e_3.
template <class T = double>
T default_l2() {
  using std::sqrt;
  return T(4) * sqrt(T(2));
}

template <class T = double>
psoc::Representation<T> schottky21(T l1 = T(4), T l2 = default_l2<T>()) {
  std::vector<psoc::AxisSpec<T>> axes{{T(0), T(0)}, {boost::math::constants::half_pi<T>(), T(0)}};
  return psoc::schottky_so_m1<T>(2, axes, {l1, l2});
}

/// The same group block-embedded in SO(2,2).
template <class T = double>
psoc::Representation<T> reference22(T l1 = T(4), T l2 = default_l2<T>()) {
  return psoc::embed_block(schottky21<T>(l1, l2), psoc::QSpace(2, 2));
}

template <class T = double>
psoc::Vec<T> unit(int d, int i) {
  psoc::Vec<T> v = psoc::Vec<T>::Zero(d);
  v(i) = T(1);
  return v;
}

/// o = e_3, tau = span{e_3, e_4} in R^{2,2}.
template <class T = double>
psoc::BasepointFrame<T> reference_frame() {
  psoc::QSpace sp(2, 2);
  psoc::Mat<T> tau = psoc::Mat<T>::Zero(4, 2);
  tau(2, 0) = T(1);
  tau(3, 1) = T(1);
  return psoc::make_frame<T>(sp, unit<T>(4, 2), tau);
}

/// o = e_3 in R^{2,1}.
template <class T = double>
psoc::BasepointFrame<T> frame21() {
  return psoc::make_frame<T>(psoc::QSpace(2, 1), unit<T>(3, 2));
}

/// o and tau of the reference frame moved by a rotation times a boost, off the
/// invariant block.
template <class T = double>
psoc::BasepointFrame<T> tilted_frame() {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sinh;
  psoc::Mat<T> u = psoc::Mat<T>::Identity(4, 4);
  u(1, 1) = u(2, 2) = cosh(T(0.3));
  u(1, 2) = u(2, 1) = sinh(T(0.3));
  psoc::Mat<T> rot = psoc::Mat<T>::Identity(4, 4);
  rot(0, 0) = rot(1, 1) = cos(T(0.4));
  rot(0, 1) = -sin(T(0.4));
  rot(1, 0) = sin(T(0.4));
  psoc::Mat<T> m = rot * u;
  psoc::Mat<T> tau = m * reference_frame<T>().tau().plane();
  return psoc::make_frame<T>(psoc::QSpace(2, 2), psoc::Vec<T>(m * unit<T>(4, 2)), tau);
}

/// A random timelike basepoint and its default frame.
inline psoc::BasepointFrame<double> random_frame(const psoc::QSpace& sp, std::mt19937_64& rng) {
  Mat<double> u = psoc::random_group_element(sp, rng, 0.4);
  return psoc::make_frame<double>(sp, Vec<double>(u * unit(sp.dim(), sp.dim() - 1)));
}

inline psoc::Word random_word(std::mt19937_64& rng, int k, int maxLen, int minLen = 0) {
  std::uniform_int_distribution<int> len(minLen, maxLen);
  std::uniform_int_distribution<int> let(0, 2 * k - 1);
  std::vector<psoc::Letter> ls;
  int n = len(rng);
  while (static_cast<int>(ls.size()) < n) {
    auto l = static_cast<psoc::Letter>(let(rng));
    if (!ls.empty() && ls.back() == psoc::inverse_letter(l)) continue;
    ls.push_back(l);
  }
  return psoc::Word::from_reduced(ls);
}

/// Random nonempty cyclically reduced word.
inline psoc::Word random_cyclic_word(std::mt19937_64& rng, int k, int maxLen) {
  for (;;) {
    psoc::Word w = random_word(rng, k, maxLen, 1);
    if (psoc::is_cyclically_reduced(w.letters())) return w;
  }
}

}  // namespace fx
