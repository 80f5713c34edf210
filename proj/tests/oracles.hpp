// Independent reference implementations used to cross-check the library.
#pragma once

#include "psoc/qlinalg.hpp"
#include "psoc/wordgroup.hpp"

#include <functional>
#include <map>
#include <random>
#include <set>

namespace oracle {

using psoc::Mat;
using psoc::Vec;

/// Free reduction by repeated scanning for an adjacent inverse pair.
inline std::vector<psoc::Letter> reduce_by_scanning(std::vector<psoc::Letter> w) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (w[i] == psoc::inverse_letter(w[i + 1])) {
        w.erase(w.begin() + static_cast<std::ptrdiff_t>(i), w.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        changed = true;
        break;
      }
    }
  }
  return w;
}

/// All words of length <= L over 2k letters, reduced, deduplicated.
inline std::set<std::vector<psoc::Letter>> brute_ball(int k, int L) {
  std::set<std::vector<psoc::Letter>> out;
  std::vector<std::vector<psoc::Letter>> layer{{}};
  out.insert({});
  for (int n = 1; n <= L; ++n) {
    std::vector<std::vector<psoc::Letter>> next;
    for (const auto& w : layer)
      for (int l = 0; l < 2 * k; ++l) {
        auto x = w;
        x.push_back(static_cast<psoc::Letter>(l));
        next.push_back(x);
        out.insert(reduce_by_scanning(x));
      }
    layer = std::move(next);
  }
  return out;
}

/// Number of conjugacy classes meeting ball(L) minus the identity, found by
/// merging elements of ball(L) that are conjugate by a letter while staying
/// inside ball(L) (union-find).
inline std::size_t brute_class_count(int k, int L) {
  auto ballSet = brute_ball(k, L);
  std::vector<std::vector<psoc::Letter>> elems(ballSet.begin(), ballSet.end());
  std::map<std::vector<psoc::Letter>, std::size_t> index;
  for (std::size_t i = 0; i < elems.size(); ++i) index[elems[i]] = i;
  std::vector<std::size_t> parent(elems.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (std::size_t i = 0; i < elems.size(); ++i)
    for (int l = 0; l < 2 * k; ++l) {
      std::vector<psoc::Letter> c{static_cast<psoc::Letter>(l)};
      c.insert(c.end(), elems[i].begin(), elems[i].end());
      c.push_back(psoc::inverse_letter(static_cast<psoc::Letter>(l)));
      auto r = reduce_by_scanning(c);
      auto it = index.find(r);
      if (it != index.end()) parent[find(i)] = find(it->second);
    }
  std::set<std::size_t> roots;
  for (std::size_t i = 0; i < elems.size(); ++i)
    if (!elems[i].empty()) roots.insert(find(i));
  return roots.size();
}

/// Logs of tau-singular values from the eigenvalues of Q^{-1} g^T Q g.
inline std::vector<double> tau_singular_logs(const Mat<double>& g, const Mat<double>& q) {
  Mat<double> m = q.inverse() * g.transpose() * q * g;
  Eigen::EigenSolver<Mat<double>> es(m);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(0.5 * std::log(std::abs(es.eigenvalues()(i))));
  std::sort(out.rbegin(), out.rend());
  return out;
}

/// Minimum chordal distance from a unit line to unit vectors of ker(theta),
/// over a dense sample of the hyperplane's unit sphere.
inline double hyperplane_distance_by_sampling(const Vec<double>& a, const Vec<double>& theta, int n) {
  const int d = static_cast<int>(a.size());
  Mat<double> th(d, 1);
  th.col(0) = theta / theta.norm();
  Eigen::HouseholderQR<Mat<double>> qr(th);
  Mat<double> q = qr.householderQ() * Mat<double>::Identity(d, d);
  Mat<double> ker = q.rightCols(d - 1);
  // Closest point is the projection; sample around it and globally.
  double best = 10;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0, 1);
  Vec<double> proj = ker * (ker.transpose() * a);
  for (int i = 0; i < n; ++i) {
    Vec<double> c(d - 1);
    for (int j = 0; j < d - 1; ++j) c(j) = nd(rng);
    Vec<double> v = ker * c;
    if (i % 2 == 0 && proj.norm() > 0) v = proj / proj.norm() + 1e-3 * std::pow(0.999, i) * v;
    v /= v.norm();
    best = std::min({best, (a - v).norm(), (a + v).norm()});
  }
  return best;
}

}  // namespace oracle
