// Geometry at a basepoint o of H^{p,q-1} and a q-plane tau containing o:
// reflections, geodesic types, space-like lengths, Omega margins, the two
// Cartan-type projections b_o, b_tau and their explicit decompositions.
#pragma once

#include "psoc/qlinalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <random>

namespace psoc {

template <class T = double>
class BasepointFrame {
 public:
  const QSpace& space() const { return space_; }
  /// Representative with <o,o> = -1.
  const Vec<T>& o_hat() const { return oHat_; }
  const ProjPoint<T>& o() const { return o_; }
  /// Reflection fixing o and acting as -id on its orthogonal complement.
  const Mat<T>& jo() const { return jo_; }
  const TauFrame<T>& tau() const { return tau_; }
  /// Form-preserving change of basis taking e_d to o and span{e_{p+1..d}} to tau.
  const Mat<T>& transport() const { return a_; }
  const Mat<T>& transport_inverse() const { return aInv_; }

  /// Conjugates a matrix into the standard frame (o = e_d).
  Mat<T> to_standard(const Mat<T>& g) const { return aInv_ * g * a_; }
  Mat<T> from_standard(const Mat<T>& g) const { return a_ * g * aInv_; }

  /// exp(X_s): the model boost moving o along the first frame direction.
  Mat<T> model_boost(T s) const {
    using std::cosh;
    using std::sinh;
    const int d = space_.dim();
    Mat<T> b = Mat<T>::Identity(d, d);
    b(0, 0) = cosh(s);
    b(d - 1, d - 1) = cosh(s);
    b(0, d - 1) = sinh(s);
    b(d - 1, 0) = sinh(s);
    return from_standard(b);
  }

  template <class U>
  friend BasepointFrame<U> make_frame(const QSpace&, const Vec<U>&, const std::optional<Mat<U>>&);

 private:
  QSpace space_;
  Vec<T> oHat_;
  ProjPoint<T> o_;
  Mat<T> jo_;
  TauFrame<T> tau_;
  Mat<T> a_;
  Mat<T> aInv_;
};

namespace detail {

/// Form-orthonormal basis of span(cols of C) under the form diag(signs):
/// returns (positive vectors, negative vectors). Throws on degeneracy.
template <class T>
std::pair<Mat<T>, Mat<T>> split_signature(const Mat<T>& c, const Vec<T>& signs) {
  Mat<T> g = c.transpose() * signs.asDiagonal() * c;
  g = (g + g.transpose()) / T(2);
  Eigen::SelfAdjointEigenSolver<Mat<T>> es(g);
  if (es.info() != Eigen::Success) throw NumericalError("split_signature: eigensolver failed");
  std::vector<Eigen::Index> pos, neg;
  T scale = es.eigenvalues().cwiseAbs().maxCoeff();
  using std::abs;
  using std::sqrt;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    T l = es.eigenvalues()(i);
    if (abs(l) <= T(1e-12) * scale) throw NumericalError("split_signature: degenerate form on subspace");
    (l > T(0) ? pos : neg).push_back(i);
  }
  Mat<T> p(c.rows(), static_cast<Eigen::Index>(pos.size())), n(c.rows(), static_cast<Eigen::Index>(neg.size()));
  // Positive vectors in order of decreasing eigenvalue, negative in order of increasing |eigenvalue|.
  for (std::size_t i = 0; i < pos.size(); ++i) {
    Eigen::Index idx = pos[pos.size() - 1 - i];
    p.col(static_cast<Eigen::Index>(i)) = c * es.eigenvectors().col(idx) / sqrt(es.eigenvalues()(idx));
  }
  for (std::size_t i = 0; i < neg.size(); ++i) {
    Eigen::Index idx = neg[neg.size() - 1 - i];
    n.col(static_cast<Eigen::Index>(i)) = c * es.eigenvectors().col(idx) / sqrt(-es.eigenvalues()(idx));
  }
  return {p, n};
}

template <class T>
Vec<T> form_signs(int p, int q) {
  Vec<T> s(p + q);
  for (int i = 0; i < p + q; ++i) s(i) = i < p ? T(1) : T(-1);
  return s;
}

/// Orthonormal (Euclidean) basis of the form-orthogonal complement of x.
template <class T>
Mat<T> complement_of(const Vec<T>& x, const Vec<T>& signs) {
  const Eigen::Index n = x.size();
  Mat<T> fx(n, 1);
  fx.col(0) = signs.asDiagonal() * x;
  Eigen::HouseholderQR<Mat<T>> qr(fx);
  Mat<T> q = qr.householderQ() * Mat<T>::Identity(n, n);
  return q.rightCols(n - 1);
}

/// Snaps a basis built numerically back onto the canonical one when it
/// already agrees with it to rounding, so standard frames transport exactly.
template <class T>
Mat<T> snap_to_identity(const Mat<T>& a) {
  const Eigen::Index n = a.rows();
  Mat<T> id = Mat<T>::Identity(n, n);
  if ((a - id).cwiseAbs().maxCoeff() < T(1e3) * eps<T>()) return id;
  return a;
}

}  // namespace detail

/// Frame at o with default tau = span{o} + a negative (q-1)-plane in o^perp.
template <class T>
BasepointFrame<T> make_frame(const QSpace& space, const Vec<T>& oRep,
                             const std::optional<Mat<T>>& tauBasis = std::nullopt) {
  const int d = space.dim();
  const int p = space.p();
  const int q = space.q();
  if (d <= 2) throw DomainError("make_frame: need d = p + q > 2");
  if (oRep.size() != d) throw std::invalid_argument("make_frame: basepoint has wrong dimension");
  T oo = form_eval(space, oRep, oRep);
  if (!(oo < -T(1e-12) * oRep.squaredNorm())) throw DomainError("make_frame: o is not timelike");
  using std::sqrt;
  BasepointFrame<T> fr;
  fr.space_ = space;
  fr.o_ = ProjPoint<T>(oRep);
  fr.oHat_ = fr.o_.rep() / sqrt(-form_eval(space, fr.o_.rep(), fr.o_.rep()));
  const Vec<T>& oh = fr.oHat_;
  Vec<T> signs = detail::form_signs<T>(p, q);
  // J v = -v + 2 <o,v> o / <o,o> = -v - 2 <o,v> o.
  fr.jo_ = -Mat<T>::Identity(d, d) - T(2) * oh * space.lower<T>(oh).transpose();

  // Negative (q-1)-plane inside o^perp, and the tau frame.
  Mat<T> negPart;
  if (tauBasis) {
    fr.tau_ = TauFrame<T>(space, *tauBasis);
    Mat<T> f = space.form_matrix<T>();
    Mat<T> b = *tauBasis;
    Mat<T> gram = b.transpose() * f * b;
    Vec<T> proj = b * gram.ldlt().solve(Vec<T>(b.transpose() * f * oh));
    if ((proj - oh).norm() > T(1e-9) * oh.norm()) throw DomainError("make_frame: tau does not contain o");
    // tau ∩ o^perp: project the basis off o and orthonormalize.
    Mat<T> c(d, q);
    for (int j = 0; j < q; ++j) {
      Vec<T> v = b.col(j);
      c.col(j) = v + form_eval(space, v, oh) * oh;
    }
    Eigen::ColPivHouseholderQR<Mat<T>> qr(c);
    Mat<T> qm = qr.householderQ() * Mat<T>::Identity(d, d);
    Mat<T> cc = qm.leftCols(q - 1);
    negPart = q > 1 ? detail::split_signature<T>(cc, signs).second : Mat<T>(d, 0);
  } else {
    Mat<T> perp = detail::complement_of<T>(oh, signs);
    auto [pos, neg] = detail::split_signature<T>(perp, signs);
    if (neg.cols() != q - 1) throw NumericalError("make_frame: unexpected signature of o^perp");
    negPart = neg;
    Mat<T> b(d, q);
    b.leftCols(q - 1) = negPart;
    b.col(q - 1) = oh;
    fr.tau_ = TauFrame<T>(space, b);
  }
  if (negPart.cols() != q - 1) throw DomainError("make_frame: tau is not negative definite");

  // Positive part: tau^perp.
  Mat<T> tauPerp = q_complement(space, fr.tau_.plane());
  Mat<T> posPart = detail::split_signature<T>(tauPerp, signs).first;
  if (posPart.cols() != p) throw NumericalError("make_frame: unexpected signature of tau^perp");
  // Align both parts with the coordinate axes where possible, for readable standard frames.
  auto align = [&](const Mat<T>& basis, int firstCoord) {
    Mat<T> out = basis;
    const Eigen::Index m = basis.cols();
    if (m == 0) return out;
    // Rotate within the span (an orthogonal change preserving the form) so that
    // the basis is as close as possible to the coordinate vectors.
    Mat<T> target = Mat<T>::Zero(d, m);
    for (Eigen::Index j = 0; j < m; ++j) target(firstCoord + j, j) = T(1);
    Mat<T> sgn = signs.asDiagonal();
    Mat<T> mtx = basis.transpose() * sgn * target;
    Eigen::JacobiSVD<Mat<T>> svd(mtx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat<T> rot = svd.matrixU() * svd.matrixV().transpose();
    out = basis * rot;
    return out;
  };
  posPart = align(posPart, 0);
  negPart = align(negPart, p);
  Mat<T> a(d, d);
  a.leftCols(p) = posPart;
  if (q > 1) a.middleCols(p, q - 1) = negPart;
  a.col(d - 1) = oh;
  fr.a_ = detail::snap_to_identity<T>(a);
  fr.aInv_ = form_inverse(space, fr.a_);
  return fr;
}

// ---------------------------------------------------------------------------
// Geodesic types and lengths.

enum class GeodesicClass { spacelike, timelike, lightlike };

inline const char* to_string(GeodesicClass c) {
  switch (c) {
    case GeodesicClass::spacelike: return "spacelike";
    case GeodesicClass::timelike: return "timelike";
    case GeodesicClass::lightlike: return "lightlike";
  }
  return "?";
}

template <class T = double>
struct PairGeometry {
  bool same = false;        // o' = o as points of H^{p,q-1}
  GeodesicClass cls = GeodesicClass::lightlike;
  T pairing = T(0);         // <o^, o'^> with both normalized to -1
  T perpSquare = T(0);      // <u,u> for the o^perp component u of o'^
};

namespace detail {

/// With `normalized`, the caller guarantees <o', o'> = -1 (o' = g o^ for a
/// form-preserving g). Then <u,u> = c^2 - 1 exactly, which avoids evaluating
/// the form on a large vector.
template <class T>
PairGeometry<T> pair_geometry(const BasepointFrame<T>& fr, const Vec<T>& oPrime, T lightTol = T(1e-9),
                              T sameTol = T(1e-12), bool normalized = false) {
  const QSpace& sp = fr.space();
  using std::abs;
  using std::sqrt;
  Vec<T> op = oPrime;
  if (!normalized) {
    T oo = form_eval(sp, oPrime, oPrime);
    if (!(oo < -T(1e-12) * oPrime.squaredNorm())) throw DomainError("classify_pair: o' is not timelike");
    op /= sqrt(-oo);
  }
  PairGeometry<T> g;
  g.pairing = form_eval(sp, fr.o_hat(), op);
  Vec<T> u = op + g.pairing * fr.o_hat();
  g.perpSquare = normalized ? T(g.pairing * g.pairing - T(1)) : form_eval(sp, u, u);
  T un = fr.tau().norm(u);
  if (un <= sameTol * fr.tau().norm(op)) {
    g.same = true;
    return g;
  }
  T ratio = g.perpSquare / (un * un);
  if (ratio > lightTol)
    g.cls = GeodesicClass::spacelike;
  else if (ratio < -lightTol)
    g.cls = GeodesicClass::timelike;
  else
    g.cls = GeodesicClass::lightlike;
  return g;
}

/// arccosh|c|, switching to arcsinh sqrt<u,u> near c = 1 where it is better conditioned.
template <class T>
T spacelike_length(const PairGeometry<T>& g) {
  using std::abs;
  using std::sqrt;
  T c = abs(g.pairing);
  if (c >= T(2)) return acosh_(c);
  return asinh_(sqrt(g.perpSquare > T(0) ? g.perpSquare : T(0)));
}

}  // namespace detail

/// Type of the geodesic joining o and o'. Pairs within 1e-9 of degenerate are
/// reported as lightlike.
template <class T>
GeodesicClass classify_pair(const BasepointFrame<T>& fr, const Vec<T>& oPrime) {
  auto g = detail::pair_geometry<T>(fr, oPrime);
  if (g.same) throw DomainError("classify_pair: o' = o has no geodesic type");
  return g.cls;
}

template <class T>
GeodesicClass classify_pair(const BasepointFrame<T>& fr, const ProjPoint<T>& oPrime) {
  return classify_pair<T>(fr, oPrime.rep());
}

/// Length of the space-like segment from o to o': arccosh|<o^, o'^>|.
template <class T>
T length_spacelike(const BasepointFrame<T>& fr, const Vec<T>& oPrime) {
  auto g = detail::pair_geometry<T>(fr, oPrime);
  if (g.same) return T(0);
  if (g.cls != GeodesicClass::spacelike)
    throw DomainError(std::string("length_spacelike: pair is ") + to_string(g.cls));
  return detail::spacelike_length(g);
}

template <class T>
T length_spacelike(const BasepointFrame<T>& fr, const ProjPoint<T>& oPrime) {
  return length_spacelike<T>(fr, oPrime.rep());
}

/// min over the sample of |<o^, xi^>| for unit representatives xi^.
template <class T>
T omega_margin(const BasepointFrame<T>& fr, const std::vector<ProjPoint<T>>& sample) {
  if (sample.empty()) throw std::invalid_argument("omega_margin: empty limit sample");
  T m = std::numeric_limits<T>::max();
  using std::abs;
  for (const auto& x : sample) {
    T v = abs(form_eval(fr.space(), fr.o_hat(), x.rep()));
    if (v < m) m = v;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Projections.

/// J^o g J^o g^{-1}.
template <class T>
Mat<T> reflected_product(const BasepointFrame<T>& fr, const Mat<T>& g) {
  return fr.jo() * g * fr.jo() * form_inverse(fr.space(), g);
}

/// Classification of g.o relative to o, or `same` when g fixes o.
template <class T>
PairGeometry<T> orbit_geometry(const BasepointFrame<T>& fr, const Mat<T>& g) {
  return detail::pair_geometry<T>(fr, Vec<T>(g * fr.o_hat()), T(1e-9), T(1e-12), true);
}

/// b_o(g) = 1/2 lambda_1(J^o g J^o g^{-1}), defined when g.o = o or g.o is
/// joined to o by a space-like geodesic.
template <class T>
T b_o(const BasepointFrame<T>& fr, const Mat<T>& g) {
  auto geo = orbit_geometry(fr, g);
  if (geo.same) return T(0);
  if (geo.cls != GeodesicClass::spacelike)
    throw DomainError(std::string("b_o: g.o is ") + to_string(geo.cls) + " relative to o");
  T s = lambda1<T>(reflected_product(fr, g)) / T(2);
  return s > T(0) ? s : T(0);
}

/// b_tau(g) = 1/2 log ‖J^o g J^o g^{-1}‖_tau.
template <class T>
T b_tau(const BasepointFrame<T>& fr, const Mat<T>& g) {
  using std::log;
  T s = log(fr.tau().op_norm(reflected_product(fr, g))) / T(2);
  return s > T(0) ? s : T(0);
}

template <class T = double>
struct Decomposition {
  Mat<T> left;   // k (KBH) or h (HBH)
  T s;
  Mat<T> right;  // h (KBH) or h' (HBH)
  T residual;    // relative reconstruction residual
};

namespace detail {

/// Orthogonal matrix whose column `col` is the unit vector x (Householder).
template <class T>
Mat<T> orthogonal_with_column(const Vec<T>& x, Eigen::Index col) {
  const Eigen::Index n = x.size();
  Vec<T> e = Vec<T>::Zero(n);
  e(col) = T(1);
  Vec<T> v = e - x;
  T vv = v.squaredNorm();
  if (vv < T(1e-30)) return Mat<T>::Identity(n, n);
  return Mat<T>::Identity(n, n) - T(2) * v * v.transpose() / vv;
}

}  // namespace detail

/// g = k exp(X_s) h with k preserving <,>_tau and h fixing o.
template <class T>
Decomposition<T> decompose_KBH(const BasepointFrame<T>& fr, const Mat<T>& g, T tol = T(1e-8)) {
  const QSpace& sp = fr.space();
  const int d = sp.dim(), p = sp.p(), q = sp.q();
  Mat<T> gs = fr.to_standard(g);
  Vec<T> w = gs.col(d - 1);
  if (w(d - 1) < T(0)) w = -w;
  Vec<T> wp = w.head(p), wm = w.tail(q);
  T np = wp.norm();
  T s = detail::asinh_(np);
  Mat<T> k1 = np > T(0) ? detail::orthogonal_with_column<T>(Vec<T>(wp / np), 0) : Mat<T>(Mat<T>::Identity(p, p));
  Mat<T> k2 = detail::orthogonal_with_column<T>(Vec<T>(wm / wm.norm()), q - 1);
  if (k1.determinant() * k2.determinant() < T(0)) {
    if (p >= 2)
      k1.col(p - 1) *= T(-1);
    else
      k2.col(0) *= T(-1);
  }
  Mat<T> k = Mat<T>::Zero(d, d);
  k.topLeftCorner(p, p) = k1;
  k.bottomRightCorner(q, q) = k2;
  Mat<T> b = fr.to_standard(fr.model_boost(-s));
  Mat<T> h = b * k.transpose() * gs;
  Decomposition<T> out{fr.from_standard(k), s, fr.from_standard(h), T(0)};
  out.residual = detail::rel_diff<T>(Mat<T>(out.left * fr.model_boost(s) * out.right), g);
  if (!(out.residual < tol)) throw NumericalError("decompose_KBH: reconstruction residual above tolerance");
  return out;
}

/// g = h exp(X_s) h' with h, h' fixing o; requires g.o space-like from o.
template <class T>
Decomposition<T> decompose_HBH(const BasepointFrame<T>& fr, const Mat<T>& g, T tol = T(1e-8)) {
  const QSpace& sp = fr.space();
  const int d = sp.dim(), p = sp.p(), q = sp.q();
  auto geo = orbit_geometry(fr, g);
  if (geo.same) return {Mat<T>::Identity(d, d), T(0), g, T(0)};
  if (geo.cls != GeodesicClass::spacelike)
    throw DomainError(std::string("decompose_HBH: g.o is ") + to_string(geo.cls) + " relative to o");
  T s = detail::spacelike_length(geo);
  Mat<T> gs = fr.to_standard(g);
  Vec<T> w = gs.col(d - 1);
  if (w(d - 1) < T(0)) w = -w;
  Vec<T> u = w.head(d - 1);
  Vec<T> sub = detail::form_signs<T>(p, q - 1);
  using std::sqrt;
  T uu = u.dot(sub.asDiagonal() * u);
  Vec<T> uh = u / sqrt(uu);
  auto [pos, neg] = detail::split_signature<T>(detail::complement_of<T>(uh, sub), sub);
  if (pos.cols() != p - 1 || neg.cols() != q - 1) throw NumericalError("decompose_HBH: completion failed");
  Mat<T> hm(d - 1, d - 1);
  hm.col(0) = uh;
  if (p > 1) hm.middleCols(1, p - 1) = pos;
  if (q > 1) hm.rightCols(q - 1) = neg;
  if (hm.determinant() < T(0)) hm.col(d - 2) *= T(-1);
  Mat<T> h = Mat<T>::Identity(d, d);
  h.topLeftCorner(d - 1, d - 1) = hm;
  Mat<T> hInv = form_inverse(sp, h);
  Mat<T> hp = fr.to_standard(fr.model_boost(-s)) * hInv * gs;
  Decomposition<T> out{fr.from_standard(h), s, fr.from_standard(hp), T(0)};
  out.residual = detail::rel_diff<T>(Mat<T>(out.left * fr.model_boost(s) * out.right), g);
  Vec<T> fixedCheck = hp.col(d - 1);
  using std::abs;
  T fixErr = (fixedCheck.head(d - 1)).norm() / abs(fixedCheck(d - 1));
  if (!(out.residual < tol) || !(fixErr < tol))
    throw NumericalError("decompose_HBH: reconstruction residual above tolerance");
  return out;
}

// ---------------------------------------------------------------------------
// Distances in the space of negative q-planes.

namespace detail {

/// Distance from span(P) to the standard plane, both in the standard frame.
template <class T>
T xg_distance_to_standard(const Mat<T>& planeBasis, int p) {
  const Eigen::Index q = planeBasis.cols();
  Mat<T> top = planeBasis.topRows(p);
  Mat<T> bot = planeBasis.bottomRows(q);
  Mat<T> t = top * bot.inverse();
  Eigen::JacobiSVD<Mat<T>> svd(t);
  T sum(0);
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    T sv = svd.singularValues()(i);
    if (!(sv < T(1))) throw DomainError("xg_distance: plane is not negative definite");
    T r = atanh_(sv);
    sum += r * r;
  }
  using std::sqrt;
  return sqrt(sum);
}

}  // namespace detail

/// Riemannian distance between two negative-definite q-planes, normalized so
/// that d(tau, exp(X_s) tau) = s for the model boost.
template <class T>
T xg_distance(const QSpace& space, const Mat<T>& basis1, const Mat<T>& basis2) {
  Vec<T> signs = detail::form_signs<T>(space.p(), space.q());
  auto neg = detail::split_signature<T>(basis1, signs).second;
  auto pos = detail::split_signature<T>(q_complement(space, basis1), signs).first;
  if (neg.cols() != space.q() || pos.cols() != space.p()) throw DomainError("xg_distance: plane is not negative definite");
  Mat<T> a(space.dim(), space.dim());
  a.leftCols(space.p()) = pos;
  a.rightCols(space.q()) = neg;
  return detail::xg_distance_to_standard<T>(Mat<T>(form_inverse(space, a) * basis2), space.p());
}

/// min over sampled h in exp(p^tau ∩ h^o) of d(g^{-1} tau, h tau). The first
/// sample is h = id; the rest come from a fixed Halton sequence, so the result
/// is nonincreasing in nSamples.
template <class T>
T min_dist_sampling_check(const BasepointFrame<T>& fr, const Mat<T>& g, int nSamples) {
  const QSpace& sp = fr.space();
  const int d = sp.dim(), p = sp.p(), q = sp.q();
  Mat<T> gs = fr.to_standard(g);
  Mat<T> e = Mat<T>::Zero(d, q);
  for (int j = 0; j < q; ++j) e(p + j, j) = T(1);
  Mat<T> plane = form_inverse(sp, gs) * e;
  T best = detail::xg_distance_to_standard<T>(plane, p);
  if (q == 1 || nSamples <= 1) return best;
  const int dim = p * (q - 1);
  const T radius = T(2) * best + T(1);
  for (int i = 1; i < nSamples; ++i) {
    auto x = detail::halton(static_cast<std::uint64_t>(i), dim);
    Mat<T> y = Mat<T>::Zero(d, d);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < q - 1; ++b) {
        T z = radius * (T(2) * T(x[static_cast<std::size_t>(a * (q - 1) + b)]) - T(1));
        y(a, p + b) = z;
        y(p + b, a) = z;
      }
    Mat<T> hInv = Mat<T>(-y).exp();
    T dist = detail::xg_distance_to_standard<T>(Mat<T>(hInv * plane), p);
    if (dist < best) best = dist;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Random elements of the relevant subgroups (double precision only).

/// Random element of the stabilizer H^o: exp of a random so(p,q-1) matrix.
inline Mat<double> random_stabilizer(const BasepointFrame<double>& fr, std::mt19937_64& rng, double scale) {
  const int d = fr.space().dim();
  std::normal_distribution<double> nd(0.0, scale);
  Mat<double> s = Mat<double>::Zero(d, d);
  for (int a = 0; a < d - 1; ++a)
    for (int b = a + 1; b < d - 1; ++b) {
      s(a, b) = nd(rng);
      s(b, a) = -s(a, b);
    }
  Mat<double> x = fr.space().form_matrix<double>() * s;
  return fr.from_standard(Mat<double>(x.exp()));
}

/// Random element of K^tau (preserves <,>_tau): exp of so(p) + so(q) in the frame.
inline Mat<double> random_compact(const BasepointFrame<double>& fr, std::mt19937_64& rng, double scale) {
  const int d = fr.space().dim(), p = fr.space().p();
  std::normal_distribution<double> nd(0.0, scale);
  Mat<double> s = Mat<double>::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      if ((a < p) != (b < p)) continue;
      s(a, b) = nd(rng);
      s(b, a) = -s(a, b);
    }
  return fr.from_standard(Mat<double>(s.exp()));
}

/// Random element of SO_0(p,q): exp of a random Lie algebra element.
inline Mat<double> random_group_element(const QSpace& space, std::mt19937_64& rng, double scale) {
  const int d = space.dim();
  std::normal_distribution<double> nd(0.0, scale);
  Mat<double> s = Mat<double>::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      s(a, b) = nd(rng);
      s(b, a) = -s(a, b);
    }
  Mat<double> x = space.form_matrix<double>() * s;
  return x.exp();
}

}  // namespace psoc
