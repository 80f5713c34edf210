// Quadratic-form linear algebra: the (p,q) form, tau-norms, eigen and
// singular data, projective distances, cross-ratio and proximality checks.
#pragma once

#include "psoc/numeric.hpp"

#include <algorithm>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace psoc {

/// Signature (p,q) and the diagonal form diag(+1 x p, -1 x q).
class QSpace {
 public:
  QSpace() = default;
  QSpace(int p, int q) : p_(p), q_(q) {
    if (p < 1 || q < 1) throw std::invalid_argument("QSpace: p and q must be >= 1");
  }

  int p() const { return p_; }
  int q() const { return q_; }
  int dim() const { return p_ + q_; }
  /// Sign of the i-th diagonal entry of the form.
  int sign(int i) const { return i < p_ ? 1 : -1; }

  template <class T = double>
  Mat<T> form_matrix() const {
    Mat<T> f = Mat<T>::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) f(i, i) = T(sign(i));
    return f;
  }

  /// F v, i.e. the covector <v, .>.
  template <class T>
  Vec<T> lower(const Vec<T>& v) const {
    Vec<T> r = v;
    for (int i = p_; i < dim(); ++i) r(i) = -r(i);
    return r;
  }

  friend bool operator==(const QSpace&, const QSpace&) = default;

 private:
  int p_ = 1;
  int q_ = 1;
};

template <class T>
T form_eval(const QSpace& space, const Vec<T>& u, const Vec<T>& v) {
  if (u.size() != space.dim() || v.size() != space.dim())
    throw std::invalid_argument("form_eval: dimension mismatch");
  T s(0);
  for (int i = 0; i < space.dim(); ++i) s += T(space.sign(i)) * u(i) * v(i);
  return s;
}

/// Inverse of a form-preserving matrix: F g^T F. Exact for any lift sign.
template <class T>
Mat<T> form_inverse(const QSpace& space, const Mat<T>& g) {
  Mat<T> r = g.transpose();
  for (int i = 0; i < space.dim(); ++i)
    for (int j = 0; j < space.dim(); ++j)
      if (space.sign(i) != space.sign(j)) r(i, j) = -r(i, j);
  return r;
}

/// ‖g^T F g − F‖ / ‖F‖ (Frobenius).
template <class T>
T form_defect(const QSpace& space, const Mat<T>& g) {
  Mat<T> f = space.form_matrix<T>();
  using std::sqrt;
  return (g.transpose() * f * g - f).norm() / sqrt(T(space.dim()));
}

/// Basis (as columns) of the form-orthogonal complement of span(columns of B).
template <class T>
Mat<T> q_complement(const QSpace& space, const Mat<T>& basis) {
  const int d = space.dim();
  if (basis.rows() != d) throw std::invalid_argument("q_complement: dimension mismatch");
  const int m = static_cast<int>(basis.cols());
  Mat<T> fb = space.form_matrix<T>() * basis;
  Eigen::ColPivHouseholderQR<Mat<T>> qr(fb);
  qr.setThreshold(T(1e3) * detail::eps<T>() * T(d));
  if (qr.rank() != m) throw std::invalid_argument("q_complement: dependent input vectors");
  Mat<T> q = qr.householderQ() * Mat<T>::Identity(d, d);
  return q.rightCols(d - m);
}

// ---------------------------------------------------------------------------
// Projective points and hyperplanes.

namespace detail {

template <class T>
Vec<T> canonical_unit(const Vec<T>& v, const char* what) {
  T n = v.norm();
  using std::isfinite;
  if (!(n > T(0)) || !isfinite(static_cast<double>(n))) throw DomainError(std::string(what) + ": zero or non-finite vector");
  using std::abs;
  // Leave already-unit vectors untouched so canonicalization is idempotent.
  Vec<T> r = abs(n - T(1)) <= T(8) * eps<T>() ? Vec<T>(v) : Vec<T>(v / n);
  const T tiny = T(8) * eps<T>();
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    using std::abs;
    if (abs(r(i)) > tiny) {
      if (r(i) < T(0)) r = -r;
      break;
    }
  }
  return r;
}

}  // namespace detail

/// A line in R^d: unit Euclidean representative, first significant coordinate positive.
template <class T = double>
class ProjPoint {
 public:
  ProjPoint() = default;
  explicit ProjPoint(const Vec<T>& v) : rep_(detail::canonical_unit<T>(v, "ProjPoint")) {}
  const Vec<T>& rep() const { return rep_; }
  int dim() const { return static_cast<int>(rep_.size()); }

 private:
  Vec<T> rep_;
};

/// A hyperplane ker(theta): unit Euclidean covector, canonical sign.
template <class T = double>
class ProjHyperplane {
 public:
  ProjHyperplane() = default;
  explicit ProjHyperplane(const Vec<T>& theta) : cov_(detail::canonical_unit<T>(theta, "ProjHyperplane")) {}
  const Vec<T>& covector() const { return cov_; }
  int dim() const { return static_cast<int>(cov_.size()); }

 private:
  Vec<T> cov_;
};

template <class T>
ProjPoint<T> act(const Mat<T>& g, const ProjPoint<T>& x) {
  return ProjPoint<T>(Vec<T>(g * x.rep()));
}

/// g . theta = theta o g^{-1}, using the exact form inverse of g.
template <class T>
ProjHyperplane<T> act(const QSpace& space, const Mat<T>& g, const ProjHyperplane<T>& h) {
  // (g^{-1})^T = F g F
  return ProjHyperplane<T>(Vec<T>(space.lower<T>(g * space.lower<T>(h.covector()))));
}

/// Covector pushforward theta o g^{-1} for form-preserving g, no normalization.
template <class T>
Vec<T> push_covector(const QSpace& space, const Mat<T>& g, const Vec<T>& theta) {
  return space.lower<T>(g * space.lower<T>(theta));
}

// ---------------------------------------------------------------------------
// tau frames.

/// A negative-definite q-plane tau with the inner product that is −<,> on tau
/// and +<,> on its form-orthogonal complement.
template <class T = double>
class TauFrame {
 public:
  TauFrame() = default;
  TauFrame(const QSpace& space, const Mat<T>& basis) : space_(space), basis_(basis) {
    const int d = space.dim();
    if (basis.rows() != d || basis.cols() != space.q())
      throw DomainError("TauFrame: basis must be d x q");
    Mat<T> f = space.form_matrix<T>();
    Mat<T> gram = basis.transpose() * f * basis;
    Eigen::SelfAdjointEigenSolver<Mat<T>> es(gram);
    if (es.info() != Eigen::Success) throw NumericalError("TauFrame: eigensolver failed");
    T scale = gram.norm();
    if (!(es.eigenvalues().maxCoeff() < -T(1e-12) * (scale > T(1) ? scale : T(1))))
      throw DomainError("TauFrame: plane is not negative definite");
    // Q = F R with R = id − 2 P_tau, P_tau = B G^{-1} B^T F.
    Mat<T> p = basis * gram.ldlt().solve(Mat<T>(basis.transpose() * f));
    inner_ = f * (Mat<T>::Identity(d, d) - T(2) * p);
    inner_ = (inner_ + inner_.transpose()) / T(2);
    Eigen::LLT<Mat<T>> llt(inner_);
    if (llt.info() != Eigen::Success) throw NumericalError("TauFrame: inner matrix not positive definite");
    w_ = llt.matrixU();  // Q = W^T W
    w_inv_ = w_.template triangularView<Eigen::Upper>().solve(Mat<T>::Identity(d, d));
    q_inv_ = w_inv_ * w_inv_.transpose();
  }

  /// The standard plane span{e_{p+1}, ..., e_d}.
  static TauFrame standard(const QSpace& space) {
    Mat<T> b = Mat<T>::Zero(space.dim(), space.q());
    for (int j = 0; j < space.q(); ++j) b(space.p() + j, j) = T(1);
    return TauFrame(space, b);
  }

  const QSpace& space() const { return space_; }
  const Mat<T>& plane() const { return basis_; }
  const Mat<T>& inner_matrix() const { return inner_; }

  T inner(const Vec<T>& u, const Vec<T>& v) const { return u.dot(inner_ * v); }
  T norm(const Vec<T>& v) const { return (w_ * v).norm(); }
  /// Dual norm of a covector.
  T dual_norm(const Vec<T>& theta) const { return (w_inv_.transpose() * theta).norm(); }
  /// Operator norm for ‖.‖_tau.
  T op_norm(const Mat<T>& g) const {
    Eigen::JacobiSVD<Mat<T>> svd(Mat<T>(w_ * g * w_inv_));
    return svd.singularValues()(0);
  }
  /// W g W^{-1}: the matrix of g in a tau-orthonormal basis.
  Mat<T> to_orthonormal(const Mat<T>& g) const { return w_ * g * w_inv_; }
  const Mat<T>& w() const { return w_; }
  const Mat<T>& w_inv() const { return w_inv_; }
  const Mat<T>& inner_inverse() const { return q_inv_; }

 private:
  QSpace space_;
  Mat<T> basis_;
  Mat<T> inner_;
  Mat<T> w_;
  Mat<T> w_inv_;
  Mat<T> q_inv_;
};

/// Logs of the tau-singular values, sorted decreasingly. The lower half is
/// taken from a_{d+1-i} = -a_i, which holds for form-preserving g and avoids
/// resolving singular values below the working precision.
template <class T>
std::vector<T> singular_values_tau(const Mat<T>& g, const TauFrame<T>& tau) {
  Eigen::JacobiSVD<Mat<T>> svd(tau.to_orthonormal(g));
  const auto& s = svd.singularValues();
  const auto d = static_cast<std::size_t>(s.size());
  std::vector<T> out(d, T(0));
  using std::log;
  for (std::size_t i = 0; i < d / 2; ++i) {
    T si = s(static_cast<Eigen::Index>(i));
    if (!(si > T(0))) throw NumericalError("singular_values_tau: numerically singular matrix");
    out[i] = log(si);
    out[d - 1 - i] = -out[i];
  }
  return out;
}

/// Logs of eigenvalue moduli with multiplicity, sorted decreasingly.
template <class T>
std::vector<T> eigen_moduli(const Mat<T>& g) {
  Eigen::EigenSolver<Mat<T>> es(g, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigen_moduli: eigensolver failed");
  std::vector<T> out;
  using std::abs;
  using std::log;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(log(abs(es.eigenvalues()(i))));
  std::sort(out.begin(), out.end(), [](const T& a, const T& b) { return a > b; });
  return out;
}

template <class T>
T lambda1(const Mat<T>& g) {
  return eigen_moduli(g).front();
}

template <class T = double>
struct ProximalData {
  ProjPoint<T> plus;       // attracting line
  ProjHyperplane<T> minus; // repelling hyperplane
  T gap;                   // lambda_1 - lambda_2
  T lambda1;
};

namespace detail {

/// Top eigenpair of g, provided the top modulus is simple by gapTol.
template <class T>
std::optional<std::pair<Vec<T>, T>> top_real_eigenvector(const Mat<T>& g, T gapTol, T* lambda1Out, T* gapOut) {
  Eigen::EigenSolver<Mat<T>> es(g, true);
  if (es.info() != Eigen::Success) throw NumericalError("proximal_data: eigensolver failed");
  const auto& ev = es.eigenvalues();
  const Eigen::Index n = ev.size();
  using std::abs;
  using std::log;
  std::vector<std::pair<T, Eigen::Index>> mods;
  for (Eigen::Index i = 0; i < n; ++i) mods.emplace_back(log(abs(ev(i))), i);
  std::sort(mods.begin(), mods.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  T gap = n > 1 ? mods[0].first - mods[1].first : T(0);
  if (lambda1Out) *lambda1Out = mods[0].first;
  if (gapOut) *gapOut = gap;
  if (!(gap > gapTol)) return std::nullopt;
  const Eigen::Index k = mods[0].second;
  const auto vecs = es.eigenvectors();  // returned by value
  auto vc = vecs.col(k);
  // A simple real top eigenvalue has a real eigenvector up to a complex phase.
  Eigen::Index big = 0;
  for (Eigen::Index i = 1; i < n; ++i)
    if (abs(vc(i)) > abs(vc(big))) big = i;
  auto phase = vc(big) / abs(vc(big));
  Vec<T> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = (vc(i) / phase).real();
  return std::make_pair(v, ev(k).real());
}

}  // namespace detail

/// Attracting line and repelling hyperplane of g, if lambda_1 - lambda_2 > gapTol.
template <class T>
std::optional<ProximalData<T>> proximal_data(const Mat<T>& g, T gapTol = T(1e-6)) {
  T l1(0), gap(0);
  auto top = detail::top_real_eigenvector<T>(g, gapTol, &l1, &gap);
  if (!top) return std::nullopt;
  auto dual = detail::top_real_eigenvector<T>(Mat<T>(g.transpose()), gapTol, nullptr, nullptr);
  if (!dual) return std::nullopt;
  return ProximalData<T>{ProjPoint<T>(top->first), ProjHyperplane<T>(dual->first), gap, l1};
}

// ---------------------------------------------------------------------------
// Projective distances and invariants.

template <class T>
T proj_dist(const ProjPoint<T>& a, const ProjPoint<T>& b) {
  T m = (a.rep() - b.rep()).norm();
  T p = (a.rep() + b.rep()).norm();
  return m < p ? m : p;
}

/// Distance from a line to the closest line inside a hyperplane.
template <class T>
T proj_dist_to_hyp(const ProjPoint<T>& a, const ProjHyperplane<T>& h) {
  using std::abs;
  using std::sqrt;
  T c = abs(h.covector().dot(a.rep()));
  if (c > T(1)) c = T(1);
  // 2 − 2 cos(phi) with sin(phi) = c, written without cancellation.
  T cosphi = sqrt((T(1) - c) * (T(1) + c));
  return sqrt(T(2) * c * c / (T(1) + cosphi));
}

namespace detail {

template <class T>
T unit_pairing(const Vec<T>& theta, const Vec<T>& v) {
  using std::abs;
  return abs(theta.dot(v)) / (theta.norm() * v.norm());
}

}  // namespace detail

/// log|theta(u)/theta(v) * phi(v)/phi(u)| on raw representatives.
template <class T>
T cross_ratio(const Vec<T>& theta, const Vec<T>& v, const Vec<T>& phi, const Vec<T>& u, T tol = T(1e-12)) {
  if (detail::unit_pairing(theta, v) < tol || detail::unit_pairing(theta, u) < tol ||
      detail::unit_pairing(phi, v) < tol || detail::unit_pairing(phi, u) < tol)
    throw TransversalityError("cross_ratio: pairing below transversality tolerance");
  using std::abs;
  using std::log;
  return log(abs(theta.dot(u))) - log(abs(theta.dot(v))) + log(abs(phi.dot(v))) - log(abs(phi.dot(u)));
}

template <class T>
T cross_ratio(const ProjHyperplane<T>& theta, const ProjPoint<T>& v, const ProjHyperplane<T>& phi,
              const ProjPoint<T>& u, T tol = T(1e-12)) {
  return cross_ratio<T>(theta.covector(), v.rep(), phi.covector(), u.rep(), tol);
}

/// log(|theta(v)| / (‖theta‖ ‖v‖)) with Euclidean norms.
template <class T>
T gscript(const Vec<T>& theta, const Vec<T>& v, T tol = T(1e-12)) {
  T c = detail::unit_pairing(theta, v);
  if (c < tol) throw TransversalityError("gscript: theta(v) = 0");
  using std::log;
  return log(c);
}

/// log(|theta(v)| / (‖theta‖_tau* ‖v‖_tau)) with the tau norm and its dual.
template <class T>
T gscript(const Vec<T>& theta, const Vec<T>& v, const TauFrame<T>& tau, T tol = T(1e-12)) {
  if (detail::unit_pairing(theta, v) < tol) throw TransversalityError("gscript: theta(v) = 0");
  using std::abs;
  using std::log;
  return log(abs(theta.dot(v))) - log(tau.dual_norm(theta)) - log(tau.norm(v));
}

template <class T>
T gscript(const ProjHyperplane<T>& theta, const ProjPoint<T>& v, T tol = T(1e-12)) {
  return gscript<T>(theta.covector(), v.rep(), tol);
}

template <class T>
T gscript(const ProjHyperplane<T>& theta, const ProjPoint<T>& v, const TauFrame<T>& tau, T tol = T(1e-12)) {
  return gscript<T>(theta.covector(), v.rep(), tau, tol);
}

// ---------------------------------------------------------------------------
// Low-discrepancy sampling helpers.

namespace detail {

inline double radical_inverse(std::uint64_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

inline unsigned nth_prime(int k) {
  static const unsigned primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                    43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101};
  if (k < 0 || k >= static_cast<int>(sizeof(primes) / sizeof(primes[0])))
    throw std::out_of_range("Halton dimension too large");
  return primes[k];
}

/// Point `index` (>= 1) of the Halton sequence in [0,1)^dim.
inline std::vector<double> halton(std::uint64_t index, int dim) {
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) x[static_cast<std::size_t>(k)] = radical_inverse(index, nth_prime(k));
  return x;
}

/// Deterministic near-uniform point on the unit sphere S^{dim-1}.
inline std::vector<double> halton_sphere(std::uint64_t index, int dim) {
  const int pairs = (dim + 1) / 2;
  auto u = halton(index, 2 * pairs);
  std::vector<double> g(static_cast<std::size_t>(2 * pairs));
  const double twopi = 6.283185307179586476925;
  for (int k = 0; k < pairs; ++k) {
    double u1 = u[static_cast<std::size_t>(2 * k)];
    double u2 = u[static_cast<std::size_t>(2 * k + 1)];
    if (u1 <= 0.0) u1 = 0.5 / static_cast<double>(index + 1);
    double r = std::sqrt(-2.0 * std::log(u1));
    g[static_cast<std::size_t>(2 * k)] = r * std::cos(twopi * u2);
    g[static_cast<std::size_t>(2 * k + 1)] = r * std::sin(twopi * u2);
  }
  g.resize(static_cast<std::size_t>(dim));
  double n = 0.0;
  for (double c : g) n += c * c;
  n = std::sqrt(n);
  if (n == 0.0) {
    g.assign(g.size(), 0.0);
    g[0] = 1.0;
    return g;
  }
  for (double& c : g) c /= n;
  return g;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// (r, eps)-proximality.

enum class Verdict { certified, refuted, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::refuted: return "refuted";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

template <class T = double>
struct ProximalityCertificate {
  Verdict verdict = Verdict::inconclusive;
  bool proximal = false;
  T separation = T(0);      // d(g+, g-)
  T maxImageDist = T(0);    // max over samples of d(g xi, g+)
  std::optional<Vec<T>> witness;
  std::string note;
};

/// Checks d(g+, g-) >= 2r and g . B_eps(g-) within b_eps(g+) on a deterministic
/// sample of the boundary sphere {d(xi, g-) = eps}. Certified requires the
/// sampled image radius times the slack factor to stay below eps.
template <class T>
ProximalityCertificate<T> certify_r_eps_proximal(const Mat<T>& g, T r, T eps, int nSamples = 4096,
                                                 T slack = T(2), T gapTol = T(1e-6)) {
  if (!(eps > T(0)) || !(eps <= r)) throw std::invalid_argument("certify_r_eps_proximal: need 0 < eps <= r");
  ProximalityCertificate<T> out;
  auto pd = proximal_data<T>(g, gapTol);
  if (!pd) {
    out.verdict = Verdict::refuted;
    out.note = "not proximal";
    return out;
  }
  out.proximal = true;
  out.separation = proj_dist_to_hyp(pd->plus, pd->minus);
  if (out.separation < T(2) * r) {
    out.verdict = Verdict::refuted;
    out.note = "separation below 2r";
    return out;
  }
  const int d = static_cast<int>(g.rows());
  const Vec<T>& theta = pd->minus.covector();
  // Orthonormal basis of ker(theta).
  Mat<T> th(d, 1);
  th.col(0) = theta;
  Eigen::HouseholderQR<Mat<T>> qr(th);
  Mat<T> q = qr.householderQ() * Mat<T>::Identity(d, d);
  Mat<T> ker = q.rightCols(d - 1);
  using std::asin;
  using std::cos;
  using std::sin;
  T phi = T(2) * asin(eps / T(2));
  for (int i = 1; i <= nSamples; ++i) {
    auto s = detail::halton_sphere(static_cast<std::uint64_t>(i), d - 1);
    Vec<T> n = Vec<T>::Zero(d);
    for (int k = 0; k < d - 1; ++k) n += T(s[static_cast<std::size_t>(k)]) * ker.col(k);
    Vec<T> xi = sin(phi) * theta + cos(phi) * n;
    ProjPoint<T> img(Vec<T>(g * xi));
    T dist = proj_dist(img, pd->plus);
    if (dist > out.maxImageDist) out.maxImageDist = dist;
    if (dist >= eps && !out.witness) out.witness = xi;
  }
  if (out.witness) {
    out.verdict = Verdict::refuted;
    out.note = "sample point escapes b_eps(g+)";
  } else if (slack * out.maxImageDist < eps) {
    out.verdict = Verdict::certified;
  } else {
    out.verdict = Verdict::inconclusive;
    out.note = "image radius within slack of eps";
  }
  return out;
}

template <class T = double>
struct BenoistCheck {
  T deltaLambda;
  T deltaNorm;
};

/// Residuals of the product estimates for two proximal matrices.
template <class T>
BenoistCheck<T> benoist_product_check(const Mat<T>& g1, const Mat<T>& g2, const TauFrame<T>& tau,
                                      T gapTol = T(1e-6), T transTol = T(1e-12)) {
  auto p1 = proximal_data<T>(g1, gapTol);
  auto p2 = proximal_data<T>(g2, gapTol);
  if (!p1 || !p2) throw DomainError("benoist_product_check: input not proximal");
  T b = cross_ratio<T>(p1->minus, p1->plus, p2->minus, p2->plus, transTol);
  Mat<T> prod = g1 * g2;
  T lprod = lambda1<T>(prod);
  using std::abs;
  using std::log;
  T gs = gscript<T>(p2->minus, p1->plus, tau, transTol);
  T dl = abs(lprod - p1->lambda1 - p2->lambda1 - b);
  T dn = abs(log(tau.op_norm(prod)) - p1->lambda1 - p2->lambda1 - b + gs);
  return {dl, dn};
}

}  // namespace psoc
