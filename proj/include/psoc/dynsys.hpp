// Boundary cocycles c_o and c_tau over the Gromov boundary of a free group,
// their Gromov products, the transfer function U and the product-estimate
// residuals for b_o and b_tau.
#pragma once

#include "psoc/pseudometric.hpp"
#include "psoc/repbuilder.hpp"
#include "psoc/wordgroup.hpp"

namespace psoc {

/// The point prefix . core_+ of the boundary. xi and eta are representatives
/// of xi(x) (a vector) and eta(x) (a covector) scaled consistently with the
/// core data: xi = rho(prefix) coreXi and eta = coreEta o rho(prefix)^{-1}.
/// Only ratios of pairings are ever used, so the core scales are irrelevant.
template <class T = double>
struct BoundaryPoint {
  Word core;
  Word prefix;
  Vec<T> coreXi;
  Vec<T> coreEta;
  T coreLambda = T(1);  // signed top eigenvalue of rho(core)
  Vec<T> xi;
  Vec<T> eta;

  ProjPoint<T> xi_point() const { return ProjPoint<T>(xi); }
  ProjHyperplane<T> eta_plane() const { return ProjHyperplane<T>(eta); }
};

namespace detail {

/// (w, m) with w = reduce(prefix core^m) and w core reduced, so that
/// rho(w) coreXi = lambda^m rho(prefix) coreXi is an expanding product.
inline std::pair<Word, int> expanding_prefix(const Word& prefix, const Word& core) {
  Word w = prefix;
  int m = 0;
  const Letter bad = inverse_letter(core.letters().front());
  while (!w.empty() && w.letters().back() == bad) {
    w = multiply(w, core);
    ++m;
  }
  return {w, m};
}

/// Fills xi and eta from the core data and the prefix.
template <class T>
void place(const Representation<T>& rho, BoundaryPoint<T>& x) {
  auto [w, m] = expanding_prefix(x.prefix, x.core);
  Mat<T> h = rho.evaluate(w);
  T scale(1);
  for (int i = 0; i < m; ++i) scale *= x.coreLambda;
  x.xi = h * x.coreXi / scale;
  x.eta = push_covector(rho.space(), h, x.coreEta) / scale;
}

/// The first n letters of prefix . core core core ...
inline std::vector<Letter> boundary_letters(const Word& prefix, const Word& core, std::size_t n) {
  auto [w, m] = expanding_prefix(prefix, core);
  (void)m;
  std::vector<Letter> out(w.letters().begin(), w.letters().begin() + static_cast<std::ptrdiff_t>(std::min(n, w.size())));
  for (std::size_t i = 0; out.size() < n; ++i) out.push_back(core.letters()[i % core.size()]);
  return out;
}

}  // namespace detail

template <class T>
BoundaryPoint<T> boundary_point(const Representation<T>& rho, const Word& prefix, const Word& core,
                                T gapTol = T(1e-6)) {
  if (core.empty()) throw DomainError("boundary_point: trivial core");
  if (!is_cyclically_reduced(core.letters())) throw DomainError("boundary_point: core must be cyclically reduced");
  Mat<T> g = rho.evaluate(core);
  auto plus = proximal_data<T>(g, gapTol);
  auto minus = proximal_data<T>(Mat<T>(form_inverse(rho.space(), g)), gapTol);
  if (!plus || !minus) throw DomainError("boundary_point: core is not proximal");
  BoundaryPoint<T> x;
  x.core = core;
  x.prefix = prefix;
  x.coreXi = plus->plus.rep();
  x.coreEta = minus->minus.covector();
  x.coreLambda = x.coreXi.dot(Vec<T>(g * x.coreXi)) / x.coreXi.squaredNorm();
  detail::place(rho, x);
  return x;
}

template <class T>
BoundaryPoint<T> boundary_point(const Representation<T>& rho, const Word& prefix, const CyclicWord& core,
                                T gapTol = T(1e-6)) {
  return boundary_point<T>(rho, prefix, core.word(), gapTol);
}

/// gamma . x. The representatives equal rho(gamma) x.xi and x.eta o rho(gamma)^{-1}
/// exactly, but are recomputed from the reduced word so that no cancellation
/// between gamma and the prefix reaches the floating point products.
template <class T>
BoundaryPoint<T> translate(const Representation<T>& rho, const Word& gamma, const BoundaryPoint<T>& x) {
  BoundaryPoint<T> y = x;
  y.prefix = multiply(gamma, x.prefix);
  detail::place(rho, y);
  return y;
}

/// |<xi^, xi^>| for the unit representative.
template <class T>
T isotropy_residual(const QSpace& space, const BoundaryPoint<T>& x) {
  using std::abs;
  Vec<T> u = x.xi / x.xi.norm();
  return abs(form_eval(space, u, u));
}

/// Distance between eta(x) and the form-orthogonal hyperplane of xi(x).
template <class T>
T duality_residual(const QSpace& space, const BoundaryPoint<T>& x) {
  ProjHyperplane<T> a(x.eta);
  ProjHyperplane<T> b(space.lower<T>(x.xi));
  T m = (a.covector() - b.covector()).norm();
  T p = (a.covector() + b.covector()).norm();
  return m < p ? m : p;
}

namespace detail {

template <class T>
T checked_pairing(const Vec<T>& theta, const Vec<T>& v, T tol, const char* what, bool margin) {
  if (unit_pairing(theta, v) < tol) {
    if (margin) throw DomainError(std::string(what) + ": basepoint margin below tolerance at x");
    throw TransversalityError(std::string(what) + ": pairing below transversality tolerance");
  }
  return theta.dot(v);
}

/// theta_x(J v_x).
template <class T>
T self_pairing(const BasepointFrame<T>& fr, const BoundaryPoint<T>& x, T tol, const char* what) {
  return checked_pairing<T>(x.eta, Vec<T>(fr.jo() * x.xi), tol, what, true);
}

/// theta_x(v_y), evaluated after translating both points by the inverse of
/// their common prefix. The pairing is invariant under that translation and
/// the translated points no longer sit close together.
template <class T>
T cross_pairing(const Representation<T>& rho, const BoundaryPoint<T>& x, const BoundaryPoint<T>& y, T tol,
                const char* what) {
  const std::size_t n = std::max(expanding_prefix(x.prefix, x.core).first.size(),
                                 expanding_prefix(y.prefix, y.core).first.size()) +
                        x.core.size() + y.core.size();
  auto lx = boundary_letters(x.prefix, x.core, n);
  auto ly = boundary_letters(y.prefix, y.core, n);
  std::size_t k = 0;
  while (k < n && lx[k] == ly[k]) ++k;
  if (k == n) throw TransversalityError(std::string(what) + ": the two boundary points coincide");
  if (k == 0) return checked_pairing<T>(x.eta, y.xi, tol, what, false);
  Word u = inverse(Word::from_reduced(std::vector<Letter>(lx.begin(), lx.begin() + static_cast<std::ptrdiff_t>(k))));
  BoundaryPoint<T> xs = translate(rho, u, x);
  BoundaryPoint<T> ys = translate(rho, u, y);
  return checked_pairing<T>(xs.eta, ys.xi, tol, what, false);
}

}  // namespace detail

/// c_o(gamma, x) = 1/2 log |theta_x(rho(gamma)^{-1} J rho(gamma) v_x) / theta_x(J v_x)|.
/// The numerator is (gamma.theta_x)(J gamma.v_x), a pairing at the point gamma.x.
template <class T>
T cocycle_c_o(const BasepointFrame<T>& fr, const Representation<T>& rho, const Word& gamma,
              const BoundaryPoint<T>& x, T tol = T(1e-12)) {
  T den = detail::self_pairing<T>(fr, x, tol, "cocycle_c_o");
  T num = detail::self_pairing<T>(fr, translate(rho, gamma, x), tol, "cocycle_c_o");
  using std::abs;
  using std::log;
  return (log(abs(num)) - log(abs(den))) / T(2);
}

/// c_tau(gamma, x) = 1/2 log(‖rho(gamma) theta_x‖ ‖rho(gamma) v_x‖ / (‖theta_x‖ ‖v_x‖)), tau norms.
template <class T>
T cocycle_c_tau(const BasepointFrame<T>& fr, const Representation<T>& rho, const Word& gamma,
                const BoundaryPoint<T>& x, T tol = T(1e-12)) {
  detail::self_pairing<T>(fr, x, tol, "cocycle_c_tau");
  BoundaryPoint<T> y = translate(rho, gamma, x);
  const auto& tau = fr.tau();
  using std::log;
  return ((log(tau.dual_norm(y.eta)) - log(tau.dual_norm(x.eta))) + (log(tau.norm(y.xi)) - log(tau.norm(x.xi)))) / T(2);
}

/// The single-norm form log(‖rho(gamma) v_x‖_tau / ‖v_x‖_tau).
template <class T>
T cocycle_c_tau_vector_form(const BasepointFrame<T>& fr, const Representation<T>& rho, const Word& gamma,
                            const BoundaryPoint<T>& x) {
  using std::log;
  return log(fr.tau().norm(translate(rho, gamma, x).xi)) - log(fr.tau().norm(x.xi));
}

/// [x,y]_o = -1/2 log |theta_x(J v_x) theta_y(J v_y) / (theta_x(v_y) theta_y(v_x))|.
template <class T>
T gromov_o(const BasepointFrame<T>& fr, const Representation<T>& rho, const BoundaryPoint<T>& x,
           const BoundaryPoint<T>& y, T tol = T(1e-12)) {
  T ax = detail::self_pairing<T>(fr, x, tol, "gromov_o");
  T ay = detail::self_pairing<T>(fr, y, tol, "gromov_o");
  T bxy = detail::cross_pairing<T>(rho, x, y, tol, "gromov_o");
  T byx = detail::cross_pairing<T>(rho, y, x, tol, "gromov_o");
  using std::abs;
  using std::log;
  return -(log(abs(ax)) + log(abs(ay)) - log(abs(bxy)) - log(abs(byx))) / T(2);
}

/// [x,y]_tau = 1/2 log |theta_y(v_x) theta_x(v_y) / (theta_x(J v_x) ‖theta_y‖_tau ‖v_y‖_tau)|.
template <class T>
T gromov_tau(const BasepointFrame<T>& fr, const Representation<T>& rho, const BoundaryPoint<T>& x,
             const BoundaryPoint<T>& y, T tol = T(1e-12)) {
  T ax = detail::self_pairing<T>(fr, x, tol, "gromov_tau");
  detail::self_pairing<T>(fr, y, tol, "gromov_tau");
  T bxy = detail::cross_pairing<T>(rho, x, y, tol, "gromov_tau");
  T byx = detail::cross_pairing<T>(rho, y, x, tol, "gromov_tau");
  using std::abs;
  using std::log;
  return (log(abs(byx)) + log(abs(bxy)) - log(abs(ax)) - log(fr.tau().dual_norm(y.eta)) - log(fr.tau().norm(y.xi))) /
         T(2);
}

/// U(x) = 1/2 log(‖v_x‖_tau ‖theta_x‖_tau / |theta_x(J v_x)|).
template <class T>
T cohomology_U(const BasepointFrame<T>& fr, const BoundaryPoint<T>& x, T tol = T(1e-12)) {
  T a = detail::self_pairing<T>(fr, x, tol, "cohomology_U");
  using std::abs;
  using std::log;
  return (log(fr.tau().norm(x.xi)) + log(fr.tau().dual_norm(x.eta)) - log(abs(a))) / T(2);
}

// ---------------------------------------------------------------------------
// Values at the fixed points of a hyperbolic element.

template <class T = double>
struct FixedPointData {
  ProximalData<T> g;     // attracting line / repelling hyperplane of rho(gamma)
  ProximalData<T> gInv;  // same for rho(gamma)^{-1}
};

template <class T>
FixedPointData<T> fixed_point_data(const QSpace& space, const Mat<T>& g, T gapTol = T(1e-6)) {
  auto a = proximal_data<T>(g, gapTol);
  auto b = proximal_data<T>(Mat<T>(form_inverse(space, g)), gapTol);
  if (!a || !b) throw DomainError("fixed_point_data: element is not proximal");
  return {*a, *b};
}

/// B(J.g_-, J.g_+, (g^{-1})_-, (g^{-1})_+).
template <class T>
T reflected_cross_ratio(const BasepointFrame<T>& fr, const FixedPointData<T>& fp, T tol = T(1e-12)) {
  const QSpace& sp = fr.space();
  Vec<T> jTheta = push_covector(sp, fr.jo(), fp.g.minus.covector());
  Vec<T> jv = fr.jo() * fp.g.plus.rep();
  return cross_ratio<T>(jTheta, jv, fp.gInv.minus.covector(), fp.gInv.plus.rep(), tol);
}

/// G_tau((g^{-1})_-, J.g_+).
template <class T>
T reflected_gscript(const BasepointFrame<T>& fr, const FixedPointData<T>& fp, T tol = T(1e-12)) {
  return gscript<T>(fp.gInv.minus.covector(), Vec<T>(fr.jo() * fp.g.plus.rep()), fr.tau(), tol);
}

template <class T = double>
struct BenoistResiduals {
  T delta4;
  T delta5;
};

/// Distances of b_o and b_tau from their cross-ratio predictions at gamma.
template <class T>
BenoistResiduals<T> benoist_residuals(const BasepointFrame<T>& fr, const Representation<T>& rho, const Word& gamma,
                                      T gapTol = T(1e-6)) {
  Mat<T> g = rho.evaluate(gamma);
  auto fp = fixed_point_data<T>(fr.space(), g, gapTol);
  T l1 = fp.g.lambda1;
  T bb = reflected_cross_ratio<T>(fr, fp);
  T gs = reflected_gscript<T>(fr, fp);
  using std::abs;
  T d4 = abs(b_o<T>(fr, g) - l1 - bb / T(2));
  T d5 = abs(b_tau<T>(fr, g) - l1 - bb / T(2) + gs / T(2));
  return {d4, d5};
}

template <class T>
BenoistResiduals<T> benoist_residuals(const BasepointFrame<T>& fr, const Representation<T>& rho,
                                      const CyclicWord& gamma, T gapTol = T(1e-6)) {
  return benoist_residuals<T>(fr, rho, gamma.word(), gapTol);
}

/// Attracting and repelling boundary points (gamma_+, gamma_-) of a cyclically reduced word.
template <class T>
std::pair<BoundaryPoint<T>, BoundaryPoint<T>> fixed_boundary_points(const Representation<T>& rho, const Word& gamma) {
  return {boundary_point<T>(rho, Word{}, gamma), boundary_point<T>(rho, Word{}, inverse(gamma))};
}

}  // namespace psoc
