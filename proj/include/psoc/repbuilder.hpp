// Example representations: Schottky groups in SO(m,1), block embedding into
// SO(p,q), small deformations, cached evaluation, sphere-by-sphere scans, the
// singular-gap report and limit-set samples.
#pragma once

#include "psoc/parallel.hpp"
#include "psoc/qlinalg.hpp"
#include "psoc/wordgroup.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <memory>
#include <random>
#include <shared_mutex>
#include <unordered_map>

namespace psoc {

/// Generator-to-matrix map of a rank-k free group, with a word cache.
template <class T = double>
class Representation {
 public:
  Representation() = default;
  Representation(const QSpace& space, std::vector<Mat<T>> generators, std::size_t cacheMaxLength = 8)
      : space_(space), cacheMax_(cacheMaxLength), cache_(std::make_shared<Cache>()) {
    if (generators.empty()) throw std::invalid_argument("Representation: need at least one generator");
    for (const auto& g : generators) {
      if (g.rows() != space.dim() || g.cols() != space.dim())
        throw std::invalid_argument("Representation: generator has wrong size");
      gens_.push_back(g);
      gens_.push_back(form_inverse(space, g));
    }
  }

  const QSpace& space() const { return space_; }
  int rank() const { return static_cast<int>(gens_.size() / 2); }
  int dim() const { return space_.dim(); }
  const Mat<T>& letter_matrix(Letter l) const { return gens_.at(l); }
  const Mat<T>& generator(int i) const { return gens_.at(static_cast<std::size_t>(2 * i)); }
  std::vector<Mat<T>> generators() const {
    std::vector<Mat<T>> out;
    for (int i = 0; i < rank(); ++i) out.push_back(generator(i));
    return out;
  }

  /// Product of generator lifts along w. Words up to the cache length are memoized.
  Mat<T> evaluate(const Word& w) const {
    const auto& ls = w.letters();
    const std::size_t head = std::min(ls.size(), cacheMax_);
    Mat<T> m = cached_prefix(ls, head);
    for (std::size_t i = head; i < ls.size(); ++i) m = m * gens_[ls[i]];
    return m;
  }

  std::size_t cache_size() const {
    std::shared_lock lock(cache_->mutex);
    return cache_->table.size();
  }

 private:
  struct Cache {
    std::shared_mutex mutex;
    std::unordered_map<Word, Mat<T>, WordHash> table;
  };

  Mat<T> cached_prefix(const std::vector<Letter>& ls, std::size_t n) const {
    if (n == 0) return Mat<T>::Identity(dim(), dim());
    Word key = Word::from_reduced(std::vector<Letter>(ls.begin(), ls.begin() + static_cast<std::ptrdiff_t>(n)));
    {
      std::shared_lock lock(cache_->mutex);
      auto it = cache_->table.find(key);
      if (it != cache_->table.end()) return it->second;
    }
    Mat<T> m = cached_prefix(ls, n - 1) * gens_[ls[n - 1]];
    std::unique_lock lock(cache_->mutex);
    cache_->table.emplace(std::move(key), m);
    return m;
  }

  QSpace space_;
  std::vector<Mat<T>> gens_;  // g1, g1^-1, g2, g2^-1, ...
  std::size_t cacheMax_ = 8;
  std::shared_ptr<Cache> cache_;
};

// ---------------------------------------------------------------------------
// Schottky groups in SO(m,1).

/// Position of a generator's axis in H^m: rotate the model axis (through the
/// basepoint e_{m+1}, direction e_1) by `angle` in the (e_1,e_2)-plane after
/// pushing it a distance `offset` along e_2.
template <class T = double>
struct AxisSpec {
  T angle = T(0);
  T offset = T(0);
};

template <class T = double>
struct PingPongCertificate {
  std::vector<Vec<T>> normals;  // unit normals of the Dirichlet half-spaces, one per letter
  T minSeparation = T(0);       // min over pairs of -<n_a, n_b> - 1; positive means disjoint closures
  int samplesChecked = 0;
  bool holds = false;
};

namespace detail {

template <class T>
Mat<T> plane_boost(int d, int i, int j, T s) {
  using std::cosh;
  using std::sinh;
  Mat<T> b = Mat<T>::Identity(d, d);
  b(i, i) = cosh(s);
  b(j, j) = cosh(s);
  b(i, j) = sinh(s);
  b(j, i) = sinh(s);
  return b;
}

template <class T>
Mat<T> plane_rotation(int d, int i, int j, T a) {
  using std::cos;
  using std::sin;
  Mat<T> r = Mat<T>::Identity(d, d);
  r(i, i) = cos(a);
  r(j, j) = cos(a);
  r(i, j) = -sin(a);
  r(j, i) = sin(a);
  return r;
}

}  // namespace detail

/// Dirichlet ping-pong check at the basepoint e_{m+1}. The half-space of
/// letter l is {x : d(x, g_l o) < d(x, o)}; the group is Schottky when all
/// closures are pairwise disjoint and each g_l maps the complement of its
/// inverse's half-space into its own.
template <class T>
PingPongCertificate<T> ping_pong_certificate(const Representation<T>& rho, int nSamples = 512) {
  const QSpace& sp = rho.space();
  const int d = sp.dim();
  if (sp.q() != 1) throw std::invalid_argument("ping_pong_certificate: needs signature (m,1)");
  PingPongCertificate<T> cert;
  Vec<T> o = Vec<T>::Zero(d);
  o(d - 1) = T(1);
  const int letters = 2 * rho.rank();
  using std::sqrt;
  for (int l = 0; l < letters; ++l) {
    Vec<T> a = rho.letter_matrix(static_cast<Letter>(l)) * o;
    if (a(d - 1) < T(0)) a = -a;
    Vec<T> n = a - o;
    T nn = form_eval(sp, n, n);
    if (!(nn > T(0))) throw DomainError("ping-pong violation: generator fixes the basepoint");
    cert.normals.push_back(n / sqrt(nn));
  }
  cert.minSeparation = std::numeric_limits<T>::max();
  for (int a = 0; a < letters; ++a)
    for (int b = a + 1; b < letters; ++b) {
      T sep = -form_eval(sp, cert.normals[a], cert.normals[b]) - T(1);
      if (sep < cert.minSeparation) cert.minSeparation = sep;
    }
  bool mapped = true;
  for (int l = 0; l < letters && mapped; ++l) {
    const Vec<T>& nRep = cert.normals[static_cast<std::size_t>(inverse_letter(static_cast<Letter>(l)))];
    const Vec<T>& nAtt = cert.normals[static_cast<std::size_t>(l)];
    for (int i = 1; i <= nSamples; ++i) {
      auto u = detail::halton_sphere(static_cast<std::uint64_t>(i), d - 1);
      Vec<T> xi(d);
      for (int k = 0; k < d - 1; ++k) xi(k) = T(u[static_cast<std::size_t>(k)]);
      xi(d - 1) = T(1);
      if (form_eval(sp, xi, nRep) > T(0)) continue;
      Vec<T> img = rho.letter_matrix(static_cast<Letter>(l)) * xi;
      if (img(d - 1) < T(0)) img = -img;
      ++cert.samplesChecked;
      if (form_eval(sp, img, nAtt) < -T(1e-9) * img.norm()) {
        mapped = false;
        break;
      }
    }
  }
  cert.holds = cert.minSeparation > T(1e-9) && mapped;
  return cert;
}

/// Rank-k Schottky group in SO(m,1) with generators R B(l) R^{-1}.
template <class T>
Representation<T> schottky_so_m1(int m, const std::vector<AxisSpec<T>>& axes, const std::vector<T>& lengths,
                                 PingPongCertificate<T>* certOut = nullptr) {
  if (m < 2) throw std::invalid_argument("schottky_so_m1: m must be >= 2");
  if (lengths.size() < 2) throw DomainError("schottky_so_m1: need k >= 2 generators (non-elementary group)");
  if (axes.size() != lengths.size()) throw std::invalid_argument("schottky_so_m1: axes and lengths differ in size");
  QSpace sp(m, 1);
  const int d = m + 1;
  std::vector<Mat<T>> gens;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(lengths[i] > T(0))) throw std::invalid_argument("schottky_so_m1: lengths must be positive");
    Mat<T> r = detail::plane_rotation<T>(d, 0, 1, axes[i].angle) * detail::plane_boost<T>(d, 1, m, axes[i].offset);
    Mat<T> b = detail::plane_boost<T>(d, 0, m, lengths[i]);
    gens.push_back(r * b * form_inverse(sp, r));
  }
  Representation<T> rho(sp, gens);
  auto cert = ping_pong_certificate(rho);
  if (certOut) *certOut = cert;
  if (!cert.holds) throw DomainError("schottky_so_m1: ping-pong violation (axes too close or lengths too small)");
  return rho;
}

/// Embeds an SO(m,1) representation on span{e_{p-m+1}, ..., e_{p+1}} of R^{p,q}.
template <class T>
Representation<T> embed_block(const Representation<T>& rho0, const QSpace& target) {
  const QSpace& src = rho0.space();
  if (src.q() != 1) throw std::invalid_argument("embed_block: source must be SO(m,1)");
  const int m = src.p();
  if (target.p() < m) throw DomainError("embed_block: need p >= m");
  const int off = target.p() - m;
  const int d = target.dim();
  std::vector<Mat<T>> gens;
  for (int i = 0; i < rho0.rank(); ++i) {
    Mat<T> g = Mat<T>::Identity(d, d);
    g.block(off, off, m + 1, m + 1) = rho0.generator(i);
    gens.push_back(g);
  }
  return Representation<T>(target, gens);
}

/// Right-multiplies each generator by exp(F S) with S skew and entries eps * N(0,1).
/// The random draws are made in double, so every scalar type sees the same S.
template <class T>
Representation<T> deform(const Representation<T>& rho, T eps, std::uint64_t seed) {
  if (eps < T(0)) throw std::invalid_argument("deform: eps must be >= 0");
  if (eps == T(0)) return rho;
  const QSpace& sp = rho.space();
  const int d = sp.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat<T> f = sp.form_matrix<T>();
  std::vector<Mat<T>> gens;
  for (int i = 0; i < rho.rank(); ++i) {
    Mat<T> s = Mat<T>::Zero(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        s(a, b) = eps * T(nd(rng));
        s(b, a) = -s(a, b);
      }
    gens.push_back(Mat<T>(rho.generator(i) * detail::expm<T>(Mat<T>(f * s))));
  }
  return Representation<T>(sp, gens);
}

// ---------------------------------------------------------------------------
// Sphere-by-sphere evaluation.

/// All reduced words of one length with their matrices, stored flat in
/// lexicographic order. Words sharing a first letter form a contiguous block.
template <class T = double>
struct SphereBlock {
  int L = 0;
  int d = 0;
  int rank = 0;
  std::vector<Letter> letters;  // L letters per word
  std::vector<T> mats;          // d*d column-major entries per word
  std::vector<std::size_t> partStart;  // first-letter partition offsets, size 2k+1 (size 2 for L = 0)

  std::size_t size() const { return d == 0 ? 0 : mats.size() / static_cast<std::size_t>(d * d); }
  Eigen::Map<const Mat<T>> matrix(std::size_t i) const {
    return Eigen::Map<const Mat<T>>(mats.data() + i * static_cast<std::size_t>(d * d), d, d);
  }
  Word word(std::size_t i) const {
    auto b = letters.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(L));
    return Word::from_reduced(std::vector<Letter>(b, b + L));
  }
  const Letter* word_data(std::size_t i) const { return letters.data() + i * static_cast<std::size_t>(L); }
  std::size_t partitions() const { return partStart.size() - 1; }
};

template <class T>
SphereBlock<T> identity_sphere(const Representation<T>& rho) {
  SphereBlock<T> b;
  b.L = 0;
  b.d = rho.dim();
  b.rank = rho.rank();
  Mat<T> id = Mat<T>::Identity(b.d, b.d);
  b.mats.assign(id.data(), id.data() + b.d * b.d);
  b.partStart = {0, 1};
  return b;
}

/// Extends every word of `prev` by one letter: one matrix product per word.
template <class T>
SphereBlock<T> extend_sphere(const Representation<T>& rho, const SphereBlock<T>& prev, int threads = 1) {
  SphereBlock<T> next;
  next.L = prev.L + 1;
  next.d = prev.d;
  next.rank = prev.rank;
  const int k = prev.rank;
  const int d = prev.d;
  const std::size_t dd = static_cast<std::size_t>(d * d);
  const std::size_t fan = prev.L == 0 ? static_cast<std::size_t>(2 * k) : static_cast<std::size_t>(2 * k - 1);
  const std::size_t n = prev.size() * fan;
  next.letters.resize(n * static_cast<std::size_t>(next.L));
  next.mats.resize(n * dd);
  // Partition the parent range by first letter (or by appended letter at L = 1).
  std::vector<std::pair<std::size_t, std::size_t>> parentRanges;
  if (prev.L == 0) {
    parentRanges.push_back({0, 1});
  } else {
    for (std::size_t p = 0; p < prev.partitions(); ++p) parentRanges.push_back({prev.partStart[p], prev.partStart[p + 1]});
  }
  parallel_for(parentRanges.size(), threads, [&](std::size_t part) {
    Mat<T> tmp(d, d);
    for (std::size_t i = parentRanges[part].first; i < parentRanges[part].second; ++i) {
      auto parent = prev.matrix(i);
      const Letter* pw = prev.word_data(i);
      std::size_t j = 0;
      for (int l = 0; l < 2 * k; ++l) {
        if (prev.L > 0 && static_cast<Letter>(l) == inverse_letter(pw[prev.L - 1])) continue;
        std::size_t c = i * fan + j++;
        Letter* cw = next.letters.data() + c * static_cast<std::size_t>(next.L);
        std::copy(pw, pw + prev.L, cw);
        cw[prev.L] = static_cast<Letter>(l);
        tmp.noalias() = parent * rho.letter_matrix(static_cast<Letter>(l));
        std::copy(tmp.data(), tmp.data() + dd, next.mats.data() + c * dd);
      }
    }
  });
  const std::size_t perFirst = n / static_cast<std::size_t>(2 * k);
  next.partStart.resize(static_cast<std::size_t>(2 * k + 1));
  for (int l = 0; l <= 2 * k; ++l) next.partStart[static_cast<std::size_t>(l)] = perFirst * static_cast<std::size_t>(l);
  return next;
}

/// Calls onSphere(block) for L = 0..Lmax, building each sphere from the last.
template <class T, class Fn>
void scan_spheres(const Representation<T>& rho, int Lmax, int threads, Fn&& onSphere) {
  SphereBlock<T> cur = identity_sphere(rho);
  onSphere(static_cast<const SphereBlock<T>&>(cur));
  for (int L = 1; L <= Lmax; ++L) {
    SphereBlock<T> nxt = extend_sphere(rho, cur, threads);
    cur = std::move(nxt);
    onSphere(static_cast<const SphereBlock<T>&>(cur));
  }
}

/// Applies fn(i) -> R to every word of a block, reducing per first-letter
/// partition with `combine`; partition results are combined in order.
template <class R, class T, class Fn, class Combine>
R reduce_sphere(const SphereBlock<T>& block, int threads, R init, Fn&& fn, Combine&& combine) {
  std::vector<R> partial(block.partitions(), init);
  parallel_for(block.partitions(), threads, [&](std::size_t p) {
    R acc = init;
    for (std::size_t i = block.partStart[p]; i < block.partStart[p + 1]; ++i) acc = combine(acc, fn(i));
    partial[p] = acc;
  });
  R out = init;
  for (const auto& r : partial) out = combine(out, r);
  return out;
}

// ---------------------------------------------------------------------------
// Singular gap report.

template <class T = double>
struct GapEntry {
  int L;
  T minGap;
  Word witness;
  bool saturated;  // gap too large for the working precision to resolve a_2
};

template <class T = double>
struct GapReport {
  std::vector<GapEntry<T>> perLength;
  T alpha = T(0);
  T C = T(0);
  bool anosov = false;
};

namespace detail {

/// Least-squares line through the lower convex hull of (x, y), shifted down to
/// a minorant of all points. Returns (slope, C) with y >= slope x - C.
inline std::pair<double, double> linear_minorant(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (hull.size() >= 2) {
      std::size_t a = hull[hull.size() - 2], b = hull.back();
      double cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
      if (cross <= 0) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }
  double slope = 0.0;
  if (hull.size() >= 2) {
    double mx = 0, my = 0;
    for (auto i : hull) {
      mx += x[i];
      my += y[i];
    }
    mx /= static_cast<double>(hull.size());
    my /= static_cast<double>(hull.size());
    double sxy = 0, sxx = 0;
    for (auto i : hull) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    slope = sxx > 0 ? sxy / sxx : 0.0;
  }
  double c = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) c = std::max(c, slope * x[i] - y[i]);
  return {slope, c};
}

}  // namespace detail

/// Per-sphere minima of a_1 - a_2 and a linear minorant alpha L - C.
template <class T>
GapReport<T> gap_report(const Representation<T>& rho, const TauFrame<T>& tau, int Lmax, int threads = 1) {
  if (Lmax < 2) throw std::invalid_argument("gap_report: Lmax must be >= 2");
  using std::log;
  const T saturation = T(0.8) * -log(detail::eps<T>());
  GapReport<T> rep;
  using Best = std::pair<T, std::size_t>;
  scan_spheres(rho, Lmax, threads, [&](const SphereBlock<T>& block) {
    if (block.L == 0) return;
    Best init{std::numeric_limits<T>::max(), 0};
    Best best = reduce_sphere<Best>(
        block, threads, init,
        [&](std::size_t i) {
          auto a = singular_values_tau<T>(Mat<T>(block.matrix(i)), tau);
          return Best{a[0] - a[1], i};
        },
        [](const Best& a, const Best& b) { return b.first < a.first ? b : a; });
    rep.perLength.push_back({block.L, best.first, block.word(best.second), best.first > saturation});
  });
  std::vector<double> xs, ys;
  for (const auto& e : rep.perLength)
    if (!e.saturated) {
      xs.push_back(e.L);
      ys.push_back(detail::to_double(e.minGap));
    }
  if (xs.size() >= 2) {
    auto [a, c] = detail::linear_minorant(xs, ys);
    rep.alpha = T(a);
    rep.C = T(c);
  }
  rep.anosov = rep.alpha > T(1e-9);
  return rep;
}

// ---------------------------------------------------------------------------
// Limit-set samples.

template <class T = double>
struct LimitSample {
  Word word;
  ProjPoint<T> xi;        // top tau-singular direction of rho(word)
  ProjHyperplane<T> eta;  // span of the top d-1 tau-singular directions
  std::optional<ProximalData<T>> eigen;
};

/// Samples of the limit maps from the tau-Cartan data of sphere words.
template <class T>
std::vector<LimitSample<T>> limit_set_sample(const Representation<T>& rho, const TauFrame<T>& tau, int L,
                                             T minGap = T(1), bool withEigen = true) {
  if (L < 1) throw std::invalid_argument("limit_set_sample: L must be >= 1");
  std::vector<LimitSample<T>> out;
  for_each_in_sphere(rho.rank(), L, [&](const Word& w) {
    Mat<T> g = rho.evaluate(w);
    Eigen::JacobiSVD<Mat<T>> svd(tau.to_orthonormal(g), Eigen::ComputeFullU);
    const auto& s = svd.singularValues();
    using std::log;
    if (!(log(s(0)) - log(s(1)) > minGap)) throw DomainError("limit_set_sample: singular gap too small at this depth");
    Vec<T> xi = tau.w_inv() * svd.matrixU().col(0);
    // The last left singular vector of W g W^{-1} is the first of its inverse
    // transpose, which is computed exactly from the form.
    Eigen::JacobiSVD<Mat<T>> svdInv(Mat<T>(tau.to_orthonormal(form_inverse(rho.space(), g)).transpose()),
                                    Eigen::ComputeFullU);
    Vec<T> eta = tau.w().transpose() * svdInv.matrixU().col(0);
    LimitSample<T> smp{w, ProjPoint<T>(xi), ProjHyperplane<T>(eta), std::nullopt};
    if (withEigen) smp.eigen = proximal_data<T>(g);
    out.push_back(std::move(smp));
  });
  return out;
}

}  // namespace psoc
