// Reduced words in a free group of rank k: products, Cayley spheres and
// balls, conjugacy classes and primitivity.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace psoc {

/// Letter code: 2i is generator g_{i+1}, 2i+1 its inverse.
using Letter = std::uint8_t;

constexpr Letter inverse_letter(Letter l) { return static_cast<Letter>(l ^ 1u); }
constexpr Letter gen_letter(int i) { return static_cast<Letter>(2 * i); }
constexpr Letter gen_inverse_letter(int i) { return static_cast<Letter>(2 * i + 1); }

/// A freely reduced word.
class Word {
 public:
  Word() = default;

  /// Free reduction of an arbitrary letter sequence. If rank > 0, letters
  /// outside the alphabet of that rank are rejected.
  static Word reduce(const std::vector<Letter>& letters, int rank = 0) {
    Word w;
    w.letters_.reserve(letters.size());
    for (Letter l : letters) {
      if (rank > 0 && l >= 2 * rank) throw std::invalid_argument("reduce: unknown letter");
      if (!w.letters_.empty() && w.letters_.back() == inverse_letter(l))
        w.letters_.pop_back();
      else
        w.letters_.push_back(l);
    }
    return w;
  }

  /// Trusted constructor for sequences already known to be reduced.
  static Word from_reduced(std::vector<Letter> letters) {
    Word w;
    w.letters_ = std::move(letters);
    return w;
  }

  /// Parses "aBc": lowercase letters are generators, uppercase their inverses.
  static Word parse(std::string_view text, int rank) {
    std::vector<Letter> ls;
    for (char c : text) {
      if (c == ' ' || c == '.' || c == '*') continue;
      if (c >= 'a' && c <= 'z') {
        ls.push_back(gen_letter(c - 'a'));
      } else if (c >= 'A' && c <= 'Z') {
        ls.push_back(gen_inverse_letter(c - 'A'));
      } else {
        throw std::invalid_argument(std::string("Word::parse: unknown letter '") + c + "'");
      }
    }
    return reduce(ls, rank);
  }

  std::string str() const {
    if (letters_.empty()) return "e";
    std::string s;
    for (Letter l : letters_) s.push_back(static_cast<char>((l & 1u) ? 'A' + l / 2 : 'a' + l / 2));
    return s;
  }

  const std::vector<Letter>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  std::vector<Letter> letters_;
};

inline Word multiply(const Word& a, const Word& b) {
  std::vector<Letter> ls = a.letters();
  ls.insert(ls.end(), b.letters().begin(), b.letters().end());
  return Word::reduce(ls);
}

inline Word inverse(const Word& w) {
  std::vector<Letter> ls(w.letters().rbegin(), w.letters().rend());
  for (Letter& l : ls) l = inverse_letter(l);
  return Word::from_reduced(std::move(ls));
}

inline Word power(const Word& w, int n) {
  Word r;
  Word base = n >= 0 ? w : inverse(w);
  for (int i = 0; i < (n >= 0 ? n : -n); ++i) r = multiply(r, base);
  return r;
}

struct WordHash {
  std::size_t operator()(const Word& w) const {
    std::uint64_t h = 1469598103934665603ull;
    for (Letter l : w.letters()) {
      h ^= l;
      h *= 1099511628211ull;
    }
    h ^= w.size();
    return static_cast<std::size_t>(h);
  }
};

// ---------------------------------------------------------------------------
// Spheres and balls.

/// Number of reduced words of length L in rank k.
inline std::uint64_t sphere_size(int k, int L) {
  if (L == 0) return 1;
  std::uint64_t n = 2ull * static_cast<std::uint64_t>(k);
  for (int i = 1; i < L; ++i) n *= 2ull * static_cast<std::uint64_t>(k) - 1ull;
  return n;
}

inline std::uint64_t ball_size(int k, int L) {
  std::uint64_t n = 0;
  for (int i = 0; i <= L; ++i) n += sphere_size(k, i);
  return n;
}

/// Lazy enumeration of the reduced words of length L, in lexicographic letter
/// order. Optionally restricted to words starting with a given letter.
class SphereEnumerator {
 public:
  SphereEnumerator(int k, int L, int firstLetter = -1) : k_(k), L_(L), first_(firstLetter) {
    if (k < 1) throw std::invalid_argument("sphere: rank must be >= 1");
    if (L < 0) throw std::invalid_argument("sphere: L must be >= 0");
    if (first_ >= 2 * k_) throw std::invalid_argument("sphere: bad first letter");
  }

  /// Writes the next word into `out`; returns false when exhausted.
  bool next(std::vector<Letter>& out) {
    if (done_) return false;
    if (!started_) {
      started_ = true;
      cur_.assign(static_cast<std::size_t>(L_), 0);
      if (L_ > 0) {
        if (first_ >= 0) cur_[0] = static_cast<Letter>(first_);
        for (int i = 1; i < L_; ++i) cur_[static_cast<std::size_t>(i)] = smallest_after(cur_[static_cast<std::size_t>(i - 1)]);
      }
      out = cur_;
      if (L_ == 0) done_ = true;
      return true;
    }
    // Advance like an odometer, skipping inverse pairs.
    int i = L_ - 1;
    while (i >= 0) {
      auto& c = cur_[static_cast<std::size_t>(i)];
      int next = c + 1;
      if (i > 0 && next == inverse_letter(cur_[static_cast<std::size_t>(i - 1)])) ++next;
      if (i == 0 && first_ >= 0) next = 2 * k_;
      if (next < 2 * k_) {
        c = static_cast<Letter>(next);
        for (int j = i + 1; j < L_; ++j) cur_[static_cast<std::size_t>(j)] = smallest_after(cur_[static_cast<std::size_t>(j - 1)]);
        out = cur_;
        return true;
      }
      --i;
    }
    done_ = true;
    return false;
  }

 private:
  static Letter smallest_after(Letter prev) { return inverse_letter(prev) == 0 ? 1 : 0; }

  int k_;
  int L_;
  int first_;
  bool started_ = false;
  bool done_ = false;
  std::vector<Letter> cur_;
};

/// Calls fn(const Word&) for every reduced word of length exactly L.
template <class Fn>
void for_each_in_sphere(int k, int L, Fn&& fn) {
  SphereEnumerator e(k, L);
  std::vector<Letter> buf;
  while (e.next(buf)) fn(Word::from_reduced(buf));
}

/// Calls fn(const Word&) for every reduced word of length at most L.
template <class Fn>
void for_each_in_ball(int k, int L, Fn&& fn) {
  for (int i = 0; i <= L; ++i) for_each_in_sphere(k, i, fn);
}

inline std::vector<Word> sphere(int k, int L) {
  std::vector<Word> out;
  for_each_in_sphere(k, L, [&](const Word& w) { out.push_back(w); });
  return out;
}

inline std::vector<Word> ball(int k, int L) {
  std::vector<Word> out;
  for_each_in_ball(k, L, [&](const Word& w) { out.push_back(w); });
  return out;
}

// ---------------------------------------------------------------------------
// Conjugacy classes.

inline bool is_cyclically_reduced(const std::vector<Letter>& w) {
  return w.size() <= 1 || w.front() != inverse_letter(w.back());
}

/// True iff w is its own lexicographically least rotation.
inline bool is_least_rotation(const std::vector<Letter>& w) {
  const std::size_t n = w.size();
  for (std::size_t r = 1; r < n; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      Letter a = w[(r + i) % n];
      if (a < w[i]) return false;
      if (a > w[i]) break;
    }
  }
  return true;
}

/// True iff the cyclic word w is not a proper power.
inline bool is_primitive_cyclic(const std::vector<Letter>& w) {
  const std::size_t n = w.size();
  if (n == 0) return false;
  std::size_t m = n;
  for (std::size_t pr = 2; pr <= m; ++pr) {
    if (m % pr != 0) continue;
    while (m % pr == 0) m /= pr;
    std::size_t period = n / pr;
    bool periodic = true;
    for (std::size_t i = 0; i + period < n && periodic; ++i) periodic = w[i] == w[i + period];
    if (periodic) return false;
  }
  return true;
}

/// A conjugacy class: cyclically reduced word in least rotation.
class CyclicWord {
 public:
  CyclicWord() = default;

  /// Canonical representative of the conjugacy class of w.
  explicit CyclicWord(const Word& w) {
    std::vector<Letter> ls = w.letters();
    std::size_t a = 0, b = ls.size();
    while (b - a >= 2 && ls[a] == inverse_letter(ls[b - 1])) {
      ++a;
      --b;
    }
    std::vector<Letter> core(ls.begin() + static_cast<std::ptrdiff_t>(a), ls.begin() + static_cast<std::ptrdiff_t>(b));
    std::vector<Letter> best = core;
    for (std::size_t r = 1; r < core.size(); ++r) {
      std::vector<Letter> rot(core.begin() + static_cast<std::ptrdiff_t>(r), core.end());
      rot.insert(rot.end(), core.begin(), core.begin() + static_cast<std::ptrdiff_t>(r));
      if (rot < best) best = std::move(rot);
    }
    letters_ = std::move(best);
    primitive_ = is_primitive_cyclic(letters_);
  }

  static CyclicWord from_canonical(std::vector<Letter> letters) {
    CyclicWord c;
    c.letters_ = std::move(letters);
    c.primitive_ = is_primitive_cyclic(c.letters_);
    return c;
  }

  const std::vector<Letter>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool primitive() const { return primitive_; }
  Word word() const { return Word::from_reduced(letters_); }
  std::string str() const { return word().str(); }

  friend bool operator==(const CyclicWord& a, const CyclicWord& b) { return a.letters_ == b.letters_; }

 private:
  std::vector<Letter> letters_;
  bool primitive_ = false;
};

/// Calls fn(const CyclicWord&) once per conjugacy class of nontrivial elements
/// with cyclic length <= L.
template <class Fn>
void for_each_conjugacy_class(int k, int L, Fn&& fn) {
  if (L < 1) throw std::invalid_argument("conjugacy_classes: L must be >= 1");
  for (int n = 1; n <= L; ++n) {
    SphereEnumerator e(k, n);
    std::vector<Letter> buf;
    while (e.next(buf)) {
      if (!is_cyclically_reduced(buf) || !is_least_rotation(buf)) continue;
      fn(CyclicWord::from_canonical(buf));
    }
  }
}

inline std::vector<CyclicWord> conjugacy_classes(int k, int L) {
  std::vector<CyclicWord> out;
  for_each_conjugacy_class(k, L, [&](const CyclicWord& c) { out.push_back(c); });
  return out;
}

/// Prefix of w w w ... of length max(prefixDepth, |w|).
inline Word fixed_point_symbol(const CyclicWord& w, int prefixDepth) {
  if (w.size() == 0) throw std::invalid_argument("fixed_point_symbol: empty word");
  std::size_t n = std::max<std::size_t>(static_cast<std::size_t>(std::max(prefixDepth, 0)), w.size());
  std::vector<Letter> ls(n);
  for (std::size_t i = 0; i < n; ++i) ls[i] = w.letters()[i % w.size()];
  return Word::from_reduced(std::move(ls));
}

}  // namespace psoc
