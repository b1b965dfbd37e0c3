#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <stdexcept>

namespace sburgers {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Largest chaos degree a tuple can hold.
inline constexpr int kMaxDegree = 8;

/// A nonzero Fourier mode, tagged with a species index for coupled systems.
struct ModeIndex {
  int32_t k = 0;
  int32_t species = 0;

  friend auto operator<=>(const ModeIndex&, const ModeIndex&) = default;
};

/// Fixed-capacity tuple of modes. Unused slots stay zeroed so that the
/// defaulted comparisons only see the active prefix.
class ModeTuple {
 public:
  ModeTuple() = default;
  ModeTuple(std::initializer_list<ModeIndex> modes);
  static ModeTuple from_modes(std::initializer_list<int> ks);

  int size() const { return n_; }
  bool empty() const { return n_ == 0; }
  const ModeIndex& operator[](int i) const { return m_[i]; }
  ModeIndex& operator[](int i) { return m_[i]; }
  const ModeIndex* begin() const { return m_.data(); }
  const ModeIndex* end() const { return m_.data() + n_; }
  ModeIndex* begin() { return m_.data(); }
  ModeIndex* end() { return m_.data() + n_; }

  void push_back(ModeIndex mi);
  void pop_back() { m_[--n_] = ModeIndex{}; }
  /// Copy without position i.
  ModeTuple without(int i) const;
  /// Copy without positions i < j.
  ModeTuple without(int i, int j) const;

  int momentum() const;
  int max_abs() const;
  long long sum_squares() const;

  /// Sort into canonical order.
  void canonicalize() { std::sort(begin(), end()); }
  ModeTuple canonical() const {
    ModeTuple t = *this;
    t.canonicalize();
    return t;
  }
  bool is_canonical() const { return std::is_sorted(begin(), end()); }
  /// Tuple with every mode negated, in canonical order.
  ModeTuple negated() const;

  friend bool operator==(const ModeTuple& a, const ModeTuple& b) {
    return a.n_ == b.n_ && a.m_ == b.m_;
  }
  friend bool operator<(const ModeTuple& a, const ModeTuple& b) {
    if (a.n_ != b.n_) return a.n_ < b.n_;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }

 private:
  std::array<ModeIndex, kMaxDegree> m_{};
  int8_t n_ = 0;
};

struct ModeTupleHash {
  std::size_t operator()(const ModeTuple& t) const noexcept;
};

double factorial(int n);

/// Number of distinct orderings of a canonical tuple: n! / prod m_j!.
double multiplicity(const ModeTuple& canonical);

/// Calls f(t) for each distinct permutation of a canonical tuple.
template <class F>
void for_each_permutation(const ModeTuple& canonical, F&& f) {
  ModeTuple t = canonical;
  do {
    f(static_cast<const ModeTuple&>(t));
  } while (std::next_permutation(t.begin(), t.end()));
}

}  // namespace sburgers
