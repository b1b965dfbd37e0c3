#include "sburgers/modes.hpp"

#include <cmath>
#include <cstdlib>

namespace sburgers {

ModeTuple::ModeTuple(std::initializer_list<ModeIndex> modes) {
  for (const auto& mi : modes) push_back(mi);
}

ModeTuple ModeTuple::from_modes(std::initializer_list<int> ks) {
  ModeTuple t;
  for (int k : ks) t.push_back({k, 0});
  return t;
}

void ModeTuple::push_back(ModeIndex mi) {
  if (n_ >= kMaxDegree) throw std::length_error("mode tuple capacity exceeded");
  m_[n_++] = mi;
}

ModeTuple ModeTuple::without(int i) const {
  ModeTuple t;
  for (int a = 0; a < n_; ++a)
    if (a != i) t.push_back(m_[a]);
  return t;
}

ModeTuple ModeTuple::without(int i, int j) const {
  ModeTuple t;
  for (int a = 0; a < n_; ++a)
    if (a != i && a != j) t.push_back(m_[a]);
  return t;
}

int ModeTuple::momentum() const {
  int s = 0;
  for (int a = 0; a < n_; ++a) s += m_[a].k;
  return s;
}

int ModeTuple::max_abs() const {
  int s = 0;
  for (int a = 0; a < n_; ++a) s = std::max(s, std::abs(m_[a].k));
  return s;
}

long long ModeTuple::sum_squares() const {
  long long s = 0;
  for (int a = 0; a < n_; ++a) s += static_cast<long long>(m_[a].k) * m_[a].k;
  return s;
}

ModeTuple ModeTuple::negated() const {
  ModeTuple t = *this;
  for (auto& mi : t) mi.k = -mi.k;
  t.canonicalize();
  return t;
}

std::size_t ModeTupleHash::operator()(const ModeTuple& t) const noexcept {
  uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<uint64_t>(t.size());
  for (const auto& mi : t) {
    uint64_t v = (static_cast<uint64_t>(static_cast<uint32_t>(mi.k)) << 8) ^
                 static_cast<uint64_t>(static_cast<uint32_t>(mi.species));
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 33));
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double multiplicity(const ModeTuple& canonical) {
  double c = factorial(canonical.size());
  int run = 1;
  for (int a = 1; a <= canonical.size(); ++a) {
    if (a < canonical.size() && canonical[a] == canonical[a - 1]) {
      ++run;
    } else {
      c /= factorial(run);
      run = 1;
    }
  }
  return c;
}

}  // namespace sburgers
