#pragma once

#include <cmath>
#include <vector>

#include "sburgers/fock.hpp"
#include "sburgers/noise.hpp"

namespace testsupport {

using namespace sburgers;

/// Random coefficients on the given degrees; with `real` the reality
/// condition phi(-s) = conj(phi(s)) is imposed.
inline FockVector random_vector(const BasisPtr& basis, RngStream& rng, int min_degree,
                                int max_degree, bool real, double decay = 0.0) {
  FockVector v(basis);
  const FockBasis& b = *basis;
  for (std::size_t i = 0; i < b.size(); ++i) {
    int n = b.degree(i);
    if (n < min_degree || n > max_degree) continue;
    double amp = decay > 0.0 && n > 0 ? std::pow(1.0 + b.laplacian(i), -decay) : 1.0;
    v.coeffs()[static_cast<Eigen::Index>(i)] = amp * rng.complex_normal();
  }
  if (real) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      std::size_t j = b.find(b.tuple(i).negated());
      auto ii = static_cast<Eigen::Index>(i);
      if (j == FockBasis::npos) {
        v.coeffs()[ii] = 0.0;
      } else if (j == i) {
        v.coeffs()[ii] = v.coeffs()[ii].real();
      } else if (j > i) {
        v.coeffs()[static_cast<Eigen::Index>(j)] = std::conj(v.coeffs()[ii]);
      }
    }
  }
  return v;
}

/// Calls f(t) for every ordered tuple of length n with modes in
/// [-radius, radius] \ {0}, single species.
template <class F>
void for_each_ordered_tuple(int radius, int n, F&& f) {
  std::vector<int> ks;
  for (int k = -radius; k <= radius; ++k)
    if (k != 0) ks.push_back(k);
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    ModeTuple t;
    for (int a = 0; a < n; ++a) t.push_back({ks[idx[static_cast<std::size_t>(a)]], 0});
    f(t);
    int a = n - 1;
    while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == ks.size()) {
      idx[static_cast<std::size_t>(a)] = 0;
      --a;
    }
    if (a < 0) break;
  }
}

inline double rel_diff(cplx a, cplx b) {
  double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace testsupport
