#pragma once

#include <vector>

#include "sburgers/fock.hpp"
#include "sburgers/noise.hpp"

namespace sburgers {

/// Probabilists' Hermite polynomial He_n(x).
double hermite(int n, double x);

/// Real coordinates of a field in the orthonormal basis
/// sqrt(2) cos(2 pi j x), sqrt(2) sin(2 pi j x): xi_c = sqrt(2) Re u(j),
/// xi_s = -sqrt(2) Im u(j). Layout: ((species * radius + j - 1) * 2 + {0 cos, 1 sin}).
std::vector<double> real_coordinates(const SpectralField& u, int radius);

/// A real chaos expansion precompiled into Hermite monomials of the real
/// coordinates, for repeated pointwise evaluation.
class Observable {
 public:
  Observable() = default;
  /// Throws std::domain_error unless phi is real.
  explicit Observable(const FockVector& phi, double real_tol = 1e-10);

  double operator()(const SpectralField& u) const;
  double evaluate_coordinates(const std::vector<double>& xi) const;

  int radius() const { return radius_; }
  std::size_t term_count() const { return terms_.size(); }
  double constant() const { return constant_; }

 private:
  struct Term {
    std::vector<std::pair<int, int>> powers;  // (coordinate, exponent)
    double coef;
  };
  int radius_ = 0;
  int species_ = 1;
  int max_power_ = 0;
  double constant_ = 0.0;
  std::vector<Term> terms_;
};

/// Sum of the Wiener-Ito integrals of phi at the point u.
double evaluate(const FockVector& phi, const SpectralField& u);

}  // namespace sburgers
