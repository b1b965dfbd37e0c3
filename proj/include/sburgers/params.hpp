#pragma once

#include <cmath>
#include <vector>

namespace sburgers {

/// Coupling tensor Gamma^i_{j j'} of a d-species system, zero-based indices.
class Coupling {
 public:
  Coupling() = default;
  Coupling(int d, std::vector<double> values);
  static Coupling scalar() { return Coupling(1, {1.0}); }

  int species() const { return d_; }
  double operator()(int i, int j, int jp) const {
    return v_[static_cast<std::size_t>((i * d_ + j) * d_ + jp)];
  }
  bool is_scalar_unit() const { return d_ == 1 && v_[0] == 1.0; }
  const std::vector<double>& values() const { return v_; }

 private:
  int d_ = 1;
  std::vector<double> v_{1.0};
};

/// Throws std::invalid_argument unless Gamma is symmetric under every
/// permutation of its three indices.
void validate_trilinear(const Coupling& g, double tol = 1e-14);

/// Galerkin cutoff m (m = 0 switches the drift off), fractional exponent and
/// coupling.
struct GeneratorParams {
  int m = 1;
  double theta = 1.0;
  Coupling coupling = Coupling::scalar();

  void validate() const;
  int species() const { return coupling.species(); }
};

/// Multiplier of -L_theta for a single mode: |2 pi k|^(2 theta).
inline double mode_rate(int k, double theta) {
  double x = 6.283185307179586 * static_cast<double>(k < 0 ? -k : k);
  if (theta == 1.0) return x * x;
  return std::pow(x, 2.0 * theta);
}

/// Split rule for the high/low parts of the drift operator:
/// N_n = L (1+n)^e with e = 3/(4 theta - 3).
struct CutoffLaw {
  double L = 1.0;
  double exponent = 3.0;

  static CutoffLaw for_theta(double L, double theta);
  double threshold(int n) const { return L * std::pow(1.0 + n, exponent); }
  bool high(int n, int max_abs_mode) const { return max_abs_mode >= threshold(n); }
  CutoffLaw scaled(double M) const { return CutoffLaw{L * M, exponent}; }
};

}  // namespace sburgers
