#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sburgers/modes.hpp"

namespace sburgers {

/// Mode radius, chaos degree bound and number of species of a truncated
/// Fock space.
struct Truncation {
  int radius = 1;
  int max_degree = 1;
  int species = 1;

  void validate() const;
  bool admits(const ModeIndex& mi) const {
    return mi.k != 0 && mi.k >= -radius && mi.k <= radius && mi.species >= 0 &&
           mi.species < species;
  }
  friend bool operator==(const Truncation&, const Truncation&) = default;
};

/// Enumerated canonical tuples of a truncation, optionally restricted to a
/// set of total-momentum sectors. Immutable once built.
class FockBasis {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  static std::shared_ptr<const FockBasis> full(const Truncation& tr);
  static std::shared_ptr<const FockBasis> sectors(const Truncation& tr,
                                                  std::vector<int> momenta);

  const Truncation& truncation() const { return tr_; }
  std::size_t size() const { return tuples_.size(); }
  bool restricted() const { return restricted_; }
  const std::vector<int>& momenta() const { return momenta_; }

  const ModeTuple& tuple(std::size_t i) const { return tuples_[i]; }
  int degree(std::size_t i) const { return tuples_[i].size(); }
  double multiplicity(std::size_t i) const { return mult_[i]; }
  /// n! c(s): weight of |coefficient|^2 in the Fock norm.
  double norm_weight(std::size_t i) const { return weight_[i]; }
  /// (2 pi)^2 (k_1^2 + ... + k_n^2).
  double laplacian(std::size_t i) const { return lap_[i]; }

  std::size_t degree_begin(int n) const;
  std::size_t degree_end(int n) const;

  /// Index of a canonical tuple, or npos.
  std::size_t find(const ModeTuple& canonical) const;
  bool contains_momentum(int K) const;

 private:
  FockBasis() = default;
  void build();

  Truncation tr_;
  bool restricted_ = false;
  std::vector<int> momenta_;
  std::vector<ModeTuple> tuples_;
  std::vector<double> mult_, weight_, lap_;
  std::vector<std::size_t> offsets_;
  std::unordered_map<ModeTuple, std::size_t, ModeTupleHash> index_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

/// Symmetric kernel of a single degree, stored once per canonical tuple.
struct ChaosKernel {
  int degree = 0;
  std::map<ModeTuple, cplx> coeffs;

  /// Value at any ordering of a tuple.
  cplx at(const ModeTuple& t) const;
  bool is_real(double tol = 1e-12) const;
  double norm() const;
};

/// Symmetrizes raw tensor entries: the canonical slot receives the sum over
/// the given orderings divided by the orbit size.
ChaosKernel make_kernel(int degree, const std::vector<std::pair<ModeTuple, cplx>>& entries,
                        const Truncation& tr);

/// Parses {"degree": n, "entries": [[[k1,...], [re, im]], ...]}.
ChaosKernel kernel_from_json(const std::string& text, const Truncation& tr);

/// Truncated chaos expansion: coefficients at the canonical tuples of a basis.
class FockVector {
 public:
  explicit FockVector(BasisPtr basis);
  FockVector(BasisPtr basis, Eigen::VectorXcd coeffs);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  std::size_t size() const { return c_.size(); }
  Eigen::VectorXcd& coeffs() { return c_; }
  const Eigen::VectorXcd& coeffs() const { return c_; }

  /// Value at any ordering of a tuple; zero outside the basis.
  cplx at(const ModeTuple& t) const;
  /// Writes the canonical slot; throws if the tuple is outside the basis.
  void set(const ModeTuple& t, cplx v);
  void add_kernel(const ChaosKernel& k);
  ChaosKernel kernel(int degree) const;
  FockVector degree_part(int n) const;
  int top_degree() const;

  bool is_real(double tol = 1e-12) const;
  bool same_basis(const FockVector& o) const { return basis_ == o.basis_; }

  FockVector& operator+=(const FockVector& o);
  FockVector& operator-=(const FockVector& o);
  FockVector& operator*=(cplx a);
  friend FockVector operator+(FockVector a, const FockVector& b) { return a += b; }
  friend FockVector operator-(FockVector a, const FockVector& b) { return a -= b; }
  friend FockVector operator*(cplx a, FockVector v) { return v *= a; }

 private:
  void check_same(const FockVector& o) const;

  BasisPtr basis_;
  Eigen::VectorXcd c_;
};

/// Weight on chaos degrees, stored for n = 0..max_degree+1.
class NumberWeight {
 public:
  explicit NumberWeight(std::vector<double> values);
  static NumberWeight constant(int max_degree, double c = 1.0);
  /// (1+n)^alpha.
  static NumberWeight power(int max_degree, double alpha);

  double operator()(int n) const;
  int max_degree() const { return static_cast<int>(v_.size()) - 2; }
  const std::vector<double>& values() const { return v_; }
  /// Smallest C with w(n) <= C w(n +- 1) on the stored range.
  double constant() const;
  NumberWeight scaled(double a) const;

 private:
  std::vector<double> v_;
};

cplx inner_product(const FockVector& a, const FockVector& b);
double norm(const FockVector& a);

/// sqrt( sum_n n! w(n)^2 sum_k ((2 pi)^2 |k|^2)^(2 gamma) |phi_n(k)|^2 ).
double weighted_norm(const FockVector& a, const NumberWeight& w, double gamma);

/// Same with a per-degree weight function and an explicit multiplier exponent
/// on (2 pi)^2 |k|^2 (not doubled).
template <class WeightFn>
double degree_weighted_norm(const FockVector& a, WeightFn&& weight, double lap_power) {
  const FockBasis& b = a.basis();
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    double v = std::norm(a.coeffs()[i]);
    if (v == 0.0) continue;
    double wn = weight(b.degree(i));
    double mult = lap_power == 0.0 ? 1.0 : std::pow(b.laplacian(i), lap_power);
    s += b.norm_weight(i) * wn * wn * mult * mult * v;
  }
  return std::sqrt(s);
}

/// Dyadic partition of unity on chaos degrees 0..max_degree. Entry 0 is
/// rho_{-1}, entry i+1 is rho_i.
std::vector<std::vector<double>> dyadic_weights(int max_degree);

}  // namespace sburgers
