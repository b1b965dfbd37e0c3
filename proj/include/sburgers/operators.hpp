#pragma once

#include <Eigen/Sparse>
#include <functional>

#include "sburgers/fock.hpp"
#include "sburgers/noise.hpp"
#include "sburgers/params.hpp"

namespace sburgers {

/// Serial reference or OpenMP-parallel execution of a kernel. Both produce
/// identical results.
enum class Exec { serial, parallel };

/// (-L0)^gamma: multiply by ((2 pi)^2 sum k_i^2)^gamma.
FockVector apply_L0_power(const FockVector& phi, double gamma);
/// L0 itself (negative multiplier).
FockVector apply_L0(const FockVector& phi);
/// L_theta: multiply by -sum |2 pi k_i|^(2 theta).
FockVector apply_L_theta(const FockVector& phi, const GeneratorParams& params);
/// Per-entry multiplier of -L_theta; equals the Laplacian multiplier at theta = 1.
double theta_rate(const FockBasis& b, std::size_t i, double theta);
/// Multiply the degree-n block by f(n).
FockVector apply_number_weight(const FockVector& phi, const std::function<double(int)>& f);

FockVector apply_Gplus(const FockVector& phi, const GeneratorParams& params,
                       Exec exec = Exec::parallel);
FockVector apply_Gminus(const FockVector& phi, const GeneratorParams& params,
                        Exec exec = Exec::parallel);
FockVector apply_G(const FockVector& phi, const GeneratorParams& params,
                   Exec exec = Exec::parallel);

/// Keeps the entries whose tuple has sup-norm >= N_n of its own degree.
FockVector high_part(const FockVector& phi, const CutoffLaw& cutoff);
FockVector low_part(const FockVector& phi, const CutoffLaw& cutoff);

struct GSplit {
  FockVector high;
  FockVector low;
};
GSplit split_G(const FockVector& phi, const GeneratorParams& params, const CutoffLaw& cutoff,
               Exec exec = Exec::parallel);

using SparseOp = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
enum class GPart { plus, minus, both };

/// Matrix of the drift operator in coefficient coordinates of a basis.
SparseOp assemble_G(const FockBasis& basis, const GeneratorParams& params, GPart part,
                    Exec exec = Exec::parallel);

/// Assembled generator on a fixed basis, for repeated application.
class Generator {
 public:
  Generator(BasisPtr basis, GeneratorParams params, Exec exec = Exec::parallel);

  const BasisPtr& basis_ptr() const { return basis_; }
  const GeneratorParams& params() const { return params_; }
  const SparseOp& G() const { return g_; }
  /// Multiplier of -L_theta per basis entry.
  const Eigen::VectorXd& rate() const { return rate_; }

  FockVector apply_G(const FockVector& phi) const;
  /// (L_theta + G) phi.
  FockVector apply_L(const FockVector& phi) const;
  /// (-L_theta)^{-1} G^high phi.
  FockVector resolvent_high(const FockVector& phi, const CutoffLaw& cutoff) const;
  /// Largest singular value of G in orthonormal coordinates (power iteration).
  double G_norm_estimate(int iterations = 200) const;

 private:
  void check(const FockVector& phi) const;

  BasisPtr basis_;
  GeneratorParams params_;
  SparseOp g_;
  Eigen::VectorXd rate_;
};

/// Galerkin Burgers drift: B(k) = 2 pi i k 1{|k|<=m} sum_{p+q=k} u(p)u(q),
/// with species coupling Gamma^i_{j j'} for several species.
SpectralField burgers_drift(const SpectralField& u, const GeneratorParams& params);

/// |Re <u, B>| / (|u| |B|).
double drift_orthogonality(const SpectralField& u, const SpectralField& drift);

namespace detail {
/// Scalar drift on a contiguous block indexed by k + radius; writes 0 < k <= m
/// and mirrors to -k. Entries beyond m are zeroed.
void scalar_drift(const cplx* u, int radius, int m, cplx* out);
/// Multi-species drift; blocks are laid out as in SpectralField.
void coupled_drift(const cplx* u, int radius, int m, const Coupling& g, cplx* out);
}  // namespace detail

}  // namespace sburgers
