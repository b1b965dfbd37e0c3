#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sburgers/operators.hpp"

namespace sburgers {

enum class OperatorTag { L0, Gplus, Gminus, G, Ghigh, Glow };

/// Dense matrix of an operator in the orthonormal basis e_s / sqrt(n! c(s))
/// of a full truncation, built from the unsymmetrized Fourier formulas by
/// summing over the full (ordered) output tuples. Throws std::length_error
/// when the basis exceeds `guard`.
Eigen::MatrixXcd operator_matrix(OperatorTag which, const Truncation& tr,
                                 const GeneratorParams& params,
                                 const std::optional<CutoffLaw>& cutoff = std::nullopt,
                                 std::size_t guard = 6000);

/// Writes (row, col, re, im) for every nonzero entry.
void write_matrix_csv(const Eigen::MatrixXcd& a, const std::string& path);

/// Per-entry data handed to diagonal scalings.
struct EntryInfo {
  int degree;
  double laplacian;  // (2 pi)^2 sum k_i^2
  double rate;       // multiplier of -L_theta
};
using Scaling = std::function<double(const EntryInfo&)>;

struct ScaledNormOptions {
  Exec exec = Exec::parallel;
  std::size_t dense_limit = 400;
  int max_iterations = 3000;
  double rel_tol = 1e-13;
  std::size_t sector_guard = 200000;
};

struct ScaledNorm {
  double value = 0.0;
  int sector = 0;  // total momentum of the maximizing block
};

/// Largest singular value of diag(left) [mask] G_part diag(right)^{-1} in
/// orthonormal coordinates, computed block by block over total-momentum
/// sectors (the drift conserves total momentum). Columns where `right`
/// vanishes, and degree-0 columns, are dropped. If `high_rows` is set only
/// output rows in the high region are kept.
ScaledNorm scaled_G_norm(const Truncation& tr, const GeneratorParams& params, GPart part,
                         const std::optional<CutoffLaw>& high_rows, const Scaling& left,
                         const Scaling& right, const ScaledNormOptions& opts = {});

/// Same quantity from a single full-basis dense SVD; reference for small
/// truncations.
double scaled_G_norm_dense(const Truncation& tr, const GeneratorParams& params, GPart part,
                           const std::optional<CutoffLaw>& high_rows, const Scaling& left,
                           const Scaling& right, std::size_t guard = 6000);

struct SumEstimateReport {
  std::vector<int> k;
  std::vector<double> ratio;
  double max_ratio = 0.0;
};

/// ratio(k) = sum_{|p| <= radius} (p^2 + (k-p)^2 + C)^(-a) / (k^2 + C)^(1/2 - a).
SumEstimateReport sum_estimate_probe(double a, double C, int k_lo, int k_hi, int radius);

/// Operator norms behind the uniform-in-m drift bounds on a fixed truncation.
/// Lowering: |w(N)(-L0)^{-gamma} G_- [w(N-1) N (-L0)^{3/4-gamma}]^{-1}|.
double apriori_lowering_norm(const Truncation& tr, int m, const NumberWeight& w, double gamma);
/// Raising: |w(N)(-L0)^{-gamma} G_+ [w(N+1)(1+N)(-L0)^{3/4-gamma}]^{-1}|.
double apriori_raising_norm(const Truncation& tr, int m, const NumberWeight& w, double gamma);
/// m-dependent: |w(N) G [(w(N+1)+w(N-1))(1+N)(-L0)^{1/2}]^{-1}|.
double apriori_m_dependent_norm(const Truncation& tr, int m, const NumberWeight& w);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sburgers
