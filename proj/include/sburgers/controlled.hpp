#pragma once

#include <stdexcept>
#include <vector>

#include "sburgers/oracle.hpp"

namespace sburgers {

/// Controlled function phi = (-L)^{-1} G^high phi + sharp on a truncation.
struct ControlledPair {
  FockVector phi;
  FockVector sharp;
  CutoffLaw cutoff;
  double residual = 0.0;       // relative fixed-point defect in the construction norm
  int iterations = 0;
  std::vector<double> defects;  // relative Picard increments
  double observed_ratio = 0.0;  // largest ratio of successive increments
  bool ball_certified = false;  // |phi|_{w,gamma} <= 2 |sharp|_{w,gamma}
};

struct ControlledOptions {
  double tol = 1e-12;
  int max_iterations = 200;
  NumberWeight weight = NumberWeight::constant(kMaxDegree);
  double gamma = 0.5;
};

/// Thrown when the Picard iteration does not contract or hits the cap.
class ControlledError : public std::runtime_error {
 public:
  ControlledError(const std::string& what, double factor)
      : std::runtime_error(what), factor_(factor) {}
  double factor() const { return factor_; }

 private:
  double factor_;
};

/// Picard iteration for the controlled function with remainder `sharp`.
ControlledPair solve_controlled(const Generator& gen, const FockVector& sharp,
                                const CutoffLaw& cutoff, const ControlledOptions& opts = {});

/// Largest singular value of D (-L)^{-1} G^high D^{-1} with D = w(N)(-L0)^gamma,
/// computed sector by sector on the truncation.
double estimate_contraction(const GeneratorParams& params, const CutoffLaw& cutoff,
                            const NumberWeight& w, double gamma, const Truncation& tr);

/// sharp = phi - (-L)^{-1} G^high phi.
FockVector remainder(const Generator& gen, const FockVector& phi, const CutoffLaw& cutoff);

/// L phi = L_theta sharp + G^low phi. Throws if the pair residual exceeds max_residual.
FockVector apply_generator(const Generator& gen, const ControlledPair& pair,
                           double max_residual = 1e-9);

/// Weight exponent alpha(gamma) = 9/2 + 7 gamma of the domain bound.
inline double domain_weight_exponent(double gamma) { return 4.5 + 7.0 * gamma; }

struct DomainBound {
  double lhs = 0.0;  // |w(N)(-L0)^gamma G^low phi|
  double rhs = 0.0;  // |w(N)(1+N)^alpha(gamma) (-L0)^{1/4+delta} sharp|
  double ratio = 0.0;
};
DomainBound domain_bound(const Generator& gen, const ControlledPair& pair, const NumberWeight& w,
                         double gamma = 0.0, double delta = 0.125);

/// |<phi, L phi> + |(-L_theta)^{1/2} phi|^2| / |(-L_theta)^{1/2} phi|^2 with L phi
/// supplied by the caller.
double dissipativity_defect(const Generator& gen, const FockVector& phi, const FockVector& Lphi);

struct DensityApproximation {
  ControlledPair pair;  // phi^M with its remainder for the base cutoff
  double error = 0.0;        // |w(N)(-L0)^{1/2}(phi^M - psi)|
  double stability = 0.0;    // |w(N)(-L0)^{1/2} phi^M|
  double generator = 0.0;    // |w(N) L phi^M|
  double psi_half = 0.0;     // |w(N)(-L0)^{1/2} psi|
  double psi_rhs = 0.0;      // |w(N)(-L0) psi| + |w(N)(1+N)^{9/2}(-L0)^{1/2} psi|
};

/// Element of the controlled domain close to psi: the fixed point with the
/// high region enlarged to |k|_inf >= M N_n.
DensityApproximation approx_in_domain(const Generator& gen, const FockVector& psi, double M,
                                      const CutoffLaw& cutoff, const ControlledOptions& opts = {});

/// Norm of w(-L0)^gamma (-L)^{-1} G^high against w(N)(1+N)^{3/2}(-L0)^{gamma-1/4},
/// for gamma in (1/2, 3/4).
double adapted_gain_probe(const GeneratorParams& params, const CutoffLaw& cutoff,
                          const NumberWeight& w, double gamma, const Truncation& tr);

struct CutoffChoice {
  double L = 1.0;
  double factor = 0.0;
  std::vector<std::pair<double, double>> tried;  // (L, factor)
};

/// Doubles L from `start` until the contraction factor is <= target.
CutoffChoice select_cutoff(const GeneratorParams& params, const NumberWeight& w, double gamma,
                           const Truncation& tr, double start = 1.0, double target = 0.5,
                           int max_doublings = 40);

}  // namespace sburgers
