#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sburgers/controlled.hpp"

namespace sburgers {

enum class Scheme { exponential_euler, exponential_midpoint };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);

/// Raised when a step grows the norm beyond |phi|(1 + factor dt |G|).
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// dt = min(1e-3, 0.1/|G|) with |G| estimated by power iteration.
double default_dt(const Generator& gen);

/// Integrating-factor stepper for d/dt phi = (L_theta + G) phi.
class BackwardStepper {
 public:
  BackwardStepper(const Generator& gen, double dt, Scheme scheme, double g_norm = -1.0,
                  double guard_factor = 10.0);

  /// Advances phi in place; throws StabilityError if the guard trips.
  void step(FockVector& phi) const;
  double dt() const { return dt_; }
  Scheme scheme() const { return scheme_; }
  double g_norm() const { return g_norm_; }

 private:
  Eigen::VectorXcd Gx(const Eigen::VectorXcd& x) const;

  const Generator& gen_;
  double dt_;
  Scheme scheme_;
  double g_norm_;
  double guard_;
  Eigen::VectorXd e_full_, e_half_;
  Eigen::VectorXd w_;  // sqrt of norm weights
};

struct BackwardTrajectory {
  std::vector<double> times;
  std::vector<FockVector> states;
  Scheme scheme = Scheme::exponential_euler;
  double dt = 0.0;
  int stride = 1;
  GeneratorParams params;
  // per-step diagnostics, indexed [step][degree]: |phi_n|^2 and |(-L0)^{1/2} phi_n|^2
  std::vector<double> step_times;
  std::vector<std::vector<double>> energy;
  std::vector<std::vector<double>> dissipation;
};

struct BackwardOptions {
  Scheme scheme = Scheme::exponential_euler;
  double dt = 0.0;  // <= 0 selects default_dt
  int stride = 1;
  double guard_factor = 10.0;
};

/// Integrates to the multiple of dt nearest T, storing every stride-th state
/// and the final one.
BackwardTrajectory solve_backward(const Generator& gen, const FockVector& phi0, double T,
                                  const BackwardOptions& opts = {});

struct AprioriRow {
  double t, alpha, lhs1, rhs1, lhs2, rhs2, fitted_C;
};

struct AprioriReport {
  double alpha = 0.0;
  double C = 0.0;
  double C_growth = 0.0;    // from the pointwise bound
  double C_integral = 0.0;  // from the time-integrated bound
  std::vector<AprioriRow> rows;
};

/// Dyadic-weighted bounds: sum_i 2^{2 i alpha}|rho_i(N) phi(t)|^2 <= e^{tC}(same at 0) and
/// int_0^t e^{-sC} sum_i 2^{2 i alpha}|rho_i(N)(-L0)^{1/2} phi(s)|^2 ds <= (same at 0).
/// C is the smallest constant for which both hold along the per-step diagnostics;
/// rows are emitted at the stored times.
AprioriReport apriori_report(const BackwardTrajectory& traj, double alpha);

struct RemainderDynamics {
  std::vector<double> times;
  std::vector<double> sharp_norm;   // |(1+N)^alpha (-L0)^{1/2} sharp(t)|
  std::vector<double> defect;       // relative defect of the sharp equation per interval
  double max_defect = 0.0;
  double initial_norm = 0.0;        // |(1+N)^alpha(-L0) sharp0| + |(1+N)^{alpha+9/2}(-L0)^{1/2} sharp0|
  double max_shape_ratio = 0.0;     // sup_t sharp_norm / ((t e^{tC} + 1)^{1/2} initial_norm)
  double contraction_factor = 0.0;
};

/// Remainder sharp(t) = phi(t) - (-L)^{-1} G^high phi(t) along a trajectory and the
/// defect of d/dt sharp = L0 sharp + G^low phi - (-L)^{-1} G^high d/dt phi, with
/// finite differences between stored states. Throws unless the contraction
/// factor (estimated on the generator's truncation when not supplied) is < 1.
RemainderDynamics remainder_dynamics(const Generator& gen, const BackwardTrajectory& traj,
                                     const CutoffLaw& cutoff, double alpha, double C,
                                     double contraction_factor = -1.0);

struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Least-squares rate r in |phi(t)| ~ e^{-r t}. Needs at least 5 stored states and a
/// mean-zero initial state.
DecayFit ergodic_decay(const BackwardTrajectory& traj);

/// t^beta |(1+N)^alpha (-L0)^beta e^{t L0} psi| / |(1+N)^alpha psi|.
double smoothing_probe(const FockVector& psi, double t, double alpha, double beta);

void write_decay_csv(const BackwardTrajectory& traj, const std::string& path);
void write_apriori_csv(const std::vector<AprioriReport>& reports, const std::string& path);

}  // namespace sburgers
