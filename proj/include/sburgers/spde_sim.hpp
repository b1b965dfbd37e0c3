#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sburgers/backward.hpp"
#include "sburgers/chaos_eval.hpp"
#include "sburgers/noise.hpp"
#include "sburgers/operators.hpp"

namespace sburgers {

enum class NoiseScheme { exact_ou, euler_maruyama };

NoiseScheme parse_noise_scheme(const std::string& name);
std::string noise_scheme_name(NoiseScheme s);

struct SimConfig {
  int radius = 0;  // 0 selects max(m, 1)
  double dt = 1e-4;
  double T = 0.1;
  int stride = 0;  // store every stride-th step; 0 keeps the endpoints only
  NoiseScheme scheme = NoiseScheme::exact_ou;
  bool noise = true;
  bool drift = true;
  double blowup_factor = 1e3;
  bool check_orthogonality = true;
  // use the coupled drift kernel and pow-based rates even where a scalar shortcut exists
  bool general_kernels = false;

  int radius_for(const GeneratorParams& p) const { return radius > 0 ? radius : std::max(p.m, 1); }
  std::size_t steps() const;
};

/// sqrt(E_mu |u|_{H^-1}^2) for the truncated white noise.
double stationary_hm1_rms(int radius, int species = 1);

/// One step per mode: u(k) <- e^{-r dt} u(k) + dt B(k) + s_k zeta_k, where r = |2 pi k|^{2 theta}
/// and s_k^2 = 1 - e^{-2 r dt} (exact OU) or 2 r dt (Euler-Maruyama).
class SpdeStepper {
 public:
  SpdeStepper(const GeneratorParams& params, const SimConfig& cfg);

  /// Returns |Re <u, B(u)>| / (|u| |B(u)|) when orthogonality checks are on, else 0.
  double step(SpectralField& u, RngStream& rng);
  int radius() const { return radius_; }
  double blowup_bound() const { return blowup_bound_; }

 private:
  GeneratorParams params_;
  SimConfig cfg_;
  int radius_;
  bool scalar_;
  std::vector<double> decay_, sd_;
  std::vector<cplx> drift_;
  double blowup_bound_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> snapshots;
  std::size_t steps = 0;
  bool blown_up = false;
  double blowup_time = 0.0;
  double max_orthogonality = 0.0;
};

/// Called with (step index, time, state) after every step and once at step 0.
using StepObserver = std::function<void(std::size_t, double, const SpectralField&)>;

/// Integrates from u0. A trajectory whose H^-1 norm exceeds the blow-up bound is
/// flagged and stopped; its last state is kept.
Trajectory simulate(const SpectralField& u0, const GeneratorParams& params, const SimConfig& cfg,
                    RngStream& rng, const StepObserver& observer = {});

/// Work items 0..n-1 mapped serially or by OpenMP; results stay in index order.
template <class F>
auto map_paths(std::size_t n, Exec exec, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  std::vector<decltype(f(std::size_t{}))> out(n);
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
  } else {
    const long long N = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < N; ++i) out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
  }
  return out;
}

/// Pairwise reduction in a fixed order, independent of the thread count.
template <class T, class Merge>
T tree_reduce(std::vector<T> items, Merge merge) {
  if (items.empty()) return T{};
  while (items.size() > 1) {
    std::vector<T> next;
    next.reserve((items.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < items.size(); i += 2) next.push_back(merge(items[i], items[i + 1]));
    if (items.size() % 2) next.push_back(std::move(items.back()));
    items = std::move(next);
  }
  return std::move(items.front());
}

/// Running first and second moments.
struct Moments {
  double n = 0.0, s1 = 0.0, s2 = 0.0;
  void add(double x) {
    n += 1.0;
    s1 += x;
    s2 += x * x;
  }
  static Moments merge(const Moments& a, const Moments& b) { return {a.n + b.n, a.s1 + b.s1, a.s2 + b.s2}; }
  double mean() const { return s1 / n; }
  double variance() const;
  double se() const;
};

/// Independent trajectories keyed by (seed, path index). Paths start from the
/// white noise law; a density eta is handled by reweighting with eta(u0).
struct TrajectoryBatch {
  uint64_t seed = 0;
  GeneratorParams params;
  SimConfig config;
  std::vector<Trajectory> paths;
  std::optional<FockVector> density;
  std::vector<double> weights;  // eta(u0) per path, 1 without a density

  std::size_t blown_up() const;
  double max_orthogonality() const;
};

TrajectoryBatch run_batch(const GeneratorParams& params, const SimConfig& cfg, std::size_t paths,
                          uint64_t seed, Exec exec = Exec::parallel,
                          const FockVector* density = nullptr);

struct ModeStat {
  int k = 0;
  int species = 0;
  cplx mean;
  double mean_z = 0.0;  // larger of the real and imaginary z-scores
  double var = 0.0;     // E|u(k)|^2
  double var_se = 0.0;
  double fourth = 0.0;  // E|u(k)|^4
  double fourth_se = 0.0;
  double var_z() const { return (var - 1.0) / var_se; }
  double fourth_z() const { return (fourth - 2.0) / fourth_se; }
};

struct CrossStat {
  int j = 0, k = 0;
  cplx mean;  // E[u(j) u(k)]
  double z = 0.0;
};

struct InvarianceReport {
  double t = 0.0;
  std::size_t paths = 0;
  std::vector<ModeStat> modes;
  std::vector<CrossStat> cross;
  double max_var_z = 0.0, max_mean_z = 0.0, max_fourth_z = 0.0, max_cross_z = 0.0;
  // sum of squared variance z-scores over modes and its degrees of freedom
  double chi2 = 0.0;
  int dof = 0;
  double max_orthogonality = 0.0;
  std::size_t blown_up = 0;
};

/// Per-mode moments of a stationary batch at a stored snapshot (default: last).
/// Cross moments cover j, k in +-1..min(radius, 4) with j != -k.
InvarianceReport invariance_test(const TrajectoryBatch& batch, int snapshot = -1);

struct Conditioner {
  std::string name;
  std::function<double(const SpectralField&)> f;
};

struct MartingaleCell {
  double s = 0.0, t = 0.0;
  int g_id = 0;
  double estimate = 0.0, se = 0.0, z = 0.0;
};

struct QvPoint {
  double t = 0.0, realized = 0.0, target = 0.0;
};

struct MartingaleReport {
  std::size_t paths = 0;
  std::vector<MartingaleCell> cells;
  std::vector<QvPoint> qv;
  double max_abs_z = 0.0;
  double max_qv_rel_error = 0.0;
  std::size_t blown_up = 0;
};

/// For each cell [s, t] of the partition and each conditioner G, the empirical mean of
/// (phi(u_t) - phi(u_s) - int_s^t Lphi(u_r) dr) G(u_s), trapezoid in time, with its
/// standard error. Also the realized quadratic variation of the Dynkin martingale,
/// compared to 2 t |(-L0)^{1/2} phi|^2. Trajectories are streamed, not stored.
MartingaleReport martingale_test(const FockVector& phi, const FockVector& Lphi,
                                 const GeneratorParams& sim_params, const SimConfig& cfg,
                                 const std::vector<double>& partition,
                                 const std::vector<Conditioner>& G, std::size_t paths,
                                 uint64_t seed, Exec exec = Exec::parallel);

/// Exact (L0 + G) phi of the Galerkin dynamics, on a basis one chaos degree above phi.
FockVector galerkin_generator(const FockVector& phi, const GeneratorParams& params);

/// Copies the coefficients of v into a basis containing all of its tuples.
FockVector extend_to(const FockVector& v, const BasisPtr& target);

/// Realized quadratic variation of M^f for a degree-1 kernel f at the partition points.
std::vector<QvPoint> qv_estimate(const FockVector& f, const GeneratorParams& params,
                                 const SimConfig& cfg, const std::vector<double>& partition,
                                 std::size_t paths, uint64_t seed, Exec exec = Exec::parallel);

struct EnergyIdentity {
  double lhs = 0.0;  // |w(N) (E phi)^{1/2}| from the derivative kernels
  double rhs = 0.0;  // sqrt(2) |w(N-1) (-L0)^{1/2} phi|
};

EnergyIdentity energy_identity_check(const FockVector& phi, const NumberWeight& w);

struct ItoTrickResult {
  double p = 2.0;
  std::vector<double> T, moment, se;
  double slope = 0.0;
  std::size_t blown_up = 0;
};

/// E[sup_{t<=T} |int_0^t phi(u_s) ds|^p] under the stationary law for each T.
ItoTrickResult ito_trick_probe(const FockVector& phi, double p, const std::vector<double>& Ts,
                               const GeneratorParams& params, const SimConfig& cfg,
                               std::size_t paths, uint64_t seed, Exec exec = Exec::parallel);

struct HypercontractivityResult {
  double p = 2.0;
  double estimate = 0.0, se = 0.0;
  double bound = 0.0;  // |c_p^N phi|^p with c_p = sqrt(p - 1)
  bool within(double n_se = 3.0) const { return estimate <= bound + n_se * se; }
};

HypercontractivityResult hypercontractivity_check(const FockVector& phi, double p,
                                                  std::size_t samples, uint64_t seed,
                                                  Exec exec = Exec::parallel);

struct DualityRow {
  double s = 0.0;
  double estimate = 0.0, se = 0.0, z = 0.0;
};

struct DualityReport {
  double target = 0.0;  // <phi(T), eta>
  std::vector<DualityRow> rows;
  double max_abs_z = 0.0;
};

/// E_eta[phi(T - s, u_s)] for s on the stored grid of a backward trajectory, against
/// <phi(T), eta>. The simulation step must divide the stored spacing.
DualityReport duality_check(const BackwardTrajectory& traj, const FockVector& eta,
                            const SimConfig& cfg, std::size_t paths, uint64_t seed,
                            Exec exec = Exec::parallel);

struct SwitchMeasure {
  double weighted = 0.0, weighted_se = 0.0;  // E_mu[eta(u_0) Psi]
  double bound = 0.0, bound_se = 0.0;        // |eta| E_mu[Psi^2]^{1/2}
  double eta_norm = 0.0;
  bool holds(double n_se = 3.0) const {
    return std::abs(weighted) <= bound + n_se * std::hypot(weighted_se, bound_se);
  }
};

/// Change of the starting law from mu to a density eta: E_eta[Psi] <= |eta| E_mu[Psi^2]^{1/2}
/// for a path functional Psi. Needs a batch run with a density.
SwitchMeasure switch_measure_check(const TrajectoryBatch& batch,
                                   const std::function<double(const Trajectory&)>& psi);

void write_invariance_csv(const InvarianceReport& r, const std::string& path);
void write_martingale_csv(const MartingaleReport& r, const std::string& path);
void write_qv_csv(const std::vector<QvPoint>& qv, const std::string& path);

}  // namespace sburgers
