#include "sburgers/spde_sim.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "sburgers/oracle.hpp"

namespace sburgers {

namespace {

constexpr uint64_t kPathPurpose = 0x5350444550415448ULL;  // "SPDEPATH"

std::size_t grid_index(double t, double dt, const char* what) {
  const double x = t / dt;
  const double r = std::round(x);
  if (r < 0.0 || std::abs(x - r) > 1e-7 * std::max(1.0, r))
    throw std::invalid_argument(std::string(what) + " is off the simulation grid");
  return static_cast<std::size_t>(r);
}

std::vector<std::size_t> grid_points(const std::vector<double>& ts, double dt, const char* what) {
  std::vector<std::size_t> idx;
  for (double t : ts) {
    idx.push_back(grid_index(t, dt, what));
    if (idx.size() > 1 && idx.back() <= idx[idx.size() - 2])
      throw std::invalid_argument(std::string(what) + " must be strictly increasing");
  }
  return idx;
}

std::vector<Moments> merge_all(const std::vector<Moments>& a, const std::vector<Moments>& b) {
  std::vector<Moments> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = Moments::merge(a[i], b[i]);
  return out;
}

std::vector<Moments> reduce_columns(std::vector<std::vector<Moments>> per_path) {
  return tree_reduce(std::move(per_path), merge_all);
}

std::vector<Moments> to_moments(const std::vector<double>& xs) {
  std::vector<Moments> m(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) m[i].add(xs[i]);
  return m;
}

double theta_energy(const FockVector& phi, double theta) {
  const FockBasis& b = phi.basis();
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    double v = std::norm(phi.coeffs()[static_cast<Eigen::Index>(i)]);
    if (v == 0.0) continue;
    s += b.norm_weight(i) * theta_rate(b, i, theta) * v;
  }
  return s;
}

}  // namespace

NoiseScheme parse_noise_scheme(const std::string& name) {
  if (name == "exact-ou" || name == "ou") return NoiseScheme::exact_ou;
  if (name == "euler-maruyama" || name == "em") return NoiseScheme::euler_maruyama;
  throw std::invalid_argument("unknown noise scheme: " + name);
}

std::string noise_scheme_name(NoiseScheme s) {
  return s == NoiseScheme::exact_ou ? "exact-ou" : "euler-maruyama";
}

std::size_t SimConfig::steps() const {
  if (!(dt > 0.0)) throw std::domain_error("time step must be positive");
  if (!(T >= 0.0)) throw std::domain_error("horizon must be non-negative");
  return static_cast<std::size_t>(std::llround(T / dt));
}

double stationary_hm1_rms(int radius, int species) {
  double s = 0.0;
  for (int k = 1; k <= radius; ++k) s += 2.0 / (kTwoPi * kTwoPi * k * k);
  return std::sqrt(species * s);
}

double Moments::variance() const { return n > 1.0 ? std::max(0.0, (s2 - s1 * s1 / n) / (n - 1.0)) : 0.0; }

double Moments::se() const { return n > 0.0 ? std::sqrt(variance() / n) : 0.0; }

SpdeStepper::SpdeStepper(const GeneratorParams& params, const SimConfig& cfg)
    : params_(params), cfg_(cfg), radius_(cfg.radius_for(params)) {
  params.validate();
  if (!(cfg.dt > 0.0)) throw std::domain_error("time step must be positive");
  if (radius_ < params.m) throw std::invalid_argument("mode radius below the Galerkin cutoff");
  scalar_ = !cfg.general_kernels && params.species() == 1 && params.coupling.is_scalar_unit();
  decay_.assign(static_cast<std::size_t>(radius_) + 1, 0.0);
  sd_.assign(static_cast<std::size_t>(radius_) + 1, 0.0);
  for (int k = 1; k <= radius_; ++k) {
    const double r = cfg.general_kernels ? std::pow(kTwoPi * k, 2.0 * params.theta) : mode_rate(k, params.theta);
    decay_[static_cast<std::size_t>(k)] = std::exp(-r * cfg.dt);
    if (!cfg.noise) continue;
    sd_[static_cast<std::size_t>(k)] = cfg.scheme == NoiseScheme::exact_ou ? std::sqrt(-std::expm1(-2.0 * r * cfg.dt))
                                                                            : std::sqrt(2.0 * r * cfg.dt);
  }
  drift_.assign(static_cast<std::size_t>(params.species()) * static_cast<std::size_t>(2 * radius_ + 1), cplx{});
  blowup_bound_ = cfg.blowup_factor * stationary_hm1_rms(radius_, params.species());
}

double SpdeStepper::step(SpectralField& u, RngStream& rng) {
  if (u.radius() != radius_ || u.species() != params_.species())
    throw std::invalid_argument("field shape does not match the stepper");
  const bool with_drift = cfg_.drift && params_.m > 0;
  double orth = 0.0;
  if (with_drift) {
    if (scalar_)
      detail::scalar_drift(u.block(0), radius_, params_.m, drift_.data());
    else
      detail::coupled_drift(u.block(0), radius_, params_.m, params_.coupling, drift_.data());
    if (cfg_.check_orthogonality) {
      const cplx* x = u.block(0);
      double ip = 0.0, nu = 0.0, nb = 0.0;
      for (std::size_t j = 0; j < drift_.size(); ++j) {
        ip += (std::conj(x[j]) * drift_[j]).real();
        nu += std::norm(x[j]);
        nb += std::norm(drift_[j]);
      }
      if (nu > 0.0 && nb > 0.0) orth = std::abs(ip) / std::sqrt(nu * nb);
    }
  }
  const std::size_t W = u.width();
  for (int i = 0; i < params_.species(); ++i) {
    const cplx* b = drift_.data() + static_cast<std::size_t>(i) * W;
    for (int k = 1; k <= radius_; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      cplx v = decay_[kk] * u(k, i);
      if (with_drift) v += cfg_.dt * b[kk + static_cast<std::size_t>(radius_)];
      if (cfg_.noise) v += sd_[kk] * rng.complex_normal();
      u.set(k, v, i);
    }
  }
  return orth;
}

Trajectory simulate(const SpectralField& u0, const GeneratorParams& params, const SimConfig& cfg,
                    RngStream& rng, const StepObserver& observer) {
  SpdeStepper st(params, cfg);
  if (u0.radius() != st.radius()) throw std::invalid_argument("initial field radius does not match the configuration");
  const std::size_t n = cfg.steps();
  if (cfg.stride < 0) throw std::domain_error("snapshot stride must be >= 0");
  const double bound2 = st.blowup_bound() * st.blowup_bound();

  Trajectory tr;
  SpectralField u = u0;
  tr.times.push_back(0.0);
  tr.snapshots.push_back(u);
  if (observer) observer(0, 0.0, u);
  for (std::size_t j = 1; j <= n; ++j) {
    tr.max_orthogonality = std::max(tr.max_orthogonality, st.step(u, rng));
    tr.steps = j;
    const double t = static_cast<double>(j) * cfg.dt;
    const double h = u.h_minus1_sq();
    if (!(h <= bound2)) {
      tr.blown_up = true;
      tr.blowup_time = t;
      tr.times.push_back(t);
      tr.snapshots.push_back(u);
      return tr;
    }
    if (observer) observer(j, t, u);
    if (j == n || (cfg.stride > 0 && j % static_cast<std::size_t>(cfg.stride) == 0)) {
      tr.times.push_back(t);
      tr.snapshots.push_back(u);
    }
  }
  return tr;
}

std::size_t TrajectoryBatch::blown_up() const {
  std::size_t c = 0;
  for (const auto& p : paths) c += p.blown_up ? 1 : 0;
  return c;
}

double TrajectoryBatch::max_orthogonality() const {
  double m = 0.0;
  for (const auto& p : paths) m = std::max(m, p.max_orthogonality);
  return m;
}

TrajectoryBatch run_batch(const GeneratorParams& params, const SimConfig& cfg, std::size_t paths,
                          uint64_t seed, Exec exec, const FockVector* density) {
  params.validate();
  TrajectoryBatch b;
  b.seed = seed;
  b.params = params;
  b.config = cfg;
  const int R = cfg.radius_for(params);
  const int d = params.species();
  std::optional<Observable> eta;
  if (density) {
    if (density->basis().truncation().radius > R)
      throw std::invalid_argument("density uses modes beyond the simulation radius");
    b.density = *density;
    eta.emplace(*density);
  }
  struct Out {
    Trajectory tr;
    double w = 1.0;
  };
  auto outs = map_paths(paths, exec, [&](std::size_t i) {
    RngStream rng(seed, kPathPurpose, i);
    SpectralField u0 = sample_white_noise(R, rng, d);
    Out o;
    if (eta) o.w = (*eta)(u0);
    o.tr = simulate(u0, params, cfg, rng);
    return o;
  });
  for (auto& o : outs) {
    b.paths.push_back(std::move(o.tr));
    b.weights.push_back(o.w);
  }
  return b;
}

InvarianceReport invariance_test(const TrajectoryBatch& batch, int snapshot) {
  if (batch.density) throw std::invalid_argument("invariance test needs a stationary batch");
  if (batch.paths.empty()) throw std::invalid_argument("empty batch");
  InvarianceReport r;
  r.paths = batch.paths.size();
  r.blown_up = batch.blown_up();
  r.max_orthogonality = batch.max_orthogonality();

  const SpectralField& first = batch.paths.front().snapshots.front();
  const int R = first.radius();
  const int d = first.species();
  const int K = std::min(R, 4);
  std::vector<std::pair<int, int>> pairs;
  for (int j = -K; j <= K; ++j)
    for (int k = j; k <= K; ++k)
      if (j != 0 && k != 0 && j + k > 0) pairs.emplace_back(j, k);

  // per path: for each (species, k): re, im, |u|^2, |u|^4; then per pair: re, im
  const std::size_t nm = static_cast<std::size_t>(d * R);
  const std::size_t cols = 4 * nm + 2 * pairs.size();
  std::vector<std::vector<Moments>> per_path;
  per_path.reserve(batch.paths.size());
  for (const auto& p : batch.paths) {
    std::size_t idx = snapshot < 0 ? p.snapshots.size() - 1 : static_cast<std::size_t>(snapshot);
    if (idx >= p.snapshots.size()) throw std::out_of_range("snapshot index beyond the stored states");
    const SpectralField& u = p.snapshots[idx];
    if (&p == &batch.paths.front()) r.t = p.times[idx];
    std::vector<double> v(cols);
    std::size_t c = 0;
    for (int i = 0; i < d; ++i)
      for (int k = 1; k <= R; ++k) {
        cplx z = u(k, i);
        double a2 = std::norm(z);
        v[c++] = z.real();
        v[c++] = z.imag();
        v[c++] = a2;
        v[c++] = a2 * a2;
      }
    for (auto [j, k] : pairs) {
      cplx z = u(j) * u(k);
      v[c++] = z.real();
      v[c++] = z.imag();
    }
    per_path.push_back(to_moments(v));
  }
  auto m = reduce_columns(std::move(per_path));

  std::size_t c = 0;
  for (int i = 0; i < d; ++i)
    for (int k = 1; k <= R; ++k) {
      ModeStat s;
      s.k = k;
      s.species = i;
      const Moments &re = m[c], &im = m[c + 1], &a2 = m[c + 2], &a4 = m[c + 3];
      c += 4;
      s.mean = {re.mean(), im.mean()};
      s.mean_z = std::max(std::abs(re.mean()) / re.se(), std::abs(im.mean()) / im.se());
      s.var = a2.mean();
      s.var_se = a2.se();
      s.fourth = a4.mean();
      s.fourth_se = a4.se();
      r.max_mean_z = std::max(r.max_mean_z, s.mean_z);
      r.max_var_z = std::max(r.max_var_z, std::abs(s.var_z()));
      r.max_fourth_z = std::max(r.max_fourth_z, std::abs(s.fourth_z()));
      r.chi2 += s.var_z() * s.var_z();
      ++r.dof;
      r.modes.push_back(s);
    }
  for (auto [j, k] : pairs) {
    const Moments &re = m[c], &im = m[c + 1];
    c += 2;
    CrossStat s{j, k, {re.mean(), im.mean()}, std::max(std::abs(re.mean()) / re.se(), std::abs(im.mean()) / im.se())};
    r.max_cross_z = std::max(r.max_cross_z, s.z);
    r.cross.push_back(s);
  }
  return r;
}

FockVector extend_to(const FockVector& v, const BasisPtr& target) {
  FockVector out(target);
  const FockBasis& b = v.basis();
  for (std::size_t i = 0; i < b.size(); ++i) {
    cplx c = v.coeffs()[static_cast<Eigen::Index>(i)];
    if (c == cplx{}) continue;
    std::size_t j = target->find(b.tuple(i));
    if (j == FockBasis::npos) throw std::invalid_argument("target basis misses a tuple of the vector");
    out.coeffs()[static_cast<Eigen::Index>(j)] = c;
  }
  return out;
}

FockVector galerkin_generator(const FockVector& phi, const GeneratorParams& params) {
  params.validate();
  const Truncation& tr = phi.basis().truncation();
  const int top = std::max(phi.top_degree(), 0);
  if (top + 1 > kMaxDegree) throw std::length_error("generator output exceeds the largest chaos degree");
  auto basis = FockBasis::full({std::max(tr.radius, params.m), top + 1, tr.species});
  FockVector ext = extend_to(phi, basis);
  return apply_L_theta(ext, params) + apply_G(ext, params);
}

MartingaleReport martingale_test(const FockVector& phi, const FockVector& Lphi,
                                 const GeneratorParams& sim_params, const SimConfig& cfg,
                                 const std::vector<double>& partition,
                                 const std::vector<Conditioner>& G, std::size_t paths,
                                 uint64_t seed, Exec exec) {
  sim_params.validate();
  if (partition.size() < 2) throw std::invalid_argument("partition needs at least one cell");
  auto pts = grid_points(partition, cfg.dt, "partition");
  SimConfig c = cfg;
  c.T = static_cast<double>(pts.back()) * cfg.dt;
  c.stride = 0;
  const int R = c.radius_for(sim_params);
  if (phi.basis().truncation().radius > R || Lphi.basis().truncation().radius > R)
    throw std::invalid_argument("observable uses modes beyond the simulation radius");
  const Observable f(phi), Lf(Lphi);
  const std::size_t ncell = pts.size() - 1;
  const std::size_t ng = G.size();
  const int d = sim_params.species();

  // per path: cell x G products, then cumulative QV at each partition point
  auto per_path = map_paths(paths, exec, [&](std::size_t i) {
    RngStream rng(seed, kPathPurpose, i);
    SpectralField u0 = sample_white_noise(R, rng, d);
    std::vector<double> out(ncell * ng + pts.size(), 0.0);
    std::vector<double> gval(ng, 0.0);
    double fprev = 0.0, Lprev = 0.0, inc = 0.0, qv = 0.0;
    std::size_t next = 0;  // next partition point to reach
    auto obs = [&](std::size_t j, double, const SpectralField& u) {
      const double fv = f(u), Lv = Lf(u);
      if (j > 0) {
        const double dm = fv - fprev - 0.5 * c.dt * (Lprev + Lv);
        inc += dm;
        qv += dm * dm;
      }
      fprev = fv;
      Lprev = Lv;
      if (next == pts.size() || j != pts[next]) return;
      if (next > 0)
        for (std::size_t g = 0; g < ng; ++g) out[(next - 1) * ng + g] = inc * gval[g];
      out[ncell * ng + next] = qv;
      inc = 0.0;
      if (next < ncell)
        for (std::size_t g = 0; g < ng; ++g) gval[g] = G[g].f(u);
      ++next;
    };
    Trajectory tr = simulate(u0, sim_params, c, rng, obs);
    out.push_back(tr.blown_up ? 1.0 : 0.0);
    return out;
  });

  MartingaleReport r;
  r.paths = paths;
  std::vector<std::vector<Moments>> moments;
  moments.reserve(per_path.size());
  for (auto& v : per_path) {
    r.blown_up += v.back() != 0.0 ? 1 : 0;
    v.pop_back();
    moments.push_back(to_moments(v));
  }
  auto m = reduce_columns(std::move(moments));
  for (std::size_t k = 0; k < ncell; ++k)
    for (std::size_t g = 0; g < ng; ++g) {
      const Moments& x = m[k * ng + g];
      MartingaleCell cellr;
      cellr.s = static_cast<double>(pts[k]) * c.dt;
      cellr.t = static_cast<double>(pts[k + 1]) * c.dt;
      cellr.g_id = static_cast<int>(g);
      cellr.estimate = x.mean();
      cellr.se = x.se();
      cellr.z = cellr.se > 0.0 ? cellr.estimate / cellr.se : (cellr.estimate == 0.0 ? 0.0 : INFINITY);
      r.max_abs_z = std::max(r.max_abs_z, std::abs(cellr.z));
      r.cells.push_back(cellr);
    }
  const double rate = 2.0 * theta_energy(phi, sim_params.theta);
  const double t0 = static_cast<double>(pts.front()) * c.dt;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    QvPoint q;
    q.t = static_cast<double>(pts[k]) * c.dt;
    q.realized = m[ncell * ng + k].mean() - m[ncell * ng].mean();
    q.target = rate * (q.t - t0);
    if (q.target > 0.0) r.max_qv_rel_error = std::max(r.max_qv_rel_error, std::abs(q.realized / q.target - 1.0));
    q.t -= t0;
    r.qv.push_back(q);
  }
  return r;
}

std::vector<QvPoint> qv_estimate(const FockVector& f, const GeneratorParams& params,
                                 const SimConfig& cfg, const std::vector<double>& partition,
                                 std::size_t paths, uint64_t seed, Exec exec) {
  if (f.top_degree() > 1) throw std::invalid_argument("quadratic variation probe needs a degree-1 kernel");
  FockVector Lf = galerkin_generator(f, params);
  return martingale_test(f, Lf, params, cfg, partition, {}, paths, seed, exec).qv;
}

EnergyIdentity energy_identity_check(const FockVector& phi, const NumberWeight& w) {
  const FockBasis& b = phi.basis();
  auto factorial = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  // the derivative kernel at (x-mode j, rest) is n (2 pi i j) phi_n(j, rest)
  double lhs2 = 0.0;
  for (std::size_t idx = 0; idx < b.size(); ++idx) {
    const double a2 = std::norm(phi.coeffs()[static_cast<Eigen::Index>(idx)]);
    if (a2 == 0.0) continue;
    const ModeTuple& t = b.tuple(idx);
    const int n = t.size();
    if (n == 0) continue;
    for (int pos = 0; pos < n; ++pos) {
      if (pos > 0 && t[pos] == t[pos - 1]) continue;
      ModeTuple rest = t.without(pos);
      double orderings = factorial(n - 1);
      for (int a = 0; a < rest.size();) {
        int e = a;
        while (e < rest.size() && rest[e] == rest[a]) ++e;
        orderings /= factorial(e - a);
        a = e;
      }
      const double dk = kTwoPi * t[pos].k * n;
      const double wn = w(n - 1);
      lhs2 += factorial(n - 1) * orderings * wn * wn * dk * dk * a2;
    }
  }
  EnergyIdentity e;
  e.lhs = std::sqrt(2.0 * lhs2);
  e.rhs = std::sqrt(2.0) * degree_weighted_norm(phi, [&](int n) { return n > 0 ? w(n - 1) : 0.0; }, 0.5);
  return e;
}

ItoTrickResult ito_trick_probe(const FockVector& phi, double p, const std::vector<double>& Ts,
                               const GeneratorParams& params, const SimConfig& cfg,
                               std::size_t paths, uint64_t seed, Exec exec) {
  if (!(p >= 1.0)) throw std::domain_error("moment order must be >= 1");
  if (Ts.empty()) throw std::invalid_argument("empty horizon sweep");
  auto idx = grid_points(Ts, cfg.dt, "horizon");
  if (idx.front() == 0) throw std::invalid_argument("horizons must be positive");
  SimConfig c = cfg;
  c.T = static_cast<double>(idx.back()) * cfg.dt;
  c.stride = 0;
  const int R = c.radius_for(params);
  if (phi.basis().truncation().radius > R) throw std::invalid_argument("observable uses modes beyond the simulation radius");
  const Observable f(phi);
  const int d = params.species();

  auto per_path = map_paths(paths, exec, [&](std::size_t i) {
    RngStream rng(seed, kPathPurpose, i);
    SpectralField u0 = sample_white_noise(R, rng, d);
    std::vector<double> out(idx.size() + 1, 0.0);
    double integral = 0.0, sup = 0.0, prev = 0.0;
    std::size_t next = 0;
    Trajectory tr = simulate(u0, params, c, rng, [&](std::size_t j, double, const SpectralField& u) {
      const double v = f(u);
      if (j > 0) integral += 0.5 * c.dt * (prev + v);
      prev = v;
      sup = std::max(sup, std::abs(integral));
      if (next < idx.size() && j == idx[next]) out[next++] = std::pow(sup, p);
    });
    out.back() = tr.blown_up ? 1.0 : 0.0;
    return out;
  });

  ItoTrickResult r;
  r.p = p;
  std::vector<std::vector<Moments>> moments;
  for (auto& v : per_path) {
    r.blown_up += v.back() != 0.0 ? 1 : 0;
    v.pop_back();
    moments.push_back(to_moments(v));
  }
  auto m = reduce_columns(std::move(moments));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    r.T.push_back(static_cast<double>(idx[k]) * cfg.dt);
    r.moment.push_back(m[k].mean());
    r.se.push_back(m[k].se());
  }
  r.slope = r.T.size() >= 2 ? loglog_slope(r.T, r.moment) : 0.0;
  return r;
}

HypercontractivityResult hypercontractivity_check(const FockVector& phi, double p,
                                                  std::size_t samples, uint64_t seed, Exec exec) {
  if (!(p >= 2.0)) throw std::domain_error("hypercontractivity needs p >= 2");
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  const Observable f(phi);
  const Truncation& tr = phi.basis().truncation();
  constexpr std::size_t kBlock = 1000;
  const std::size_t blocks = (samples + kBlock - 1) / kBlock;
  auto per_block = map_paths(blocks, exec, [&](std::size_t bidx) {
    RngStream rng(seed, "hypercontractivity", bidx);
    Moments m;
    const std::size_t end = std::min(samples, (bidx + 1) * kBlock);
    for (std::size_t s = bidx * kBlock; s < end; ++s)
      m.add(std::pow(std::abs(f(sample_white_noise(tr.radius, rng, tr.species))), p));
    return m;
  });
  Moments m = tree_reduce(std::move(per_block), Moments::merge);
  HypercontractivityResult r;
  r.p = p;
  r.estimate = m.mean();
  r.se = m.se();
  const double c = std::sqrt(p - 1.0);
  r.bound = std::pow(degree_weighted_norm(phi, [&](int n) { return std::pow(c, n); }, 0.0), p);
  return r;
}

DualityReport duality_check(const BackwardTrajectory& traj, const FockVector& eta,
                            const SimConfig& cfg, std::size_t paths, uint64_t seed, Exec exec) {
  if (traj.states.size() < 2) throw std::invalid_argument("backward trajectory needs two stored states");
  const double spacing = traj.times[1] - traj.times[0];
  for (std::size_t j = 1; j < traj.times.size(); ++j)
    if (std::abs(traj.times[j] - traj.times[j - 1] - spacing) > 1e-9 * spacing)
      throw std::invalid_argument("backward trajectory is not stored on a uniform grid");
  const std::size_t ratio = grid_index(spacing, cfg.dt, "stored spacing");
  if (ratio == 0) throw std::invalid_argument("simulation step larger than the stored spacing");
  const std::size_t J = traj.states.size() - 1;

  SimConfig c = cfg;
  c.T = static_cast<double>(J * ratio) * cfg.dt;
  c.stride = 0;
  const GeneratorParams& params = traj.params;
  const Truncation& tb = traj.states.front().basis().truncation();
  c.radius = std::max({cfg.radius_for(params), tb.radius, eta.basis().truncation().radius});
  std::vector<Observable> obs;
  for (const auto& s : traj.states) obs.emplace_back(s);
  const Observable density(eta);

  auto per_path = map_paths(paths, exec, [&](std::size_t i) {
    RngStream rng(seed, kPathPurpose, i);
    SpectralField u0 = sample_white_noise(c.radius, rng, params.species());
    const double w = density(u0);
    std::vector<double> out(J + 1, 0.0);
    simulate(u0, params, c, rng, [&](std::size_t j, double, const SpectralField& u) {
      if (j % ratio) return;
      const std::size_t s = j / ratio;
      out[s] = w * obs[J - s](u);
    });
    return to_moments(out);
  });
  auto m = reduce_columns(std::move(per_path));

  DualityReport r;
  const FockVector& phiT = traj.states.back();
  if (eta.same_basis(phiT)) {
    r.target = inner_product(phiT, eta).real();
  } else {
    const Truncation& te = eta.basis().truncation();
    auto common = FockBasis::full({std::max(tb.radius, te.radius), std::max(tb.max_degree, te.max_degree), tb.species});
    r.target = inner_product(extend_to(phiT, common), extend_to(eta, common)).real();
  }
  for (std::size_t s = 0; s <= J; ++s) {
    DualityRow row;
    row.s = traj.times[s];
    row.estimate = m[s].mean();
    row.se = m[s].se();
    row.z = row.se > 0.0 ? (row.estimate - r.target) / row.se : 0.0;
    r.max_abs_z = std::max(r.max_abs_z, std::abs(row.z));
    r.rows.push_back(row);
  }
  return r;
}

SwitchMeasure switch_measure_check(const TrajectoryBatch& batch,
                                   const std::function<double(const Trajectory&)>& psi) {
  if (!batch.density) throw std::invalid_argument("switch-measure check needs a batch with a density");
  if (batch.paths.size() < 2) throw std::invalid_argument("switch-measure check needs at least two paths");
  Moments a, b;
  for (std::size_t i = 0; i < batch.paths.size(); ++i) {
    const double v = psi(batch.paths[i]);
    a.add(batch.weights[i] * v);
    b.add(v * v);
  }
  SwitchMeasure r;
  r.eta_norm = norm(*batch.density);
  r.weighted = a.mean();
  r.weighted_se = a.se();
  const double m2 = std::max(b.mean(), 0.0);
  r.bound = r.eta_norm * std::sqrt(m2);
  r.bound_se = m2 > 0.0 ? r.eta_norm * b.se() / (2.0 * std::sqrt(m2)) : 0.0;
  return r;
}

void write_invariance_csv(const InvarianceReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "k,mean_re,mean_im,var,se\n" << std::setprecision(17);
  for (const auto& m : r.modes)
    out << m.k << ',' << m.mean.real() << ',' << m.mean.imag() << ',' << m.var << ',' << m.var_se << '\n';
}

void write_martingale_csv(const MartingaleReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "s,t,G_id,estimate,se,z\n" << std::setprecision(17);
  for (const auto& c : r.cells)
    out << c.s << ',' << c.t << ',' << c.g_id << ',' << c.estimate << ',' << c.se << ',' << c.z << '\n';
}

void write_qv_csv(const std::vector<QvPoint>& qv, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,realized,target\n" << std::setprecision(17);
  for (const auto& q : qv) out << q.t << ',' << q.realized << ',' << q.target << '\n';
}

}  // namespace sburgers
