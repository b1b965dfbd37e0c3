#include "sburgers/backward.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

namespace sburgers {

namespace {

constexpr double kHeatRate = 4.0 * std::numbers::pi * std::numbers::pi;

double fock_norm(const Eigen::VectorXcd& x, const Eigen::VectorXd& w) {
  return (x.array() * w.array()).matrix().norm();
}

std::vector<double> degree_energies(const FockVector& phi, double lap_power) {
  const FockBasis& b = phi.basis();
  std::vector<double> e(static_cast<std::size_t>(b.truncation().max_degree) + 1, 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) {
    double v = std::norm(phi.coeffs()[static_cast<Eigen::Index>(i)]);
    if (v == 0.0) continue;
    double m = lap_power == 0.0 ? 1.0 : std::pow(b.laplacian(i), 2.0 * lap_power);
    e[static_cast<std::size_t>(b.degree(i))] += b.norm_weight(i) * m * v;
  }
  return e;
}

// Integral of a positive function over [0, h] from its end values, exact for
// exponentials.
double log_mean_integral(double f0, double f1, double h) {
  if (f0 <= 0.0 || f1 <= 0.0) return 0.5 * h * (f0 + f1);
  double r = f0 / f1;
  if (std::abs(r - 1.0) < 1e-8) return 0.5 * h * (f0 + f1);
  return h * (f0 - f1) / std::log(r);
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "exponential-euler" || name == "euler") return Scheme::exponential_euler;
  if (name == "exponential-midpoint" || name == "midpoint") return Scheme::exponential_midpoint;
  throw std::invalid_argument("unknown scheme: " + name);
}

std::string scheme_name(Scheme s) {
  return s == Scheme::exponential_euler ? "exponential-euler" : "exponential-midpoint";
}

double default_dt(const Generator& gen) {
  double g = gen.G_norm_estimate();
  return g > 0.0 ? std::min(1e-3, 0.1 / g) : 1e-3;
}

BackwardStepper::BackwardStepper(const Generator& gen, double dt, Scheme scheme, double g_norm,
                                 double guard_factor)
    : gen_(gen), dt_(dt), scheme_(scheme), g_norm_(g_norm), guard_(guard_factor) {
  if (!(dt > 0.0)) throw std::domain_error("time step must be positive");
  if (g_norm_ < 0.0) g_norm_ = gen.G_norm_estimate();
  const auto& rate = gen.rate();
  e_full_ = (-dt * rate.array()).exp();
  e_half_ = (-0.5 * dt * rate.array()).exp();
  const FockBasis& b = *gen.basis_ptr();
  w_.resize(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) w_[static_cast<Eigen::Index>(i)] = std::sqrt(b.norm_weight(i));
}

Eigen::VectorXcd BackwardStepper::Gx(const Eigen::VectorXcd& x) const { return gen_.G() * x; }

void BackwardStepper::step(FockVector& phi) const {
  if (phi.basis_ptr() != gen_.basis_ptr()) throw std::invalid_argument("vector lives on another basis");
  const Eigen::VectorXcd& x = phi.coeffs();
  Eigen::VectorXcd next;
  if (scheme_ == Scheme::exponential_euler) {
    next = (e_full_.array() * (x + dt_ * Gx(x)).array()).matrix();
  } else {
    Eigen::VectorXcd half = (e_half_.array() * (x + 0.5 * dt_ * Gx(x)).array()).matrix();
    next = (e_full_.array() * x.array()).matrix() +
           dt_ * (e_half_.array() * Gx(half).array()).matrix();
  }
  const double before = fock_norm(x, w_);
  const double after = fock_norm(next, w_);
  if (!std::isfinite(after) || after > before * (1.0 + guard_ * dt_ * g_norm_) + 1e-300)
    throw StabilityError("backward step grew the norm beyond the stability guard; reduce dt");
  phi.coeffs() = std::move(next);
}

BackwardTrajectory solve_backward(const Generator& gen, const FockVector& phi0, double T,
                                  const BackwardOptions& opts) {
  if (!(T > 0.0)) throw std::domain_error("final time must be positive");
  if (opts.stride < 1) throw std::domain_error("stride must be >= 1");
  const double dt = opts.dt > 0.0 ? opts.dt : default_dt(gen);
  BackwardStepper stepper(gen, dt, opts.scheme, -1.0, opts.guard_factor);
  const long steps = std::max(1L, std::lround(T / dt));
  BackwardTrajectory traj;
  traj.scheme = opts.scheme;
  traj.dt = dt;
  traj.params = gen.params();
  traj.stride = opts.stride;
  FockVector phi = phi0;
  traj.times.push_back(0.0);
  traj.states.push_back(phi);
  auto record = [&](double t) {
    traj.step_times.push_back(t);
    traj.energy.push_back(degree_energies(phi, 0.0));
    traj.dissipation.push_back(degree_energies(phi, 0.5));
  };
  record(0.0);
  for (long s = 1; s <= steps; ++s) {
    stepper.step(phi);
    record(static_cast<double>(s) * dt);
    if (s % opts.stride == 0 || s == steps) {
      traj.times.push_back(static_cast<double>(s) * dt);
      traj.states.push_back(phi);
    }
  }
  return traj;
}

AprioriReport apriori_report(const BackwardTrajectory& traj, double alpha) {
  if (traj.step_times.empty()) throw std::invalid_argument("trajectory has no diagnostics");
  const std::size_t degrees = traj.energy.front().size();
  const auto rho = dyadic_weights(std::max<int>(1, static_cast<int>(degrees) - 1));
  // sum_i 2^{2 i alpha} rho_i(n)^2 per degree
  std::vector<double> a(degrees, 0.0);
  for (std::size_t n = 0; n < degrees; ++n)
    for (std::size_t idx = 0; idx < rho.size(); ++idx)
      a[n] += std::pow(2.0, 2.0 * (static_cast<double>(idx) - 1.0) * alpha) * rho[idx][n] * rho[idx][n];
  auto combine = [&](const std::vector<double>& e) {
    double s = 0.0;
    for (std::size_t n = 0; n < degrees; ++n) s += a[n] * e[n];
    return s;
  };
  const std::size_t K = traj.step_times.size();
  std::vector<double> lhs1(K);
  std::vector<std::vector<double>> dis(K, std::vector<double>(degrees));
  for (std::size_t j = 0; j < K; ++j) {
    lhs1[j] = combine(traj.energy[j]);
    for (std::size_t n = 0; n < degrees; ++n) dis[j][n] = a[n] * traj.dissipation[j][n];
  }
  const double base = lhs1[0];
  const auto& t = traj.step_times;

  AprioriReport r;
  r.alpha = alpha;
  for (std::size_t j = 1; j < K; ++j)
    if (base > 0.0 && lhs1[j] > 0.0) r.C_growth = std::max(r.C_growth, std::log(lhs1[j] / base) / t[j]);

  auto increment = [&](double C, std::size_t j) {
    double s = 0.0;
    const double h = t[j] - t[j - 1];
    for (std::size_t n = 0; n < degrees; ++n)
      s += log_mean_integral(std::exp(-C * t[j - 1]) * dis[j - 1][n], std::exp(-C * t[j]) * dis[j][n], h);
    return s;
  };
  auto integral = [&](double C) {
    double s = 0.0;
    for (std::size_t j = 1; j < K; ++j) s += increment(C, j);
    return s;
  };
  if (K > 1 && integral(0.0) > base) {
    double lo = 0.0, hi = 1.0;
    while (integral(hi) > base && hi < 1e12) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (integral(mid) > base ? lo : hi) = mid;
    }
    r.C_integral = hi;
  }
  r.C = std::max(r.C_growth, r.C_integral);

  double acc = 0.0;
  const std::size_t stride = static_cast<std::size_t>(std::max(1, traj.stride));
  for (std::size_t j = 0; j < K; ++j) {
    if (j > 0) acc += increment(r.C, j);
    if (j % stride == 0 || j + 1 == K)
      r.rows.push_back({t[j], alpha, lhs1[j], std::exp(r.C * t[j]) * base, acc, base, r.C});
  }
  return r;
}

RemainderDynamics remainder_dynamics(const Generator& gen, const BackwardTrajectory& traj,
                                     const CutoffLaw& cutoff, double alpha, double C,
                                     double contraction_factor) {
  if (traj.states.size() < 2) throw std::invalid_argument("trajectory needs at least two states");
  RemainderDynamics out;
  if (contraction_factor < 0.0) {
    const Truncation& tr = gen.basis_ptr()->truncation();
    contraction_factor = estimate_contraction(gen.params(), cutoff,
                                              NumberWeight::constant(tr.max_degree), 0.5, tr);
  }
  out.contraction_factor = contraction_factor;
  if (!(contraction_factor < 1.0)) throw ControlledError("cutoff contraction not certified", contraction_factor);

  auto weighted = [&](const FockVector& v, double shift, double lap) {
    return degree_weighted_norm(v, [&](int n) { return std::pow(1.0 + n, alpha + shift); }, lap);
  };
  std::vector<FockVector> sharp, rhs;
  for (const auto& phi : traj.states) {
    FockVector s = remainder(gen, phi, cutoff);
    FockVector dphi = gen.apply_L(phi);
    FockVector r = low_part(gen.apply_G(phi), cutoff);
    for (Eigen::Index i = 0; i < gen.rate().size(); ++i) r.coeffs()[i] -= gen.rate()[i] * s.coeffs()[i];
    r -= gen.resolvent_high(dphi, cutoff);
    sharp.push_back(std::move(s));
    rhs.push_back(std::move(r));
  }
  out.initial_norm = weighted(sharp[0], 0.0, 1.0) + weighted(sharp[0], 4.5, 0.5);
  for (std::size_t j = 0; j < sharp.size(); ++j) {
    const double t = traj.times[j];
    double v = weighted(sharp[j], 0.0, 0.5);
    out.times.push_back(t);
    out.sharp_norm.push_back(v);
    if (out.initial_norm > 0.0)
      out.max_shape_ratio = std::max(out.max_shape_ratio,
                                     v / (std::sqrt(t * std::exp(t * C) + 1.0) * out.initial_norm));
    if (j + 1 < sharp.size()) {
      const double h = traj.times[j + 1] - traj.times[j];
      Eigen::VectorXcd fd = (sharp[j + 1].coeffs() - sharp[j].coeffs()) / h;
      Eigen::VectorXcd avg = 0.5 * (rhs[j].coeffs() + rhs[j + 1].coeffs());
      FockVector diff(gen.basis_ptr(), fd - avg);
      FockVector ref(gen.basis_ptr(), avg);
      double scale = norm(ref);
      double d = scale > 0.0 ? norm(diff) / scale : norm(diff);
      out.defect.push_back(d);
      out.max_defect = std::max(out.max_defect, d);
    }
  }
  return out;
}

DecayFit ergodic_decay(const BackwardTrajectory& traj) {
  if (traj.states.size() < 5) throw std::invalid_argument("decay fit needs at least 5 stored states");
  const FockVector& first = traj.states.front();
  double n0 = norm(first);
  if (std::abs(first.at(ModeTuple{})) > 1e-14 * std::max(1.0, n0))
    throw std::domain_error("ergodic decay needs a mean-zero initial state");
  std::vector<double> t, y;
  for (std::size_t j = 0; j < traj.states.size(); ++j) {
    double v = norm(traj.states[j]);
    if (v <= 0.0) break;
    t.push_back(traj.times[j]);
    y.push_back(std::log(v));
  }
  if (t.size() < 5) throw std::invalid_argument("decay fit needs at least 5 nonzero states");
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    st += t[j];
    sy += y[j];
    stt += t[j] * t[j];
    sty += t[j] * y[j];
  }
  double slope = (n * sty - st * sy) / (n * stt - st * st);
  DecayFit f;
  f.rate = -slope;
  f.intercept = (sy - slope * st) / n;
  f.points = t.size();
  return f;
}

double smoothing_probe(const FockVector& psi, double t, double alpha, double beta) {
  if (!(t > 0.0)) throw std::domain_error("smoothing probe needs t > 0");
  if (beta < 0.0) throw std::domain_error("smoothing probe needs beta >= 0");
  const FockBasis& b = psi.basis();
  FockVector heat = psi;
  for (std::size_t i = 0; i < b.size(); ++i)
    heat.coeffs()[static_cast<Eigen::Index>(i)] *= std::exp(-t * b.laplacian(i));
  auto weight = [&](int n) { return std::pow(1.0 + n, alpha); };
  double den = degree_weighted_norm(psi, weight, 0.0);
  if (den == 0.0) return 0.0;
  return std::pow(t, beta) * degree_weighted_norm(heat, weight, beta) / den;
}

void write_decay_csv(const BackwardTrajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,norm,bound\n" << std::setprecision(17);
  const double n0 = traj.states.empty() ? 0.0 : norm(traj.states.front());
  for (std::size_t j = 0; j < traj.states.size(); ++j)
    out << traj.times[j] << ',' << norm(traj.states[j]) << ',' << n0 * std::exp(-kHeatRate * traj.times[j]) << '\n';
}

void write_apriori_csv(const std::vector<AprioriReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,alpha,lhs1,rhs1,lhs2,rhs2,fitted_C\n" << std::setprecision(17);
  for (const auto& r : reports)
    for (const auto& row : r.rows)
      out << row.t << ',' << row.alpha << ',' << row.lhs1 << ',' << row.rhs1 << ',' << row.lhs2 << ','
          << row.rhs2 << ',' << row.fitted_C << '\n';
}

}  // namespace sburgers
