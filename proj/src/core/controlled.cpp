#include "sburgers/controlled.hpp"

#include <cmath>

namespace sburgers {

ControlledPair solve_controlled(const Generator& gen, const FockVector& sharp,
                                const CutoffLaw& cutoff, const ControlledOptions& opts) {
  if (!(opts.gamma > 0.25 && opts.gamma <= 0.5))
    throw std::domain_error("construction norm needs gamma in (1/4, 1/2]");
  if (opts.weight.max_degree() < sharp.basis().truncation().max_degree)
    throw std::invalid_argument("number weight shorter than the truncation");
  const NumberWeight& w = opts.weight;
  const double g = opts.gamma;
  double scale = weighted_norm(sharp, w, g);
  if (scale == 0.0) scale = 1.0;

  ControlledPair out{sharp, sharp, cutoff, 0.0, 0, {}, 0.0, false};
  FockVector psi = sharp;
  bool converged = false;
  int rising = 0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    FockVector next = gen.resolvent_high(psi, cutoff);
    next += sharp;
    FockVector diff = next - psi;
    double d = weighted_norm(diff, w, g) / scale;
    if (!out.defects.empty() && out.defects.back() > 1e-10) {
      double ratio = d / out.defects.back();
      out.observed_ratio = std::max(out.observed_ratio, ratio);
      rising = ratio >= 1.0 ? rising + 1 : 0;
    }
    out.defects.push_back(d);
    psi = std::move(next);
    out.iterations = it;
    if (d <= opts.tol) {
      converged = true;
      break;
    }
    if (rising >= 3 || !std::isfinite(d))
      throw ControlledError("controlled fixed point does not contract", out.observed_ratio);
  }
  if (!converged)
    throw ControlledError("controlled fixed point hit the iteration cap", out.observed_ratio);

  FockVector check = gen.resolvent_high(psi, cutoff);
  check += sharp;
  check -= psi;
  out.residual = weighted_norm(check, w, g) / scale;
  out.ball_certified = weighted_norm(psi, w, g) <= 2.0 * weighted_norm(sharp, w, g) * (1 + 1e-14);
  out.phi = std::move(psi);
  return out;
}

double estimate_contraction(const GeneratorParams& params, const CutoffLaw& cutoff,
                            const NumberWeight& w, double gamma, const Truncation& tr) {
  return scaled_G_norm(
             tr, params, GPart::both, cutoff,
             [&](const EntryInfo& e) { return w(e.degree) * std::pow(e.laplacian, gamma) / e.rate; },
             [&](const EntryInfo& e) { return w(e.degree) * std::pow(e.laplacian, gamma); })
      .value;
}

FockVector remainder(const Generator& gen, const FockVector& phi, const CutoffLaw& cutoff) {
  FockVector out = phi;
  out -= gen.resolvent_high(phi, cutoff);
  return out;
}

FockVector apply_generator(const Generator& gen, const ControlledPair& pair, double max_residual) {
  if (!(pair.residual <= max_residual))
    throw std::invalid_argument("controlled pair residual too large");
  FockVector g = gen.apply_G(pair.phi);
  FockVector out = low_part(g, pair.cutoff);
  const auto& rate = gen.rate();
  for (Eigen::Index i = 0; i < rate.size(); ++i) out.coeffs()[i] -= rate[i] * pair.sharp.coeffs()[i];
  return out;
}

DomainBound domain_bound(const Generator& gen, const ControlledPair& pair, const NumberWeight& w,
                         double gamma, double delta) {
  DomainBound b;
  FockVector low = low_part(gen.apply_G(pair.phi), pair.cutoff);
  b.lhs = weighted_norm(low, w, gamma);
  const double alpha = domain_weight_exponent(gamma);
  b.rhs = degree_weighted_norm(
      pair.sharp, [&](int n) { return w(n) * std::pow(1.0 + n, alpha); }, 0.25 + delta);
  b.ratio = b.rhs > 0.0 ? b.lhs / b.rhs : 0.0;
  return b;
}

double dissipativity_defect(const Generator& gen, const FockVector& phi, const FockVector& Lphi) {
  double energy = 0.0;
  const FockBasis& B = phi.basis();
  for (std::size_t i = 0; i < B.size(); ++i)
    energy += B.norm_weight(i) * gen.rate()[static_cast<Eigen::Index>(i)] *
              std::norm(phi.coeffs()[static_cast<Eigen::Index>(i)]);
  if (energy == 0.0) return std::abs(inner_product(phi, Lphi));
  return std::abs(inner_product(Lphi, phi) + energy) / energy;
}

DensityApproximation approx_in_domain(const Generator& gen, const FockVector& psi, double M,
                                      const CutoffLaw& cutoff, const ControlledOptions& opts) {
  if (!(M >= 1.0)) throw std::domain_error("density parameter must be >= 1");
  DensityApproximation r{solve_controlled(gen, psi, cutoff.scaled(M), opts)};
  r.pair.sharp = remainder(gen, r.pair.phi, cutoff);
  r.pair.cutoff = cutoff;
  const NumberWeight& w = opts.weight;
  r.error = weighted_norm(r.pair.phi - psi, w, 0.5);
  r.stability = weighted_norm(r.pair.phi, w, 0.5);
  r.generator = weighted_norm(apply_generator(gen, r.pair, 1e-8), w, 0.0);
  r.psi_half = weighted_norm(psi, w, 0.5);
  r.psi_rhs = weighted_norm(psi, w, 1.0) +
              degree_weighted_norm(psi, [&](int n) { return w(n) * std::pow(1.0 + n, 4.5); }, 0.5);
  return r;
}

double adapted_gain_probe(const GeneratorParams& params, const CutoffLaw& cutoff,
                          const NumberWeight& w, double gamma, const Truncation& tr) {
  if (!(gamma > 0.5 && gamma < 0.75)) throw std::domain_error("adapted gain needs gamma in (1/2, 3/4)");
  return scaled_G_norm(
             tr, params, GPart::both, cutoff,
             [&](const EntryInfo& e) { return w(e.degree) * std::pow(e.laplacian, gamma) / e.rate; },
             [&](const EntryInfo& e) {
               return w(e.degree) * std::pow(1.0 + e.degree, 1.5) * std::pow(e.laplacian, gamma - 0.25);
             })
      .value;
}

CutoffChoice select_cutoff(const GeneratorParams& params, const NumberWeight& w, double gamma,
                           const Truncation& tr, double start, double target, int max_doublings) {
  if (!(start >= 1.0)) throw std::domain_error("cutoff scale must be >= 1");
  CutoffChoice c;
  double L = start;
  for (int i = 0; i <= max_doublings; ++i, L *= 2.0) {
    double f = estimate_contraction(params, CutoffLaw::for_theta(L, params.theta), w, gamma, tr);
    c.tried.emplace_back(L, f);
    if (f <= target) {
      c.L = L;
      c.factor = f;
      return c;
    }
  }
  throw ControlledError("no cutoff scale reached the target contraction factor", c.tried.back().second);
}

}  // namespace sburgers
