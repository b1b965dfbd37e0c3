#include "sburgers/chaos_eval.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace sburgers {

double hermite(int n, double x) {
  if (n == 0) return 1.0;
  double a = 1.0, b = x;
  for (int k = 1; k < n; ++k) {
    double c = x * b - k * a;
    a = b;
    b = c;
  }
  return b;
}

std::vector<double> real_coordinates(const SpectralField& u, int radius) {
  std::vector<double> xi(static_cast<std::size_t>(u.species()) * radius * 2, 0.0);
  const double r2 = std::sqrt(2.0);
  for (int i = 0; i < u.species(); ++i)
    for (int j = 1; j <= std::min(radius, u.radius()); ++j) {
      std::size_t c = static_cast<std::size_t>((i * radius + j - 1) * 2);
      xi[c] = r2 * u(j, i).real();
      xi[c + 1] = -r2 * u(j, i).imag();
    }
  return xi;
}

Observable::Observable(const FockVector& phi, double real_tol) {
  const FockBasis& B = phi.basis();
  if (!phi.is_real(real_tol)) throw std::domain_error("observable kernel is not real");
  radius_ = B.truncation().radius;
  species_ = B.truncation().species;
  const double inv_r2 = 1.0 / std::sqrt(2.0);

  std::map<std::vector<int>, cplx> acc;
  for (std::size_t idx = 0; idx < B.size(); ++idx) {
    cplx v = phi.coeffs()[static_cast<Eigen::Index>(idx)];
    if (v == cplx{}) continue;
    const int n = B.degree(idx);
    if (n == 0) {
      constant_ += v.real();
      continue;
    }
    for_each_permutation(B.tuple(idx), [&](const ModeTuple& kappa) {
      for (int choice = 0; choice < (1 << n); ++choice) {
        std::vector<int> coords(static_cast<std::size_t>(n));
        cplx c = v;
        for (int a = 0; a < n; ++a) {
          const ModeIndex& mi = kappa[a];
          int j = std::abs(mi.k);
          bool sine = (choice >> a) & 1;
          coords[static_cast<std::size_t>(a)] = (mi.species * radius_ + j - 1) * 2 + (sine ? 1 : 0);
          c *= sine ? kI * (mi.k > 0 ? inv_r2 : -inv_r2) : cplx{inv_r2, 0.0};
        }
        std::sort(coords.begin(), coords.end());
        acc[coords] += c;
      }
    });
  }
  double scale = 0.0;
  for (const auto& [key, c] : acc) scale = std::max(scale, std::abs(c));
  for (const auto& [key, c] : acc) {
    if (std::abs(c.imag()) > 1e-9 * std::max(scale, 1e-300))
      throw std::logic_error("real expansion produced an imaginary coefficient");
    if (c.real() == 0.0) continue;
    Term t;
    t.coef = c.real();
    for (std::size_t a = 0; a < key.size();) {
      std::size_t b = a;
      while (b < key.size() && key[b] == key[a]) ++b;
      t.powers.emplace_back(key[a], static_cast<int>(b - a));
      max_power_ = std::max(max_power_, static_cast<int>(b - a));
      a = b;
    }
    terms_.push_back(std::move(t));
  }
}

double Observable::evaluate_coordinates(const std::vector<double>& xi) const {
  const int P = max_power_ + 1;
  std::vector<double> he(xi.size() * static_cast<std::size_t>(P));
  for (std::size_t c = 0; c < xi.size(); ++c) {
    double* h = he.data() + c * static_cast<std::size_t>(P);
    h[0] = 1.0;
    if (P > 1) h[1] = xi[c];
    for (int p = 2; p < P; ++p) h[p] = xi[c] * h[p - 1] - (p - 1) * h[p - 2];
  }
  double s = constant_;
  for (const Term& t : terms_) {
    double prod = t.coef;
    for (const auto& [c, p] : t.powers) prod *= he[static_cast<std::size_t>(c) * P + p];
    s += prod;
  }
  return s;
}

double Observable::operator()(const SpectralField& u) const {
  // modes beyond the field's radius read as zero coordinates
  return evaluate_coordinates(real_coordinates(u, radius_));
}

double evaluate(const FockVector& phi, const SpectralField& u) { return Observable(phi)(u); }

}  // namespace sburgers
