#include "sburgers/params.hpp"

#include <stdexcept>
#include <string>

namespace sburgers {

Coupling::Coupling(int d, std::vector<double> values) : d_(d), v_(std::move(values)) {
  if (d < 1) throw std::invalid_argument("coupling needs at least one species");
  if (v_.size() != static_cast<std::size_t>(d) * d * d)
    throw std::invalid_argument("coupling tensor must have d^3 entries");
}

void validate_trilinear(const Coupling& g, double tol) {
  const int d = g.species();
  double scale = 0.0;
  for (double x : g.values()) scale = std::max(scale, std::abs(x));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double a = g(i, j, k);
        if (std::abs(a - g(i, k, j)) > tol * scale || std::abs(a - g(j, k, i)) > tol * scale)
          throw std::invalid_argument("coupling violates the trilinear symmetry at (" +
                                      std::to_string(i) + "," + std::to_string(j) + "," +
                                      std::to_string(k) + ")");
      }
}

void GeneratorParams::validate() const {
  if (m < 0) throw std::invalid_argument("Galerkin cutoff must be >= 0");
  if (!(theta > 0.75 && theta <= 1.0))
    throw std::domain_error("fractional exponent must lie in (3/4, 1]");
  if (coupling.species() > 1) validate_trilinear(coupling);
}

CutoffLaw CutoffLaw::for_theta(double L, double theta) {
  if (!(L >= 1.0)) throw std::domain_error("cutoff scale L must be >= 1");
  if (!(theta > 0.75 && theta <= 1.0))
    throw std::domain_error("fractional exponent must lie in (3/4, 1]");
  return CutoffLaw{L, 3.0 / (4.0 * theta - 3.0)};
}

}  // namespace sburgers
