#include "sburgers/operators.hpp"

#include <cmath>
#include <omp.h>
#include <stdexcept>

namespace sburgers {

namespace {

// Pull form of the symmetrized drift kernels: for an output tuple, emit
// (input index, coefficient) pairs in coefficient coordinates.

// Raising part: average over position pairs {a, b} of the unsymmetrized
// formula; the factor (n-1)/C(n,2) collapses to 2/n.
template <class Emit>
void gplus_row(const FockBasis& B, const GeneratorParams& p, std::size_t row, Emit&& emit) {
  const ModeTuple& s = B.tuple(row);
  const int n = s.size();
  if (n < 2) return;
  const int m = p.m;
  const int d = p.coupling.species();
  const double scale = 2.0 / n;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const int ka = s[a].k, kb = s[b].k, l = ka + kb;
      if (l == 0 || std::abs(ka) > m || std::abs(kb) > m || std::abs(l) > m) continue;
      const cplx pref = -scale * kTwoPi * static_cast<double>(l) * kI;
      ModeTuple rest = s.without(a, b);
      for (int i = 0; i < d; ++i) {
        const double g = p.coupling(i, s[a].species, s[b].species);
        if (g == 0.0) continue;
        ModeTuple t = rest;
        t.push_back({l, i});
        t.canonicalize();
        std::size_t col = B.find(t);
        if (col != FockBasis::npos) emit(col, pref * g);
      }
    }
  }
}

// Lowering part: average over which position carries k_1; the factor
// n(n+1)/n collapses to n+1. Ordered pairs (p, q) with p + q = k_1.
template <class Emit>
void gminus_row(const FockBasis& B, const GeneratorParams& p, std::size_t row, Emit&& emit) {
  const ModeTuple& s = B.tuple(row);
  const int n = s.size();
  if (n < 1 || n + 1 > B.truncation().max_degree) return;
  const int m = std::min(p.m, B.truncation().radius);
  const int d = p.coupling.species();
  for (int a = 0; a < n; ++a) {
    const int k1 = s[a].k;
    if (std::abs(k1) > m) continue;
    const cplx pref = -static_cast<double>(n + 1) * kTwoPi * static_cast<double>(k1) * kI;
    ModeTuple rest = s.without(a);
    for (int pm = -m; pm <= m; ++pm) {
      const int q = k1 - pm;
      if (pm == 0 || q == 0 || std::abs(q) > m) continue;
      for (int j1 = 0; j1 < d; ++j1)
        for (int j2 = 0; j2 < d; ++j2) {
          const double g = p.coupling(s[a].species, j1, j2);
          if (g == 0.0) continue;
          ModeTuple t = rest;
          t.push_back({pm, j1});
          t.push_back({q, j2});
          t.canonicalize();
          std::size_t col = B.find(t);
          if (col != FockBasis::npos) emit(col, pref * g);
        }
    }
  }
}

template <class RowFn>
FockVector pull_apply(const FockVector& phi, const GeneratorParams& params, Exec exec,
                      RowFn row_fn) {
  params.validate();
  const FockBasis& B = phi.basis();
  if (params.coupling.species() != B.truncation().species)
    throw std::invalid_argument("coupling species count does not match the truncation");
  FockVector out(phi.basis_ptr());
  const Eigen::VectorXcd& in = phi.coeffs();
  Eigen::VectorXcd& res = out.coeffs();
  const auto N = static_cast<std::ptrdiff_t>(B.size());
  auto body = [&](std::ptrdiff_t r) {
    cplx acc{};
    row_fn(B, params, static_cast<std::size_t>(r),
           [&](std::size_t col, cplx c) { acc += c * in[static_cast<Eigen::Index>(col)]; });
    res[r] = acc;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t r = 0; r < N; ++r) body(r);
  } else {
    for (std::ptrdiff_t r = 0; r < N; ++r) body(r);
  }
  return out;
}

}  // namespace

double theta_rate(const FockBasis& b, std::size_t i, double theta) {
  if (theta == 1.0) return b.laplacian(i);
  double s = 0.0;
  for (const auto& mi : b.tuple(i)) s += mode_rate(mi.k, theta);
  return s;
}

FockVector apply_L0_power(const FockVector& phi, double gamma) {
  const FockBasis& B = phi.basis();
  FockVector out(phi.basis_ptr());
  for (std::size_t i = 0; i < B.size(); ++i) {
    auto ii = static_cast<Eigen::Index>(i);
    cplx v = phi.coeffs()[ii];
    if (B.degree(i) == 0) {
      if (gamma < 0.0 && v != cplx{})
        throw std::domain_error("negative power of the Laplacian on a nonzero constant");
      out.coeffs()[ii] = gamma == 0.0 ? v : cplx{};
      continue;
    }
    out.coeffs()[ii] = v * (gamma == 1.0 ? B.laplacian(i) : std::pow(B.laplacian(i), gamma));
  }
  return out;
}

FockVector apply_L0(const FockVector& phi) {
  FockVector out = apply_L0_power(phi, 1.0);
  out.coeffs() = -out.coeffs();
  return out;
}

FockVector apply_L_theta(const FockVector& phi, const GeneratorParams& params) {
  params.validate();
  const FockBasis& B = phi.basis();
  FockVector out(phi.basis_ptr());
  for (std::size_t i = 0; i < B.size(); ++i) {
    auto ii = static_cast<Eigen::Index>(i);
    out.coeffs()[ii] = -phi.coeffs()[ii] * theta_rate(B, i, params.theta);
  }
  return out;
}

FockVector apply_number_weight(const FockVector& phi, const std::function<double(int)>& f) {
  const FockBasis& B = phi.basis();
  FockVector out(phi.basis_ptr());
  for (std::size_t i = 0; i < B.size(); ++i) {
    auto ii = static_cast<Eigen::Index>(i);
    out.coeffs()[ii] = phi.coeffs()[ii] * f(B.degree(i));
  }
  return out;
}

FockVector apply_Gplus(const FockVector& phi, const GeneratorParams& params, Exec exec) {
  return pull_apply(phi, params, exec, [](auto&&... a) { gplus_row(a...); });
}

FockVector apply_Gminus(const FockVector& phi, const GeneratorParams& params, Exec exec) {
  return pull_apply(phi, params, exec, [](auto&&... a) { gminus_row(a...); });
}

FockVector apply_G(const FockVector& phi, const GeneratorParams& params, Exec exec) {
  return pull_apply(phi, params, exec, [](const FockBasis& B, const GeneratorParams& p,
                                          std::size_t row, auto&& emit) {
    gplus_row(B, p, row, emit);
    gminus_row(B, p, row, emit);
  });
}

FockVector high_part(const FockVector& phi, const CutoffLaw& cutoff) {
  const FockBasis& B = phi.basis();
  FockVector out(phi.basis_ptr());
  for (std::size_t i = 0; i < B.size(); ++i)
    if (B.degree(i) > 0 && cutoff.high(B.degree(i), B.tuple(i).max_abs()))
      out.coeffs()[static_cast<Eigen::Index>(i)] = phi.coeffs()[static_cast<Eigen::Index>(i)];
  return out;
}

FockVector low_part(const FockVector& phi, const CutoffLaw& cutoff) {
  FockVector out = phi;
  out -= high_part(phi, cutoff);
  return out;
}

GSplit split_G(const FockVector& phi, const GeneratorParams& params, const CutoffLaw& cutoff,
               Exec exec) {
  FockVector g = apply_G(phi, params, exec);
  FockVector hi = high_part(g, cutoff);
  FockVector lo = g;
  lo -= hi;
  return {std::move(hi), std::move(lo)};
}

SparseOp assemble_G(const FockBasis& B, const GeneratorParams& params, GPart part, Exec exec) {
  params.validate();
  if (params.coupling.species() != B.truncation().species)
    throw std::invalid_argument("coupling species count does not match the truncation");
  const auto N = static_cast<std::ptrdiff_t>(B.size());
  std::vector<std::vector<std::pair<std::size_t, cplx>>> rows(B.size());
  auto body = [&](std::ptrdiff_t r) {
    auto& row = rows[static_cast<std::size_t>(r)];
    auto emit = [&](std::size_t col, cplx c) { row.emplace_back(col, c); };
    if (part != GPart::minus) gplus_row(B, params, static_cast<std::size_t>(r), emit);
    if (part != GPart::plus) gminus_row(B, params, static_cast<std::size_t>(r), emit);
    std::stable_sort(row.begin(), row.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    std::size_t w = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (w > 0 && row[w - 1].first == row[k].first)
        row[w - 1].second += row[k].second;
      else
        row[w++] = row[k];
    }
    row.resize(w);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t r = 0; r < N; ++r) body(r);
  } else {
    for (std::ptrdiff_t r = 0; r < N; ++r) body(r);
  }
  SparseOp A(N, N);
  Eigen::VectorXi nnz(N);
  for (std::ptrdiff_t r = 0; r < N; ++r)
    nnz[r] = static_cast<int>(rows[static_cast<std::size_t>(r)].size());
  A.reserve(nnz);
  for (std::ptrdiff_t r = 0; r < N; ++r)
    for (const auto& [c, v] : rows[static_cast<std::size_t>(r)])
      A.insert(r, static_cast<Eigen::Index>(c)) = v;
  A.makeCompressed();
  return A;
}

// ---------------------------------------------------------------- Generator

Generator::Generator(BasisPtr basis, GeneratorParams params, Exec exec)
    : basis_(std::move(basis)), params_(std::move(params)) {
  params_.validate();
  g_ = assemble_G(*basis_, params_, GPart::both, exec);
  rate_.resize(static_cast<Eigen::Index>(basis_->size()));
  for (std::size_t i = 0; i < basis_->size(); ++i)
    rate_[static_cast<Eigen::Index>(i)] = theta_rate(*basis_, i, params_.theta);
}

void Generator::check(const FockVector& phi) const {
  if (phi.basis_ptr() != basis_) throw std::invalid_argument("vector lives on another basis");
}

FockVector Generator::apply_G(const FockVector& phi) const {
  check(phi);
  return FockVector(basis_, g_ * phi.coeffs());
}

FockVector Generator::apply_L(const FockVector& phi) const {
  check(phi);
  Eigen::VectorXcd v = g_ * phi.coeffs();
  v -= (rate_.array() * phi.coeffs().array()).matrix();
  return FockVector(basis_, std::move(v));
}

FockVector Generator::resolvent_high(const FockVector& phi, const CutoffLaw& cutoff) const {
  FockVector h = high_part(apply_G(phi), cutoff);
  for (std::size_t i = 0; i < basis_->size(); ++i) {
    auto ii = static_cast<Eigen::Index>(i);
    if (h.coeffs()[ii] != cplx{}) h.coeffs()[ii] /= rate_[ii];
  }
  return h;
}

double Generator::G_norm_estimate(int iterations) const {
  const auto N = static_cast<Eigen::Index>(basis_->size());
  if (N == 0 || g_.nonZeros() == 0) return 0.0;
  Eigen::VectorXd w(N);
  for (Eigen::Index i = 0; i < N; ++i) w[i] = std::sqrt(basis_->norm_weight(static_cast<std::size_t>(i)));
  // orthonormal coordinates x = W c; A = W G W^{-1}; iterate on A^H A
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(N);
  for (Eigen::Index i = 0; i < N; ++i) x[i] += 0.01 * static_cast<double>(i % 7);
  x.normalize();
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXcd y = g_ * (x.array() / w.array()).matrix();
    y = (y.array() * w.array()).matrix();
    Eigen::VectorXcd z = g_.adjoint() * (y.array() * w.array()).matrix();
    z = (z.array() / w.array()).matrix();
    double nz = z.norm();
    if (nz == 0.0) return 0.0;
    double next = std::sqrt(nz);
    x = z / nz;
    if (std::abs(next - sigma) <= 1e-10 * next) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return sigma;
}

// ---------------------------------------------------------------- drift

namespace detail {

void scalar_drift(const cplx* u, int radius, int m, cplx* out) {
  const int R = radius;
  const int mm = std::min(m, R);
  for (int k = -R; k <= R; ++k) out[k + R] = cplx{};
  for (int k = 1; k <= mm; ++k) {
    cplx s{};
    const int lo = std::max(-mm, k - mm);
    const int hi = std::min(mm, k + mm);
    for (int p = lo; p <= hi; ++p) {
      if (p == 0 || p == k) continue;
      s += u[p + R] * u[k - p + R];
    }
    cplx b = kTwoPi * static_cast<double>(k) * kI * s;
    out[k + R] = b;
    out[-k + R] = std::conj(b);
  }
}

void coupled_drift(const cplx* u, int radius, int m, const Coupling& g, cplx* out) {
  const int R = radius;
  const int d = g.species();
  const std::size_t W = static_cast<std::size_t>(2 * R + 1);
  const int mm = std::min(m, R);
  for (std::size_t x = 0; x < W * static_cast<std::size_t>(d); ++x) out[x] = cplx{};
  for (int i = 0; i < d; ++i) {
    cplx* o = out + static_cast<std::size_t>(i) * W;
    for (int k = 1; k <= mm; ++k) {
      cplx s{};
      for (int j = 0; j < d; ++j)
        for (int jp = 0; jp < d; ++jp) {
          const double c = g(i, j, jp);
          if (c == 0.0) continue;
          const cplx* uj = u + static_cast<std::size_t>(j) * W;
          const cplx* ujp = u + static_cast<std::size_t>(jp) * W;
          cplx t{};
          const int lo = std::max(-mm, k - mm);
          const int hi = std::min(mm, k + mm);
          for (int p = lo; p <= hi; ++p) {
            if (p == 0 || p == k) continue;
            t += uj[p + R] * ujp[k - p + R];
          }
          s += c * t;
        }
      cplx b = kTwoPi * static_cast<double>(k) * kI * s;
      o[k + R] = b;
      o[-k + R] = std::conj(b);
    }
  }
}

}  // namespace detail

SpectralField burgers_drift(const SpectralField& u, const GeneratorParams& params) {
  params.validate();
  if (u.radius() < params.m) throw std::invalid_argument("field radius below the Galerkin cutoff");
  if (u.species() != params.coupling.species())
    throw std::invalid_argument("field species count does not match the coupling");
  SpectralField out(u.radius(), u.species());
  if (u.species() == 1 && params.coupling.is_scalar_unit())
    detail::scalar_drift(u.block(0), u.radius(), params.m, out.block(0));
  else
    detail::coupled_drift(u.block(0), u.radius(), params.m, params.coupling, out.block(0));
  return out;
}

double drift_orthogonality(const SpectralField& u, const SpectralField& drift) {
  cplx ip = l2_pairing(u, drift);
  double nu = std::sqrt(l2_pairing(u, u).real());
  double nb = std::sqrt(l2_pairing(drift, drift).real());
  if (nu == 0.0 || nb == 0.0) return 0.0;
  return std::abs(ip.real()) / (nu * nb);
}

}  // namespace sburgers
