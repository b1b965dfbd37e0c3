#include "sburgers/oracle.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <stdexcept>

namespace sburgers {

namespace {

std::vector<ModeIndex> admissible_modes(const Truncation& tr) {
  std::vector<ModeIndex> modes;
  for (int k = -tr.radius; k <= tr.radius; ++k) {
    if (k == 0) continue;
    for (int s = 0; s < tr.species; ++s) modes.push_back({k, s});
  }
  return modes;
}

// Calls f(t) for every ordered tuple of length n over `modes`.
template <class F>
void for_each_ordered(const std::vector<ModeIndex>& modes, int n, F&& f) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  if (n > 0 && modes.empty()) return;
  while (true) {
    ModeTuple t;
    for (int a = 0; a < n; ++a) t.push_back(modes[idx[static_cast<std::size_t>(a)]]);
    f(t);
    int a = n - 1;
    while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == modes.size()) {
      idx[static_cast<std::size_t>(a)] = 0;
      --a;
    }
    if (a < 0) break;
  }
}

double sigma_max_dense(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double sigma_max_sparse(const SparseOp& a, int max_iterations, double rel_tol) {
  const Eigen::Index n = a.cols();
  if (n == 0 || a.nonZeros() == 0) return 0.0;
  Eigen::VectorXcd x(n);
  for (Eigen::Index i = 0; i < n; ++i)
    x[i] = cplx{1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i)),
                0.25 * std::cos(0.3 * static_cast<double>(i))};
  x.normalize();
  double lam = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXcd y = a * x;
    Eigen::VectorXcd z = a.adjoint() * y;
    double next = z.norm();
    if (next == 0.0) return 0.0;
    x = z / next;
    if (std::abs(next - lam) <= rel_tol * next) {
      lam = next;
      break;
    }
    lam = next;
  }
  return std::sqrt(lam);
}

EntryInfo info(const FockBasis& b, std::size_t i, double theta) {
  return EntryInfo{b.degree(i), b.laplacian(i), theta_rate(b, i, theta)};
}

// Builds diag(rs) S diag(cs) in orthonormal coordinates of basis b.
SparseOp scaled_block(const FockBasis& b, const SparseOp& s, const GeneratorParams& params,
                      const std::optional<CutoffLaw>& high_rows, const Scaling& left,
                      const Scaling& right) {
  const auto N = static_cast<Eigen::Index>(b.size());
  Eigen::VectorXcd rs(N), cs(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    auto ui = static_cast<std::size_t>(i);
    EntryInfo e = info(b, ui, params.theta);
    double w = std::sqrt(b.norm_weight(ui));
    bool keep = !high_rows || (e.degree > 0 && high_rows->high(e.degree, b.tuple(ui).max_abs()));
    rs[i] = keep ? w * left(e) : 0.0;
    double r = e.degree > 0 ? right(e) : 0.0;
    cs[i] = (r != 0.0 && std::isfinite(r)) ? 1.0 / (w * r) : 0.0;
  }
  SparseOp a = rs.asDiagonal() * s * cs.asDiagonal();
  a.prune(cplx{0.0, 0.0});
  return a;
}

}  // namespace

Eigen::MatrixXcd operator_matrix(OperatorTag which, const Truncation& tr,
                                 const GeneratorParams& params,
                                 const std::optional<CutoffLaw>& cutoff, std::size_t guard) {
  params.validate();
  if (params.coupling.species() != tr.species)
    throw std::invalid_argument("coupling species count does not match the truncation");
  if ((which == OperatorTag::Ghigh || which == OperatorTag::Glow) && !cutoff)
    throw std::invalid_argument("split operator needs a cutoff law");
  auto basis = FockBasis::full(tr);
  const std::size_t N = basis->size();
  if (N > guard) throw std::length_error("basis too large for the dense oracle");
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  if (which == OperatorTag::L0) {
    for (std::size_t i = 0; i < N; ++i)
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -basis->laplacian(i);
    return A;
  }
  const bool plus = which != OperatorTag::Gminus;
  const bool minus = which != OperatorTag::Gplus;
  const auto modes = admissible_modes(tr);
  const int m = params.m;
  const int d = tr.species;
  auto in_range = [&](int k) { return std::abs(k) <= m; };

  for (int n = 0; n <= tr.max_degree; ++n) {
    for_each_ordered(modes, n, [&](const ModeTuple& kappa) {
      const ModeTuple s = kappa.canonical();
      const std::size_t row = basis->find(s);
      if (cutoff && which != OperatorTag::G && which != OperatorTag::Gplus &&
          which != OperatorTag::Gminus) {
        bool hi = n > 0 && cutoff->high(n, s.max_abs());
        if ((which == OperatorTag::Ghigh) != hi) return;
      }
      const double out_scale = std::sqrt(factorial(n) / multiplicity(s));
      auto add = [&](const ModeTuple& input, cplx coef) {
        std::size_t col = basis->find(input.canonical());
        if (col == FockBasis::npos) return;
        A(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) +=
            out_scale * coef / std::sqrt(basis->norm_weight(col));
      };
      if (plus && n >= 2) {
        const int k1 = kappa[0].k, k2 = kappa[1].k, l = k1 + k2;
        if (l != 0 && in_range(k1) && in_range(k2) && in_range(l)) {
          for (int i = 0; i < d; ++i) {
            double g = params.coupling(i, kappa[0].species, kappa[1].species);
            ModeTuple in;
            in.push_back({l, i});
            for (int a = 2; a < n; ++a) in.push_back(kappa[a]);
            add(in, -static_cast<double>(n - 1) * g * kTwoPi * static_cast<double>(l) * kI);
          }
        }
      }
      if (minus && n >= 1 && n + 1 <= tr.max_degree) {
        const int k1 = kappa[0].k;
        if (in_range(k1)) {
          for (int p = -tr.radius; p <= tr.radius; ++p) {
            const int q = k1 - p;
            if (p == 0 || q == 0 || !in_range(p) || !in_range(q)) continue;
            for (int j1 = 0; j1 < d; ++j1)
              for (int j2 = 0; j2 < d; ++j2) {
                double g = params.coupling(kappa[0].species, j1, j2);
                ModeTuple in;
                in.push_back({p, j1});
                in.push_back({q, j2});
                for (int a = 1; a < n; ++a) in.push_back(kappa[a]);
                add(in, -static_cast<double>(n) * (n + 1) * g * kTwoPi * static_cast<double>(k1) * kI);
              }
          }
        }
      }
    });
  }
  return A;
}

void write_matrix_csv(const Eigen::MatrixXcd& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "row,col,re,im\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != cplx{}) out << i << ',' << j << ',' << a(i, j).real() << ',' << a(i, j).imag() << '\n';
}

ScaledNorm scaled_G_norm(const Truncation& tr, const GeneratorParams& params, GPart part,
                         const std::optional<CutoffLaw>& high_rows, const Scaling& left,
                         const Scaling& right, const ScaledNormOptions& opts) {
  params.validate();
  tr.validate();
  const int Kmax = tr.max_degree * tr.radius;
  const int nsec = 2 * Kmax + 1;
  std::vector<double> best(static_cast<std::size_t>(nsec), 0.0);
  std::mutex err_mu;
  std::string err;
  auto body = [&](int idx) {
    try {
      const int K = idx - Kmax;
      auto b = FockBasis::sectors(tr, {K});
      if (b->size() > opts.sector_guard) throw std::length_error("momentum sector too large");
      if (b->size() == 0) return;
      SparseOp s = assemble_G(*b, params, part, Exec::serial);
      SparseOp a = scaled_block(*b, s, params, high_rows, left, right);
      double v = b->size() <= opts.dense_limit
                     ? sigma_max_dense(Eigen::MatrixXcd(a))
                     : sigma_max_sparse(a, opts.max_iterations, opts.rel_tol);
      best[static_cast<std::size_t>(idx)] = v;
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (err.empty()) err = e.what();
    }
  };
  if (opts.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int idx = 0; idx < nsec; ++idx) body(idx);
  } else {
    for (int idx = 0; idx < nsec; ++idx) body(idx);
  }
  if (!err.empty()) throw std::length_error(err);
  ScaledNorm r;
  for (int idx = 0; idx < nsec; ++idx)
    if (best[static_cast<std::size_t>(idx)] > r.value) {
      r.value = best[static_cast<std::size_t>(idx)];
      r.sector = idx - Kmax;
    }
  return r;
}

double scaled_G_norm_dense(const Truncation& tr, const GeneratorParams& params, GPart part,
                           const std::optional<CutoffLaw>& high_rows, const Scaling& left,
                           const Scaling& right, std::size_t guard) {
  auto b = FockBasis::full(tr);
  if (b->size() > guard) throw std::length_error("basis too large for the dense oracle");
  SparseOp s = assemble_G(*b, params, part, Exec::serial);
  return sigma_max_dense(Eigen::MatrixXcd(scaled_block(*b, s, params, high_rows, left, right)));
}

SumEstimateReport sum_estimate_probe(double a, double C, int k_lo, int k_hi, int radius) {
  if (!(a > 0.5)) throw std::domain_error("sum estimate needs a > 1/2");
  if (C < 0.0) throw std::domain_error("sum estimate needs C >= 0");
  SumEstimateReport r;
  for (int k = k_lo; k <= k_hi; ++k) {
    double kk = static_cast<double>(k) * k + C;
    if (!(kk > 0.0)) throw std::domain_error("k^2 + C must be positive");
    double s = 0.0;
    // small terms first
    for (int p = radius; p >= -radius; --p) {
      double pp = static_cast<double>(p), q = static_cast<double>(k - p);
      double den = pp * pp + q * q + C;
      if (den > 0.0) s += std::pow(den, -a);
    }
    double ratio = s / std::pow(kk, 0.5 - a);
    r.k.push_back(k);
    r.ratio.push_back(ratio);
    r.max_ratio = std::max(r.max_ratio, ratio);
  }
  return r;
}

double apriori_lowering_norm(const Truncation& tr, int m, const NumberWeight& w, double gamma) {
  GeneratorParams p;
  p.m = m;
  return scaled_G_norm(
             tr, p, GPart::minus, std::nullopt,
             [&](const EntryInfo& e) { return w(e.degree) * std::pow(e.laplacian, -gamma); },
             [&](const EntryInfo& e) {
               return w(e.degree - 1) * e.degree * std::pow(e.laplacian, 0.75 - gamma);
             })
      .value;
}

double apriori_raising_norm(const Truncation& tr, int m, const NumberWeight& w, double gamma) {
  GeneratorParams p;
  p.m = m;
  return scaled_G_norm(
             tr, p, GPart::plus, std::nullopt,
             [&](const EntryInfo& e) { return w(e.degree) * std::pow(e.laplacian, -gamma); },
             [&](const EntryInfo& e) {
               return w(e.degree + 1) * (1.0 + e.degree) * std::pow(e.laplacian, 0.75 - gamma);
             })
      .value;
}

double apriori_m_dependent_norm(const Truncation& tr, int m, const NumberWeight& w) {
  GeneratorParams p;
  p.m = m;
  return scaled_G_norm(
             tr, p, GPart::both, std::nullopt, [&](const EntryInfo& e) { return w(e.degree); },
             [&](const EntryInfo& e) {
               return (w(e.degree + 1) + w(e.degree - 1)) * (1.0 + e.degree) *
                      std::sqrt(e.laplacian);
             })
      .value;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace sburgers
