#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <numbers>

#include "sburgers/oracle.hpp"
#include "support.hpp"

using namespace sburgers;
using testsupport::random_vector;
using testsupport::rel_diff;

namespace {

constexpr double pi = std::numbers::pi;

GeneratorParams with_m(int m) {
  GeneratorParams p;
  p.m = m;
  return p;
}

Eigen::VectorXcd orthonormal(const FockVector& v) {
  Eigen::VectorXcd x = v.coeffs();
  for (std::size_t i = 0; i < v.size(); ++i)
    x[static_cast<Eigen::Index>(i)] *= std::sqrt(v.basis().norm_weight(i));
  return x;
}

double max_rel(const FockVector& a, const FockVector& b) {
  double scale = std::max(a.coeffs().cwiseAbs().maxCoeff(), b.coeffs().cwiseAbs().maxCoeff());
  return scale == 0.0 ? 0.0 : (a.coeffs() - b.coeffs()).cwiseAbs().maxCoeff() / scale;
}

Coupling symmetric_coupling(int d, RngStream& rng) {
  std::vector<double> v(static_cast<std::size_t>(d * d * d));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      for (int k = j; k < d; ++k) {
        double g = rng.normal();
        int idx[3] = {i, j, k};
        std::sort(idx, idx + 3);
        do {
          v[static_cast<std::size_t>((idx[0] * d + idx[1]) * d + idx[2])] = g;
        } while (std::next_permutation(idx, idx + 3));
      }
  return Coupling(d, v);
}

}  // namespace

TEST_CASE("Laplacian multipliers") {
  auto b = FockBasis::full({4, 2, 1});
  FockVector v(b);
  v.set(ModeTuple::from_modes({2}), 1.0);
  CHECK(apply_L0(v).at(ModeTuple::from_modes({2})).real() == doctest::Approx(-16 * pi * pi));

  FockVector w(b);
  w.set(ModeTuple::from_modes({1, 1}), 1.0);
  CHECK(apply_L0_power(w, 0.5).at(ModeTuple::from_modes({1, 1})).real() ==
        doctest::Approx(std::sqrt(8.0) * pi));

  GeneratorParams p;
  p.theta = 0.8;
  CHECK(apply_L_theta(v, p).at(ModeTuple::from_modes({2})).real() ==
        doctest::Approx(-std::pow(4 * pi, 1.6)));
  p.theta = 1.0;
  CHECK(max_rel(apply_L_theta(v, p), apply_L0(v)) == 0.0);

  RngStream rng(1, "L0-inverse");
  FockVector r = random_vector(b, rng, 1, 2, false);
  CHECK(max_rel(apply_L0_power(apply_L0_power(r, -0.7), 0.7), r) < 1e-12);
  FockVector c(b);
  c.set(ModeTuple{}, 1.0);
  CHECK_THROWS_AS(apply_L0_power(c, -0.5), std::domain_error);

  // sum a_i^theta >= (sum a_i)^theta for theta <= 1, hence
  // |(-L_theta)^{-1} phi| <= |(-L0)^{-theta} phi| and |(-L0)^theta phi| <= |L_theta phi|
  GeneratorParams q;
  q.theta = 0.85;
  FockVector s = random_vector(b, rng, 1, 2, false);
  FockVector inv = apply_number_weight(s, [](int) { return 1.0; });
  for (std::size_t i = 0; i < b->size(); ++i)
    if (b->degree(i) > 0) inv.coeffs()[static_cast<Eigen::Index>(i)] /= theta_rate(*b, i, 0.85);
  CHECK(norm(inv) <= norm(apply_L0_power(s, -0.85)) * (1 + 1e-14));
  CHECK(norm(apply_L0_power(s, 0.85)) <= norm(apply_L_theta(s, q)) * (1 + 1e-14));
}

TEST_CASE("creation part on a single mode") {
  auto b = FockBasis::full({6, 2, 1});
  FockVector v(b);
  v.set(ModeTuple::from_modes({2}), 1.0);
  FockVector out = apply_Gplus(v, with_m(4));
  int hits = 0;
  for (int k1 = -6; k1 <= 6; ++k1) {
    int k2 = 2 - k1;
    if (k1 == 0 || k2 == 0 || std::abs(k2) > 6) continue;
    cplx got = out.at(ModeTuple::from_modes({k1, k2}));
    if (std::abs(k1) <= 4 && std::abs(k2) <= 4) {
      CHECK(std::abs(got - cplx{0.0, -4 * pi}) < 1e-13);
      ++hits;
    } else {
      CHECK(got == cplx{});
    }
  }
  CHECK(hits == 5);
  CHECK(out.degree_part(1).coeffs().norm() == 0.0);

  FockVector c(b);
  c.set(ModeTuple{}, 3.0);
  CHECK(apply_Gplus(c, with_m(4)).coeffs().norm() == 0.0);
}

TEST_CASE("annihilation part on a single pair") {
  auto b = FockBasis::full({4, 2, 1});
  FockVector v(b);
  v.set(ModeTuple::from_modes({1, 1}), 1.0);
  FockVector out = apply_Gminus(v, with_m(2));
  CHECK(std::abs(out.at(ModeTuple::from_modes({2})) - cplx{0.0, -8 * pi}) < 1e-13);
  CHECK((out.coeffs() - Eigen::VectorXcd::Unit(static_cast<Eigen::Index>(b->size()),
                                               static_cast<Eigen::Index>(b->find(ModeTuple::from_modes({2})))) *
                            cplx{0.0, -8 * pi})
            .norm() < 1e-13);

  FockVector d1(b);
  d1.set(ModeTuple::from_modes({1}), 1.0);
  d1.set(ModeTuple::from_modes({-1}), 1.0);
  CHECK(apply_Gminus(d1, with_m(2)).coeffs().norm() == 0.0);
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  auto b = FockBasis::full({6, 3, 1});
  RngStream rng(2, "exec");
  FockVector v = random_vector(b, rng, 0, 3, false);
  auto p = with_m(5);
  CHECK(apply_Gplus(v, p, Exec::serial).coeffs() == apply_Gplus(v, p, Exec::parallel).coeffs());
  CHECK(apply_Gminus(v, p, Exec::serial).coeffs() == apply_Gminus(v, p, Exec::parallel).coeffs());
  SparseOp a = assemble_G(*b, p, GPart::both, Exec::serial);
  SparseOp c = assemble_G(*b, p, GPart::both, Exec::parallel);
  CHECK(a.nonZeros() == c.nonZeros());
  CHECK(Eigen::MatrixXcd(a - c).norm() == 0.0);
}

TEST_CASE("assembled matrix reproduces the pull kernels") {
  auto b = FockBasis::full({5, 3, 1});
  RngStream rng(3, "assemble");
  FockVector v = random_vector(b, rng, 0, 3, false);
  auto p = with_m(4);
  Generator gen(b, p);
  FockVector direct = apply_G(v, p);
  CHECK(max_rel(gen.apply_G(v), direct) < 1e-13);
  CHECK(max_rel(direct, apply_Gplus(v, p) + apply_Gminus(v, p)) < 1e-14);
  FockVector l = gen.apply_L(v);
  CHECK(max_rel(l, apply_L_theta(v, p) + direct) < 1e-13);
}

TEST_CASE("pull kernels match the dense unsymmetrized oracle") {
  Truncation tr{6, 3, 1};
  auto b = FockBasis::full(tr);
  auto p = with_m(3);
  RngStream rng(4, "dense-oracle");
  Eigen::MatrixXcd Ap = operator_matrix(OperatorTag::Gplus, tr, p);
  Eigen::MatrixXcd Am = operator_matrix(OperatorTag::Gminus, tr, p);
  Eigen::MatrixXcd A = operator_matrix(OperatorTag::G, tr, p);

  FockVector two = random_vector(b, rng, 2, 2, false);
  Eigen::VectorXcd ref = Ap * orthonormal(two);
  CHECK((ref - orthonormal(apply_Gplus(two, p))).norm() < 1e-12 * ref.norm());

  FockVector three = random_vector(b, rng, 3, 3, false);
  ref = Am * orthonormal(three);
  CHECK((ref - orthonormal(apply_Gminus(three, p))).norm() < 1e-12 * ref.norm());

  FockVector all = random_vector(b, rng, 0, 3, false);
  ref = A * orthonormal(all);
  CHECK((ref - orthonormal(apply_G(all, p))).norm() < 1e-12 * ref.norm());

  SUBCASE("adjointness and antisymmetry") {
    CHECK((Ap.adjoint() + Am).norm() < 1e-12 * Ap.norm());
    Eigen::MatrixXcd H = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    CHECK(es.eigenvalues().cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("Laplacian matrix is the real diagonal") {
    Eigen::MatrixXcd L = operator_matrix(OperatorTag::L0, tr, p);
    for (std::size_t i = 0; i < b->size(); ++i)
      CHECK(L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) == cplx{-b->laplacian(i)});
    CHECK((L - Eigen::MatrixXcd(L.diagonal().asDiagonal())).norm() == 0.0);
  }
}

TEST_CASE("adjointness on random kernel pairs") {
  for (int M : {4, 8}) {
    Truncation tr{M, M == 4 ? 4 : 3, 1};
    auto b = FockBasis::full(tr);
    RngStream rng(5, "adjoint", static_cast<uint64_t>(M));
    for (int m : {2, M}) {
      auto p = with_m(m);
      for (int n = 0; n + 1 <= tr.max_degree; ++n) {
        FockVector lo = random_vector(b, rng, n, n, false);
        FockVector hi = random_vector(b, rng, n + 1, n + 1, false);
        cplx lhs = inner_product(hi, apply_Gplus(lo, p));
        cplx rhs = -inner_product(apply_Gminus(hi, p), lo);
        if (n == 0) CHECK(std::abs(lhs) + std::abs(rhs) < 1e-12);
        else CHECK(rel_diff(lhs, rhs) < 1e-10);
      }
      // degree bookkeeping
      FockVector one = random_vector(b, rng, 2, 2, false);
      CHECK(apply_Gplus(one, p).top_degree() == 3);
      FockVector up = apply_Gplus(one, p);
      CHECK(up.degree_part(3).coeffs().norm() == doctest::Approx(up.coeffs().norm()));
      FockVector down = apply_Gminus(one, p);
      CHECK(down.degree_part(1).coeffs().norm() == doctest::Approx(down.coeffs().norm()));
    }
  }
}

TEST_CASE("drift is antisymmetric on real vectors") {
  auto b = FockBasis::full({5, 4, 1});
  RngStream rng(6, "dissipative");
  auto p = with_m(5);
  for (int trial = 0; trial < 5; ++trial) {
    FockVector v = random_vector(b, rng, 0, 4, true);
    cplx ip = inner_product(v, apply_G(v, p));
    CHECK(std::abs(ip.real()) < 1e-12 * inner_product(v, v).real() * 1e3);
  }
}

TEST_CASE("split into high and low parts") {
  auto b = FockBasis::full({10, 2, 1});
  RngStream rng(7, "split");
  FockVector v = random_vector(b, rng, 0, 2, false);
  auto p = with_m(10);
  FockVector g = apply_G(v, p);

  auto s = split_G(v, p, CutoffLaw::for_theta(1.0, 1.0));
  CHECK((s.high.coeffs() + s.low.coeffs() - g.coeffs()).cwiseAbs().maxCoeff() <=
        1e-14 * g.coeffs().cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < b->size(); ++i) {
    if (b->degree(i) != 1) continue;
    bool expect_high = b->tuple(i).max_abs() >= 8;
    auto ii = static_cast<Eigen::Index>(i);
    if (expect_high) CHECK(s.low.coeffs()[ii] == cplx{});
    else CHECK(s.high.coeffs()[ii] == cplx{});
  }

  auto huge = split_G(v, p, CutoffLaw::for_theta(1e6, 1.0));
  CHECK(huge.high.coeffs().norm() == 0.0);
  CHECK(huge.low.coeffs() == g.coeffs());

  CHECK_THROWS(CutoffLaw::for_theta(0.0, 1.0));
  CHECK(CutoffLaw::for_theta(1.0, 1.0).exponent == 3.0);
  CHECK(CutoffLaw::for_theta(1.0, 0.9).exponent == doctest::Approx(5.0));
}

TEST_CASE("dense split oracle") {
  Truncation tr{9, 2, 1};
  auto b = FockBasis::full(tr);
  auto p = with_m(9);
  auto law = CutoffLaw::for_theta(1.0, 1.0);
  RngStream rng(8, "split-oracle");
  FockVector v = random_vector(b, rng, 0, 2, false);
  Eigen::MatrixXcd H = operator_matrix(OperatorTag::Ghigh, tr, p, law);
  Eigen::MatrixXcd L = operator_matrix(OperatorTag::Glow, tr, p, law);
  auto s = split_G(v, p, law);
  CHECK((H * orthonormal(v) - orthonormal(s.high)).norm() < 1e-12 * (1 + H.norm()));
  CHECK((L * orthonormal(v) - orthonormal(s.low)).norm() < 1e-12 * L.norm());
  CHECK_THROWS(operator_matrix(OperatorTag::Ghigh, tr, p));
  CHECK_THROWS_AS(operator_matrix(OperatorTag::G, {12, 4, 1}, p), std::length_error);
}

TEST_CASE("Galerkin Burgers drift") {
  // pointwise squaring on a fine grid and spectral differentiation
  auto grid_drift = [](const SpectralField& u, int m) {
    const int P = 8 * u.radius() + 8;
    std::vector<double> val(static_cast<std::size_t>(P));
    for (int x = 0; x < P; ++x) {
      cplx s{};
      for (int k = -m; k <= m; ++k) s += u(k) * std::polar(1.0, 2 * pi * k * x / P);
      val[static_cast<std::size_t>(x)] = s.real() * s.real();
    }
    SpectralField b(u.radius());
    for (int k = -m; k <= m; ++k) {
      if (k == 0) continue;
      cplx c{};
      for (int x = 0; x < P; ++x) c += val[static_cast<std::size_t>(x)] * std::polar(1.0, -2 * pi * k * x / P);
      b.set(k, cplx{0.0, 2 * pi * k} * c / static_cast<double>(P));
    }
    return b;
  };

  SUBCASE("cosine") {
    SpectralField u(4);
    u.set(1, 0.5);
    auto b = burgers_drift(u, with_m(2));
    CHECK(std::abs(b(2) - cplx{0.0, pi}) < 1e-14);
    CHECK(std::abs(b(-2) - cplx{0.0, -pi}) < 1e-14);
    auto ref = grid_drift(u, 2);
    for (int k = -4; k <= 4; ++k) CHECK(std::abs(b(k) - ref(k)) < 1e-12);
  }
  SUBCASE("random fields") {
    RngStream rng(9, "drift");
    for (int m : {3, 6}) {
      SpectralField u = sample_white_noise(8, rng);
      auto b = burgers_drift(u, with_m(m));
      auto ref = grid_drift(u, m);
      for (int k = -8; k <= 8; ++k) CHECK(std::abs(b(k) - ref(k)) < 1e-10);
      for (int k = m + 1; k <= 8; ++k) CHECK(b(k) == cplx{});
      SpectralField um(8);
      for (int k = 1; k <= m; ++k) um.set(k, u(k));
      CHECK(drift_orthogonality(um, burgers_drift(um, with_m(m))) < 1e-13);
    }
  }
  SUBCASE("single top mode") {
    SpectralField u(6);
    u.set(3, cplx{0.2, 0.7});
    auto b = burgers_drift(u, with_m(3));
    for (int k = -6; k <= 6; ++k) CHECK(b(k) == cplx{});
  }
}

TEST_CASE("coupled systems") {
  SUBCASE("one species with unit coupling is the scalar operator") {
    GeneratorParams p = with_m(3);
    GeneratorParams q = with_m(3);
    q.coupling = Coupling(1, {1.0});
    auto b = FockBasis::full({4, 3, 1});
    RngStream rng(10, "reduction");
    FockVector v = random_vector(b, rng, 0, 3, false);
    CHECK(apply_G(v, p).coeffs() == apply_G(v, q).coeffs());
    SpectralField u = sample_white_noise(4, rng);
    auto a = burgers_drift(u, p), c = burgers_drift(u, q);
    for (int k = -4; k <= 4; ++k) CHECK(a(k) == c(k));
  }
  SUBCASE("trilinear guard") {
    GeneratorParams p;
    p.coupling = Coupling(2, {1, 0, 0, 0, 0, 0, 0, 1.5});
    CHECK_NOTHROW(p.validate());
    p.coupling = Coupling(2, {1, 1, 0, 0, 0, 0, 0, 1});
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("two species against the dense oracle") {
    RngStream rng(11, "coupled");
    GeneratorParams p = with_m(2);
    p.coupling = symmetric_coupling(2, rng);
    Truncation tr{2, 3, 2};
    auto b = FockBasis::full(tr);
    Eigen::MatrixXcd A = operator_matrix(OperatorTag::G, tr, p);
    Eigen::MatrixXcd Ap = operator_matrix(OperatorTag::Gplus, tr, p);
    Eigen::MatrixXcd Am = operator_matrix(OperatorTag::Gminus, tr, p);
    CHECK((Ap.adjoint() + Am).norm() < 1e-12 * Ap.norm());
    FockVector v = random_vector(b, rng, 0, 3, false);
    Eigen::VectorXcd ref = A * orthonormal(v);
    CHECK((ref - orthonormal(apply_G(v, p))).norm() < 1e-12 * ref.norm());

    SpectralField u(3, 2);
    for (int k = 1; k <= 2; ++k)
      for (int i = 0; i < 2; ++i) u.set(k, rng.complex_normal(), i);
    auto B = burgers_drift(u, p);
    CHECK(drift_orthogonality(u, B) < 1e-13);
    // direct convolution
    for (int i = 0; i < 2; ++i)
      for (int k = -2; k <= 2; ++k) {
        cplx s{};
        for (int q = -2; q <= 2; ++q) {
          int r = k - q;
          if (q == 0 || r == 0 || std::abs(r) > 2) continue;
          for (int j = 0; j < 2; ++j)
            for (int jp = 0; jp < 2; ++jp) s += p.coupling(i, j, jp) * u(q, j) * u(r, jp);
        }
        CHECK(std::abs(B(k, i) - cplx{0.0, 2 * pi * k} * s) < 1e-12);
      }
  }
}

TEST_CASE("convolution sum estimate") {
  auto r = sum_estimate_probe(1.0, 0.0, 10, 10, 10000);
  CHECK(r.ratio[0] == doctest::Approx(3.1405927034216274).epsilon(1e-12));
  CHECK(r.max_ratio < 4.0);
  auto wide = sum_estimate_probe(1.0, 0.0, 10, 10, 100000);
  CHECK(wide.ratio[0] == doctest::Approx(3.141492654089767).epsilon(1e-12));
  auto far = sum_estimate_probe(1.0, 0.0, 100, 100, 10000);
  CHECK(far.ratio[0] == doctest::Approx(3.1315929869364574).epsilon(1e-12));
  double q = r.ratio[0] / far.ratio[0];
  CHECK(q >= 0.5);
  CHECK(q <= 2.0);
  auto edge = sum_estimate_probe(0.6, 0.0, 10, 10, 10000);
  CHECK(edge.ratio[0] == doctest::Approx(6.92408479233972).epsilon(1e-12));
  CHECK_THROWS_AS(sum_estimate_probe(0.5, 0.0, 1, 2, 10), std::domain_error);
  CHECK_THROWS_AS(sum_estimate_probe(1.0, 0.0, 0, 2, 10), std::domain_error);
}

TEST_CASE("sector-wise norm matches the full dense SVD") {
  Truncation tr{5, 3, 1};
  auto p = with_m(5);
  Scaling left = [](const EntryInfo& e) { return std::pow(1.0 + e.degree, 0.5) / e.rate; };
  Scaling right = [](const EntryInfo& e) { return std::pow(1.0 + e.degree, 0.5); };
  for (GPart part : {GPart::plus, GPart::minus, GPart::both}) {
    double dense = scaled_G_norm_dense(tr, p, part, std::nullopt, left, right);
    ScaledNormOptions o;
    o.exec = Exec::serial;
    double sec = scaled_G_norm(tr, p, part, std::nullopt, left, right, o).value;
    CHECK(sec == doctest::Approx(dense).epsilon(1e-10));
    o.dense_limit = 0;
    double pow_it = scaled_G_norm(tr, p, part, std::nullopt, left, right, o).value;
    CHECK(pow_it == doctest::Approx(dense).epsilon(1e-6));
  }
  auto law = CutoffLaw{1.0, 1.0};
  double dense = scaled_G_norm_dense(tr, p, GPart::both, law, left, right);
  double sec = scaled_G_norm(tr, p, GPart::both, law, left, right).value;
  CHECK(dense > 0.0);
  CHECK(sec == doctest::Approx(dense).epsilon(1e-10));

  // unscaled norm in orthonormal coordinates against the power iteration
  Generator gen(FockBasis::full(tr), p);
  Scaling one = [](const EntryInfo&) { return 1.0; };
  double full = scaled_G_norm_dense(tr, p, GPart::both, std::nullopt, one, one);
  Eigen::MatrixXcd A = operator_matrix(OperatorTag::G, tr, p);
  // degree-0 columns are dropped by the scaled norm; they are zero columns of G anyway
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  CHECK(full == doctest::Approx(svd.singularValues()(0)).epsilon(1e-10));
  CHECK(gen.G_norm_estimate(500) == doctest::Approx(full).epsilon(1e-4));
}

TEST_CASE("uniform drift bounds on a fixed truncation") {
  Truncation tr{16, 2, 1};
  for (double gamma : {0.0, 0.25}) {
    for (const auto& w : {NumberWeight::constant(2), NumberWeight::power(2, 2.0)}) {
      std::vector<double> v;
      for (int m : {2, 4, 8, 16}) v.push_back(apriori_lowering_norm(tr, m, w, gamma));
      double hi = *std::max_element(v.begin(), v.end());
      double lo = *std::min_element(v.begin(), v.end());
      CHECK(hi / lo < 2.0);
    }
  }
  // near gamma = 1/4 the limit is approached slowly; the increments must shrink
  for (double gamma : {0.3, 0.5}) {
    std::vector<double> v;
    for (int m : {2, 4, 8, 16}) v.push_back(apriori_raising_norm(tr, m, NumberWeight::constant(2), gamma));
    CHECK(v[3] / v[0] < 2.5);
    CHECK(v[3] - v[2] < v[2] - v[1]);
    CHECK(v[2] - v[1] < v[1] - v[0]);
  }
  // with w = 1 the m-dependent norm is sqrt(m - 1)/2, so |G|/m^{1/2} stays below 1/2
  for (int m : {2, 4, 8, 16}) {
    double v = apriori_m_dependent_norm(tr, m, NumberWeight::constant(2));
    CHECK(v == doctest::Approx(std::sqrt(m - 1.0) / 2.0).epsilon(1e-9));
    CHECK(v / std::sqrt(m) <= 0.5);
  }
}

TEST_CASE("loglog slope") {
  CHECK(loglog_slope({1, 2, 4}, {3, 6, 12}) == doctest::Approx(1.0));
  CHECK(loglog_slope({1, 4, 16}, {1, 0.5, 0.25}) == doctest::Approx(-0.5));
  CHECK_THROWS(loglog_slope({1}, {1}));
}
