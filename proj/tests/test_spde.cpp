#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>

#include "sburgers/controlled.hpp"
#include "sburgers/spde_sim.hpp"
#include "support.hpp"

using namespace sburgers;
using testsupport::random_vector;

namespace {

constexpr double kPi = std::numbers::pi;

GeneratorParams with_m(int m, double coupling = 1.0) {
  GeneratorParams p;
  p.m = m;
  p.coupling = Coupling(1, {coupling});
  return p;
}

SimConfig config(double dt, double T, int radius = 0) {
  SimConfig c;
  c.dt = dt;
  c.T = T;
  c.radius = radius;
  return c;
}

// u(f) for f = sin(2 pi k x)
FockVector sine_observable(int radius, int k) {
  FockVector f(FockBasis::full({radius, 1, 1}));
  f.set(ModeTuple::from_modes({k}), cplx(0.0, -0.5));
  f.set(ModeTuple::from_modes({-k}), cplx(0.0, 0.5));
  return f;
}

std::vector<double> uniform_partition(int cells, double width) {
  std::vector<double> p;
  for (int i = 0; i <= cells; ++i) p.push_back(i * width);
  return p;
}

bool same_field(const SpectralField& a, const SpectralField& b) {
  for (int i = 0; i < a.species(); ++i)
    for (int k = -a.radius(); k <= a.radius(); ++k)
      if (k != 0 && a(k, i) != b(k, i)) return false;
  return true;
}

}  // namespace

TEST_CASE("noise and drift off give exact heat decay") {
  SimConfig c = config(1e-3, 0.01, 6);
  c.noise = false;
  c.drift = false;
  RngStream rng(1, "heat");
  SpectralField u0 = sample_white_noise(6, rng);
  auto tr = simulate(u0, with_m(6), c, rng);
  CHECK(tr.steps == 10);
  CHECK(tr.snapshots.size() == 2);
  for (int k = 1; k <= 6; ++k) {
    cplx expect = u0(k) * std::exp(-4.0 * kPi * kPi * k * k * 0.01);
    CHECK(std::abs(tr.snapshots.back()(k) - expect) <= 1e-13 * std::abs(u0(k)));
  }
  CHECK(tr.snapshots.back().conjugate_defect() == 0.0);
}

TEST_CASE("stepper conventions") {
  CHECK(stationary_hm1_rms(1) == doctest::Approx(std::sqrt(2.0) / (2 * kPi)));
  CHECK(parse_noise_scheme("euler-maruyama") == NoiseScheme::euler_maruyama);
  CHECK(noise_scheme_name(NoiseScheme::exact_ou) == "exact-ou");
  CHECK_THROWS(parse_noise_scheme("milstein"));
  CHECK_THROWS_AS(SpdeStepper(with_m(8), config(1e-3, 1.0, 4)), std::invalid_argument);
  CHECK_THROWS_AS(SpdeStepper(with_m(4), config(0.0, 1.0)), std::domain_error);
  SimConfig c = config(1e-3, 0.02);
  c.stride = 5;
  RngStream rng(2, "stride");
  auto tr = simulate(sample_white_noise(4, rng), with_m(4), c, rng);
  CHECK(tr.times.size() == 5);
  CHECK(tr.times[2] == doctest::Approx(0.01));
  for (const auto& s : tr.snapshots) CHECK(s.conjugate_defect() == 0.0);
}

TEST_CASE("OU stationarity without drift") {
  SimConfig c = config(1e-3, 0.1, 8);
  c.drift = false;
  auto b = run_batch(with_m(8), c, 4000, 3, Exec::parallel);
  auto r = invariance_test(b);
  CHECK(r.t == doctest::Approx(0.1));
  CHECK(r.max_var_z <= 3.0);
  CHECK(r.max_fourth_z <= 3.5);
  CHECK(r.chi2 <= r.dof + 4.0 * std::sqrt(2.0 * r.dof));
}

TEST_CASE("Euler-Maruyama one-step variance") {
  // from a stationary start E|u+(k)|^2 = e^{-2 r dt} + 2 r dt
  SimConfig c = config(2e-3, 2e-3, 4);
  c.drift = false;
  c.scheme = NoiseScheme::euler_maruyama;
  auto b = run_batch(with_m(4), c, 20000, 4, Exec::parallel);
  auto r = invariance_test(b);
  for (const auto& m : r.modes) {
    double rate = 4 * kPi * kPi * m.k * m.k;
    double expect = std::exp(-2 * rate * c.dt) + 2 * rate * c.dt;
    CHECK(std::abs(m.var - expect) <= 3.5 * m.var_se);
  }
  CHECK(r.modes.back().var > 1.05);
}

TEST_CASE("white noise is invariant for the Galerkin dynamics") {
  auto b = run_batch(with_m(8), config(1e-4, 0.05), 3000, 5, Exec::parallel);
  auto r = invariance_test(b);
  CHECK(r.blown_up == 0);
  CHECK(r.max_orthogonality <= 1e-12);
  CHECK(r.max_var_z <= 3.5);
  CHECK(r.max_mean_z <= 4.0);
  CHECK(r.max_fourth_z <= 4.0);
  CHECK(r.max_cross_z <= 4.0);
  CHECK(r.chi2 <= r.dof + 4.0 * std::sqrt(2.0 * r.dof));
  CHECK(r.cross.size() == 16);
  for (const auto& x : r.cross) CHECK(x.j + x.k > 0);
}

TEST_CASE("ensembles are deterministic and thread independent") {
  SimConfig c = config(1e-4, 0.005);
  c.stride = 10;
  auto a = run_batch(with_m(6), c, 40, 6, Exec::serial);
  auto b = run_batch(with_m(6), c, 40, 6, Exec::parallel);
  auto other = run_batch(with_m(6), c, 40, 7, Exec::serial);
  REQUIRE(a.paths.size() == b.paths.size());
  for (std::size_t i = 0; i < a.paths.size(); ++i) {
    REQUIRE(a.paths[i].snapshots.size() == b.paths[i].snapshots.size());
    for (std::size_t j = 0; j < a.paths[i].snapshots.size(); ++j)
      CHECK(same_field(a.paths[i].snapshots[j], b.paths[i].snapshots[j]));
  }
  CHECK_FALSE(same_field(a.paths[0].snapshots.back(), other.paths[0].snapshots.back()));
  auto ra = invariance_test(a), rb = invariance_test(b);
  CHECK(ra.chi2 == rb.chi2);
  CHECK(tree_reduce(std::vector<int>{1, 2, 3, 4, 5}, [](int x, int y) { return x + y; }) == 15);
}

TEST_CASE("blow-up is flagged") {
  auto b = run_batch(with_m(16), config(1e-3, 0.5), 20, 8, Exec::serial);
  CHECK(b.blown_up() > 0);
  for (const auto& p : b.paths)
    if (p.blown_up) {
      CHECK(p.blowup_time > 0.0);
      CHECK(p.blowup_time < 0.5);
      CHECK(p.snapshots.back().h_minus1_sq() > std::pow(1e3 * stationary_hm1_rms(16), 2));
    }
}

TEST_CASE("multi-component reductions") {
  SimConfig c = config(1e-4, 0.01, 6);
  SimConfig g = c;
  g.general_kernels = true;
  RngStream r1(9, "reduce"), r2(9, "reduce");
  SpectralField u0 = sample_white_noise(6, r1);
  sample_white_noise(6, r2);
  auto a = simulate(u0, with_m(6), c, r1);
  auto b = simulate(u0, with_m(6), g, r2);
  CHECK(same_field(a.snapshots.back(), b.snapshots.back()));

  SUBCASE("two species with a symmetric tensor") {
    RngStream rng(10, "tensor");
    std::vector<double> v(8);
    // fully symmetric: value depends on the multiset of indices
    double by_count[4];
    for (double& x : by_count) x = rng.normal();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) v[static_cast<std::size_t>((i * 2 + j) * 2 + k)] = by_count[i + j + k];
    GeneratorParams p = with_m(6);
    p.coupling = Coupling(2, v);
    auto batch = run_batch(p, c, 20, 11, Exec::parallel);
    CHECK(batch.blown_up() == 0);
    CHECK(batch.max_orthogonality() <= 1e-12);
    CHECK(batch.paths[0].snapshots.back().species() == 2);
    v[1] += 0.5;
    p.coupling = Coupling(2, v);
    CHECK_THROWS_AS(run_batch(p, c, 1, 11), std::invalid_argument);
  }
}

TEST_CASE("Galerkin generator on linear observables") {
  // L u(f) = u(f'') + <B(u), f> for the simulated drift
  auto p = with_m(5);
  RngStream rng(12, "linear");
  FockVector f = random_vector(FockBasis::full({7, 1, 1}), rng, 1, 1, true);
  FockVector Lf = galerkin_generator(f, p);
  CHECK(Lf.basis().truncation().max_degree == 2);
  Observable of(f), oL(Lf);
  for (int trial = 0; trial < 5; ++trial) {
    SpectralField u = sample_white_noise(7, rng);
    SpectralField rhs = burgers_drift(u, p);
    for (int k = 1; k <= 7; ++k) rhs.set(k, rhs(k) - kTwoPi * kTwoPi * k * k * u(k));
    CHECK(oL(u) == doctest::Approx(of(rhs)).epsilon(1e-12));
  }
  FockVector small(FockBasis::full({3, 1, 1}));
  CHECK_THROWS_AS(extend_to(Lf, small.basis_ptr()), std::invalid_argument);
}

TEST_CASE("martingale property and its negative control") {
  const int m = 8;
  auto sim = with_m(m);
  FockVector phi = sine_observable(m, 1);
  FockVector Gphi = apply_G(extend_to(phi, FockBasis::full({m, 2, 1})), sim);
  Observable f(phi), g(Gphi);
  const double gn = norm(Gphi);
  std::vector<Conditioner> G{{"one", [](const SpectralField&) { return 1.0; }},
                             {"phi", [&](const SpectralField& u) { return f(u); }},
                             {"drift", [&](const SpectralField& u) { return g(u) / gn; }}};
  auto part = uniform_partition(8, 0.002);
  SimConfig c = config(1e-4, 0.0, m);

  auto ok = martingale_test(phi, galerkin_generator(phi, sim), sim, c, part, G, 20000, 13);
  CHECK(ok.cells.size() == 24);
  CHECK(ok.blown_up == 0);
  CHECK(ok.max_abs_z <= 4.0);
  // QV of M^f is 2 t |f'|^2 = 4 pi^2 t
  CHECK(ok.qv.back().target == doctest::Approx(4 * kPi * kPi * 0.016));
  CHECK(ok.max_qv_rel_error <= 0.05);

  auto wrong = martingale_test(phi, galerkin_generator(phi, with_m(2)), sim, c, part, G, 20000, 13);
  CHECK(wrong.max_abs_z > 4.0);

  CHECK_THROWS_AS(martingale_test(phi, phi, sim, c, {0.0, 0.00015}, G, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(martingale_test(phi, phi, sim, c, {0.0}, G, 1, 1), std::invalid_argument);
}

TEST_CASE("martingale property for a controlled observable") {
  const int m = 8;
  auto sim = with_m(m);
  auto b2 = FockBasis::full({m, 2, 1});
  RngStream rng(14, "controlled-mp");
  FockVector sharp = random_vector(b2, rng, 1, 2, true, 1.0);
  Generator gen(b2, sim);
  ControlledOptions o;
  o.weight = NumberWeight::constant(2);
  auto pair = solve_controlled(gen, sharp, CutoffLaw::for_theta(1.0, 1.0), o);
  Observable f(pair.phi);
  std::vector<Conditioner> G{{"one", [](const SpectralField&) { return 1.0; }},
                             {"phi", [&](const SpectralField& u) { return f(u) - f.constant(); }}};
  auto r = martingale_test(pair.phi, galerkin_generator(pair.phi, sim), sim, config(1e-4, 0.0, m),
                           uniform_partition(8, 0.002), G, 5000, 15);
  CHECK(r.max_abs_z <= 4.0);
  CHECK(r.max_qv_rel_error <= 0.05);
}

TEST_CASE("quadratic variation") {
  auto p = with_m(4);
  SimConfig c = config(1e-4, 0.0, 4);
  auto part = uniform_partition(4, 0.005);
  auto qv = qv_estimate(sine_observable(4, 2), p, c, part, 4000, 16);
  REQUIRE(qv.size() == 5);
  CHECK(qv.front().realized == 0.0);
  for (std::size_t i = 1; i < qv.size(); ++i) {
    CHECK(qv[i].target == doctest::Approx(16 * kPi * kPi * qv[i].t));
    CHECK(std::abs(qv[i].realized / qv[i].target - 1.0) <= 0.05);
  }
  FockVector constant(FockBasis::full({4, 1, 1}));
  constant.set(ModeTuple{}, 3.0);
  for (const auto& q : qv_estimate(constant, p, c, part, 10, 16)) {
    CHECK(q.realized == 0.0);
    CHECK(q.target == 0.0);
  }
  FockVector quadratic(FockBasis::full({4, 2, 1}));
  quadratic.set(ModeTuple::from_modes({-1, 1}), 1.0);
  CHECK_THROWS_AS(qv_estimate(quadratic, p, c, part, 1, 1), std::invalid_argument);
}

TEST_CASE("energy identity") {
  auto w1 = NumberWeight::constant(kMaxDegree);
  FockVector one(FockBasis::full({3, 1, 1}));
  one.set(ModeTuple::from_modes({1}), 1.0);
  auto e = energy_identity_check(one, w1);
  CHECK(e.lhs == doctest::Approx(std::sqrt(2.0) * 2 * kPi).epsilon(1e-14));
  CHECK(e.rhs == doctest::Approx(std::sqrt(2.0) * 2 * kPi).epsilon(1e-14));

  std::vector<double> lin;
  for (int n = 0; n <= kMaxDegree + 1; ++n) lin.push_back(1.0 + n);
  NumberWeight w(lin);
  for (const Truncation& tr : {Truncation{5, 3, 1}, Truncation{3, 4, 2}}) {
    RngStream rng(17, "energy");
    auto b = FockBasis::full(tr);
    for (int trial = 0; trial < 10; ++trial) {
      FockVector phi = random_vector(b, rng, 0, tr.max_degree, false);
      auto r = energy_identity_check(phi, w);
      CHECK(r.lhs > 0.0);
      CHECK(std::abs(r.lhs - r.rhs) <= 1e-10 * r.rhs);
    }
  }
}

TEST_CASE("Ito trick scaling") {
  auto p = with_m(4);
  auto b = FockBasis::full({4, 2, 1});
  FockVector phi(b);
  phi.set(ModeTuple::from_modes({-1, 1}), 1.0);
  phi.set(ModeTuple::from_modes({-1, 2}), 0.3);
  phi.set(ModeTuple::from_modes({-2, 1}), 0.3);
  SimConfig c = config(5e-4, 0.0);
  auto r = ito_trick_probe(phi, 2.0, {0.5, 1.0, 2.0}, p, c, 600, 18);
  CHECK(r.blown_up == 0);
  CHECK(std::is_sorted(r.moment.begin(), r.moment.end()));
  CHECK(r.slope <= 1.2);
  CHECK(r.slope >= 0.8);
  FockVector constant(b);
  constant.set(ModeTuple{}, 2.0);
  auto neg = ito_trick_probe(constant, 4.0, {0.5, 1.0, 2.0}, p, c, 4, 18);
  CHECK(neg.slope == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(neg.moment.back() == doctest::Approx(256.0).epsilon(1e-9));
  CHECK_THROWS_AS(ito_trick_probe(phi, 2.0, {0.0, 1.0}, p, c, 1, 1), std::invalid_argument);
}

TEST_CASE("hypercontractivity") {
  RngStream rng(19, "hyper");
  auto b = FockBasis::full({4, 2, 1});
  FockVector phi = random_vector(b, rng, 2, 2, true);
  auto r2 = hypercontractivity_check(phi, 2.0, 40000, 20);
  CHECK(r2.bound == doctest::Approx(std::pow(norm(phi), 2)).epsilon(1e-12));
  CHECK(std::abs(r2.estimate - r2.bound) <= 3.0 * r2.se);
  auto r4 = hypercontractivity_check(phi, 4.0, 40000, 21);
  CHECK(r4.within());
  CHECK(r4.estimate < r4.bound);

  FockVector lin = random_vector(b, rng, 1, 1, true);
  auto g4 = hypercontractivity_check(lin, 4.0, 40000, 22);
  const double n4 = std::pow(norm(lin), 4);
  CHECK(g4.bound == doctest::Approx(9.0 * n4).epsilon(1e-12));
  CHECK(std::abs(g4.estimate - 3.0 * n4) <= 3.5 * g4.se);
  auto ser = hypercontractivity_check(lin, 4.0, 3000, 22, Exec::serial);
  auto par = hypercontractivity_check(lin, 4.0, 3000, 22, Exec::parallel);
  CHECK(ser.estimate == par.estimate);
  CHECK_THROWS_AS(hypercontractivity_check(lin, 1.5, 10, 1), std::domain_error);
}

TEST_CASE("duality with the backward equation") {
  auto p = with_m(4);
  auto b = FockBasis::full({4, 3, 1});
  Generator gen(b, p);
  FockVector phi(b);
  phi.set(ModeTuple::from_modes({1}), 1.0);
  phi.set(ModeTuple::from_modes({-1}), 1.0);
  phi.set(ModeTuple::from_modes({-2, 1}), cplx(0.0, 0.5));
  phi.set(ModeTuple::from_modes({-1, 2}), cplx(0.0, -0.5));
  // a signed density: eta = 1 + degree-1 and degree-2 perturbations
  FockVector eta(b);
  eta.set(ModeTuple{}, 1.0);
  eta.set(ModeTuple::from_modes({1}), 0.4);
  eta.set(ModeTuple::from_modes({-1}), 0.4);
  eta.set(ModeTuple::from_modes({-1, 2}), 0.3);
  eta.set(ModeTuple::from_modes({-2, 1}), 0.3);
  BackwardOptions o;
  o.dt = 1e-4;
  o.stride = 50;
  auto traj = solve_backward(gen, phi, 0.05, o);
  auto r = duality_check(traj, eta, config(1e-4, 0.0), 20000, 23);
  CHECK(r.rows.size() == 11);
  CHECK(r.target == doctest::Approx(inner_product(traj.states.back(), eta).real()));
  CHECK(r.max_abs_z <= 3.0);
  CHECK_THROWS_AS(duality_check(traj, eta, config(3e-4, 0.0), 1, 1), std::invalid_argument);

  SUBCASE("reweighted batches") {
    auto batch = run_batch(p, config(1e-4, 0.001, 4), 10, 24, Exec::serial, &eta);
    CHECK(batch.weights.size() == 10);
    CHECK(batch.density.has_value());
    CHECK_THROWS_AS(invariance_test(batch), std::invalid_argument);
  }
}

TEST_CASE("switch of the starting measure") {
  auto p = with_m(4);
  auto b = FockBasis::full({4, 2, 1});
  FockVector eta(b);
  eta.set(ModeTuple{}, 1.0);
  eta.set(ModeTuple::from_modes({1}), 0.4);
  eta.set(ModeTuple::from_modes({-1}), 0.4);
  eta.set(ModeTuple::from_modes({-1, 2}), 0.3);
  eta.set(ModeTuple::from_modes({-2, 1}), 0.3);
  const Observable density(eta);
  auto batch = run_batch(p, config(1e-4, 0.05), 4000, 26, Exec::parallel, &eta);

  // Psi = eta(u_0) is the equality case of Cauchy-Schwarz
  auto eq = switch_measure_check(batch, [&](const Trajectory& t) { return density(t.snapshots.front()); });
  CHECK(eq.eta_norm == doctest::Approx(norm(eta)).epsilon(1e-15));
  CHECK(std::abs(eq.weighted - eq.bound) <= 4.0 * std::hypot(eq.weighted_se, eq.bound_se));

  auto one = switch_measure_check(batch, [](const Trajectory&) { return 1.0; });
  CHECK(one.bound == doctest::Approx(norm(eta)).epsilon(1e-15));
  CHECK(one.bound_se == 0.0);
  CHECK(std::abs(one.weighted - 1.0) <= 4.0 * one.weighted_se);
  CHECK(one.holds());

  auto energy = switch_measure_check(batch, [](const Trajectory& t) {
    const double e = std::norm(t.snapshots.back()(1)) + std::norm(t.snapshots.back()(2));
    return e * e;
  });
  CHECK(energy.holds());
  CHECK(energy.weighted < energy.bound);

  auto plain = run_batch(p, config(1e-4, 0.01), 4, 26, Exec::serial);
  CHECK_THROWS_AS(switch_measure_check(plain, [](const Trajectory&) { return 1.0; }), std::invalid_argument);
}

TEST_CASE("csv outputs") {
  auto dir = std::filesystem::temp_directory_path() / "sburgers_spde_csv";
  std::filesystem::create_directories(dir);
  auto batch = run_batch(with_m(3), config(1e-3, 0.002), 5, 25, Exec::serial);
  write_invariance_csv(invariance_test(batch), (dir / "invariance.csv").string());
  MartingaleReport mr;
  mr.cells.push_back({0.0, 0.1, 0, 0.5, 0.25, 2.0});
  mr.qv.push_back({0.1, 0.4, 0.39});
  write_martingale_csv(mr, (dir / "martingale.csv").string());
  write_qv_csv(mr.qv, (dir / "qv.csv").string());
  auto head = [&](const char* name) {
    std::ifstream in(dir / name);
    std::string line;
    std::getline(in, line);
    return line;
  };
  CHECK(head("invariance.csv") == "k,mean_re,mean_im,var,se");
  CHECK(head("martingale.csv") == "s,t,G_id,estimate,se,z");
  CHECK(head("qv.csv") == "t,realized,target");
  std::filesystem::remove_all(dir);
}
