// Experiment driver: runs verification suites and writes CSV artifacts plus manifest.json.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sburgers/suites.hpp"

namespace {

using namespace sburgers;
using nlohmann::json;

enum Exit { kPass = 0, kContractFail = 1, kUsage = 2, kRange = 3, kUnwritable = 4, kRuntime = 5 };

constexpr int kSchemaVersion = 1;

const std::map<std::string, std::vector<std::string>>& csv_schemas() {
  static const std::map<std::string, std::vector<std::string>> s{
      {"decay.csv", {"t", "norm", "bound"}},
      {"decay_control.csv", {"t", "norm", "bound"}},
      {"apriori.csv", {"t", "alpha", "lhs1", "rhs1", "lhs2", "rhs2", "fitted_C"}},
      {"invariance.csv", {"k", "mean_re", "mean_im", "var", "se"}},
      {"martingale.csv", {"s", "t", "G_id", "estimate", "se", "z"}},
      {"martingale_controlled.csv", {"s", "t", "G_id", "estimate", "se", "z"}},
      {"martingale_wrong_m.csv", {"s", "t", "G_id", "estimate", "se", "z"}},
      {"qv.csv", {"t", "realized", "target"}},
      {"contraction_sweep.csv", {"param", "value"}},
      {"density_error_sweep.csv", {"param", "value"}},
      {"density_generator_sweep.csv", {"param", "value"}},
      {"ito_trick.csv", {"p", "T", "moment", "se"}},
  };
  return s;
}

struct RangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int M = 8, Nmax = 3, m = 8, d = 1;
  double theta = 1.0, L = 1.0, gamma = 0.5, alpha = 2.0;
  double dt = 1e-4, T = 0.5;
  std::size_t paths = 10000;
  uint64_t seed = 7;
  std::string scheme = "exponential-euler";
  std::string noise = "exact-ou";
  std::string out;
  int threads = 0;
  bool serial = false;
  Tolerances tol;
};

class Driver {
 public:
  Driver() : app_("Spectral numerics for the Fock-space stochastic Burgers generator", "sburgers") {
    app_.set_config("--config", "", "flat key = value file; command-line flags take precedence");
    app_.set_version_flag("--version", std::string(SBURGERS_VERSION));
    app_.require_subcommand(0, 1);
    app_.fallthrough();

    add("--M", c_.M, "mode radius of the Fock truncation");
    add("--Nmax", c_.Nmax, "largest chaos degree");
    add("--m", c_.m, "Galerkin cutoff of the drift (0 switches it off)");
    add("--d", c_.d, "number of species");
    add("--theta", c_.theta, "fractional exponent, in (3/4, 1]");
    add("--L", c_.L, "cutoff constant of the high region");
    add("--gamma", c_.gamma, "regularity index of the controlled norm, in (1/4, 1/2]");
    add("--alpha", c_.alpha, "number-operator weight exponent of the a priori bounds");
    add("--dt", c_.dt, "time step");
    add("--T", c_.T, "final time");
    add("--paths", c_.paths, "Monte Carlo trajectories");
    add("--seed", c_.seed, "master seed");
    add("--scheme", c_.scheme, "backward scheme: exponential-euler or exponential-midpoint");
    add("--noise", c_.noise, "SPDE noise scheme: exact-ou or euler-maruyama");
    add("--out", c_.out, "output directory (default $SBURGERS_OUT_DIR, else ./out)");
    add("--threads", c_.threads, "OpenMP threads (0 keeps the runtime default)");
    app_.add_flag("--serial", c_.serial, "use the serial reference kernels");

    add("--tol-adjoint", c_.tol.adjoint, "");
    add("--tol-dissipative", c_.tol.dissipative, "");
    add("--tol-energy", c_.tol.energy, "");
    add("--tol-ergodic-rel", c_.tol.ergodic_rel, "");
    add("--tol-heat-rel", c_.tol.heat_rel, "");
    add("--tol-slope", c_.tol.slope, "");
    add("--tol-picard-slack", c_.tol.picard_slack, "");
    add("--tol-growth-slope", c_.tol.growth_slope, "");
    add("--tol-variance-se", c_.tol.variance_se, "");
    add("--tol-orthogonality", c_.tol.orthogonality, "");
    add("--tol-z-max", c_.tol.z_max, "");
    add("--tol-qv-rel", c_.tol.qv_rel, "");
    add("--tol-ito-slack", c_.tol.ito_slack, "");
    add("--tol-hyper-se", c_.tol.hyper_se, "");

    sub("verify-operators", "adjointness, dissipativity and energy identity", [this] { return verify_operators(); });
    sub("controlled", "contraction factor and density construction sweeps", [this] { return controlled(); });
    sub("backward", "backward solve with a priori bounds and remainder dynamics", [this] { return backward(); });
    sub("ergodicity", "decay rate of the backward solution against e^{-4 pi^2 t}", [this] { return ergodicity(); });
    sub("simulate", "white-noise invariance, hypercontractivity and reductions", [this] { return simulate(); });
    sub("martingale", "Dynkin martingale z-scores and quadratic variation", [this] { return martingale(); });
    sub("ito-trick", "T-scaling of additive functionals", [this] { return ito_trick(); });
    sub("report", "every acceptance criterion at its reference parameters", [this] { return report(); });
  }

  int run(int argc, char** argv) {
    int code = kPass;
    try {
      app_.parse(argc, argv);
    } catch (const CLI::Success& e) {
      return app_.exit(e);
    } catch (const CLI::ParseError& e) {
      app_.exit(e);
      reason_ = e.what();
      return finish(kUsage);
    }
    try {
      validate();
    } catch (const RangeError& e) {
      reason_ = e.what();
      return finish(kRange);
    }
    if (!command_) {
      std::cerr << app_.help();
      reason_ = "no subcommand";
      return finish(kUsage);
    }
    if (!prepare_out()) return kUnwritable;
    if (c_.threads > 0) omp_set_num_threads(c_.threads);

    const auto t0 = std::chrono::steady_clock::now();
    try {
      results_ = command_();
      code = kPass;
      for (const auto& r : results_)
        if (!r.pass) {
          code = kContractFail;
          reason_ += (reason_.empty() ? "" : "; ") + r.name + ": " + r.detail;
        }
    } catch (const std::invalid_argument& e) {
      reason_ = e.what();
      code = kRange;
    } catch (const std::exception& e) {
      reason_ = e.what();
      code = kRuntime;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& r : results_) std::printf("%s %-20s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    if (code >= kRange) std::fprintf(stderr, "error: %s\n", reason_.c_str());
    std::printf("%s in %.1f s, outputs in %s\n", code == kPass ? "pass" : "fail", secs, out_.c_str());
    return finish(code);
  }

 private:
  template <class T>
  void add(const std::string& name, T& target, const std::string& help) {
    options_[name] = app_.add_option(name, target, help)->capture_default_str();
  }

  void sub(const std::string& name, const std::string& help, std::function<std::vector<SuiteResult>()> f) {
    auto* s = app_.add_subcommand(name, help);
    s->callback([this, name, f] {
      subcommand_ = name;
      command_ = f;
    });
  }

  bool given(const std::string& name) const { return options_.at(name)->count() > 0; }

  template <class T, class U>
  void take(const std::string& name, T& dst, const U& src) const {
    if (given(name)) dst = static_cast<T>(src);
  }

  Exec exec() const { return c_.serial ? Exec::serial : Exec::parallel; }

  void validate() const {
    if (!(c_.theta > 0.75 && c_.theta <= 1.0)) throw RangeError("theta must lie in (3/4, 1]");
    if (given("--gamma") && !(c_.gamma > 0.25 && c_.gamma <= 0.5)) throw RangeError("gamma must lie in (1/4, 1/2]");
    if (c_.M < 1) throw RangeError("M must be positive");
    if (c_.Nmax < 1 || c_.Nmax > kMaxDegree - 1) throw RangeError("Nmax must lie in [1, " + std::to_string(kMaxDegree - 1) + "]");
    if (c_.m < 0) throw RangeError("m must be nonnegative");
    if (c_.d < 1) throw RangeError("d must be positive");
    if (!(c_.L > 0.0)) throw RangeError("L must be positive");
    if (!(c_.dt > 0.0)) throw RangeError("dt must be positive");
    if (!(c_.T > 0.0)) throw RangeError("T must be positive");
    if (c_.paths < 2) throw RangeError("paths must be at least 2");
    if (c_.threads < 0) throw RangeError("threads must be nonnegative");
    try {
      parse_scheme(c_.scheme);
      parse_noise_scheme(c_.noise);
    } catch (const std::exception& e) {
      throw RangeError(e.what());
    }
  }

  std::string resolve_out() const {
    if (!c_.out.empty()) return c_.out;
    if (const char* env = std::getenv("SBURGERS_OUT_DIR"); env && *env) return env;
    return "out";
  }

  bool prepare_out() {
    out_ = resolve_out();
    std::error_code ec;
    std::filesystem::create_directories(out_, ec);
    const auto probe = std::filesystem::path(out_) / ".write_probe";
    std::ofstream f(probe);
    if (ec || !f) {
      std::fprintf(stderr, "error: output directory %s is not writable\n", out_.c_str());
      return false;
    }
    f.close();
    std::filesystem::remove(probe, ec);
    return true;
  }

  json parameters() const {
    json p;
    for (const auto& [name, opt] : options_) {
      auto v = opt->results();
      p[name.substr(2)] = v.empty() ? opt->get_default_str() : v.back();
    }
    p["serial"] = c_.serial;
    return p;
  }

  int finish(int code) {
    if (out_.empty()) {
      out_ = resolve_out();
      std::error_code ec;
      std::filesystem::create_directories(out_, ec);
    }
    json m;
    m["schema_version"] = kSchemaVersion;
    m["version"] = SBURGERS_VERSION;
    m["subcommand"] = subcommand_;
    m["parameters"] = parameters();
    m["seed"] = c_.seed;
    json schemas = json::object();
    for (const auto& [file, cols] : csv_schemas())
      if (std::filesystem::exists(std::filesystem::path(out_) / file)) schemas[file] = cols;
    m["csv_schemas"] = schemas;
    json results = json::array();
    for (const auto& r : results_) {
      json metrics = json::object();
      for (const auto& [k, v] : r.metrics) metrics[k] = v;
      results.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"metrics", metrics}});
    }
    m["results"] = results;
    m["status"] = code == kPass ? "pass" : (code == kContractFail ? "fail" : "error");
    m["exit_code"] = code;
    m["failure_reason"] = reason_;
    std::ofstream f(std::filesystem::path(out_) / "manifest.json");
    if (!f) {
      std::fprintf(stderr, "error: cannot write manifest.json to %s\n", out_.c_str());
      return code == kPass ? kUnwritable : code;
    }
    f << m.dump(2) << '\n';
    return code;
  }

  std::vector<SuiteResult> verify_operators() {
    OperatorSuiteConfig a;
    take("--M", a.M, c_.M);
    take("--Nmax", a.Nmax, c_.Nmax);
    if (given("--m")) a.ms = {c_.m};
    take("--seed", a.seed, c_.seed);
    DissipativityConfig b;
    take("--M", b.M, c_.M);
    take("--Nmax", b.Nmax, c_.Nmax);
    take("--m", b.m, c_.m);
    take("--L", b.L, c_.L);
    take("--gamma", b.gamma, c_.gamma);
    take("--seed", b.seed, c_.seed);
    EnergyConfig e;
    take("--M", e.M, c_.M);
    take("--Nmax", e.Nmax, c_.Nmax);
    take("--d", e.species, c_.d);
    take("--seed", e.seed, c_.seed);
    return {adjointness_suite(a, c_.tol), dissipativity_suite(b, c_.tol), energy_identity_suite(e, c_.tol)};
  }

  std::vector<SuiteResult> controlled() {
    ContractionConfig a;
    take("--M", a.M, c_.M);
    take("--Nmax", a.Nmax, c_.Nmax);
    take("--m", a.m, c_.m);
    take("--gamma", a.gamma, c_.gamma);
    take("--theta", a.theta, c_.theta);
    take("--seed", a.seed, c_.seed);
    DensityConfig b;
    take("--M", b.M, c_.M);
    take("--Nmax", b.Nmax, c_.Nmax);
    take("--m", b.m, c_.m);
    take("--L", b.L, c_.L);
    return {contraction_suite(a, c_.tol, out_), density_suite(b, c_.tol, out_)};
  }

  std::vector<SuiteResult> backward() {
    BackwardSuiteConfig a;
    take("--M", a.M, c_.M);
    take("--Nmax", a.Nmax, c_.Nmax);
    take("--m", a.m, c_.m);
    take("--dt", a.dt, c_.dt);
    take("--T", a.T, c_.T);
    take("--L", a.L, c_.L);
    take("--seed", a.seed, c_.seed);
    if (given("--alpha")) a.alphas = {c_.alpha};
    a.scheme = parse_scheme(c_.scheme);
    return {backward_suite(a, c_.tol, out_)};
  }

  std::vector<SuiteResult> ergodicity() {
    ErgodicConfig a;
    take("--M", a.M, c_.M);
    take("--Nmax", a.Nmax, c_.Nmax);
    take("--m", a.m, c_.m);
    take("--dt", a.dt, c_.dt);
    take("--T", a.T, c_.T);
    take("--seed", a.seed, c_.seed);
    a.scheme = parse_scheme(c_.scheme);
    return {ergodic_suite(a, c_.tol, out_)};
  }

  std::vector<SuiteResult> simulate() {
    InvarianceConfig a;
    take("--m", a.m, c_.m);
    if (given("--M")) a.M = c_.M;
    take("--d", a.d, c_.d);
    take("--theta", a.theta, c_.theta);
    take("--dt", a.dt, c_.dt);
    take("--T", a.T, c_.T);
    take("--paths", a.paths, c_.paths);
    take("--seed", a.seed, c_.seed);
    a.scheme = parse_noise_scheme(c_.noise);
    a.exec = exec();
    HyperConfig h;
    take("--seed", h.seed, c_.seed);
    h.exec = exec();
    ReductionConfig r;
    take("--m", r.m, c_.m);
    take("--seed", r.seed, c_.seed);
    return {invariance_suite(a, c_.tol, out_), hypercontractivity_suite(h, c_.tol), reductions_suite(r, c_.tol)};
  }

  std::vector<SuiteResult> martingale() {
    MartingaleConfig a;
    take("--m", a.m, c_.m);
    take("--dt", a.dt, c_.dt);
    take("--L", a.L, c_.L);
    take("--seed", a.seed, c_.seed);
    if (given("--paths")) a.paths = a.controlled_paths = c_.paths;
    // the T flag sets the partition length, kept at eight cells
    if (given("--T")) a.cell = c_.T / a.cells;
    a.exec = exec();
    return {martingale_suite(a, c_.tol, out_)};
  }

  std::vector<SuiteResult> ito_trick() {
    ItoConfig a;
    take("--m", a.m, c_.m);
    take("--dt", a.dt, c_.dt);
    take("--paths", a.paths, c_.paths);
    take("--seed", a.seed, c_.seed);
    if (given("--T")) a.Ts = {c_.T / 8, c_.T / 4, c_.T / 2, c_.T};
    a.exec = exec();
    return {ito_suite(a, c_.tol, out_)};
  }

  std::vector<SuiteResult> report() {
    auto r = acceptance_suites(c_.tol, exec(), out_);
    BackwardSuiteConfig b;
    b.scheme = parse_scheme(c_.scheme);
    // the backward run would overwrite the ergodic decay.csv
    const std::string sub_dir = (std::filesystem::path(out_) / "backward").string();
    std::filesystem::create_directories(sub_dir);
    r.push_back(backward_suite(b, c_.tol, sub_dir));
    return r;
  }

  CLI::App app_;
  RunConfig c_;
  std::map<std::string, CLI::Option*> options_;
  std::string subcommand_;
  std::function<std::vector<SuiteResult>()> command_;
  std::vector<SuiteResult> results_;
  std::string out_;
  std::string reason_;
};

}  // namespace

int main(int argc, char** argv) {
  Driver d;
  return d.run(argc, argv);
}
