#include "sburgers/fock.hpp"

#include <cmath>
#include <json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sburgers {

void Truncation::validate() const {
  if (radius < 1) throw std::invalid_argument("truncation radius must be >= 1");
  if (max_degree < 0 || max_degree > kMaxDegree)
    throw std::invalid_argument("chaos degree bound out of range");
  if (species < 1) throw std::invalid_argument("species count must be >= 1");
}

namespace {

// Nondecreasing tuples of length n over admissible modes, optionally with a
// prescribed total momentum.
void enumerate(const Truncation& tr, int n, std::optional<int> momentum,
               std::vector<ModeTuple>& out) {
  ModeTuple cur;
  auto rec = [&](auto&& self, ModeIndex lo, int left, int sum) -> void {
    if (left == 0) {
      if (!momentum || sum == *momentum) out.push_back(cur);
      return;
    }
    for (int k = lo.k; k <= tr.radius; ++k) {
      if (k == 0) continue;
      if (momentum) {
        int rest = *momentum - sum - k;
        // remaining left-1 modes each lie in [k, radius]
        if (rest < static_cast<long long>(left - 1) * k) break;
        if (rest > static_cast<long long>(left - 1) * tr.radius) continue;
      }
      int s0 = (k == lo.k) ? lo.species : 0;
      for (int s = s0; s < tr.species; ++s) {
        cur.push_back({k, s});
        self(self, ModeIndex{k, s}, left - 1, sum + k);
        cur.pop_back();
      }
    }
  };
  rec(rec, ModeIndex{-tr.radius, 0}, n, 0);
}

}  // namespace

std::shared_ptr<const FockBasis> FockBasis::full(const Truncation& tr) {
  tr.validate();
  std::shared_ptr<FockBasis> b(new FockBasis());
  b->tr_ = tr;
  for (int n = 0; n <= tr.max_degree; ++n) enumerate(tr, n, std::nullopt, b->tuples_);
  b->build();
  return b;
}

std::shared_ptr<const FockBasis> FockBasis::sectors(const Truncation& tr,
                                                    std::vector<int> momenta) {
  tr.validate();
  std::sort(momenta.begin(), momenta.end());
  momenta.erase(std::unique(momenta.begin(), momenta.end()), momenta.end());
  std::shared_ptr<FockBasis> b(new FockBasis());
  b->tr_ = tr;
  b->restricted_ = true;
  b->momenta_ = momenta;
  for (int n = 0; n <= tr.max_degree; ++n)
    for (int K : momenta) enumerate(tr, n, K, b->tuples_);
  b->build();
  return b;
}

void FockBasis::build() {
  std::sort(tuples_.begin(), tuples_.end());
  const std::size_t N = tuples_.size();
  mult_.resize(N);
  weight_.resize(N);
  lap_.resize(N);
  offsets_.assign(tr_.max_degree + 2, N);
  index_.reserve(N);
  for (std::size_t i = 0; i < N; ++i) {
    const ModeTuple& t = tuples_[i];
    mult_[i] = sburgers::multiplicity(t);
    weight_[i] = factorial(t.size()) * mult_[i];
    lap_[i] = kTwoPi * kTwoPi * static_cast<double>(t.sum_squares());
    index_.emplace(t, i);
  }
  for (int n = tr_.max_degree; n >= 0; --n) {
    auto it = std::lower_bound(tuples_.begin(), tuples_.end(), n,
                               [](const ModeTuple& t, int d) { return t.size() < d; });
    offsets_[n] = static_cast<std::size_t>(it - tuples_.begin());
  }
}

std::size_t FockBasis::degree_begin(int n) const {
  if (n < 0) return 0;
  if (n > tr_.max_degree) return size();
  return offsets_[n];
}

std::size_t FockBasis::degree_end(int n) const {
  if (n < 0) return 0;
  if (n >= tr_.max_degree) return size();
  return offsets_[n + 1];
}

std::size_t FockBasis::find(const ModeTuple& canonical) const {
  auto it = index_.find(canonical);
  return it == index_.end() ? npos : it->second;
}

bool FockBasis::contains_momentum(int K) const {
  if (!restricted_) return true;
  return std::binary_search(momenta_.begin(), momenta_.end(), K);
}

// ---------------------------------------------------------------- kernels

cplx ChaosKernel::at(const ModeTuple& t) const {
  auto it = coeffs.find(t.canonical());
  return it == coeffs.end() ? cplx{} : it->second;
}

bool ChaosKernel::is_real(double tol) const {
  double scale = 0.0;
  for (const auto& [t, v] : coeffs) scale = std::max(scale, std::abs(v));
  for (const auto& [t, v] : coeffs) {
    cplx mirror = at(t.negated());
    if (std::abs(mirror - std::conj(v)) > tol * std::max(scale, 1e-300)) return false;
  }
  return true;
}

double ChaosKernel::norm() const {
  double s = 0.0;
  for (const auto& [t, v] : coeffs) s += multiplicity(t) * std::norm(v);
  return std::sqrt(factorial(degree) * s);
}

ChaosKernel make_kernel(int degree, const std::vector<std::pair<ModeTuple, cplx>>& entries,
                        const Truncation& tr) {
  if (degree < 0 || degree > kMaxDegree) throw std::invalid_argument("kernel degree out of range");
  ChaosKernel k;
  k.degree = degree;
  for (const auto& [t, v] : entries) {
    if (t.size() != degree) throw std::invalid_argument("kernel entry has wrong length");
    for (const auto& mi : t) {
      if (mi.k == 0) throw std::invalid_argument("zero mode in kernel entry");
      if (!tr.admits(mi)) throw std::out_of_range("kernel mode outside truncation");
    }
    k.coeffs[t.canonical()] += v;
  }
  for (auto& [t, v] : k.coeffs) v /= multiplicity(t);
  return k;
}

ChaosKernel kernel_from_json(const std::string& text, const Truncation& tr) {
  nlohmann::json j = nlohmann::json::parse(text);
  int degree = j.at("degree").get<int>();
  std::vector<std::pair<ModeTuple, cplx>> entries;
  for (const auto& e : j.at("entries")) {
    ModeTuple t;
    for (const auto& mode : e.at(0)) {
      if (mode.is_array())
        t.push_back({mode.at(0).get<int>(), mode.at(1).get<int>()});
      else
        t.push_back({mode.get<int>(), 0});
    }
    const auto& z = e.at(1);
    entries.emplace_back(t, cplx{z.at(0).get<double>(), z.at(1).get<double>()});
  }
  return make_kernel(degree, entries, tr);
}

// ---------------------------------------------------------------- vectors

FockVector::FockVector(BasisPtr basis) : basis_(std::move(basis)) {
  c_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis_->size()));
}

FockVector::FockVector(BasisPtr basis, Eigen::VectorXcd coeffs)
    : basis_(std::move(basis)), c_(std::move(coeffs)) {
  if (static_cast<std::size_t>(c_.size()) != basis_->size())
    throw std::invalid_argument("coefficient vector does not match basis");
}

cplx FockVector::at(const ModeTuple& t) const {
  std::size_t i = basis_->find(t.canonical());
  return i == FockBasis::npos ? cplx{} : c_[static_cast<Eigen::Index>(i)];
}

void FockVector::set(const ModeTuple& t, cplx v) {
  std::size_t i = basis_->find(t.canonical());
  if (i == FockBasis::npos) throw std::out_of_range("tuple outside basis");
  c_[static_cast<Eigen::Index>(i)] = v;
}

void FockVector::add_kernel(const ChaosKernel& k) {
  for (const auto& [t, v] : k.coeffs) {
    std::size_t i = basis_->find(t);
    if (i == FockBasis::npos) {
      if (v != cplx{}) throw std::out_of_range("kernel entry outside basis");
      continue;
    }
    c_[static_cast<Eigen::Index>(i)] += v;
  }
}

ChaosKernel FockVector::kernel(int degree) const {
  ChaosKernel k;
  k.degree = degree;
  for (std::size_t i = basis_->degree_begin(degree); i < basis_->degree_end(degree); ++i) {
    cplx v = c_[static_cast<Eigen::Index>(i)];
    if (v != cplx{}) k.coeffs.emplace(basis_->tuple(i), v);
  }
  return k;
}

FockVector FockVector::degree_part(int n) const {
  FockVector r(basis_);
  for (std::size_t i = basis_->degree_begin(n); i < basis_->degree_end(n); ++i)
    r.c_[static_cast<Eigen::Index>(i)] = c_[static_cast<Eigen::Index>(i)];
  return r;
}

int FockVector::top_degree() const {
  int top = -1;
  for (std::size_t i = 0; i < basis_->size(); ++i)
    if (c_[static_cast<Eigen::Index>(i)] != cplx{}) top = std::max(top, basis_->degree(i));
  return top;
}

bool FockVector::is_real(double tol) const {
  double scale = c_.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  for (std::size_t i = 0; i < basis_->size(); ++i) {
    cplx v = c_[static_cast<Eigen::Index>(i)];
    std::size_t j = basis_->find(basis_->tuple(i).negated());
    cplx mirror = j == FockBasis::npos ? cplx{} : c_[static_cast<Eigen::Index>(j)];
    if (std::abs(mirror - std::conj(v)) > tol * scale) return false;
  }
  return true;
}

void FockVector::check_same(const FockVector& o) const {
  if (basis_ != o.basis_) throw std::invalid_argument("Fock vectors live on different bases");
}

FockVector& FockVector::operator+=(const FockVector& o) {
  check_same(o);
  c_ += o.c_;
  return *this;
}

FockVector& FockVector::operator-=(const FockVector& o) {
  check_same(o);
  c_ -= o.c_;
  return *this;
}

FockVector& FockVector::operator*=(cplx a) {
  c_ *= a;
  return *this;
}

// ---------------------------------------------------------------- weights

NumberWeight::NumberWeight(std::vector<double> values) : v_(std::move(values)) {
  if (v_.size() < 2) throw std::invalid_argument("weight table needs at least two entries");
  for (double x : v_)
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("weights must be positive");
}

NumberWeight NumberWeight::constant(int max_degree, double c) {
  return NumberWeight(std::vector<double>(static_cast<std::size_t>(max_degree) + 2, c));
}

NumberWeight NumberWeight::power(int max_degree, double alpha) {
  std::vector<double> v(static_cast<std::size_t>(max_degree) + 2);
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = std::pow(1.0 + static_cast<double>(n), alpha);
  return NumberWeight(std::move(v));
}

double NumberWeight::operator()(int n) const {
  if (n < 0 || n >= static_cast<int>(v_.size())) throw std::out_of_range("weight index out of range");
  return v_[static_cast<std::size_t>(n)];
}

double NumberWeight::constant() const {
  double c = 0.0;
  for (std::size_t n = 0; n < v_.size(); ++n) {
    if (n > 0) c = std::max(c, v_[n] / v_[n - 1]);
    if (n + 1 < v_.size()) c = std::max(c, v_[n] / v_[n + 1]);
  }
  return c;
}

NumberWeight NumberWeight::scaled(double a) const {
  std::vector<double> v = v_;
  for (double& x : v) x *= a;
  return NumberWeight(std::move(v));
}

// ---------------------------------------------------------------- norms

cplx inner_product(const FockVector& a, const FockVector& b) {
  if (!a.same_basis(b)) throw std::invalid_argument("Fock vectors live on different bases");
  const FockBasis& B = a.basis();
  cplx s{};
  for (std::size_t i = 0; i < B.size(); ++i) {
    auto ii = static_cast<Eigen::Index>(i);
    s += B.norm_weight(i) * a.coeffs()[ii] * std::conj(b.coeffs()[ii]);
  }
  return s;
}

double norm(const FockVector& a) { return std::sqrt(inner_product(a, a).real()); }

double weighted_norm(const FockVector& a, const NumberWeight& w, double gamma) {
  if (gamma < 0.0) {
    const FockBasis& B = a.basis();
    for (std::size_t i = B.degree_begin(0); i < B.degree_end(0); ++i)
      if (a.coeffs()[static_cast<Eigen::Index>(i)] != cplx{})
        throw std::domain_error("negative power of the Laplacian on a nonzero constant");
  }
  return degree_weighted_norm(a, [&](int n) { return w(n); }, gamma);
}

// ---------------------------------------------------------------- dyadic

namespace {
double smoothstep5(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}
}  // namespace

std::vector<std::vector<double>> dyadic_weights(int max_degree) {
  if (max_degree < 1) throw std::invalid_argument("dyadic partition needs max degree >= 1");
  // rho_i(n) = h(log2 n - i + 1) - h(log2 n - i), rho_{-1} = 1 - h(log2 n + 1),
  // with h the clamped quintic smoothstep; the sum telescopes to 1.
  int blocks = 1;
  while ((1 << (blocks - 1)) <= max_degree) ++blocks;
  std::vector<std::vector<double>> rho(static_cast<std::size_t>(blocks) + 1,
                                       std::vector<double>(max_degree + 1, 0.0));
  for (int n = 0; n <= max_degree; ++n) {
    if (n == 0) {
      rho[0][0] = 1.0;
      continue;
    }
    double x = std::log2(static_cast<double>(n));
    rho[0][n] = 1.0 - smoothstep5(x + 1.0);
    for (int i = 0; i < blocks; ++i)
      rho[static_cast<std::size_t>(i) + 1][n] = smoothstep5(x - i + 1.0) - smoothstep5(x - i);
  }
  return rho;
}

}  // namespace sburgers
