#include "sburgers/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace sburgers {

namespace {
uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

uint64_t stream_key(std::string_view purpose) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : purpose) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngStream::RngStream(uint64_t seed, uint64_t purpose, uint64_t index) {
  uint64_t s = splitmix64(splitmix64(splitmix64(seed) ^ purpose) ^ index);
  std::seed_seq seq{static_cast<uint32_t>(s), static_cast<uint32_t>(s >> 32),
                    static_cast<uint32_t>(index), static_cast<uint32_t>(purpose)};
  eng_.seed(seq);
}

cplx RngStream::complex_normal() {
  double a = normal();
  double b = normal();
  return cplx{a, b} * std::sqrt(0.5);
}

SpectralField::SpectralField(int radius, int species) : radius_(radius), species_(species) {
  if (radius < 0 || species < 1) throw std::invalid_argument("bad spectral field shape");
  data_.assign(static_cast<std::size_t>(species) * width(), cplx{});
}

void SpectralField::set(int k, cplx v, int i) {
  if (k == 0 || k < -radius_ || k > radius_) throw std::out_of_range("mode outside field");
  data_[slot(k, i)] = v;
  data_[slot(-k, i)] = std::conj(v);
}

double SpectralField::conjugate_defect() const {
  double d = 0.0;
  for (int i = 0; i < species_; ++i)
    for (int k = 1; k <= radius_; ++k)
      d = std::max(d, std::abs((*this)(-k, i) - std::conj((*this)(k, i))));
  return d;
}

cplx l2_pairing(const SpectralField& u, const SpectralField& v) {
  if (u.radius() != v.radius() || u.species() != v.species())
    throw std::invalid_argument("spectral fields differ in shape");
  cplx s{};
  for (int i = 0; i < u.species(); ++i)
    for (int k = -u.radius(); k <= u.radius(); ++k) s += std::conj(u(k, i)) * v(k, i);
  return s;
}

double SpectralField::h_minus1_sq() const {
  double s = 0.0;
  for (int i = 0; i < species_; ++i)
    for (int k = 1; k <= radius_; ++k)
      s += 2.0 * std::norm((*this)(k, i)) / (kTwoPi * kTwoPi * k * k);
  return s;
}

SpectralField sample_white_noise(int radius, RngStream& rng, int species) {
  if (radius < 1) throw std::invalid_argument("white noise needs radius >= 1");
  SpectralField u(radius, species);
  for (int i = 0; i < species; ++i)
    for (int k = 1; k <= radius; ++k) u.set(k, rng.complex_normal(), i);
  return u;
}

}  // namespace sburgers
