#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "sburgers/modes.hpp"

namespace sburgers {

/// 64-bit key of a named purpose (FNV-1a).
uint64_t stream_key(std::string_view purpose);

/// Independent normal stream derived from (master seed, purpose, index).
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t purpose, uint64_t index = 0);
  RngStream(uint64_t seed, std::string_view purpose, uint64_t index = 0)
      : RngStream(seed, stream_key(purpose), index) {}

  double normal() { return normal_(eng_); }
  /// (g1 + i g2)/sqrt(2), so that E|z|^2 = 1.
  cplx complex_normal();
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_;
};

/// Fourier coefficients of a real field on the torus for 0 < |k| <= radius,
/// one block per species. The zero mode is held at 0.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(int radius, int species = 1);

  int radius() const { return radius_; }
  int species() const { return species_; }

  cplx operator()(int k, int i = 0) const { return data_[slot(k, i)]; }
  /// Sets u(k) and u(-k) = conj(u(k)).
  void set(int k, cplx v, int i = 0);

  /// Contiguous block of species i, indexed by k + radius.
  cplx* block(int i) { return data_.data() + static_cast<std::size_t>(i) * width(); }
  const cplx* block(int i) const { return data_.data() + static_cast<std::size_t>(i) * width(); }
  std::size_t width() const { return static_cast<std::size_t>(2 * radius_ + 1); }

  /// Largest |u(-k) - conj(u(k))|.
  double conjugate_defect() const;
  /// sum_k conj(u(k)) v(k) over all modes and species.
  friend cplx l2_pairing(const SpectralField& u, const SpectralField& v);
  /// sum_k |u(k)|^2 / (2 pi k)^2.
  double h_minus1_sq() const;

 private:
  std::size_t slot(int k, int i) const {
    return static_cast<std::size_t>(i) * width() + static_cast<std::size_t>(k + radius_);
  }

  int radius_ = 0;
  int species_ = 1;
  std::vector<cplx> data_;
};

cplx l2_pairing(const SpectralField& u, const SpectralField& v);

/// Sample of the white noise law truncated to |k| <= radius.
SpectralField sample_white_noise(int radius, RngStream& rng, int species = 1);

}  // namespace sburgers
