#include "bellsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace bellsim {

namespace {

// SplitMix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(mix(seed ^ 0x5851f42d4c957f2dULL)) {}

std::uint64_t RngStream::next() {
  // Two rounds so that nearby (seed, counter) pairs decorrelate.
  return mix(mix(seed_ + kGolden * ++counter_) ^ seed_);
}

double RngStream::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double RngStream::normal() {
  // Box-Muller keeps one draw pair per call, so counter() stays exact.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream RngStream::split(std::uint64_t stream_id) const {
  return RngStream(mix(seed_ ^ mix(stream_id + kGolden)));
}

StateVector haar_random_state(std::size_t n_qubits, RngStream& rng) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  std::vector<Complex> amps(dim);
  double norm2 = 0.0;
  for (auto& a : amps) {
    a = Complex(rng.normal(), rng.normal());
    norm2 += std::norm(a);
  }
  const double norm = std::sqrt(norm2);
  for (auto& a : amps) a /= norm;
  return StateVector(std::move(amps));
}

Operator haar_random_unitary(std::size_t n_qubits, RngStream& rng) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  // Columns of a Ginibre matrix, orthonormalized by modified Gram-Schmidt.
  std::vector<std::vector<Complex>> cols(dim, std::vector<Complex>(dim));
  for (auto& col : cols)
    for (auto& x : col) x = Complex(rng.normal(), rng.normal());

  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      Complex proj = 0.0;
      for (std::size_t i = 0; i < dim; ++i) proj += std::conj(cols[k][i]) * cols[j][i];
      for (std::size_t i = 0; i < dim; ++i) cols[j][i] -= proj * cols[k][i];
    }
    double norm2 = 0.0;
    for (const auto& x : cols[j]) norm2 += std::norm(x);
    const double norm = std::sqrt(norm2);
    for (auto& x : cols[j]) x /= norm;
  }

  Operator u(dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) u(r, c) = cols[c][r];
  return u;
}

}  // namespace bellsim
