#pragma once

#include <cstdint>

#include "bellsim/qstate.hpp"

namespace bellsim {

// Counter-based random stream: draw k is a hash of (seed, k), so the same
// seed and the same sequence of draws give the same values. split() derives
// a child seed from the parent seed alone, so per-trial streams do not depend
// on how trials are scheduled.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  // Number of draws taken so far.
  std::uint64_t counter() const { return counter_; }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double normal();

  RngStream split(std::uint64_t stream_id) const;

 private:
  std::uint64_t next();

  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

// Haar-random pure state from normalized complex Gaussian amplitudes.
StateVector haar_random_state(std::size_t n_qubits, RngStream& rng);

// Haar-random unitary on k qubits (QR of a complex Ginibre matrix with the
// phases of R's diagonal removed).
Operator haar_random_unitary(std::size_t n_qubits, RngStream& rng);

}  // namespace bellsim
