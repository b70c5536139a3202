// Qubit-level model of the linear-optics Bell measurement.
//
// Each photon carries three qubits: polarization (the system), a path qubit
// entangled with the other photon's path in |Phi+> (the meter), and a second
// local path qubit starting in |+> = |0>. Per photon the optics are
//   PBS(Z): CNOT polarization -> entangled path
//   HWP:    Hadamard on polarization
//   PBS(X): CNOT polarization -> local path
// and the photon lands on one of four output ports, which encode the meter
// readout z and the sigma_x readout x.

#pragma once

#include <array>
#include <utility>

#include "bellsim/bellcore.hpp"
#include "bellsim/qstate.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

enum class Photon { A, B };

struct PhotonQubits {
  std::size_t polarization;
  std::size_t path_z;
  std::size_t path_x;
};

// Register order: polarization A, polarization B, path_z A, path_z B,
// path_x A, path_x B.
struct PhotonRegister {
  static constexpr std::size_t kQubits = 6;
  static constexpr PhotonQubits a{0, 2, 4};
  static constexpr PhotonQubits b{1, 3, 5};

  static constexpr PhotonQubits of(Photon p) { return p == Photon::A ? a : b; }
};

// Output port of one photon; port = 2 * bit(z) + bit(x).
class DetectorIndex {
 public:
  DetectorIndex(Photon photon, unsigned port);
  static DetectorIndex from_outcomes(Photon photon, Sign z, Sign x);

  Photon photon() const { return photon_; }
  unsigned port() const { return port_; }
  Sign z() const { return Sign::from_bit(port_ >> 1); }
  Sign x() const { return Sign::from_bit(port_ & 1u); }

  friend bool operator==(const DetectorIndex&, const DetectorIndex&) = default;

 private:
  Photon photon_;
  unsigned port_;
};

using DetectionEvent = std::pair<DetectorIndex, DetectorIndex>;

// s (x) |Phi+>_{path_z} (x) |++>_{path_x}
StateVector prepare_photonic_input(const StateVector& polarization);
// PBS(Z), HWP, PBS(X) for one photon.
StateVector apply_photon_optics(const StateVector& state, Photon photon);
StateVector build_photonic_run(const StateVector& polarization);

DetectionEvent detect(const StateVector& final_state, RngStream& rng);
BellLabel photonic_label(const DetectionEvent& ports);

// P(port_A, port_B) from the final 6-qubit state.
std::array<std::array<double, 4>, 4> port_distribution(const StateVector& final_state);
std::array<double, 4> photonic_label_distribution(const StateVector& polarization);
// Effective POVM on the polarization pair, indexed by BellLabel, read off the
// optical circuit column by column.
std::array<Operator, 4> photonic_povm();

}  // namespace bellsim
