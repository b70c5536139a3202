#include "bellsim/photonic.hpp"

#include <cmath>

#include "bellsim/errors.hpp"

namespace bellsim {

namespace {

constexpr std::size_t kDim = std::size_t{1} << PhotonRegister::kQubits;

unsigned bit_of(std::size_t index, std::size_t qubit) {
  return static_cast<unsigned>((index >> (PhotonRegister::kQubits - 1 - qubit)) & 1u);
}

DetectionEvent ports_of_index(std::size_t index) {
  const auto port = [index](Photon p) {
    const auto q = PhotonRegister::of(p);
    return DetectorIndex(p, 2 * bit_of(index, q.path_z) + bit_of(index, q.path_x));
  };
  return {port(Photon::A), port(Photon::B)};
}

// Final amplitudes for an arbitrary (possibly non-normalized) polarization input.
std::vector<Complex> optics_map(std::span<const Complex> polarization) {
  std::vector<Complex> amps(kDim);
  const StateVector meter = tensor(bell_state(BellLabel::PhiPlus), StateVector::basis(2, 0));
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t m = 0; m < 16; ++m) amps[s * 16 + m] = polarization[s] * meter[m];
  for (Photon p : {Photon::A, Photon::B}) {
    const auto q = PhotonRegister::of(p);
    const std::array<std::size_t, 2> pbs_z{q.polarization, q.path_z};
    const std::array<std::size_t, 1> hwp{q.polarization};
    const std::array<std::size_t, 2> pbs_x{q.polarization, q.path_x};
    amps = apply_operator(amps, gates::cnot(), pbs_z);
    amps = apply_operator(amps, gates::hadamard(), hwp);
    amps = apply_operator(amps, gates::cnot(), pbs_x);
  }
  return amps;
}

}  // namespace

DetectorIndex::DetectorIndex(Photon photon, unsigned port) : photon_(photon), port_(port) {
  if (port > 3) throw DomainError("detector port must be in 0..3");
}

DetectorIndex DetectorIndex::from_outcomes(Photon photon, Sign z, Sign x) {
  return DetectorIndex(photon, 2 * z.bit() + x.bit());
}

StateVector prepare_photonic_input(const StateVector& polarization) {
  if (polarization.n_qubits() != 2) throw DomainError("expected a 2-qubit polarization state");
  return tensor(tensor(polarization, bell_state(BellLabel::PhiPlus)), StateVector::basis(2, 0));
}

StateVector apply_photon_optics(const StateVector& state, Photon photon) {
  if (state.n_qubits() != PhotonRegister::kQubits) throw DomainError("expected a 6-qubit register");
  const auto q = PhotonRegister::of(photon);
  StateVector out = apply_unitary(state, gates::cnot(), {q.polarization, q.path_z});
  out = apply_unitary(out, gates::hadamard(), {q.polarization});
  return apply_unitary(out, gates::cnot(), {q.polarization, q.path_x});
}

StateVector build_photonic_run(const StateVector& polarization) {
  StateVector state = prepare_photonic_input(polarization);
  state = apply_photon_optics(state, Photon::A);
  return apply_photon_optics(state, Photon::B);
}

DetectionEvent detect(const StateVector& final_state, RngStream& rng) {
  if (final_state.n_qubits() != PhotonRegister::kQubits)
    throw DomainError("expected a 6-qubit register");
  // Every qubit is read in sigma_z at once; the polarization bits are lost
  // with the photon.
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t chosen = kDim;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < kDim; ++i) {
    const double p = std::norm(final_state[i]);
    if (p < 1e-12) continue;
    last_nonzero = i;
    acc += p;
    if (u < acc) {
      chosen = i;
      break;
    }
  }
  if (chosen == kDim) chosen = last_nonzero;
  return ports_of_index(chosen);
}

BellLabel photonic_label(const DetectionEvent& ports) {
  const auto& [a, b] = ports;
  if (a.photon() != Photon::A || b.photon() != Photon::B)
    throw DomainError("expected detections of photon A then photon B");
  return classify(a.z() * b.z(), a.x() * b.x());
}

std::array<std::array<double, 4>, 4> port_distribution(const StateVector& final_state) {
  if (final_state.n_qubits() != PhotonRegister::kQubits)
    throw DomainError("expected a 6-qubit register");
  std::array<std::array<double, 4>, 4> out{};
  for (std::size_t i = 0; i < kDim; ++i) {
    const auto [a, b] = ports_of_index(i);
    out[a.port()][b.port()] += std::norm(final_state[i]);
  }
  return out;
}

std::array<double, 4> photonic_label_distribution(const StateVector& polarization) {
  const auto ports = port_distribution(build_photonic_run(polarization));
  std::array<double, 4> out{};
  for (unsigned pa = 0; pa < 4; ++pa)
    for (unsigned pb = 0; pb < 4; ++pb)
      out[index_of(photonic_label({DetectorIndex(Photon::A, pa), DetectorIndex(Photon::B, pb)}))] +=
          ports[pa][pb];
  return out;
}

std::array<Operator, 4> photonic_povm() {
  std::array<std::vector<Complex>, 4> columns;
  for (std::size_t c = 0; c < 4; ++c) {
    std::array<Complex, 4> basis{};
    basis[c] = 1.0;
    columns[c] = optics_map(basis);
  }
  std::array<Operator, 4> povm{Operator(4), Operator(4), Operator(4), Operator(4)};
  for (std::size_t i = 0; i < kDim; ++i) {
    const auto label = index_of(photonic_label(ports_of_index(i)));
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c)
        povm[label](r, c) += std::conj(columns[r][i]) * columns[c][i];
  }
  return povm;
}

}  // namespace bellsim
