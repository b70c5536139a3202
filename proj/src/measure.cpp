#include "bellsim/measure.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "bellsim/errors.hpp"

namespace bellsim {

namespace {

StateVector normalized(std::vector<Complex> amps) {
  double norm2 = 0.0;
  for (const auto& a : amps) norm2 += std::norm(a);
  const double norm = std::sqrt(norm2);
  for (auto& a : amps) a /= norm;
  return StateVector(std::move(amps));
}

double squared_norm(const std::vector<Complex>& amps) {
  double acc = 0.0;
  for (const auto& a : amps) acc += std::norm(a);
  return acc;
}

// Samples a sigma_z readout of `qubit` and returns the bit and collapsed state.
std::pair<unsigned, StateVector> readout_z(const StateVector& s, std::size_t qubit,
                                           RngStream& rng) {
  auto zero = project_qubit(s, qubit, 0);
  const unsigned bit = sample_bit(zero.probability, rng);
  if (bit == 0) return {0u, normalized(std::move(zero.amplitudes))};
  return {1u, normalized(project_qubit(s, qubit, 1).amplitudes)};
}

}  // namespace

std::string_view to_string(Strategy strategy) {
  return strategy == Strategy::Local ? "local" : "nonlocal";
}

std::string MeasurementRecord::observable() const {
  return std::string("S_") + axis_name(alice_axis) + axis_name(bob_axis);
}

unsigned sample_bit(double p0, RngStream& rng) {
  p0 = std::clamp(p0, 0.0, 1.0);
  const double u = rng.uniform();
  if (p0 < kBranchThreshold) return 1;
  if (1.0 - p0 < kBranchThreshold) return 0;
  return u < p0 ? 0u : 1u;
}

PauliOutcome measure_local_pauli(const StateVector& s, std::size_t qubit, Axis axis,
                                 RngStream& rng) {
  if (qubit >= s.n_qubits()) throw DomainError("target qubit out of range");
  const std::array<std::size_t, 1> target{qubit};
  auto plus = apply_operator(s.amplitudes(), gates::pauli_projector(axis, Sign::plus()), target);
  const unsigned bit = sample_bit(squared_norm(plus), rng);
  if (bit == 0) return {Sign::plus(), normalized(std::move(plus))};
  auto minus = apply_operator(s.amplitudes(), gates::pauli_projector(axis, Sign::minus()), target);
  return {Sign::minus(), normalized(std::move(minus))};
}

ProductOutcome local_product_measurement(const StateVector& s, const SpinProduct& sp,
                                         RngStream& rng) {
  if (s.n_qubits() != 2) throw DomainError("expected a 2-qubit state");
  auto alice = measure_local_pauli(s, 0, sp.alice_axis(), rng);
  auto bob = measure_local_pauli(alice.post, 1, sp.bob_axis(), rng);

  MeasurementRecord record;
  record.alice_axis = sp.alice_axis();
  record.bob_axis = sp.bob_axis();
  record.strategy = Strategy::Local;
  record.z_a = alice.outcome;
  record.z_b = bob.outcome;
  record.m = alice.outcome * bob.outcome;
  record.ebits_consumed = 0;
  return {record, std::move(bob.post)};
}

ProductOutcome nonlocal_product_measurement(const StateVector& s, const SpinProduct& sp,
                                            RngStream& rng, const StateVector& meter) {
  if (s.n_qubits() != 2) throw DomainError("expected a 2-qubit state");
  if (meter.n_qubits() != 2 ||
      fidelity(meter, bell_state(BellLabel::PhiPlus)) < 1.0 - kTolerance) {
    throw DomainError("bad meter resource");
  }

  // Register: system A, system B, meter A, meter B.
  const auto& ua = gates::to_z_basis(sp.alice_axis());
  const auto& ub = gates::to_z_basis(sp.bob_axis());
  StateVector joint = tensor(s, meter);
  joint = apply_unitary(joint, ua, {0});
  joint = apply_unitary(joint, ub, {1});
  joint = apply_unitary(joint, gates::cnot(), {0, 2});
  joint = apply_unitary(joint, gates::cnot(), {1, 3});

  auto [bit_a, after_a] = readout_z(joint, 2, rng);
  auto [bit_b, after_b] = readout_z(after_a, 3, rng);

  const std::array<std::size_t, 2> meters{2, 3};
  const std::array<unsigned, 2> bits{bit_a, bit_b};
  StateVector post = discard_qubits(after_b, meters, bits);
  post = apply_unitary(post, ua.adjoint(), {0});
  post = apply_unitary(post, ub.adjoint(), {1});

  MeasurementRecord record;
  record.alice_axis = sp.alice_axis();
  record.bob_axis = sp.bob_axis();
  record.strategy = Strategy::Nonlocal;
  record.z_a = Sign::from_bit(bit_a);
  record.z_b = Sign::from_bit(bit_b);
  record.m = record.z_a * record.z_b;
  record.ebits_consumed = 1;
  return {record, std::move(post)};
}

std::vector<MeasOperator> kraus_family(Strategy strategy, const SpinProduct& sp) {
  std::vector<MeasOperator> family;
  if (strategy == Strategy::Nonlocal) {
    for (Sign m : {Sign::plus(), Sign::minus()})
      family.push_back({m, std::nullopt, sp.projector(m)});
    return family;
  }
  for (Sign a : {Sign::plus(), Sign::minus()})
    for (Sign b : {Sign::plus(), Sign::minus()}) {
      family.push_back({a * b, std::pair{a, b},
                        kron(gates::pauli_projector(sp.alice_axis(), a),
                             gates::pauli_projector(sp.bob_axis(), b))});
    }
  return family;
}

std::vector<PovmElement> povm_family(Strategy strategy, const SpinProduct& sp) {
  std::vector<PovmElement> family{{Sign::plus(), Operator(4)}, {Sign::minus(), Operator(4)}};
  for (const auto& k : kraus_family(strategy, sp)) {
    auto& slot = family[k.label.bit()].matrix;
    slot += k.matrix.adjoint() * k.matrix;
  }
  return family;
}

double outcome_probability(const StateVector& s, const Operator& e) {
  const Complex p = expectation(s, e);
  if (std::abs(p.imag()) > kTolerance || p.real() < -kTolerance || p.real() > 1.0 + kTolerance)
    throw InvariantError("POVM expectation outside [0, 1]");
  return std::clamp(p.real(), 0.0, 1.0);
}

double outcome_probability(const StateVector& s, const PovmElement& e) {
  return outcome_probability(s, e.matrix);
}

}  // namespace bellsim
