// Dense state-vector core.
//
// Qubit 0 is the leftmost tensor factor and the most significant bit of an
// amplitude index, so for two qubits the index is 2*bit(A) + bit(B). The
// eigenvalue labels follow the +/- shorthand: |+> is |0> (sigma_z = +1) and
// |-> is |1> (sigma_z = -1).

#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace bellsim {

using Complex = std::complex<double>;

// Absolute tolerance for norm, unitarity and hermiticity checks.
inline constexpr double kTolerance = 1e-12;

enum class Axis { X, Y, Z };

char axis_name(Axis axis);
Axis parse_axis(char name);

// A +/-1 eigenvalue. Bit 0 corresponds to +1, bit 1 to -1.
class Sign {
 public:
  constexpr Sign() = default;
  explicit Sign(int value);

  static constexpr Sign plus() { return Sign{}; }
  static constexpr Sign minus() {
    Sign s;
    s.negative_ = true;
    return s;
  }
  static constexpr Sign from_bit(unsigned bit) { return bit ? minus() : plus(); }

  constexpr int value() const { return negative_ ? -1 : 1; }
  constexpr unsigned bit() const { return negative_ ? 1u : 0u; }
  constexpr char symbol() const { return negative_ ? '-' : '+'; }

  friend constexpr Sign operator*(Sign a, Sign b) { return from_bit(a.bit() ^ b.bit()); }
  friend constexpr bool operator==(Sign, Sign) = default;

 private:
  bool negative_ = false;
};

// Computational basis label of one qubit, in the +/- notation.
using BasisLabel = Sign;

// Square complex matrix acting on 2^k amplitudes, stored row-major.
class Operator {
 public:
  Operator() = default;
  explicit Operator(std::size_t dim);
  Operator(std::size_t dim, std::vector<Complex> entries);
  Operator(std::initializer_list<std::initializer_list<Complex>> rows);

  static Operator identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t n_qubits() const;

  Complex operator()(std::size_t row, std::size_t col) const { return entries_[row * dim_ + col]; }
  Complex& operator()(std::size_t row, std::size_t col) { return entries_[row * dim_ + col]; }
  std::span<const Complex> entries() const { return entries_; }

  Operator adjoint() const;
  Complex trace() const;
  // Largest entry magnitude.
  double max_abs() const;

  bool is_unitary(double tol = kTolerance) const;
  bool is_hermitian(double tol = kTolerance) const;

  Operator& operator+=(const Operator& other);
  Operator& operator-=(const Operator& other);
  Operator& operator*=(Complex scalar);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Operator a, Complex s) { return a *= s; }
  friend Operator operator*(Complex s, Operator a) { return a *= s; }
  friend Operator operator*(const Operator& a, const Operator& b);

 private:
  std::size_t dim_ = 0;
  std::vector<Complex> entries_;
};

Operator kron(const Operator& a, const Operator& b);
// Entrywise max |a - b|; dimensions must agree.
double max_abs_diff(const Operator& a, const Operator& b);
// |v><v|
Operator outer(std::span<const Complex> v);

namespace gates {

const Operator& identity2();
const Operator& pauli(Axis axis);
const Operator& hadamard();
// diag(1, i)
const Operator& phase_s();
// Control is the first (more significant) target.
const Operator& cnot();
// Unitary U with U sigma_axis U^dagger = sigma_z; measuring sigma_z after U
// measures sigma_axis before it.
const Operator& to_z_basis(Axis axis);
// Adjoint of to_z_basis(axis).
const Operator& from_z_basis(Axis axis);
// (I + s sigma_axis) / 2
Operator pauli_projector(Axis axis, Sign s);

}  // namespace gates

// Normalized pure state of n qubits. A 0-qubit state is the scalar 1.
class StateVector {
 public:
  StateVector();
  // Rejects non-power-of-two lengths and non-normalized amplitudes.
  explicit StateVector(std::vector<Complex> amplitudes);

  static StateVector basis(std::size_t n_qubits, std::size_t index);

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  Complex operator[](std::size_t index) const { return amplitudes_[index]; }

  double norm() const;

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  std::size_t n_qubits_ = 0;
  std::vector<Complex> amplitudes_;
};

struct MadeState {
  StateVector state;
  bool renormalized = false;
};

// Normalizing constructor for untrusted input. Throws "bad dimension" for a
// length that is not a power of two and "null state" for a zero vector.
MadeState make_state(std::span<const Complex> amplitudes);

StateVector tensor(const StateVector& a, const StateVector& b);

// Applies an arbitrary 2^k x 2^k matrix to the listed qubits without
// renormalizing. targets[0] is the most significant factor of `op`.
std::vector<Complex> apply_operator(std::span<const Complex> amplitudes, const Operator& op,
                                    std::span<const std::size_t> targets);
void apply_operator_in_place(std::span<Complex> amplitudes, const Operator& op,
                             std::span<const std::size_t> targets);

StateVector apply_unitary(const StateVector& s, const Operator& u,
                          std::span<const std::size_t> targets);
StateVector apply_unitary(const StateVector& s, const Operator& u,
                          std::initializer_list<std::size_t> targets);

// <a|b>
Complex inner(const StateVector& a, const StateVector& b);
// |<a|b>|^2
double fidelity(const StateVector& a, const StateVector& b);
// <s|A|s> on the full register.
Complex expectation(const StateVector& s, const Operator& a);

// Global phase fixed so that the first amplitude with magnitude above
// kTolerance is real and positive.
StateVector canonical_phase(const StateVector& s);
bool equal_up_to_phase(const StateVector& a, const StateVector& b, double tol = kTolerance);

struct Projection {
  double probability = 0.0;
  std::vector<Complex> amplitudes;  // unnormalized
};

// Projects `qubit` onto the z-basis state with the given bit.
Projection project_qubit(const StateVector& s, std::size_t qubit, unsigned bit);

// Removes qubits whose value is fixed to `bits` (as after a z readout) and
// returns the remaining register. Throws if the listed qubits are not in
// that basis state.
StateVector discard_qubits(const StateVector& s, std::span<const std::size_t> qubits,
                           std::span<const unsigned> bits);

std::string to_string(const StateVector& s);

}  // namespace bellsim
