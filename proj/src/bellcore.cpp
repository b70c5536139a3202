#include "bellsim/bellcore.hpp"

#include <cmath>

#include "bellsim/errors.hpp"

namespace bellsim {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Sign pattern of each Bell vector over |++>, |+->, |-+>, |-->.
constexpr std::array<std::array<int, 4>, 4> kBellPattern = {{
    {1, 0, 0, 1},   // Phi+
    {1, 0, 0, -1},  // Phi-
    {0, 1, 1, 0},   // Psi+
    {0, 1, -1, 0},  // Psi-
}};

}  // namespace

std::string_view to_string(BellLabel label) {
  switch (label) {
    case BellLabel::PhiPlus:
      return "PhiPlus";
    case BellLabel::PhiMinus:
      return "PhiMinus";
    case BellLabel::PsiPlus:
      return "PsiPlus";
    case BellLabel::PsiMinus:
      return "PsiMinus";
  }
  return "?";
}

std::optional<BellLabel> parse_bell_label(std::string_view name) {
  for (auto label : kBellLabels)
    if (to_string(label) == name) return label;
  return std::nullopt;
}

double BellCoefficients::squared_norm() const {
  double acc = 0.0;
  for (const auto& x : c) acc += std::norm(x);
  return acc;
}

StateVector bell_state(BellLabel label) {
  const auto& pattern = kBellPattern[index_of(label)];
  std::vector<Complex> amps(4);
  for (std::size_t i = 0; i < 4; ++i) amps[i] = pattern[i] * kInvSqrt2;
  return StateVector(std::move(amps));
}

Operator bell_projector(BellLabel label) { return outer(bell_state(label).amplitudes()); }

BellCoefficients to_bell(const StateVector& s) {
  if (s.n_qubits() != 2) throw DomainError("expected a 2-qubit state");
  BellCoefficients out;
  for (auto label : kBellLabels) out[index_of(label)] = inner(bell_state(label), s);
  return out;
}

StateVector from_bell(const BellCoefficients& c) {
  if (std::abs(c.squared_norm() - 1.0) > kTolerance)
    throw DomainError("Bell coefficients are not normalized");
  std::vector<Complex> amps(4);
  for (auto label : kBellLabels) {
    const auto& pattern = kBellPattern[index_of(label)];
    for (std::size_t i = 0; i < 4; ++i) amps[i] += c[label] * (pattern[i] * kInvSqrt2);
  }
  return StateVector(std::move(amps));
}

BellLabel classify(Sign m, Sign n) {
  if (m == Sign::plus()) return n == Sign::plus() ? BellLabel::PhiPlus : BellLabel::PhiMinus;
  return n == Sign::plus() ? BellLabel::PsiPlus : BellLabel::PsiMinus;
}

BellLabel classify(int m, int n) { return classify(Sign(m), Sign(n)); }

std::pair<Sign, Sign> outcomes_of(BellLabel label) {
  switch (label) {
    case BellLabel::PhiPlus:
      return {Sign::plus(), Sign::plus()};
    case BellLabel::PhiMinus:
      return {Sign::plus(), Sign::minus()};
    case BellLabel::PsiPlus:
      return {Sign::minus(), Sign::plus()};
    case BellLabel::PsiMinus:
      break;
  }
  return {Sign::minus(), Sign::minus()};
}

SpinProduct::SpinProduct(Axis alice, Axis bob)
    : alice_(alice),
      bob_(bob),
      matrix_(kron(gates::pauli(alice), gates::pauli(bob))),
      plus_(0.5 * (Operator::identity(4) + matrix_)),
      minus_(0.5 * (Operator::identity(4) - matrix_)) {}

std::string SpinProduct::name() const {
  return std::string("S_") + axis_name(alice_) + axis_name(bob_);
}

SpinProduct spin_product(Axis alice, Axis bob) { return SpinProduct(alice, bob); }

Operator commutator(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw DomainError("bad dimension");
  return a * b - b * a;
}

}  // namespace bellsim
