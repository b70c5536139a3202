#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "bellsim/bellcore.hpp"
#include "bellsim/errors.hpp"
#include "bellsim/qstate.hpp"
#include "bellsim/rng.hpp"
#include "oracle.hpp"

using namespace bellsim;

namespace {

const double kR = 1.0 / std::sqrt(2.0);

StateVector ket(std::initializer_list<Complex> amps) { return StateVector(std::vector<Complex>(amps)); }

void expect_amplitudes(const StateVector& s, std::initializer_list<Complex> want, double tol = 1e-12) {
  ASSERT_EQ(s.dim(), want.size());
  std::size_t i = 0;
  for (Complex w : want) {
    EXPECT_NEAR(std::abs(s[i] - w), 0.0, tol) << "index " << i;
    ++i;
  }
}

}  // namespace

TEST(MakeState, BasisStateIsKeptAsIs) {
  const std::array<Complex, 4> amps{1.0, 0.0, 0.0, 0.0};
  const auto made = make_state(amps);
  EXPECT_FALSE(made.renormalized);
  EXPECT_EQ(made.state.n_qubits(), 2u);
  expect_amplitudes(made.state, {1.0, 0.0, 0.0, 0.0});
}

TEST(MakeState, RenormalizesToPhiPlus) {
  const std::array<Complex, 4> amps{1.0, 0.0, 0.0, 1.0};
  const auto made = make_state(amps);
  EXPECT_TRUE(made.renormalized);
  expect_amplitudes(made.state, {kR, 0.0, 0.0, kR});
  EXPECT_NEAR(fidelity(made.state, bell_state(BellLabel::PhiPlus)), 1.0, 1e-12);
}

TEST(MakeState, Errors) {
  const std::array<Complex, 4> zero{};
  try {
    make_state(zero);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "null state");
  }
  const std::array<Complex, 3> three{1.0, 0.0, 0.0};
  try {
    make_state(three);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "bad dimension");
  }
}

TEST(StateVector, StrictConstructorRejectsUnnormalized) {
  EXPECT_THROW(StateVector(std::vector<Complex>{1.0, 1.0}), DomainError);
  EXPECT_THROW(StateVector(std::vector<Complex>{1.0, 0.0, 0.0}), DomainError);
}

TEST(Tensor, PlusMinus) {
  const auto s = tensor(StateVector::basis(1, 0), StateVector::basis(1, 1));
  expect_amplitudes(s, {0.0, 1.0, 0.0, 0.0});
}

TEST(Tensor, PhiPlusTwice) {
  const auto s = tensor(bell_state(BellLabel::PhiPlus), bell_state(BellLabel::PhiPlus));
  ASSERT_EQ(s.n_qubits(), 4u);
  for (std::size_t i = 0; i < 16; ++i) {
    const double want = (i == 0b0000 || i == 0b0011 || i == 0b1100 || i == 0b1111) ? 0.5 : 0.0;
    EXPECT_NEAR(std::abs(s[i] - want), 0.0, 1e-15) << i;
  }
}

TEST(Tensor, ScalarIsIdentity) {
  RngStream rng(11);
  const auto x = haar_random_state(2, rng);
  EXPECT_EQ(tensor(x, StateVector()), x);
  EXPECT_EQ(tensor(StateVector(), x), x);
}

TEST(Tensor, AssociativeOnDyadicAmplitudes) {
  const auto a = ket({0.5, Complex(0.0, std::sqrt(0.75))});
  const auto b = ket({Complex(0.0, 0.5), 0.5, 0.5, Complex(-0.5, 0.0)});
  const auto c = ket({1.0, 0.0});
  EXPECT_EQ(tensor(tensor(a, b), c), tensor(a, tensor(b, c)));
}

TEST(Tensor, AssociativeOnRandomStates) {
  RngStream rng(12);
  for (int t = 0; t < 200; ++t) {
    const auto a = haar_random_state(1, rng);
    const auto b = haar_random_state(2, rng);
    const auto c = haar_random_state(1, rng);
    const auto left = tensor(tensor(a, b), c);
    const auto right = tensor(a, tensor(b, c));
    for (std::size_t i = 0; i < left.dim(); ++i) EXPECT_LE(std::abs(left[i] - right[i]), 1e-15);
  }
}

TEST(ApplyUnitary, HadamardOnPlus) {
  const auto s = apply_unitary(StateVector::basis(1, 0), gates::hadamard(), {0});
  expect_amplitudes(s, {kR, kR});
}

TEST(ApplyUnitary, CnotOnMinusPlus) {
  const auto s = apply_unitary(StateVector::basis(2, 0b10), gates::cnot(), {0, 1});
  expect_amplitudes(s, {0.0, 0.0, 0.0, 1.0});
}

TEST(ApplyUnitary, CnotTwiceIsIdentityAgainstDenseOracle) {
  RngStream rng(13);
  const oracle::Mat full = oracle::kron(oracle::cnot(), oracle::id(2));
  for (int t = 0; t < 100; ++t) {
    const auto s = haar_random_state(3, rng);
    const auto once = apply_unitary(s, gates::cnot(), {0, 1});
    const auto twice = apply_unitary(once, gates::cnot(), {0, 1});
    const oracle::Vec want_once = full * oracle::to_eigen(s);
    EXPECT_LE((oracle::to_eigen(once) - want_once).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((oracle::to_eigen(twice) - oracle::to_eigen(s)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ApplyUnitary, ReversedTargetsMatchSwappedOracle) {
  RngStream rng(14);
  // CNOT with control qubit 2 and target qubit 0 on three qubits.
  oracle::Mat perm = oracle::Mat::Zero(8, 8);
  for (int i = 0; i < 8; ++i) perm(i ^ ((i & 1) ? 4 : 0), i) = 1.0;
  for (int t = 0; t < 50; ++t) {
    const auto s = haar_random_state(3, rng);
    const auto out = apply_unitary(s, gates::cnot(), {2, 0});
    const oracle::Vec want = perm * oracle::to_eigen(s);
    EXPECT_LE((oracle::to_eigen(out) - want).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ApplyUnitary, Errors) {
  const auto s = StateVector::basis(2, 0);
  EXPECT_THROW(apply_unitary(s, gates::cnot(), {0, 0}), DomainError);
  EXPECT_THROW(apply_unitary(s, gates::cnot(), {0}), DomainError);
  EXPECT_THROW(apply_unitary(s, gates::hadamard(), {2}), DomainError);
  EXPECT_THROW(apply_unitary(s, Operator{{1.0, 1.0}, {0.0, 1.0}}, {0}), DomainError);
}

TEST(ApplyUnitary, NormPreservedForRandomStatesAndUnitaries) {
  RngStream rng(15);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + t % 4;
    const std::size_t k = 1 + t % std::min<std::size_t>(n, 2);
    const auto s = haar_random_state(n, rng);
    const auto u = haar_random_unitary(k, rng);
    std::vector<std::size_t> targets;
    for (std::size_t j = 0; j < k; ++j) targets.push_back((t + j) % n);
    const auto out = apply_operator(s.amplitudes(), u, targets);
    double norm2 = 0.0;
    for (const auto& a : out) norm2 += std::norm(a);
    EXPECT_NEAR(std::sqrt(norm2), s.norm(), 1e-12);
  }
}

TEST(Fidelity, Examples) {
  const auto phi = bell_state(BellLabel::PhiPlus);
  EXPECT_NEAR(fidelity(phi, phi), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(phi, bell_state(BellLabel::PsiMinus)), 0.0, 1e-12);
  EXPECT_NEAR(fidelity(phi, StateVector::basis(2, 0)), 0.5, 1e-12);
  EXPECT_THROW(fidelity(phi, StateVector::basis(1, 0)), DomainError);
}

TEST(Fidelity, Symmetric) {
  RngStream rng(16);
  for (int t = 0; t < 100; ++t) {
    const auto a = haar_random_state(2, rng);
    const auto b = haar_random_state(2, rng);
    EXPECT_DOUBLE_EQ(fidelity(a, b), fidelity(b, a));
  }
}

TEST(Pauli, Algebra) {
  const auto& x = gates::pauli(Axis::X);
  const auto& y = gates::pauli(Axis::Y);
  const auto& z = gates::pauli(Axis::Z);
  const Complex i(0.0, 1.0);
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    const auto& p = gates::pauli(a);
    EXPECT_LE(max_abs_diff(p * p, gates::identity2()), 1e-15);
    EXPECT_LE(oracle::max_diff(p, oracle::pauli(axis_name(a))),
              1e-15);
  }
  EXPECT_LE(max_abs_diff(x * y, i * z), 1e-15);
  EXPECT_LE(max_abs_diff(y * z, i * x), 1e-15);
  EXPECT_LE(max_abs_diff(z * x, i * y), 1e-15);
}

TEST(Gates, BasisChangeMapsAxisOntoZ) {
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    const auto& u = gates::to_z_basis(a);
    EXPECT_TRUE(u.is_unitary());
    EXPECT_LE(max_abs_diff(u * gates::pauli(a) * u.adjoint(), gates::pauli(Axis::Z)), 1e-12);
    EXPECT_LE(max_abs_diff(gates::from_z_basis(a), u.adjoint()), 1e-15);
  }
}

TEST(Gates, ProjectorsSplitIdentity) {
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    const auto p = gates::pauli_projector(a, Sign::plus());
    const auto m = gates::pauli_projector(a, Sign::minus());
    EXPECT_LE(max_abs_diff(p + m, gates::identity2()), 1e-15);
    EXPECT_LE(max_abs_diff(p * p, p), 1e-15);
    EXPECT_LE((p * m).max_abs(), 1e-15);
  }
}

TEST(Sign, Domain) {
  EXPECT_EQ(Sign(1), Sign::plus());
  EXPECT_EQ(Sign(-1), Sign::minus());
  EXPECT_THROW(Sign(0), DomainError);
  EXPECT_THROW(Sign(2), DomainError);
  EXPECT_EQ(Sign::minus() * Sign::minus(), Sign::plus());
}

TEST(ProjectQubit, PhiPlusBranches) {
  const auto phi = bell_state(BellLabel::PhiPlus);
  const auto zero = project_qubit(phi, 0, 0);
  EXPECT_NEAR(zero.probability, 0.5, 1e-12);
  const auto one = project_qubit(phi, 0, 1);
  EXPECT_NEAR(one.probability, 0.5, 1e-12);
  EXPECT_NEAR(std::abs(one.amplitudes[3] - kR), 0.0, 1e-12);
}

TEST(DiscardQubits, RemovesFixedQubitAndRejectsLeaks) {
  const auto s = tensor(bell_state(BellLabel::PsiPlus), StateVector::basis(1, 1));
  const std::array<std::size_t, 1> q{2};
  const std::array<unsigned, 1> one{1};
  const std::array<unsigned, 1> zero{0};
  EXPECT_TRUE(equal_up_to_phase(discard_qubits(s, q, one), bell_state(BellLabel::PsiPlus)));
  EXPECT_THROW(discard_qubits(s, q, zero), DomainError);
}

TEST(CanonicalPhase, EqualUpToPhase) {
  RngStream rng(17);
  const auto s = haar_random_state(2, rng);
  std::vector<Complex> rotated(s.amplitudes().begin(), s.amplitudes().end());
  for (auto& a : rotated) a *= std::polar(1.0, 1.234);
  EXPECT_TRUE(equal_up_to_phase(s, StateVector(rotated)));
  EXPECT_FALSE(equal_up_to_phase(s, bell_state(BellLabel::PhiPlus)));
}

TEST(Rng, SameSeedSameSequence) {
  RngStream a(99);
  RngStream b(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  EXPECT_EQ(a.counter(), 100u);
  RngStream c(100);
  EXPECT_NE(RngStream(99).uniform(), c.uniform());
}

TEST(Rng, SplitDependsOnlyOnSeedAndId) {
  RngStream parent(5);
  const double first = parent.split(3).uniform();
  parent.uniform();
  EXPECT_EQ(parent.split(3).uniform(), first);
  EXPECT_NE(parent.split(4).uniform(), first);
}

TEST(Rng, UniformMoments) {
  RngStream rng(6);
  const int n = 200000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum2 / n - mean * mean, 1.0 / 12.0, 2e-3);
}

TEST(Rng, HaarUnitaryIsUnitary) {
  RngStream rng(7);
  for (int t = 0; t < 20; ++t) EXPECT_TRUE(haar_random_unitary(2, rng).is_unitary());
}
