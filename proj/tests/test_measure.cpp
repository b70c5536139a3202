#include <gtest/gtest.h>

#include <cmath>

#include "bellsim/errors.hpp"
#include "bellsim/measure.hpp"
#include "oracle.hpp"

using namespace bellsim;

namespace {

constexpr std::array<Axis, 3> kAxes = {Axis::X, Axis::Y, Axis::Z};

double four_sigma(double p, int n) { return 4.0 * std::sqrt(p * (1.0 - p) / n) + 1e-12; }

// Fraction of `trials` fresh streams for which `f` returns true.
template <typename F>
double frequency(std::uint64_t seed, int trials, F f) {
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng = RngStream(seed).split(static_cast<std::uint64_t>(t));
    if (f(rng)) ++hits;
  }
  return static_cast<double>(hits) / trials;
}

}  // namespace

TEST(MeasureLocalPauli, ZOnPlusIsDeterministic) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RngStream rng(seed);
    const auto out = measure_local_pauli(StateVector::basis(1, 0), 0, Axis::Z, rng);
    EXPECT_EQ(out.outcome, Sign::plus());
    EXPECT_EQ(out.post, StateVector::basis(1, 0));
  }
}

TEST(MeasureLocalPauli, XOnPlusIsFair) {
  const int n = 100000;
  const double f = frequency(31, n, [](RngStream& rng) {
    return measure_local_pauli(StateVector::basis(1, 0), 0, Axis::X, rng).outcome == Sign::plus();
  });
  EXPECT_NEAR(f, 0.5, four_sigma(0.5, n));
}

TEST(MeasureLocalPauli, ZOnPhiPlusCollapses) {
  int plus = 0;
  const int n = 20000;
  for (int t = 0; t < n; ++t) {
    RngStream rng = RngStream(32).split(t);
    const auto out = measure_local_pauli(bell_state(BellLabel::PhiPlus), 0, Axis::Z, rng);
    if (out.outcome == Sign::plus()) {
      ++plus;
      ASSERT_EQ(out.post, StateVector::basis(2, 0b00));
    } else {
      ASSERT_EQ(out.post, StateVector::basis(2, 0b11));
    }
  }
  EXPECT_NEAR(static_cast<double>(plus) / n, 0.5, four_sigma(0.5, n));
}

TEST(MeasureLocalPauli, BadQubit) {
  RngStream rng(1);
  EXPECT_THROW(measure_local_pauli(StateVector::basis(1, 0), 1, Axis::Z, rng), DomainError);
}

TEST(SampleBit, NeverReturnsNegligibleBranch) {
  RngStream rng(33);
  for (int t = 0; t < 10000; ++t) {
    EXPECT_EQ(sample_bit(1e-13, rng), 1u);
    EXPECT_EQ(sample_bit(1.0 - 1e-13, rng), 0u);
  }
}

TEST(LocalProduct, ZzOnPhiPlus) {
  const auto zz = spin_product(Axis::Z, Axis::Z);
  int plus_plus = 0;
  const int n = 20000;
  for (int t = 0; t < n; ++t) {
    RngStream rng = RngStream(34).split(t);
    const auto out = local_product_measurement(bell_state(BellLabel::PhiPlus), zz, rng);
    ASSERT_EQ(out.record.m, Sign::plus());
    ASSERT_EQ(out.record.strategy, Strategy::Local);
    ASSERT_EQ(out.record.ebits_consumed, 0);
    ASSERT_EQ(out.record.m, out.record.z_a * out.record.z_b);
    const bool pp = out.post == StateVector::basis(2, 0b00);
    ASSERT_TRUE(pp || out.post == StateVector::basis(2, 0b11));
    if (pp) ++plus_plus;
  }
  EXPECT_NEAR(static_cast<double>(plus_plus) / n, 0.5, four_sigma(0.5, n));
}

TEST(LocalProduct, ZzOnPlusMinusIsDeterministic) {
  const auto zz = spin_product(Axis::Z, Axis::Z);
  for (int t = 0; t < 200; ++t) {
    RngStream rng(t);
    const auto out = local_product_measurement(StateVector::basis(2, 0b01), zz, rng);
    EXPECT_EQ(out.record.m, Sign::minus());
    EXPECT_EQ(out.post, StateVector::basis(2, 0b01));
  }
}

TEST(LocalProduct, PostStateIsProductEigenvector) {
  RngStream states(35);
  for (Axis i : kAxes)
    for (Axis j : kAxes) {
      const auto sp = spin_product(i, j);
      for (int t = 0; t < 20; ++t) {
        const auto s = haar_random_state(2, states);
        RngStream rng(t);
        const auto out = local_product_measurement(s, sp, rng);
        const Operator p = kron(gates::pauli_projector(i, out.record.z_a),
                                gates::pauli_projector(j, out.record.z_b));
        EXPECT_NEAR(outcome_probability(out.post, p), 1.0, 1e-12);
      }
    }
}

TEST(Strategies, LocalDestroysSuperpositionNonlocalKeepsIt) {
  const auto zz = spin_product(Axis::Z, Axis::Z);
  const auto xx = spin_product(Axis::X, Axis::X);
  const auto phi = bell_state(BellLabel::PhiPlus);
  const int n = 100000;
  const double local = frequency(36, n, [&](RngStream& rng) {
    const auto first = local_product_measurement(phi, zz, rng);
    return local_product_measurement(first.post, xx, rng).record.m == Sign::plus();
  });
  EXPECT_NEAR(local, 0.5, four_sigma(0.5, n));
  const double local_then_nonlocal = frequency(37, n, [&](RngStream& rng) {
    const auto first = local_product_measurement(phi, zz, rng);
    return nonlocal_product_measurement(first.post, xx, rng).record.m == Sign::plus();
  });
  EXPECT_NEAR(local_then_nonlocal, 0.5, four_sigma(0.5, n));
  for (int t = 0; t < 2000; ++t) {
    RngStream rng = RngStream(38).split(t);
    const auto first = nonlocal_product_measurement(phi, zz, rng);
    ASSERT_EQ(nonlocal_product_measurement(first.post, xx, rng).record.m, Sign::plus());
  }
}

TEST(NonlocalProduct, ZzOnRandomStateKeepsEigenspaceSuperposition) {
  RngStream states(39);
  const auto zz = spin_product(Axis::Z, Axis::Z);
  for (int t = 0; t < 200; ++t) {
    const auto s = haar_random_state(2, states);
    const auto c = to_bell(s);
    RngStream rng(t);
    const auto out = nonlocal_product_measurement(s, zz, rng);
    EXPECT_EQ(out.record.strategy, Strategy::Nonlocal);
    EXPECT_EQ(out.record.ebits_consumed, 1);
    EXPECT_EQ(out.record.m, out.record.z_a * out.record.z_b);
    BellCoefficients want;
    if (out.record.m == Sign::plus()) {
      want.c = {c[0], c[1], 0.0, 0.0};
    } else {
      want.c = {0.0, 0.0, c[2], c[3]};
    }
    const double norm = std::sqrt(want.squared_norm());
    for (auto& a : want.c) a /= norm;
    EXPECT_TRUE(equal_up_to_phase(out.post, from_bell(want)));
  }
}

TEST(NonlocalProduct, ZzBranchProbability) {
  RngStream states(40);
  const auto s = haar_random_state(2, states);
  const auto c = to_bell(s);
  const double p = std::norm(c[0]) + std::norm(c[1]);
  const int n = 100000;
  const double f = frequency(41, n, [&](RngStream& rng) {
    return nonlocal_product_measurement(s, spin_product(Axis::Z, Axis::Z), rng).record.m ==
           Sign::plus();
  });
  EXPECT_NEAR(f, p, four_sigma(p, n));
}

TEST(NonlocalProduct, EigenstatesPassUnchanged) {
  for (int t = 0; t < 100; ++t) {
    RngStream rng(t);
    const auto psi = nonlocal_product_measurement(bell_state(BellLabel::PsiPlus),
                                                  spin_product(Axis::Z, Axis::Z), rng);
    EXPECT_EQ(psi.record.m, Sign::minus());
    EXPECT_TRUE(equal_up_to_phase(psi.post, bell_state(BellLabel::PsiPlus)));
    const auto phi = nonlocal_product_measurement(bell_state(BellLabel::PhiMinus),
                                                  spin_product(Axis::X, Axis::X), rng);
    EXPECT_EQ(phi.record.m, Sign::minus());
    EXPECT_TRUE(equal_up_to_phase(phi.post, bell_state(BellLabel::PhiMinus)));
  }
}

TEST(NonlocalProduct, PostStateLawForEveryAxisPair) {
  RngStream states(42);
  for (Axis i : kAxes)
    for (Axis j : kAxes) {
      const auto sp = spin_product(i, j);
      for (int t = 0; t < 30; ++t) {
        const auto s = haar_random_state(2, states);
        RngStream rng(1000 + t);
        const auto out = nonlocal_product_measurement(s, sp, rng);
        // Independent: (I + m sigma_i (x) sigma_j)/2 applied with Eigen.
        const oracle::Mat proj =
            0.5 * (oracle::id(4) + static_cast<double>(out.record.m.value()) *
                                       oracle::kron(oracle::pauli(axis_name(i)),
                                                    oracle::pauli(axis_name(j))));
        oracle::Vec want = proj * oracle::to_eigen(s);
        ASSERT_GT(want.norm(), 1e-6);
        want /= want.norm();
        const oracle::Vec got = oracle::to_eigen(out.post);
        EXPECT_NEAR(std::abs(want.dot(got)), 1.0, 1e-12) << sp.name();
      }
    }
}

TEST(NonlocalProduct, RejectsBadMeter) {
  RngStream rng(43);
  const auto zz = spin_product(Axis::Z, Axis::Z);
  const auto s = bell_state(BellLabel::PhiPlus);
  for (auto meter : {bell_state(BellLabel::PhiMinus), bell_state(BellLabel::PsiPlus),
                     StateVector::basis(2, 0)}) {
    try {
      nonlocal_product_measurement(s, zz, rng, meter);
      FAIL();
    } catch (const DomainError& e) {
      EXPECT_STREQ(e.what(), "bad meter resource");
    }
  }
}

TEST(Povm, ZzExamples) {
  const auto zz = spin_product(Axis::Z, Axis::Z);
  const auto local = povm_family(Strategy::Local, zz);
  const oracle::Mat want_plus = oracle::projector(oracle::bell(0)) + oracle::projector(oracle::bell(1));
  EXPECT_LE(oracle::max_diff(local[0].matrix, want_plus), 1e-12);
  EXPECT_LE(max_abs_diff(local[0].matrix, zz.projector(Sign::plus())), 1e-12);
  const auto nonlocal = povm_family(Strategy::Nonlocal, zz);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(local[k].label, nonlocal[k].label);
    EXPECT_LE(max_abs_diff(local[k].matrix, nonlocal[k].matrix), 1e-12);
  }
}

TEST(Povm, FamiliesAreCompleteAndPositive) {
  for (Axis i : kAxes)
    for (Axis j : kAxes)
      for (auto strategy : {Strategy::Local, Strategy::Nonlocal}) {
        const auto sp = spin_product(i, j);
        Operator sum(4);
        for (const auto& e : povm_family(strategy, sp)) {
          sum += e.matrix;
          EXPECT_TRUE(e.matrix.is_hermitian());
          Eigen::SelfAdjointEigenSolver<oracle::Mat> solver(oracle::to_eigen(e.matrix));
          EXPECT_GE(solver.eigenvalues().minCoeff(), -1e-12);
        }
        EXPECT_LE(max_abs_diff(sum, Operator::identity(4)), 1e-12);
        Operator kraus_sum(4);
        for (const auto& k : kraus_family(strategy, sp)) kraus_sum += k.matrix.adjoint() * k.matrix;
        EXPECT_LE(max_abs_diff(kraus_sum, Operator::identity(4)), 1e-12);
      }
}

TEST(Povm, StrategyEquivalenceOverRandomStates) {
  RngStream states(44);
  for (Axis i : kAxes)
    for (Axis j : kAxes) {
      const auto sp = spin_product(i, j);
      const auto local = povm_family(Strategy::Local, sp);
      const auto nonlocal = povm_family(Strategy::Nonlocal, sp);
      for (std::size_t k = 0; k < 2; ++k)
        EXPECT_LE(max_abs_diff(local[k].matrix, nonlocal[k].matrix), 1e-12);
    }
  const auto zz = spin_product(Axis::Z, Axis::Z);
  const auto local = povm_family(Strategy::Local, zz);
  const auto nonlocal = povm_family(Strategy::Nonlocal, zz);
  for (int t = 0; t < 500; ++t) {
    const auto s = haar_random_state(2, states);
    for (std::size_t k = 0; k < 2; ++k)
      EXPECT_NEAR(outcome_probability(s, local[k]), outcome_probability(s, nonlocal[k]), 1e-12);
  }
}

TEST(OutcomeProbability, Examples) {
  const auto zz = povm_family(Strategy::Nonlocal, spin_product(Axis::Z, Axis::Z));
  const auto xx = povm_family(Strategy::Nonlocal, spin_product(Axis::X, Axis::X));
  EXPECT_NEAR(outcome_probability(bell_state(BellLabel::PhiPlus), zz[0]), 1.0, 1e-12);
  EXPECT_NEAR(outcome_probability(StateVector::basis(2, 0b01), zz[0]), 0.0, 1e-12);
  EXPECT_NEAR(outcome_probability(StateVector::basis(2, 0b00), xx[0]), 0.5, 1e-12);
  EXPECT_THROW(outcome_probability(StateVector::basis(1, 0), zz[0]), DomainError);
}

TEST(Sampling, FrequenciesWithinFourSigma) {
  RngStream states(45);
  const int n = 100000;
  for (Axis i : kAxes) {
    const auto sp = spin_product(i, i);
    const auto s = haar_random_state(2, states);
    const double p = outcome_probability(s, povm_family(Strategy::Nonlocal, sp)[0]);
    const double nonlocal = frequency(46, n, [&](RngStream& rng) {
      return nonlocal_product_measurement(s, sp, rng).record.m == Sign::plus();
    });
    const double local = frequency(47, n, [&](RngStream& rng) {
      return local_product_measurement(s, sp, rng).record.m == Sign::plus();
    });
    EXPECT_NEAR(nonlocal, p, four_sigma(p, n)) << sp.name();
    EXPECT_NEAR(local, p, four_sigma(p, n)) << sp.name();
  }
}

TEST(Sampling, SameSeedSameRecords) {
  RngStream states(48);
  const auto s = haar_random_state(2, states);
  const auto sp = spin_product(Axis::X, Axis::Z);
  RngStream a(49);
  RngStream b(49);
  for (int t = 0; t < 500; ++t) {
    const auto ra = nonlocal_product_measurement(s, sp, a);
    const auto rb = nonlocal_product_measurement(s, sp, b);
    ASSERT_EQ(ra.record, rb.record);
    ASSERT_EQ(ra.post, rb.post);
  }
}
