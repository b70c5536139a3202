// Measurement of spin products by two strategies.
//
// Local: Alice measures sigma_i, Bob measures sigma_j, and the product of the
// two outcomes is the S_ij outcome. The system ends in a product state.
//
// Nonlocal: each party CNOTs its system qubit onto its half of a shared
// |Phi+> meter pair and reads the meter in sigma_z. The product of the meter
// outcomes is the S_ij outcome and the system is projected onto the S_ij
// eigenspace, keeping any superposition inside it.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bellsim/bellcore.hpp"
#include "bellsim/qstate.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

// Branches below this probability are never sampled.
inline constexpr double kBranchThreshold = 1e-12;

enum class Strategy { Local, Nonlocal };

std::string_view to_string(Strategy strategy);

struct PovmElement {
  Sign label;
  Operator matrix;
};

// Kraus operator. `local` carries Alice's and Bob's individual outcomes for
// the local strategy; `label` is always their product.
struct MeasOperator {
  Sign label;
  std::optional<std::pair<Sign, Sign>> local;
  Operator matrix;
};

struct MeasurementRecord {
  Axis alice_axis = Axis::Z;
  Axis bob_axis = Axis::Z;
  Strategy strategy = Strategy::Local;
  // Raw readouts: system qubits for Local, meter qubits for Nonlocal.
  Sign z_a;
  Sign z_b;
  Sign m;
  int ebits_consumed = 0;

  std::string observable() const;
  friend bool operator==(const MeasurementRecord&, const MeasurementRecord&) = default;
};

// Picks bit 0 with probability p0 (clamped to [0, 1]). A branch whose
// probability is below kBranchThreshold is never returned.
unsigned sample_bit(double p0, RngStream& rng);

struct PauliOutcome {
  Sign outcome;
  StateVector post;
};

PauliOutcome measure_local_pauli(const StateVector& s, std::size_t qubit, Axis axis,
                                 RngStream& rng);

struct ProductOutcome {
  MeasurementRecord record;
  StateVector post;
};

ProductOutcome local_product_measurement(const StateVector& s, const SpinProduct& sp,
                                         RngStream& rng);

// Throws "bad meter resource" unless `meter` is |Phi+> up to global phase.
ProductOutcome nonlocal_product_measurement(const StateVector& s, const SpinProduct& sp,
                                            RngStream& rng,
                                            const StateVector& meter = bell_state(BellLabel::PhiPlus));

// Local: four rank-1 projectors onto the product eigenbasis of sigma_i and
// sigma_j. Nonlocal: the two eigenspace projectors of S_ij.
std::vector<MeasOperator> kraus_family(Strategy strategy, const SpinProduct& sp);

// {E_+, E_-} built as sums of M^dagger M over the Kraus family.
std::vector<PovmElement> povm_family(Strategy strategy, const SpinProduct& sp);

// <s|E|s>, clamped to [0, 1]. Throws if the imaginary part or the
// unclamped value is out of tolerance.
double outcome_probability(const StateVector& s, const PovmElement& e);
double outcome_probability(const StateVector& s, const Operator& e);

}  // namespace bellsim
