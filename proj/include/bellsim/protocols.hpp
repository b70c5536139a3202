// End-to-end Bell measurement protocols.
//
//   Fig1     CNOT(A->B), H(A), z readouts. Needs a gate across the parties.
//   SchemeA  nonlocal S_zz (1 ebit), then local S_xx.
//   SchemeB  nonlocal S_zz and nonlocal S_xx (2 ebits). The system is left in
//            the Bell state named by the outcome.
//   Photonic the optical realization of SchemeA.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "bellsim/bellcore.hpp"
#include "bellsim/locc.hpp"
#include "bellsim/measure.hpp"
#include "bellsim/photonic.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

enum class Scheme { Fig1, SchemeA, SchemeB, Photonic };

inline constexpr std::array<Scheme, 4> kSchemes = {Scheme::Fig1, Scheme::SchemeA, Scheme::SchemeB,
                                                   Scheme::Photonic};

std::string_view to_string(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);

// Ebits a run consumes.
std::size_t ebit_cost(Scheme scheme);
// True when the run hands back a post-measurement system state.
bool preserves_state(Scheme scheme);

struct ProtocolResult {
  Sign m;
  Sign n;
  BellLabel label = BellLabel::PhiPlus;
  std::optional<StateVector> post_state;
  Trace trace;
  ResourceLedger ledger;
  std::vector<MeasurementRecord> measurements;
};

struct RunOptions {
  // Defaults to ebit_cost(scheme).
  std::optional<std::size_t> ebits_available;
  bool record_trace = true;
};

ProtocolResult run_fig1(const StateVector& s, RngStream& rng, const RunOptions& options = {});
ProtocolResult run_scheme_a(const StateVector& s, RngStream& rng, const RunOptions& options = {});
ProtocolResult run_scheme_b(const StateVector& s, RngStream& rng, const RunOptions& options = {});
ProtocolResult run_photonic(const StateVector& s, RngStream& rng, const RunOptions& options = {});
ProtocolResult run_protocol(Scheme scheme, const StateVector& s, RngStream& rng,
                            const RunOptions& options = {});

// Readout of a Bell state in the Fig1 circuit: Phi+ -> |++>, Phi- -> |-+>,
// Psi+ -> |+->, Psi- -> |-->.
StateVector fig1_output(BellLabel label);

// POVM of each scheme indexed by BellLabel, composed from the measurement
// operators of its steps.
std::array<Operator, 4> scheme_povm(Scheme scheme);
// Kraus operators P^xx_n P^zz_m of SchemeB, indexed by BellLabel.
std::array<Operator, 4> filter_operators();

std::array<double, 4> analytic_distribution(const StateVector& s, Scheme scheme);

using Histogram = std::array<std::uint64_t, 4>;

// Trial i draws from RngStream(seed).split(i), so the histogram does not
// depend on `workers`.
Histogram outcome_distribution(const StateVector& s, Scheme scheme, std::uint64_t trials,
                               std::uint64_t seed, unsigned workers = 1);

}  // namespace bellsim
