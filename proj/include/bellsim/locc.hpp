// Two-party LOCC engine.
//
// A Session owns the joint register of Alice's and Bob's qubits. Every qubit
// is a wire with a fixed owner. Parties act on the register through the
// session, which records each step in a trace: inputs and shared ebits
// entering the register, gates, readouts, classical messages and local
// classical computation. locc_audit() replays a trace and checks that no
// gate spans both parties and that remote outcomes only arrive by message.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "bellsim/qstate.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

enum class Party { Alice, Bob };

std::string_view to_string(Party party);
std::optional<Party> parse_party(std::string_view name);
constexpr Party peer_of(Party p) { return p == Party::Alice ? Party::Bob : Party::Alice; }

using Wire = std::size_t;
using Payload = boost::container::small_vector<Sign, 2>;

struct ClassicalMessage {
  Party from = Party::Alice;
  Party to = Party::Bob;
  Payload payload;
  std::string step;

  friend bool operator==(const ClassicalMessage&, const ClassicalMessage&) = default;
};

// Delivery boundary for classical messages.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(ClassicalMessage message) = 0;
  virtual std::optional<ClassicalMessage> receive(Party recipient) = 0;
};

// Ordered, reliable, in-process delivery.
class InMemoryChannel final : public Transport {
 public:
  void send(ClassicalMessage message) override;
  std::optional<ClassicalMessage> receive(Party recipient) override;
  std::size_t pending(Party recipient) const;

 private:
  struct Inbox {
    boost::container::small_vector<ClassicalMessage, 2> queue;
    std::size_t head = 0;
  };
  std::array<Inbox, 2> inbox_;
};

enum class EventKind {
  Input,      // system qubits handed to the parties
  EbitGrant,  // one shared |Phi+> pair, one wire per party
  Allocate,   // fresh local ancilla
  Unitary,
  Measure,
  Send,
  Receive,
  Compute,
  Discard,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct TraceEvent {
  std::size_t step = 0;
  EventKind kind = EventKind::Unitary;
  // Acting party. Absent for Input and EbitGrant, which come from outside.
  std::optional<Party> party;
  std::string op;
  std::vector<Wire> wires;
  // Input, EbitGrant and Allocate: the owner of each listed wire.
  std::vector<Party> owners;
  std::optional<ClassicalMessage> message;
  std::optional<int> outcome;
  std::string phase;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Trace = std::vector<TraceEvent>;

struct AuditReport {
  bool pass = true;
  std::vector<std::string> violations;
  // Gates whose wires belong to more than one party.
  std::size_t nonlocal_gates = 0;
};

// Throws DomainError("malformed trace: ...") when the trace cannot be replayed.
AuditReport locc_audit(const Trace& trace);

// One JSON object per line. When `run` is given every line carries it, so
// traces of several runs can share a file.
std::string trace_to_jsonl(const Trace& trace, std::optional<std::uint64_t> run = std::nullopt);
// Reads one run's events; a "run" field, if present, is ignored.
Trace trace_from_jsonl(std::string_view text);

struct ResourceLedger {
  std::size_t ebits_granted = 0;
  std::size_t ebits_consumed = 0;

  friend bool operator==(const ResourceLedger&, const ResourceLedger&) = default;
};

class Session {
 public:
  static constexpr Wire kAliceSystem = 0;
  static constexpr Wire kBobSystem = 1;

  // `system` is a 2-qubit state; qubit 0 goes to Alice, qubit 1 to Bob.
  Session(const StateVector& system, std::size_t ebit_budget, Transport& transport,
          bool record_trace = true);

  // Appends a fresh |Phi+> pair. Throws ResourceError("insufficient ebits")
  // once the budget is spent. Returns {Alice's wire, Bob's wire}.
  std::array<Wire, 2> grant_ebit(std::string_view phase);
  // Appends a local |0> ancilla.
  Wire allocate(Party party, std::string_view phase);

  // Throws DomainError if a wire is not owned by `party`.
  void local_unitary(Party party, const Operator& u, std::span<const Wire> wires,
                     std::string_view name, std::string_view phase);
  void local_unitary(Party party, const Operator& u, std::initializer_list<Wire> wires,
                     std::string_view name, std::string_view phase) {
    local_unitary(party, u, std::span<const Wire>(wires.begin(), wires.size()), name, phase);
  }
  // Gate across both parties' wires. Allowed so that non-LOCC baselines can
  // run, and recorded so the audit flags it.
  void nonlocal_unitary(Party actor, const Operator& u, std::span<const Wire> wires,
                        std::string_view name, std::string_view phase);
  void nonlocal_unitary(Party actor, const Operator& u, std::initializer_list<Wire> wires,
                        std::string_view name, std::string_view phase) {
    nonlocal_unitary(actor, u, std::span<const Wire>(wires.begin(), wires.size()), name, phase);
  }

  Sign measure_z(Party party, Wire wire, RngStream& rng, std::string_view phase);
  // Drops a wire that has been read out.
  void discard(Party party, Wire wire, std::string_view phase);

  void send(Party from, Payload payload, std::string_view phase);
  // Throws InvariantError if nothing is waiting for `recipient`.
  ClassicalMessage receive(Party recipient, std::string_view phase);
  Sign multiply(Party party, Sign own, Sign remote, std::string_view phase);

  Party owner(Wire wire) const;
  bool recording() const { return record_trace_; }
  // Joint state of every live wire, in order of allocation.
  StateVector state() const { return StateVector(amplitudes_); }
  // Joint state of the two system wires; every other wire must be discarded.
  StateVector system_state() const;

  const Trace& trace() const { return trace_; }
  Trace take_trace() { return std::move(trace_); }
  const ResourceLedger& ledger() const { return ledger_; }

 private:
  std::size_t position(Wire wire) const;
  std::size_t mask_of(Wire wire) const;
  void check_owner(Party party, Wire wire) const;
  void apply(const Operator& u, std::span<const Wire> wires);
  void record(TraceEvent event);

  std::vector<Complex> amplitudes_;
  Transport& transport_;
  bool record_trace_;
  ResourceLedger ledger_;
  template <class T>
  using WireTable = boost::container::small_vector<T, 6>;

  WireTable<Party> owner_;                     // by wire
  WireTable<std::optional<unsigned>> readout_;  // by wire
  WireTable<Wire> layout_;                      // register position -> wire
  Trace trace_;
};

}  // namespace bellsim
