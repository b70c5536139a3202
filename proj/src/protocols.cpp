#include "bellsim/protocols.hpp"

#include <string>
#include <thread>

#include "bellsim/errors.hpp"

namespace bellsim {

namespace {

// Phase names of one measurement round, e.g. "S_zz/multiply".
struct RoundTags {
  explicit RoundTags(const SpinProduct& sp)
      : distribute(sp.name() + "/distribute-ebit"),
        cnot(sp.name() + "/local-cnot"),
        readout(sp.name() + "/meter-readout"),
        exchange(sp.name() + "/exchange-outcomes"),
        multiply(sp.name() + "/multiply"),
        local_readout(sp.name() + "/local-readout") {}

  std::string distribute;
  std::string cnot;
  std::string readout;
  std::string exchange;
  std::string multiply;
  std::string local_readout;
};

struct Round {
  explicit Round(Axis axis) : sp(axis, axis), tags(sp) {}
  SpinProduct sp;
  RoundTags tags;
};

const Round& round_of(Axis axis) {
  static const std::array<Round, 3> rounds{Round(Axis::X), Round(Axis::Y), Round(Axis::Z)};
  return rounds[static_cast<std::size_t>(axis)];
}

std::string_view basis_name(Axis axis) {
  static const std::array<std::string, 3> names{"to_z_from_x", "to_z_from_y", "to_z_from_z"};
  return names[static_cast<std::size_t>(axis)];
}

std::string_view basis_dag_name(Axis axis) {
  static const std::array<std::string, 3> names{"to_z_from_x_dag", "to_z_from_y_dag",
                                                "to_z_from_z_dag"};
  return names[static_cast<std::size_t>(axis)];
}

// Nonlocal measurement of one spin product, run as explicit phases.
class NonlocalRound {
 public:
  enum class Phase { DistributeEbit, LocalCnot, MeterReadout, ExchangeOutcomes, Multiply, Done };

  NonlocalRound(Session& session, const Round& round)
      : session_(session), sp_(round.sp), tags_(round.tags) {}

  MeasurementRecord run(RngStream& rng) {
    while (phase_ != Phase::Done) step(rng);
    return record_;
  }

 private:
  void step(RngStream& rng) {
    switch (phase_) {
      case Phase::DistributeEbit: {
        meter_ = session_.grant_ebit(tags_.distribute);
        phase_ = Phase::LocalCnot;
        break;
      }
      case Phase::LocalCnot: {
        couple(Party::Alice, Session::kAliceSystem, meter_[0], sp_.alice_axis());
        couple(Party::Bob, Session::kBobSystem, meter_[1], sp_.bob_axis());
        phase_ = Phase::MeterReadout;
        break;
      }
      case Phase::MeterReadout: {
        const std::string_view phase = tags_.readout;
        z_[0] = session_.measure_z(Party::Alice, meter_[0], rng, phase);
        z_[1] = session_.measure_z(Party::Bob, meter_[1], rng, phase);
        session_.discard(Party::Alice, meter_[0], phase);
        session_.discard(Party::Bob, meter_[1], phase);
        phase_ = Phase::ExchangeOutcomes;
        break;
      }
      case Phase::ExchangeOutcomes: {
        const std::string_view phase = tags_.exchange;
        session_.send(Party::Alice, {z_[0]}, phase);
        session_.send(Party::Bob, {z_[1]}, phase);
        remote_[1] = session_.receive(Party::Bob, phase).payload.at(0);
        remote_[0] = session_.receive(Party::Alice, phase).payload.at(0);
        phase_ = Phase::Multiply;
        break;
      }
      case Phase::Multiply: {
        const std::string_view phase = tags_.multiply;
        const Sign alice = session_.multiply(Party::Alice, z_[0], remote_[0], phase);
        const Sign bob = session_.multiply(Party::Bob, z_[1], remote_[1], phase);
        if (!(alice == bob)) throw InvariantError("parties disagree on the product outcome");
        record_.alice_axis = sp_.alice_axis();
        record_.bob_axis = sp_.bob_axis();
        record_.strategy = Strategy::Nonlocal;
        record_.z_a = z_[0];
        record_.z_b = z_[1];
        record_.m = alice;
        record_.ebits_consumed = 1;
        phase_ = Phase::Done;
        break;
      }
      case Phase::Done:
        break;
    }
  }

  // Basis change onto z, CNOT system -> meter, basis change back.
  void couple(Party party, Wire system, Wire meter, Axis axis) {
    const std::string_view phase = tags_.cnot;
    const bool rotate = axis != Axis::Z;
    if (rotate)
      session_.local_unitary(party, gates::to_z_basis(axis), {system}, basis_name(axis), phase);
    session_.local_unitary(party, gates::cnot(), {system, meter}, "cnot", phase);
    if (rotate)
      session_.local_unitary(party, gates::from_z_basis(axis), {system}, basis_dag_name(axis),
                             phase);
  }

  Session& session_;
  const SpinProduct& sp_;
  const RoundTags& tags_;
  Phase phase_ = Phase::DistributeEbit;
  std::array<Wire, 2> meter_{};
  std::array<Sign, 2> z_{};
  std::array<Sign, 2> remote_{};
  MeasurementRecord record_;
};

// Each party reads its own system qubit in its axis; the outcomes are then
// exchanged and multiplied.
MeasurementRecord local_round(Session& session, const Round& round, RngStream& rng) {
  const SpinProduct& sp = round.sp;
  const RoundTags& tags = round.tags;
  std::array<Sign, 2> z{};
  const std::array<Party, 2> parties{Party::Alice, Party::Bob};
  const std::array<Wire, 2> wires{Session::kAliceSystem, Session::kBobSystem};
  const std::array<Axis, 2> axes{sp.alice_axis(), sp.bob_axis()};
  for (std::size_t k = 0; k < 2; ++k) {
    const std::string_view phase = tags.local_readout;
    const bool rotate = axes[k] != Axis::Z;
    if (rotate)
      session.local_unitary(parties[k], gates::to_z_basis(axes[k]), {wires[k]},
                            basis_name(axes[k]), phase);
    z[k] = session.measure_z(parties[k], wires[k], rng, phase);
    if (rotate)
      session.local_unitary(parties[k], gates::from_z_basis(axes[k]), {wires[k]},
                            basis_dag_name(axes[k]), phase);
  }
  session.send(Party::Alice, {z[0]}, tags.exchange);
  session.send(Party::Bob, {z[1]}, tags.exchange);
  const Sign at_bob = session.receive(Party::Bob, tags.exchange).payload.at(0);
  const Sign at_alice = session.receive(Party::Alice, tags.exchange).payload.at(0);
  const Sign alice = session.multiply(Party::Alice, z[0], at_alice, tags.multiply);
  const Sign bob = session.multiply(Party::Bob, z[1], at_bob, tags.multiply);
  if (!(alice == bob)) throw InvariantError("parties disagree on the product outcome");

  MeasurementRecord record;
  record.alice_axis = sp.alice_axis();
  record.bob_axis = sp.bob_axis();
  record.strategy = Strategy::Local;
  record.z_a = z[0];
  record.z_b = z[1];
  record.m = alice;
  record.ebits_consumed = 0;
  return record;
}

std::size_t budget(Scheme scheme, const RunOptions& options) {
  return options.ebits_available.value_or(ebit_cost(scheme));
}

ProtocolResult finish(Session& session, Sign m, Sign n, std::vector<MeasurementRecord> records) {
  ProtocolResult result;
  result.m = m;
  result.n = n;
  result.label = classify(m, n);
  result.ledger = session.ledger();
  result.trace = session.take_trace();
  result.measurements = std::move(records);
  return result;
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Fig1:
      return "fig1";
    case Scheme::SchemeA:
      return "scheme_a";
    case Scheme::SchemeB:
      return "scheme_b";
    case Scheme::Photonic:
      return "photonic";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  for (auto scheme : kSchemes)
    if (to_string(scheme) == name) return scheme;
  return std::nullopt;
}

std::size_t ebit_cost(Scheme scheme) {
  switch (scheme) {
    case Scheme::Fig1:
      return 0;
    case Scheme::SchemeB:
      return 2;
    case Scheme::SchemeA:
    case Scheme::Photonic:
      break;
  }
  return 1;
}

bool preserves_state(Scheme scheme) { return scheme == Scheme::Fig1 || scheme == Scheme::SchemeB; }

StateVector fig1_output(BellLabel label) {
  const auto [m, n] = outcomes_of(label);
  // Alice's readout carries n, Bob's carries m.
  return StateVector::basis(2, 2 * n.bit() + m.bit());
}

ProtocolResult run_fig1(const StateVector& s, RngStream& rng, const RunOptions& options) {
  InMemoryChannel channel;
  Session session(s, budget(Scheme::Fig1, options), channel, options.record_trace);
  session.nonlocal_unitary(Party::Alice, gates::cnot(), {Session::kAliceSystem, Session::kBobSystem},
                           "cnot", "fig1/circuit");
  session.local_unitary(Party::Alice, gates::hadamard(), {Session::kAliceSystem}, "hadamard",
                        "fig1/circuit");
  const Sign a = session.measure_z(Party::Alice, Session::kAliceSystem, rng, "fig1/readout");
  const Sign b = session.measure_z(Party::Bob, Session::kBobSystem, rng, "fig1/readout");
  session.send(Party::Alice, {a}, "fig1/exchange-outcomes");
  session.send(Party::Bob, {b}, "fig1/exchange-outcomes");
  const Sign b_at_alice = session.receive(Party::Alice, "fig1/exchange-outcomes").payload.at(0);
  const Sign a_at_bob = session.receive(Party::Bob, "fig1/exchange-outcomes").payload.at(0);
  session.multiply(Party::Alice, a, b_at_alice, "fig1/decode");
  session.multiply(Party::Bob, b, a_at_bob, "fig1/decode");

  StateVector post = session.system_state();
  auto result = finish(session, b, a, {});
  result.post_state = std::move(post);
  return result;
}

ProtocolResult run_scheme_a(const StateVector& s, RngStream& rng, const RunOptions& options) {
  InMemoryChannel channel;
  Session session(s, budget(Scheme::SchemeA, options), channel, options.record_trace);
  const auto zz = NonlocalRound(session, round_of(Axis::Z)).run(rng);
  const auto xx = local_round(session, round_of(Axis::X), rng);
  return finish(session, zz.m, xx.m, {zz, xx});
}

ProtocolResult run_scheme_b(const StateVector& s, RngStream& rng, const RunOptions& options) {
  InMemoryChannel channel;
  Session session(s, budget(Scheme::SchemeB, options), channel, options.record_trace);
  const auto zz = NonlocalRound(session, round_of(Axis::Z)).run(rng);
  const auto xx = NonlocalRound(session, round_of(Axis::X)).run(rng);
  StateVector post = session.system_state();
  auto result = finish(session, zz.m, xx.m, {zz, xx});
  result.post_state = std::move(post);
  return result;
}

ProtocolResult run_photonic(const StateVector& s, RngStream& rng, const RunOptions& options) {
  ResourceLedger ledger{budget(Scheme::Photonic, options), 0};
  if (ledger.ebits_granted < 1) throw ResourceError("insufficient ebits");
  ledger.ebits_consumed = 1;

  const auto ports = detect(build_photonic_run(s), rng);
  const auto& [port_a, port_b] = ports;

  ProtocolResult result;
  result.m = port_a.z() * port_b.z();
  result.n = port_a.x() * port_b.x();
  result.label = photonic_label(ports);
  result.ledger = ledger;

  MeasurementRecord zz{Axis::Z, Axis::Z, Strategy::Nonlocal, port_a.z(), port_b.z(), result.m, 1};
  MeasurementRecord xx{Axis::X, Axis::X, Strategy::Local, port_a.x(), port_b.x(), result.n, 0};
  result.measurements = {zz, xx};

  if (options.record_trace) {
    // Describes the optical layout on the register wires; the amplitudes
    // come from build_photonic_run above.
    Trace& t = result.trace;
    auto push = [&t](TraceEvent e) {
      e.step = t.size();
      t.push_back(std::move(e));
    };
    push({0, EventKind::Input, std::nullopt, "polarization", {0, 1}, {Party::Alice, Party::Bob},
          std::nullopt, std::nullopt, "photonic/source"});
    push({0, EventKind::EbitGrant, std::nullopt, "path_phi_plus", {2, 3},
          {Party::Alice, Party::Bob}, std::nullopt, std::nullopt, "photonic/source"});
    const std::array<std::pair<Party, Photon>, 2> sides{std::pair{Party::Alice, Photon::A},
                                                        std::pair{Party::Bob, Photon::B}};
    for (const auto& [party, photon] : sides) {
      const auto q = PhotonRegister::of(photon);
      push({0, EventKind::Allocate, party, "path_plus", {q.path_x}, {party}, std::nullopt,
            std::nullopt, "photonic/source"});
      push({0, EventKind::Unitary, party, "pbs_z", {q.polarization, q.path_z}, {}, std::nullopt,
            std::nullopt, "photonic/optics"});
      push({0, EventKind::Unitary, party, "hwp", {q.polarization}, {}, std::nullopt, std::nullopt,
            "photonic/optics"});
      push({0, EventKind::Unitary, party, "pbs_x", {q.polarization, q.path_x}, {}, std::nullopt,
            std::nullopt, "photonic/optics"});
      const auto& port = photon == Photon::A ? port_a : port_b;
      push({0, EventKind::Measure, party, "detector_port", {q.polarization, q.path_z, q.path_x},
            {}, std::nullopt, static_cast<int>(port.port()), "photonic/detection"});
    }
    const ClassicalMessage to_bob{Party::Alice, Party::Bob, {port_a.z(), port_a.x()},
                                  "photonic/exchange-ports"};
    const ClassicalMessage to_alice{Party::Bob, Party::Alice, {port_b.z(), port_b.x()},
                                    "photonic/exchange-ports"};
    push({0, EventKind::Send, Party::Alice, "send", {}, {}, to_bob, std::nullopt, to_bob.step});
    push({0, EventKind::Send, Party::Bob, "send", {}, {}, to_alice, std::nullopt, to_alice.step});
    push({0, EventKind::Receive, Party::Bob, "receive", {}, {}, to_bob, std::nullopt, to_bob.step});
    push({0, EventKind::Receive, Party::Alice, "receive", {}, {}, to_alice, std::nullopt,
          to_alice.step});
    push({0, EventKind::Compute, Party::Alice, "decode", {}, {}, std::nullopt,
          static_cast<int>(index_of(result.label)), "photonic/decode"});
    push({0, EventKind::Compute, Party::Bob, "decode", {}, {}, std::nullopt,
          static_cast<int>(index_of(result.label)), "photonic/decode"});
  }
  return result;
}

ProtocolResult run_protocol(Scheme scheme, const StateVector& s, RngStream& rng,
                            const RunOptions& options) {
  switch (scheme) {
    case Scheme::Fig1:
      return run_fig1(s, rng, options);
    case Scheme::SchemeA:
      return run_scheme_a(s, rng, options);
    case Scheme::SchemeB:
      return run_scheme_b(s, rng, options);
    case Scheme::Photonic:
      break;
  }
  return run_photonic(s, rng, options);
}

std::array<Operator, 4> filter_operators() {
  std::array<Operator, 4> out;
  for (auto label : kBellLabels) {
    const auto [m, n] = outcomes_of(label);
    out[index_of(label)] = round_of(Axis::X).sp.projector(n) * round_of(Axis::Z).sp.projector(m);
  }
  return out;
}

std::array<Operator, 4> scheme_povm(Scheme scheme) {
  std::array<Operator, 4> povm{Operator(4), Operator(4), Operator(4), Operator(4)};
  switch (scheme) {
    case Scheme::Fig1: {
      const Operator circuit = kron(gates::hadamard(), gates::identity2()) * gates::cnot();
      for (auto label : kBellLabels) {
        const Operator readout = outer(fig1_output(label).amplitudes());
        povm[index_of(label)] = circuit.adjoint() * readout * circuit;
      }
      break;
    }
    case Scheme::SchemeA: {
      for (const auto& first : kraus_family(Strategy::Nonlocal, round_of(Axis::Z).sp))
        for (const auto& second : kraus_family(Strategy::Local, round_of(Axis::X).sp)) {
          const Operator k = second.matrix * first.matrix;
          povm[index_of(classify(first.label, second.label))] += k.adjoint() * k;
        }
      break;
    }
    case Scheme::SchemeB: {
      const auto kraus = filter_operators();
      for (std::size_t i = 0; i < 4; ++i) povm[i] = kraus[i].adjoint() * kraus[i];
      break;
    }
    case Scheme::Photonic:
      povm = photonic_povm();
      break;
  }
  return povm;
}

std::array<double, 4> analytic_distribution(const StateVector& s, Scheme scheme) {
  if (s.n_qubits() != 2) throw DomainError("expected a 2-qubit state");
  if (scheme == Scheme::Photonic) return photonic_label_distribution(s);
  const auto povm = scheme_povm(scheme);
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) out[i] = outcome_probability(s, povm[i]);
  return out;
}

Histogram outcome_distribution(const StateVector& s, Scheme scheme, std::uint64_t trials,
                               std::uint64_t seed, unsigned workers) {
  if (trials < 1) throw DomainError("trials must be at least 1");
  workers = std::max(1u, workers);
  const RngStream root(seed);
  RunOptions options;
  options.record_trace = false;

  std::vector<Histogram> partial(workers, Histogram{});
  auto shard = [&](unsigned w) {
    for (std::uint64_t i = w; i < trials; i += workers) {
      RngStream rng = root.split(i);
      ++partial[w][index_of(run_protocol(scheme, s, rng, options).label)];
    }
  };
  if (workers == 1) {
    shard(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(shard, w);
  }

  Histogram total{};
  for (const auto& h : partial)
    for (std::size_t i = 0; i < 4; ++i) total[i] += h[i];
  return total;
}

}  // namespace bellsim
