#include "bellsim/locc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bellsim/bellcore.hpp"
#include "bellsim/errors.hpp"
#include "bellsim/measure.hpp"

namespace bellsim {

using nlohmann::json;

namespace {

constexpr std::array<EventKind, 9> kEventKinds = {
    EventKind::Input,   EventKind::EbitGrant, EventKind::Allocate,
    EventKind::Unitary, EventKind::Measure,   EventKind::Send,
    EventKind::Receive, EventKind::Compute,   EventKind::Discard};

[[noreturn]] void malformed(std::size_t step, const std::string& what) {
  throw DomainError("malformed trace: step " + std::to_string(step) + ": " + what);
}

std::string wire_list(const std::vector<Wire>& wires) {
  std::string out = "{";
  for (std::size_t i = 0; i < wires.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(wires[i]);
  }
  return out + "}";
}

}  // namespace

std::string_view to_string(Party party) { return party == Party::Alice ? "Alice" : "Bob"; }

std::optional<Party> parse_party(std::string_view name) {
  if (name == "Alice") return Party::Alice;
  if (name == "Bob") return Party::Bob;
  return std::nullopt;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Input:
      return "input";
    case EventKind::EbitGrant:
      return "ebit";
    case EventKind::Allocate:
      return "allocate";
    case EventKind::Unitary:
      return "unitary";
    case EventKind::Measure:
      return "measure";
    case EventKind::Send:
      return "send";
    case EventKind::Receive:
      return "receive";
    case EventKind::Compute:
      return "compute";
    case EventKind::Discard:
      return "discard";
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (auto kind : kEventKinds)
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

// ---------------------------------------------------------------- channel

void InMemoryChannel::send(ClassicalMessage message) {
  inbox_[static_cast<std::size_t>(message.to)].queue.push_back(std::move(message));
}

std::optional<ClassicalMessage> InMemoryChannel::receive(Party recipient) {
  auto& box = inbox_[static_cast<std::size_t>(recipient)];
  if (box.head == box.queue.size()) return std::nullopt;
  ClassicalMessage front = std::move(box.queue[box.head++]);
  if (box.head == box.queue.size()) {
    box.queue.clear();
    box.head = 0;
  }
  return front;
}

std::size_t InMemoryChannel::pending(Party recipient) const {
  const auto& box = inbox_[static_cast<std::size_t>(recipient)];
  return box.queue.size() - box.head;
}

// ---------------------------------------------------------------- audit

AuditReport locc_audit(const Trace& trace) {
  AuditReport report;
  std::map<Wire, Party> live;
  std::set<Wire> seen;
  std::array<std::deque<ClassicalMessage>, 2> in_flight;
  // Messages received and not yet used by a Compute step.
  std::array<std::size_t, 2> unused_messages{};
  std::optional<std::size_t> last_step;

  auto violation = [&](std::size_t step, const std::string& what) {
    report.pass = false;
    report.violations.push_back("step " + std::to_string(step) + ": " + what);
  };
  auto require_party = [](const TraceEvent& e) {
    if (!e.party) malformed(e.step, std::string(to_string(e.kind)) + " without acting party");
    return *e.party;
  };
  auto require_live = [&](const TraceEvent& e) {
    if (e.wires.empty()) malformed(e.step, "no wires");
    for (Wire w : e.wires)
      if (!live.count(w)) malformed(e.step, "wire " + std::to_string(w) + " is not live");
  };
  auto introduce = [&](const TraceEvent& e) {
    if (e.wires.empty() || e.owners.size() != e.wires.size())
      malformed(e.step, "wire/owner lists disagree");
    for (std::size_t i = 0; i < e.wires.size(); ++i) {
      if (!seen.insert(e.wires[i]).second)
        malformed(e.step, "wire " + std::to_string(e.wires[i]) + " introduced twice");
      live.emplace(e.wires[i], e.owners[i]);
    }
  };

  for (const auto& e : trace) {
    if (last_step && e.step <= *last_step) malformed(e.step, "steps out of order");
    last_step = e.step;

    switch (e.kind) {
      case EventKind::Input:
        introduce(e);
        break;
      case EventKind::EbitGrant:
        if (e.wires.size() != 2 || e.owners.size() != 2 || e.owners[0] == e.owners[1])
          malformed(e.step, "an ebit is one wire for each party");
        introduce(e);
        break;
      case EventKind::Allocate: {
        const Party p = require_party(e);
        introduce(e);
        for (Party owner : e.owners)
          if (owner != p) violation(e.step, "ancilla allocated for the other party");
        break;
      }
      case EventKind::Unitary: {
        const Party p = require_party(e);
        require_live(e);
        bool alice = false;
        bool bob = false;
        for (Wire w : e.wires) (live.at(w) == Party::Alice ? alice : bob) = true;
        if (alice && bob) {
          ++report.nonlocal_gates;
          violation(e.step, "gate " + e.op + " on wires " + wire_list(e.wires) +
                                " spans both parties");
        } else if ((alice ? Party::Alice : Party::Bob) != p) {
          violation(e.step, std::string(to_string(p)) + " applies " + e.op +
                                " to the other party's wires " + wire_list(e.wires));
        }
        break;
      }
      case EventKind::Measure:
      case EventKind::Discard: {
        const Party p = require_party(e);
        require_live(e);
        if (e.kind == EventKind::Measure && !e.outcome) malformed(e.step, "measurement without outcome");
        for (Wire w : e.wires) {
          if (live.at(w) != p)
            violation(e.step, std::string(to_string(p)) + " touches wire " + std::to_string(w) +
                                  " owned by " + std::string(to_string(live.at(w))));
        }
        if (e.kind == EventKind::Discard)
          for (Wire w : e.wires) live.erase(w);
        break;
      }
      case EventKind::Send: {
        const Party p = require_party(e);
        if (!e.message) malformed(e.step, "send without message");
        if (e.message->from == e.message->to) malformed(e.step, "message addressed to its sender");
        if (e.message->from != p) violation(e.step, "message sent on behalf of the other party");
        in_flight[static_cast<std::size_t>(e.message->to)].push_back(*e.message);
        break;
      }
      case EventKind::Receive: {
        const Party p = require_party(e);
        if (!e.message) malformed(e.step, "receive without message");
        auto& queue = in_flight[static_cast<std::size_t>(p)];
        if (e.message->to != p) {
          violation(e.step, "message received by a party it was not addressed to");
        } else if (queue.empty() || !(queue.front() == *e.message)) {
          violation(e.step, "received message was never sent");
        } else {
          queue.pop_front();
          ++unused_messages[static_cast<std::size_t>(p)];
        }
        break;
      }
      case EventKind::Compute: {
        // Every local computation combines an outcome from the peer, which
        // must have arrived as a message.
        const Party p = require_party(e);
        auto& unused = unused_messages[static_cast<std::size_t>(p)];
        if (unused == 0) {
          violation(e.step, std::string(to_string(p)) + " computes " + e.op +
                                " without a message from the other party");
        } else {
          --unused;
        }
        break;
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------- JSONL

namespace {

json message_to_json(const ClassicalMessage& m) {
  json payload = json::array();
  for (Sign s : m.payload) payload.push_back(s.value());
  return {{"from", to_string(m.from)}, {"to", to_string(m.to)}, {"payload", payload},
          {"step", m.step}};
}

Party party_from_json(const json& j) {
  auto p = parse_party(j.get<std::string>());
  if (!p) throw DomainError("malformed trace: unknown party " + j.dump());
  return *p;
}

ClassicalMessage message_from_json(const json& j) {
  ClassicalMessage m;
  m.from = party_from_json(j.at("from"));
  m.to = party_from_json(j.at("to"));
  for (const auto& v : j.at("payload")) m.payload.emplace_back(v.get<int>());
  m.step = j.at("step").get<std::string>();
  return m;
}

}  // namespace

std::string trace_to_jsonl(const Trace& trace, std::optional<std::uint64_t> run) {
  std::string out;
  for (const auto& e : trace) {
    json j;
    if (run) j["run"] = *run;
    j["step"] = e.step;
    j["kind"] = to_string(e.kind);
    j["party"] = e.party ? json(to_string(*e.party)) : json(nullptr);
    j["op"] = e.op;
    j["qubits"] = e.wires;
    if (!e.owners.empty()) {
      json owners = json::array();
      for (Party p : e.owners) owners.push_back(to_string(p));
      j["owners"] = owners;
    }
    if (e.message) j["message"] = message_to_json(*e.message);
    if (e.outcome) j["outcome"] = *e.outcome;
    j["phase"] = e.phase;
    out += j.dump();
    out += '\n';
  }
  return out;
}

Trace trace_from_jsonl(std::string_view text) {
  Trace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      TraceEvent e;
      e.step = j.at("step").get<std::size_t>();
      auto kind = parse_event_kind(j.at("kind").get<std::string>());
      if (!kind) throw DomainError("unknown event kind");
      e.kind = *kind;
      if (!j.at("party").is_null()) e.party = party_from_json(j.at("party"));
      e.op = j.at("op").get<std::string>();
      e.wires = j.at("qubits").get<std::vector<Wire>>();
      if (j.contains("owners"))
        for (const auto& o : j.at("owners")) e.owners.push_back(party_from_json(o));
      if (j.contains("message")) e.message = message_from_json(j.at("message"));
      if (j.contains("outcome")) e.outcome = j.at("outcome").get<int>();
      e.phase = j.value("phase", "");
      trace.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw DomainError("malformed trace: line " + std::to_string(line_no) + ": " + ex.what());
    } catch (const DomainError& ex) {
      throw DomainError("malformed trace: line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return trace;
}

// ---------------------------------------------------------------- Session

Session::Session(const StateVector& system, std::size_t ebit_budget, Transport& transport,
                 bool record_trace)
    : transport_(transport), record_trace_(record_trace) {
  if (system.n_qubits() != 2) throw DomainError("expected a 2-qubit state");
  amplitudes_.reserve(std::size_t{1} << 4);
  amplitudes_.assign(system.amplitudes().begin(), system.amplitudes().end());
  ledger_.ebits_granted = ebit_budget;
  owner_ = {Party::Alice, Party::Bob};
  readout_.resize(2);
  layout_ = {kAliceSystem, kBobSystem};
  if (record_trace_) {
    TraceEvent e;
    e.kind = EventKind::Input;
    e.op = "system";
    e.wires = {kAliceSystem, kBobSystem};
    e.owners = {Party::Alice, Party::Bob};
    e.phase = "input";
    record(std::move(e));
  }
}

std::size_t Session::position(Wire wire) const {
  auto it = std::find(layout_.begin(), layout_.end(), wire);
  if (it == layout_.end()) throw DomainError("wire " + std::to_string(wire) + " is not live");
  return static_cast<std::size_t>(it - layout_.begin());
}

std::size_t Session::mask_of(Wire wire) const {
  return std::size_t{1} << (layout_.size() - 1 - position(wire));
}

Party Session::owner(Wire wire) const {
  if (wire >= owner_.size()) throw DomainError("unknown wire " + std::to_string(wire));
  return owner_[wire];
}

void Session::check_owner(Party party, Wire wire) const {
  if (owner(wire) != party)
    throw DomainError(std::string(to_string(party)) + " does not own wire " + std::to_string(wire));
}

void Session::record(TraceEvent event) {
  if (!record_trace_) return;
  event.step = trace_.size();
  trace_.push_back(std::move(event));
}

void Session::apply(const Operator& u, std::span<const Wire> wires) {
  constexpr std::size_t kInline = 4;
  std::array<std::size_t, kInline> inline_pos{};
  std::vector<std::size_t> heap_pos;
  std::span<std::size_t> pos(inline_pos.data(), std::min(wires.size(), kInline));
  if (wires.size() > kInline) {
    heap_pos.resize(wires.size());
    pos = heap_pos;
  }
  for (std::size_t j = 0; j < wires.size(); ++j) pos[j] = position(wires[j]);
  apply_operator_in_place(amplitudes_, u, pos);
  for (Wire w : wires) readout_[w].reset();
}

std::array<Wire, 2> Session::grant_ebit(std::string_view phase) {
  if (ledger_.ebits_consumed >= ledger_.ebits_granted) throw ResourceError("insufficient ebits");
  ++ledger_.ebits_consumed;
  const Wire a = owner_.size();
  const Wire b = a + 1;
  owner_.push_back(Party::Alice);
  owner_.push_back(Party::Bob);
  readout_.resize(owner_.size());
  layout_.push_back(a);
  layout_.push_back(b);
  // |psi> (x) (|00> + |11>)/sqrt(2), filled back to front.
  const std::size_t d = amplitudes_.size();
  amplitudes_.resize(4 * d);
  for (std::size_t i = d; i-- > 0;) {
    const Complex v = amplitudes_[i] * (1.0 / std::numbers::sqrt2);
    amplitudes_[4 * i] = v;
    amplitudes_[4 * i + 1] = 0.0;
    amplitudes_[4 * i + 2] = 0.0;
    amplitudes_[4 * i + 3] = v;
  }
  if (record_trace_) {
    TraceEvent e;
    e.kind = EventKind::EbitGrant;
    e.op = "phi_plus";
    e.wires = {a, b};
    e.owners = {Party::Alice, Party::Bob};
    e.phase = std::string(phase);
    record(std::move(e));
  }
  return {a, b};
}

Wire Session::allocate(Party party, std::string_view phase) {
  const Wire w = owner_.size();
  owner_.push_back(party);
  readout_.resize(owner_.size());
  layout_.push_back(w);
  const std::size_t d = amplitudes_.size();
  amplitudes_.resize(2 * d);
  for (std::size_t i = d; i-- > 0;) {
    amplitudes_[2 * i] = amplitudes_[i];
    amplitudes_[2 * i + 1] = 0.0;
  }
  if (record_trace_) {
    TraceEvent e;
    e.kind = EventKind::Allocate;
    e.party = party;
    e.op = "zero";
    e.wires = {w};
    e.owners = {party};
    e.phase = std::string(phase);
    record(std::move(e));
  }
  return w;
}

void Session::local_unitary(Party party, const Operator& u, std::span<const Wire> wires,
                            std::string_view name, std::string_view phase) {
  for (Wire w : wires) check_owner(party, w);
  nonlocal_unitary(party, u, wires, name, phase);
}

void Session::nonlocal_unitary(Party actor, const Operator& u, std::span<const Wire> wires,
                               std::string_view name, std::string_view phase) {
  apply(u, wires);
  if (record_trace_) {
    TraceEvent e;
    e.kind = EventKind::Unitary;
    e.party = actor;
    e.op = std::string(name);
    e.wires.assign(wires.begin(), wires.end());
    e.phase = std::string(phase);
    record(std::move(e));
  }
}

Sign Session::measure_z(Party party, Wire wire, RngStream& rng, std::string_view phase) {
  check_owner(party, wire);
  const std::size_t mask = mask_of(wire);
  std::array<double, 2> weight{};
  for (std::size_t i = 0; i < amplitudes_.size(); ++i)
    weight[(i & mask) ? 1 : 0] += std::norm(amplitudes_[i]);
  const unsigned bit = sample_bit(weight[0], rng);
  const double scale = 1.0 / std::sqrt(weight[bit]);
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    if (((i & mask) != 0) == (bit == 1)) {
      amplitudes_[i] *= scale;
    } else {
      amplitudes_[i] = 0.0;
    }
  }
  readout_[wire] = bit;

  const Sign outcome = Sign::from_bit(bit);
  if (record_trace_) {
    TraceEvent e;
    e.kind = EventKind::Measure;
    e.party = party;
    e.op = "sigma_z";
    e.wires = {wire};
    e.outcome = outcome.value();
    e.phase = std::string(phase);
    record(std::move(e));
  }
  return outcome;
}

void Session::discard(Party party, Wire wire, std::string_view phase) {
  check_owner(party, wire);
  if (!readout_[wire]) throw DomainError("wire " + std::to_string(wire) + " was not read out");
  const std::size_t pos = position(wire);
  const std::size_t mask = mask_of(wire);
  const std::size_t value = *readout_[wire] ? mask : 0;
  const std::size_t low = mask - 1;
  double leaked = 0.0;
  double kept = 0.0;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    if ((i & mask) == value) {
      kept += std::norm(amplitudes_[i]);
      // Remove bit `mask` from the index; the target slot is never ahead of i.
      amplitudes_[((i >> 1) & ~low) | (i & low)] = amplitudes_[i];
    } else {
      leaked += std::norm(amplitudes_[i]);
    }
  }
  if (leaked > kTolerance) throw DomainError("discarded qubits are not in the stated basis state");
  amplitudes_.resize(amplitudes_.size() / 2);
  const double scale = 1.0 / std::sqrt(kept);
  for (auto& a : amplitudes_) a *= scale;
  layout_.erase(layout_.begin() + static_cast<std::ptrdiff_t>(pos));
  if (record_trace_) {
    TraceEvent e;
    e.kind = EventKind::Discard;
    e.party = party;
    e.op = "trace_out";
    e.wires = {wire};
    e.phase = std::string(phase);
    record(std::move(e));
  }
}

void Session::send(Party from, Payload payload, std::string_view phase) {
  ClassicalMessage m{from, peer_of(from), std::move(payload), std::string(phase)};
  if (record_trace_) {
    TraceEvent e;
    e.kind = EventKind::Send;
    e.party = from;
    e.op = "send";
    e.message = m;
    e.phase = std::string(phase);
    record(std::move(e));
  }
  transport_.send(std::move(m));
}

ClassicalMessage Session::receive(Party recipient, std::string_view phase) {
  auto m = transport_.receive(recipient);
  if (!m) throw InvariantError(std::string(to_string(recipient)) + " has no message waiting");
  if (record_trace_) {
    TraceEvent e;
    e.kind = EventKind::Receive;
    e.party = recipient;
    e.op = "receive";
    e.message = *m;
    e.phase = std::string(phase);
    record(std::move(e));
  }
  return std::move(*m);
}

Sign Session::multiply(Party party, Sign own, Sign remote, std::string_view phase) {
  const Sign product = own * remote;
  if (record_trace_) {
    TraceEvent e;
    e.kind = EventKind::Compute;
    e.party = party;
    e.op = "multiply";
    e.outcome = product.value();
    e.phase = std::string(phase);
    record(std::move(e));
  }
  return product;
}

StateVector Session::system_state() const {
  if (layout_.size() != 2 || layout_[0] != kAliceSystem || layout_[1] != kBobSystem)
    throw InvariantError("ancilla wires are still attached to the system");
  return StateVector(amplitudes_);
}

}  // namespace bellsim
