#include "bellsim/verify.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include <json.hpp>

#include "bellsim/bellcore.hpp"
#include "bellsim/locc.hpp"
#include "bellsim/measure.hpp"
#include "bellsim/photonic.hpp"
#include "bellsim/protocols.hpp"
#include "bellsim/qstate.hpp"
#include "bellsim/rng.hpp"

namespace bellsim {

namespace {

using nlohmann::json;

constexpr std::size_t kRandomStates = 200;
constexpr std::array<Axis, 3> kAxes = {Axis::X, Axis::Y, Axis::Z};

json state_json(const StateVector& s) {
  json out = json::array();
  for (const auto& a : s.amplitudes()) out.push_back({a.real(), a.imag()});
  return out;
}

class Group {
 public:
  explicit Group(std::string name) { result_.name = std::move(name); }

  // Records one check; the first failure becomes the counterexample.
  bool check(bool ok, const std::string& what, const std::function<json()>& detail = {}) {
    ++result_.checks;
    if (!ok && result_.pass) {
      result_.pass = false;
      json ce{{"group", result_.name}, {"check", what}};
      if (detail) ce["detail"] = detail();
      result_.counterexample = ce.dump();
    }
    return ok;
  }

  void note(std::string line) { result_.notes.push_back(std::move(line)); }
  GroupResult done() { return std::move(result_); }

 private:
  GroupResult result_;
};

GroupResult check_qstate(RngStream& rng) {
  Group g("qstate");
  for (std::size_t t = 0; t < kRandomStates; ++t) {
    const StateVector s = haar_random_state(3, rng);
    const std::size_t k = 1 + t % 2;
    const Operator u = haar_random_unitary(k, rng);
    std::vector<std::size_t> targets = k == 1 ? std::vector<std::size_t>{t % 3}
                                              : std::vector<std::size_t>{t % 3, (t + 1) % 3};
    const StateVector out = apply_unitary(s, u, targets);
    g.check(std::abs(out.norm() - s.norm()) <= kTolerance, "norm preserved by unitary",
            [&] { return json{{"state", state_json(s)}, {"norm_out", out.norm()}}; });
  }
  for (std::size_t t = 0; t < 50; ++t) {
    const auto a = haar_random_state(1, rng);
    const auto b = haar_random_state(2, rng);
    const auto c = haar_random_state(1, rng);
    const auto left = tensor(tensor(a, b), c);
    const auto right = tensor(a, tensor(b, c));
    double diff = 0.0;
    for (std::size_t k = 0; k < left.dim(); ++k) diff = std::max(diff, std::abs(left[k] - right[k]));
    g.check(diff <= 1e-15, "tensor associativity (rounding only)");
  }
  {
    // Dyadic amplitudes multiply without rounding, so here the match is exact.
    const StateVector a({Complex{0.5, 0.5}, Complex{0.5, -0.5}});
    const StateVector b({0.5, Complex{0.0, 0.5}, -0.5, Complex{0.0, -0.5}});
    const StateVector c({Complex{0.0, 1.0}, 0.0});
    g.check(tensor(tensor(a, b), c) == tensor(a, tensor(b, c)), "tensor associativity (exact)");
  }
  const Complex i{0.0, 1.0};
  for (Axis axis : kAxes)
    g.check(max_abs_diff(gates::pauli(axis) * gates::pauli(axis), gates::identity2()) <= 1e-15,
            std::string("sigma_") + axis_name(axis) + " squares to I");
  g.check(max_abs_diff(gates::pauli(Axis::X) * gates::pauli(Axis::Y), i * gates::pauli(Axis::Z)) <= 1e-15,
          "sigma_x sigma_y = i sigma_z");
  g.check(max_abs_diff(gates::pauli(Axis::Y) * gates::pauli(Axis::Z), i * gates::pauli(Axis::X)) <= 1e-15,
          "sigma_y sigma_z = i sigma_x");
  g.check(max_abs_diff(gates::pauli(Axis::Z) * gates::pauli(Axis::X), i * gates::pauli(Axis::Y)) <= 1e-15,
          "sigma_z sigma_x = i sigma_y");
  return g.done();
}

GroupResult check_bellcore(RngStream& rng) {
  Group g("bellcore");
  const SpinProduct zz(Axis::Z, Axis::Z);
  const SpinProduct xx(Axis::X, Axis::X);
  for (auto label : kBellLabels) {
    const auto s = bell_state(label);
    const auto [m, n] = outcomes_of(label);
    const std::array<std::size_t, 2> both{0, 1};
    for (const auto& [sp, ev] : {std::pair{&zz, m}, std::pair{&xx, n}}) {
      const auto image = apply_operator(s.amplitudes(), sp->matrix(), both);
      double residual = 0.0;
      for (std::size_t k = 0; k < 4; ++k) residual = std::max(residual, std::abs(image[k] - static_cast<double>(ev.value()) * s[k]));
      g.check(residual < kTolerance, std::string(to_string(label)) + " is a " + sp->name() + " eigenvector",
              [&] { return json{{"residual", residual}}; });
    }
    g.check(classify(m, n) == label, "classify inverts outcomes_of");
  }
  for (Axis a : kAxes)
    for (Axis b : kAxes) {
      const SpinProduct sp(a, b);
      const auto& p = sp.projector(Sign::plus());
      const auto& q = sp.projector(Sign::minus());
      g.check(max_abs_diff(p + q, Operator::identity(4)) <= kTolerance, sp.name() + " P+ + P- = I");
      g.check((p * q).max_abs() <= kTolerance, sp.name() + " P+ P- = 0");
      g.check(max_abs_diff(p * p, p) <= kTolerance, sp.name() + " P+ idempotent");
    }
  for (std::size_t t = 0; t < kRandomStates; ++t) {
    const auto s = haar_random_state(2, rng);
    const auto c = to_bell(s);
    g.check(std::abs(c.squared_norm() - 1.0) <= kTolerance, "Bell coefficients normalized");
    g.check(equal_up_to_phase(from_bell(c), s), "from_bell(to_bell(s)) = s",
            [&] { return json{{"state", state_json(s)}}; });
  }
  return g.done();
}

GroupResult check_commutators() {
  Group g("commutators");
  std::size_t pairs = 0;
  for (Axis i : kAxes)
    for (Axis j : kAxes) {
      const SpinProduct a(i, i);
      const SpinProduct b(j, j);
      const Operator c = commutator(a.matrix(), b.matrix());
      g.check(c.max_abs() <= 1e-15, "[" + a.name() + ", " + b.name() + "] = 0",
              [&] { return json{{"max_abs", c.max_abs()}}; });
      ++pairs;
    }
  g.note("[S_ii, S_jj] = 0 for " + std::to_string(pairs) + " (i, j) pairs");
  return g.done();
}

GroupResult check_measure(RngStream& rng) {
  Group g("measure");
  for (Axis a : kAxes)
    for (Axis b : kAxes) {
      const SpinProduct sp(a, b);
      const auto local = povm_family(Strategy::Local, sp);
      const auto nonlocal = povm_family(Strategy::Nonlocal, sp);
      for (std::size_t k = 0; k < 2; ++k)
        g.check(max_abs_diff(local[k].matrix, nonlocal[k].matrix) <= kTolerance,
                sp.name() + " local and nonlocal POVMs agree");
      for (auto strategy : {Strategy::Local, Strategy::Nonlocal}) {
        Operator sum(4);
        for (const auto& k : kraus_family(strategy, sp)) sum += k.matrix.adjoint() * k.matrix;
        g.check(max_abs_diff(sum, Operator::identity(4)) <= kTolerance,
                sp.name() + " " + std::string(to_string(strategy)) + " Kraus completeness");
      }
    }

  const SpinProduct zz(Axis::Z, Axis::Z);
  const auto kraus = kraus_family(Strategy::Nonlocal, zz);
  const std::array<std::size_t, 2> both{0, 1};
  for (std::size_t t = 0; t < kRandomStates; ++t) {
    const auto s = haar_random_state(2, rng);
    const auto out = nonlocal_product_measurement(s, zz, rng);
    const auto& m = kraus[out.record.m.bit()].matrix;
    const auto image = make_state(apply_operator(s.amplitudes(), m, both)).state;
    g.check(equal_up_to_phase(out.post, image), "post = M s / |M s|",
            [&] { return json{{"state", state_json(s)}, {"m", out.record.m.value()}}; });
    g.check(out.record.m == out.record.z_a * out.record.z_b && out.record.ebits_consumed == 1,
            "record fields consistent");
  }

  const auto s = haar_random_state(2, rng);
  std::vector<MeasurementRecord> first;
  std::vector<MeasurementRecord> second;
  RngStream r1(99);
  RngStream r2(99);
  for (int k = 0; k < 100; ++k) {
    first.push_back(nonlocal_product_measurement(s, zz, r1).record);
    second.push_back(nonlocal_product_measurement(s, zz, r2).record);
  }
  g.check(first == second, "same seed gives identical records");
  return g.done();
}

GroupResult check_protocols(RngStream& rng) {
  Group g("protocols");
  const auto filter = filter_operators();
  const auto povm_a = scheme_povm(Scheme::SchemeA);
  for (auto label : kBellLabels) {
    const auto proj = bell_projector(label);
    g.check(max_abs_diff(povm_a[index_of(label)], proj) <= kTolerance,
            "scheme_a POVM element " + std::string(to_string(label)) + " is its Bell projector");
    g.check(max_abs_diff(filter[index_of(label)], proj) <= kTolerance,
            "filter operator " + std::string(to_string(label)) + " is its Bell projector");
  }
  for (std::size_t t = 0; t < kRandomStates; ++t) {
    const auto s = haar_random_state(2, rng);
    const auto c = to_bell(s);
    for (auto scheme : {Scheme::Fig1, Scheme::SchemeA, Scheme::SchemeB}) {
      const auto p = analytic_distribution(s, scheme);
      double worst = 0.0;
      for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(p[k] - std::norm(c[k])));
      g.check(worst <= kTolerance, std::string(to_string(scheme)) + " P(label) = |c|^2",
              [&] { return json{{"state", state_json(s)}, {"error", worst}}; });
    }
    if (t % 10 == 0) {
      const auto once = run_scheme_b(s, rng);
      const auto twice = run_scheme_b(*once.post_state, rng);
      g.check(once.label == twice.label && equal_up_to_phase(*once.post_state, *twice.post_state),
              "filter idempotence", [&] { return json{{"state", state_json(s)}}; });
      g.check(fidelity(*once.post_state, bell_state(once.label)) >= 1.0 - kTolerance,
              "filter output is the labelled Bell state");
      g.check(once.ledger.ebits_consumed == 2, "scheme_b consumes 2 ebits");
      g.check(run_scheme_a(s, rng).ledger.ebits_consumed == 1, "scheme_a consumes 1 ebit");
    }
  }
  return g.done();
}

GroupResult check_audit(RngStream& rng) {
  Group g("audit");
  for (auto scheme : kSchemes) {
    const bool expected = scheme != Scheme::Fig1;
    bool all_as_expected = true;
    for (int t = 0; t < 20; ++t) {
      const auto s = haar_random_state(2, rng);
      const auto result = run_protocol(scheme, s, rng);
      const bool pass = locc_audit(result.trace).pass;
      all_as_expected = all_as_expected && pass == expected;
      g.check(pass == expected, std::string(to_string(scheme)) + " audit verdict",
              [&] { return json{{"scheme", to_string(scheme)}, {"pass", pass}}; });
    }
    if (all_as_expected)
      g.note(std::string(to_string(scheme)) + ": " + (expected ? "PASS" : "FAIL") + " recorded");
  }
  g.check(locc_audit({}).pass, "empty trace passes");
  return g.done();
}

GroupResult check_photonic(RngStream& rng) {
  Group g("photonic");
  for (std::size_t t = 0; t < kRandomStates; ++t) {
    const auto s = haar_random_state(2, rng);
    const auto optical = analytic_distribution(s, Scheme::Photonic);
    const auto abstract = analytic_distribution(s, Scheme::SchemeA);
    double worst = 0.0;
    for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(optical[k] - abstract[k]));
    g.check(worst <= kTolerance, "photonic label distribution equals scheme_a",
            [&] { return json{{"state", state_json(s)}, {"error", worst}}; });

    if (t % 10 == 0) {
      const auto input = prepare_photonic_input(s);
      const auto ab = apply_photon_optics(apply_photon_optics(input, Photon::A), Photon::B);
      const auto ba = apply_photon_optics(apply_photon_optics(input, Photon::B), Photon::A);
      double diff = 0.0;
      for (std::size_t k = 0; k < ab.dim(); ++k) diff = std::max(diff, std::abs(ab[k] - ba[k]));
      g.check(diff <= kTolerance, "per-photon optics commute");

      const auto ports = port_distribution(ab);
      double total = 0.0;
      for (const auto& row : ports) total = std::accumulate(row.begin(), row.end(), total);
      g.check(std::abs(total - 1.0) <= kTolerance, "one detector fires per photon");
    }
  }
  return g.done();
}

}  // namespace

std::vector<GroupResult> verify_all(std::uint64_t seed) {
  const RngStream root(seed);
  std::vector<GroupResult> out;
  RngStream r0 = root.split(0);
  RngStream r1 = root.split(1);
  RngStream r2 = root.split(2);
  RngStream r3 = root.split(3);
  RngStream r4 = root.split(4);
  RngStream r5 = root.split(5);
  out.push_back(check_qstate(r0));
  out.push_back(check_bellcore(r1));
  out.push_back(check_commutators());
  out.push_back(check_measure(r2));
  out.push_back(check_protocols(r3));
  out.push_back(check_audit(r4));
  out.push_back(check_photonic(r5));
  return out;
}

}  // namespace bellsim
