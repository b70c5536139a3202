// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>

#include "bellsim/cli.hpp"
#include "bellsim/measure.hpp"
#include "bellsim/photonic.hpp"
#include "bellsim/protocols.hpp"

using namespace bellsim;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", x);
  return buf;
}

double four_sigma(double p, std::uint64_t n) {
  return 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)) + 1e-12;
}

double max_abs_diff(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < 4; ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

std::array<double, 4> born_weights(const StateVector& s) {
  const auto c = to_bell(s);
  return {std::norm(c[0]), std::norm(c[1]), std::norm(c[2]), std::norm(c[3])};
}

Verdict bell_discrimination() {
  Verdict v;
  const auto start = Clock::now();
  for (auto scheme : {Scheme::SchemeA, Scheme::SchemeB})
    for (auto label : kBellLabels) {
      const auto h = outcome_distribution(bell_state(label), scheme, 10000, 1, workers());
      v.require(h[index_of(label)] == 10000,
                std::string(to_string(scheme)) + " mislabelled " + std::string(to_string(label)));
    }
  const double t = seconds_since(start);
  v.require(t < 1.0, "runtime " + std::to_string(t) + " s");
  if (v.pass) v.detail = "8 x 10^4 runs, 0 mislabels, " + std::to_string(t) + " s";
  return v;
}

Verdict born_rule() {
  Verdict v;
  const auto start = Clock::now();
  RngStream states(2);
  const std::uint64_t n = 100000;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto s = haar_random_state(2, states);
    const auto p = analytic_distribution(s, Scheme::SchemeA);
    const auto want = born_weights(s);
    worst = std::max(worst, max_abs_diff(p, want));
    const auto h = outcome_distribution(s, Scheme::SchemeA, n, 100 + t, workers());
    for (std::size_t k = 0; k < 4; ++k) {
      const double f = static_cast<double>(h[k]) / n;
      v.require(std::abs(f - p[k]) <= four_sigma(p[k], n),
                "state " + std::to_string(t) + " label " + std::to_string(k) + " outside 4 sigma");
    }
  }
  v.require(worst <= 1e-12, "analytic deviation " + sci(worst));
  const bool statistics_ok = v.pass;
  const double t = seconds_since(start);
  v.require(t < 10.0, "runtime " + std::to_string(t) + " s on " + std::to_string(workers()) +
                          " hardware thread(s)");
  const std::string stats = "analytic max dev " + sci(worst) + ", 400 frequencies within 4 sigma";
  if (v.pass)
    v.detail = stats + ", " + std::to_string(t) + " s";
  else if (statistics_ok)
    v.detail += " (" + stats + ")";
  return v;
}

Verdict bell_filter() {
  Verdict v;
  RngStream states(3);
  double worst = 1.0;
  for (int t = 0; t < 100; ++t) {
    const auto s = haar_random_state(2, states);
    RngStream rng(300 + t);
    const auto first = run_scheme_b(s, rng);
    const double f = fidelity(*first.post_state, bell_state(first.label));
    worst = std::min(worst, f);
    v.require(f >= 1.0 - 1e-12, "fidelity " + std::to_string(f));
    const auto again = run_scheme_b(*first.post_state, rng);
    v.require(again.label == first.label, "repeated filter changed the label");
    v.require(equal_up_to_phase(*again.post_state, *first.post_state),
              "repeated filter changed the state");
  }
  if (v.pass) v.detail = "min fidelity 1 - " + sci(1.0 - worst);
  return v;
}

Verdict superposition() {
  Verdict v;
  const auto zz = spin_product(Axis::Z, Axis::Z);
  const auto xx = spin_product(Axis::X, Axis::X);
  RngStream states(4);
  int checked = 0;
  for (int t = 0; t < 200 && checked < 100; ++t) {
    const auto s = haar_random_state(2, states);
    RngStream rng(400 + t);
    const auto out = nonlocal_product_measurement(s, zz, rng);
    if (out.record.m != Sign::plus()) continue;
    const auto c = to_bell(s);
    BellCoefficients kept;
    const double norm = std::sqrt(std::norm(c[0]) + std::norm(c[1]));
    kept.c = {c[0] / norm, c[1] / norm, 0.0, 0.0};
    const auto want = from_bell(kept);
    double diff = 0.0;
    const auto aligned = canonical_phase(out.post);
    const auto reference = canonical_phase(want);
    for (std::size_t i = 0; i < 4; ++i) diff = std::max(diff, std::abs(aligned[i] - reference[i]));
    v.require(diff <= 1e-12, "post-state deviation " + std::to_string(diff));
    ++checked;
  }
  v.require(checked >= 50, "too few +1 outcomes");

  const std::uint64_t n = 10000;
  std::uint64_t local_plus = 0;
  std::uint64_t nonlocal_plus = 0;
  const auto phi = bell_state(BellLabel::PhiPlus);
  RngStream rng(5);
  for (std::uint64_t t = 0; t < n; ++t) {
    const auto local = local_product_measurement(phi, zz, rng);
    if (nonlocal_product_measurement(local.post, xx, rng).record.m == Sign::plus()) ++local_plus;
    const auto kept = nonlocal_product_measurement(phi, zz, rng);
    if (nonlocal_product_measurement(kept.post, xx, rng).record.m == Sign::plus()) ++nonlocal_plus;
  }
  const double f_local = static_cast<double>(local_plus) / n;
  const double f_nonlocal = static_cast<double>(nonlocal_plus) / n;
  v.require(std::abs(f_local - 0.5) <= 0.02, "local n=+1 frequency " + std::to_string(f_local));
  v.require(f_nonlocal == 1.0, "nonlocal n=+1 frequency " + std::to_string(f_nonlocal));
  if (v.pass)
    v.detail = std::to_string(checked) + " post-states matched, n=+1 freq local " +
               std::to_string(f_local) + " nonlocal " + std::to_string(f_nonlocal);
  return v;
}

Verdict operator_algebra() {
  Verdict v;
  constexpr std::array<Axis, 3> axes = {Axis::X, Axis::Y, Axis::Z};
  const auto id4 = Operator::identity(4);
  double worst_commutator = 0.0;
  double worst_sum = 0.0;
  auto check_sum = [&](const Operator& sum, const std::string& what) {
    const double d = max_abs_diff(sum, id4);
    worst_sum = std::max(worst_sum, d);
    v.require(d <= 1e-12, what + " completeness off by " + std::to_string(d));
  };
  for (Axis i : axes)
    for (Axis j : axes) {
      const double c = commutator(spin_product(i, i).matrix(), spin_product(j, j).matrix()).max_abs();
      worst_commutator = std::max(worst_commutator, c);
      v.require(c <= 1e-15, "commutator entry " + std::to_string(c));
      const auto sp = spin_product(i, j);
      for (auto strategy : {Strategy::Local, Strategy::Nonlocal}) {
        Operator kraus(4);
        for (const auto& k : kraus_family(strategy, sp)) kraus += k.matrix.adjoint() * k.matrix;
        check_sum(kraus, sp.name() + " Kraus");
        Operator povm(4);
        for (const auto& e : povm_family(strategy, sp)) povm += e.matrix;
        check_sum(povm, sp.name() + " POVM");
      }
    }
  for (auto scheme : kSchemes) {
    Operator sum(4);
    for (const auto& e : scheme_povm(scheme)) sum += e;
    check_sum(sum, std::string(to_string(scheme)) + " POVM");
  }
  Operator filter(4);
  for (const auto& k : filter_operators()) filter += k.adjoint() * k;
  check_sum(filter, "filter Kraus");
  Operator optics(4);
  for (const auto& e : photonic_povm()) optics += e;
  check_sum(optics, "photonic POVM");
  if (v.pass)
    v.detail = "max commutator entry " + sci(worst_commutator) + ", max completeness dev " +
               sci(worst_sum);
  return v;
}

Verdict resource_ledger() {
  Verdict v;
  RngStream states(6);
  const int runs = 2000;
  for (int t = 0; t < runs; ++t) {
    const auto s = haar_random_state(2, states);
    RngStream rng(600 + t);
    const auto a = run_scheme_a(s, rng);
    v.require(a.ledger.ebits_consumed == 1, "scheme_a consumed " + std::to_string(a.ledger.ebits_consumed));
    v.require(locc_audit(a.trace).pass, "scheme_a audit failed");
    const auto b = run_scheme_b(s, rng);
    v.require(b.ledger.ebits_consumed == 2, "scheme_b consumed " + std::to_string(b.ledger.ebits_consumed));
    v.require(locc_audit(b.trace).pass, "scheme_b audit failed");
    const auto f = run_fig1(s, rng);
    v.require(!locc_audit(f.trace).pass, "fig1 audit passed");
  }
  if (v.pass) v.detail = std::to_string(runs) + " runs per scheme audited";
  return v;
}

Verdict photonic_equivalence() {
  Verdict v;
  RngStream states(7);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto s = haar_random_state(2, states);
    worst = std::max(worst, max_abs_diff(photonic_label_distribution(s),
                                         analytic_distribution(s, Scheme::SchemeA)));
  }
  v.require(worst <= 1e-12, "analytic deviation " + std::to_string(worst));
  double min_p = 1.0;
  for (int t = 0; t < 5; ++t) {
    const auto s = haar_random_state(2, states);
    const auto p = analytic_distribution(s, Scheme::SchemeA);
    for (auto scheme : {Scheme::Photonic, Scheme::SchemeA}) {
      const auto h = outcome_distribution(s, scheme, 100000, 700 + t, workers());
      const auto chi = cli::chi_square_test(h, p);
      min_p = std::min(min_p, chi.p_value);
      v.require(chi.p_value > 0.001, std::string(to_string(scheme)) + " chi-square p " +
                                         std::to_string(chi.p_value));
    }
  }
  if (v.pass)
    v.detail = "analytic max dev " + sci(worst) + ", min chi-square p " + std::to_string(min_p);
  return v;
}

Verdict fig1_baseline() {
  Verdict v;
  for (auto label : kBellLabels)
    for (int t = 0; t < 1000; ++t) {
      RngStream rng(800 + t);
      const auto r = run_fig1(bell_state(label), rng);
      v.require(r.label == label && r.post_state && *r.post_state == fig1_output(label),
                std::string(to_string(label)) + " did not reach its basis state");
    }
  v.require(fig1_output(BellLabel::PhiPlus) == StateVector::basis(2, 0b00), "PhiPlus -> |++>");
  v.require(fig1_output(BellLabel::PhiMinus) == StateVector::basis(2, 0b10), "PhiMinus -> |-+>");
  v.require(fig1_output(BellLabel::PsiPlus) == StateVector::basis(2, 0b01), "PsiPlus -> |+->");
  v.require(fig1_output(BellLabel::PsiMinus) == StateVector::basis(2, 0b11), "PsiMinus -> |-->");
  if (v.pass) v.detail = "4 x 10^3 runs";
  return v;
}

}  // namespace

int main() {
  const std::array<std::pair<const char*, std::function<Verdict()>>, 8> criteria{{
      {"bell-basis discrimination", bell_discrimination},
      {"born-rule distribution", born_rule},
      {"bell filter contract", bell_filter},
      {"superposition preservation", superposition},
      {"operator algebra", operator_algebra},
      {"resource ledger", resource_ledger},
      {"photonic equivalence", photonic_equivalence},
      {"fig1 baseline", fig1_baseline},
  }};
  bool all = true;
  int index = 1;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d %-28s %s  %s\n", index++, name, v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
