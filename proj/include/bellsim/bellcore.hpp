// Bell basis, Bell-coefficient expansion and the nonlocal spin products
// S_ij = sigma_i (x) sigma_j.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "bellsim/qstate.hpp"

namespace bellsim {

enum class BellLabel { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline constexpr std::array<BellLabel, 4> kBellLabels = {
    BellLabel::PhiPlus, BellLabel::PhiMinus, BellLabel::PsiPlus, BellLabel::PsiMinus};

// Position in Bell-coefficient order c1..c4 (0-based).
constexpr std::size_t index_of(BellLabel label) { return static_cast<std::size_t>(label); }

std::string_view to_string(BellLabel label);
std::optional<BellLabel> parse_bell_label(std::string_view name);

// Amplitudes of a two-qubit state in the order Phi+, Phi-, Psi+, Psi-.
struct BellCoefficients {
  std::array<Complex, 4> c{};

  Complex operator[](std::size_t i) const { return c[i]; }
  Complex& operator[](std::size_t i) { return c[i]; }
  Complex operator[](BellLabel label) const { return c[index_of(label)]; }

  double squared_norm() const;
};

StateVector bell_state(BellLabel label);
Operator bell_projector(BellLabel label);

BellCoefficients to_bell(const StateVector& s);
// Rejects coefficients whose squared norm differs from 1 by more than kTolerance.
StateVector from_bell(const BellCoefficients& c);

// S_zz eigenvalue m and S_xx eigenvalue n of each Bell state.
BellLabel classify(Sign m, Sign n);
BellLabel classify(int m, int n);
std::pair<Sign, Sign> outcomes_of(BellLabel label);

class SpinProduct {
 public:
  SpinProduct(Axis alice, Axis bob);

  Axis alice_axis() const { return alice_; }
  Axis bob_axis() const { return bob_; }
  // "S_zx" etc.
  std::string name() const;

  const Operator& matrix() const { return matrix_; }
  // (I + s S) / 2
  const Operator& projector(Sign s) const { return s == Sign::plus() ? plus_ : minus_; }

  friend bool operator==(const SpinProduct& a, const SpinProduct& b) {
    return a.alice_ == b.alice_ && a.bob_ == b.bob_;
  }

 private:
  Axis alice_;
  Axis bob_;
  Operator matrix_;
  Operator plus_;
  Operator minus_;
};

SpinProduct spin_product(Axis alice, Axis bob);

// ab - ba
Operator commutator(const Operator& a, const Operator& b);

}  // namespace bellsim
