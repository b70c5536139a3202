#include "bellsim/qstate.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "bellsim/errors.hpp"

namespace bellsim {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t log2_exact(std::size_t n) { return static_cast<std::size_t>(std::countr_zero(n)); }

// Plain complex product, without the inf/nan recovery of operator*.
Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// Smallest index above `base` with every bit of `mask` clear.
std::size_t next_base(std::size_t base, std::size_t mask) { return ((base | mask) + 1) & ~mask; }

double squared_norm(std::span<const Complex> v) {
  double acc = 0.0;
  for (const auto& a : v) acc += std::norm(a);
  return acc;
}

}  // namespace

char axis_name(Axis axis) {
  switch (axis) {
    case Axis::X:
      return 'x';
    case Axis::Y:
      return 'y';
    case Axis::Z:
      return 'z';
  }
  return '?';
}

Axis parse_axis(char name) {
  switch (name) {
    case 'x':
    case 'X':
      return Axis::X;
    case 'y':
    case 'Y':
      return Axis::Y;
    case 'z':
    case 'Z':
      return Axis::Z;
    default:
      throw DomainError(std::string("unknown axis '") + name + "'");
  }
}

Sign::Sign(int value) {
  if (value != 1 && value != -1) {
    throw DomainError("outcome must be +1 or -1, got " + std::to_string(value));
  }
  negative_ = value < 0;
}

// ---------------------------------------------------------------- Operator

Operator::Operator(std::size_t dim) : dim_(dim), entries_(dim * dim) {}

Operator::Operator(std::size_t dim, std::vector<Complex> entries)
    : dim_(dim), entries_(std::move(entries)) {
  if (entries_.size() != dim_ * dim_) throw DomainError("bad dimension");
}

Operator::Operator(std::initializer_list<std::initializer_list<Complex>> rows)
    : dim_(rows.size()) {
  entries_.reserve(dim_ * dim_);
  for (const auto& row : rows) {
    if (row.size() != dim_) throw DomainError("bad dimension");
    entries_.insert(entries_.end(), row.begin(), row.end());
  }
}

Operator Operator::identity(std::size_t dim) {
  Operator out(dim);
  for (std::size_t i = 0; i < dim; ++i) out(i, i) = 1.0;
  return out;
}

std::size_t Operator::n_qubits() const {
  if (!is_power_of_two(dim_)) throw DomainError("bad dimension");
  return log2_exact(dim_);
}

Operator Operator::adjoint() const {
  Operator out(dim_);
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

Complex Operator::trace() const {
  Complex acc = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) acc += (*this)(i, i);
  return acc;
}

double Operator::max_abs() const {
  double m = 0.0;
  for (const auto& e : entries_) m = std::max(m, std::abs(e));
  return m;
}

bool Operator::is_unitary(double tol) const {
  return max_abs_diff(adjoint() * (*this), identity(dim_)) <= tol;
}

bool Operator::is_hermitian(double tol) const { return max_abs_diff(*this, adjoint()) <= tol; }

Operator& Operator::operator+=(const Operator& other) {
  if (other.dim_ != dim_) throw DomainError("bad dimension");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
  return *this;
}

Operator& Operator::operator-=(const Operator& other) {
  if (other.dim_ != dim_) throw DomainError("bad dimension");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= other.entries_[i];
  return *this;
}

Operator& Operator::operator*=(Complex scalar) {
  for (auto& e : entries_) e *= scalar;
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  if (a.dim_ != b.dim_) throw DomainError("bad dimension");
  const std::size_t n = a.dim_;
  Operator out(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k) {
      const Complex ark = a(r, k);
      if (ark == Complex{}) continue;
      for (std::size_t c = 0; c < n; ++c) out(r, c) += ark * b(k, c);
    }
  return out;
}

Operator kron(const Operator& a, const Operator& b) {
  const std::size_t da = a.dim();
  const std::size_t db = b.dim();
  Operator out(da * db);
  for (std::size_t ra = 0; ra < da; ++ra)
    for (std::size_t ca = 0; ca < da; ++ca)
      for (std::size_t rb = 0; rb < db; ++rb)
        for (std::size_t cb = 0; cb < db; ++cb)
          out(ra * db + rb, ca * db + cb) = a(ra, ca) * b(rb, cb);
  return out;
}

double max_abs_diff(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw DomainError("bad dimension");
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

Operator outer(std::span<const Complex> v) {
  Operator out(v.size());
  for (std::size_t r = 0; r < v.size(); ++r)
    for (std::size_t c = 0; c < v.size(); ++c) out(r, c) = v[r] * std::conj(v[c]);
  return out;
}

// ---------------------------------------------------------------- gates

namespace gates {

namespace {
const Complex I{0.0, 1.0};
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}  // namespace

const Operator& identity2() {
  static const Operator op = Operator::identity(2);
  return op;
}

const Operator& pauli(Axis axis) {
  static const Operator x{{0.0, 1.0}, {1.0, 0.0}};
  static const Operator y{{0.0, -I}, {I, 0.0}};
  static const Operator z{{1.0, 0.0}, {0.0, -1.0}};
  switch (axis) {
    case Axis::X:
      return x;
    case Axis::Y:
      return y;
    case Axis::Z:
      break;
  }
  return z;
}

const Operator& hadamard() {
  static const Operator op{{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}};
  return op;
}

const Operator& phase_s() {
  static const Operator op{{1.0, 0.0}, {0.0, I}};
  return op;
}

const Operator& cnot() {
  static const Operator op{{1.0, 0.0, 0.0, 0.0},
                           {0.0, 1.0, 0.0, 0.0},
                           {0.0, 0.0, 0.0, 1.0},
                           {0.0, 0.0, 1.0, 0.0}};
  return op;
}

const Operator& to_z_basis(Axis axis) {
  // H S^dagger sends the sigma_y eigenbasis onto the computational basis.
  static const Operator y = hadamard() * phase_s().adjoint();
  switch (axis) {
    case Axis::X:
      return hadamard();
    case Axis::Y:
      return y;
    case Axis::Z:
      break;
  }
  return identity2();
}

const Operator& from_z_basis(Axis axis) {
  static const std::array<Operator, 3> inverse{to_z_basis(Axis::X).adjoint(),
                                               to_z_basis(Axis::Y).adjoint(),
                                               to_z_basis(Axis::Z).adjoint()};
  return inverse[static_cast<std::size_t>(axis)];
}

Operator pauli_projector(Axis axis, Sign s) {
  return 0.5 * (identity2() + static_cast<double>(s.value()) * pauli(axis));
}

}  // namespace gates

// ---------------------------------------------------------------- StateVector

StateVector::StateVector() : amplitudes_{Complex{1.0}} {}

StateVector::StateVector(std::vector<Complex> amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (!is_power_of_two(amplitudes_.size())) throw DomainError("bad dimension");
  if (std::abs(std::sqrt(squared_norm(amplitudes_)) - 1.0) > kTolerance)
    throw DomainError("state is not normalized");
  n_qubits_ = log2_exact(amplitudes_.size());
}

StateVector StateVector::basis(std::size_t n_qubits, std::size_t index) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  if (index >= dim) throw DomainError("basis index out of range");
  std::vector<Complex> amps(dim);
  amps[index] = 1.0;
  return StateVector(std::move(amps));
}

double StateVector::norm() const { return std::sqrt(squared_norm(amplitudes_)); }

MadeState make_state(std::span<const Complex> amplitudes) {
  if (!is_power_of_two(amplitudes.size())) throw DomainError("bad dimension");
  const double norm = std::sqrt(squared_norm(amplitudes));
  if (norm == 0.0 || !std::isfinite(norm)) throw DomainError("null state");
  std::vector<Complex> amps(amplitudes.begin(), amplitudes.end());
  const bool renormalized = std::abs(norm - 1.0) > kTolerance;
  if (renormalized)
    for (auto& a : amps) a /= norm;
  return {StateVector(std::move(amps)), renormalized};
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  std::vector<Complex> amps;
  amps.reserve(a.dim() * b.dim());
  for (const auto& x : a.amplitudes())
    for (const auto& y : b.amplitudes()) amps.push_back(x * y);
  return StateVector(std::move(amps));
}

void apply_operator_in_place(std::span<Complex> amplitudes, const Operator& op,
                             std::span<const std::size_t> targets) {
  if (!is_power_of_two(amplitudes.size())) throw DomainError("bad dimension");
  const std::size_t n = log2_exact(amplitudes.size());
  const std::size_t k = targets.size();
  if (op.dim() != (std::size_t{1} << k)) throw DomainError("bad dimension");

  std::size_t target_mask = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (targets[j] >= n) throw DomainError("target qubit out of range");
    const std::size_t mask = std::size_t{1} << (n - 1 - targets[j]);
    if (target_mask & mask) throw DomainError("repeated target qubit");
    target_mask |= mask;
  }

  if (k == 1) {
    const Complex u00 = op(0, 0), u01 = op(0, 1), u10 = op(1, 0), u11 = op(1, 1);
    const std::size_t m = target_mask;
    for (std::size_t hi = 0; hi < amplitudes.size(); hi += 2 * m) {
      for (std::size_t i = hi; i < hi + m; ++i) {
        const Complex a = amplitudes[i];
        const Complex b = amplitudes[i | m];
        amplitudes[i] = mul(u00, a) + mul(u01, b);
        amplitudes[i | m] = mul(u10, a) + mul(u11, b);
      }
    }
    return;
  }

  // Non-zero entries of `op`, so sparse gates such as CNOT cost one product
  // per entry. Gates of up to three qubits keep their buffers on the stack.
  struct Term {
    std::size_t row;
    std::size_t col;
    double re;
    double im;
  };
  constexpr std::size_t kInline = 8;
  const std::size_t sub = op.dim();
  std::vector<std::size_t> offsets_heap;
  std::vector<Complex> block_heap;
  std::vector<Term> terms_heap;
  std::array<std::size_t, kInline> offsets_inline;
  std::array<Complex, 2 * kInline> block_inline;
  std::array<Term, kInline * kInline> terms_inline;
  std::size_t* offsets = offsets_inline.data();
  Complex* in = block_inline.data();
  Term* terms = terms_inline.data();
  if (sub > kInline) {
    offsets_heap.resize(sub);
    block_heap.resize(2 * sub);
    terms_heap.resize(sub * sub);
    offsets = offsets_heap.data();
    in = block_heap.data();
    terms = terms_heap.data();
  }
  Complex* out = in + sub;

  for (std::size_t r = 0; r < sub; ++r) {
    offsets[r] = 0;
    for (std::size_t j = 0; j < k; ++j)
      if (r & (std::size_t{1} << (k - 1 - j))) offsets[r] |= std::size_t{1} << (n - 1 - targets[j]);
  }
  std::size_t n_terms = 0;
  bool monomial = true;
  for (std::size_t c = 0; c < sub; ++c) {
    std::size_t in_column = 0;
    for (std::size_t r = 0; r < sub; ++r)
      if (const Complex v = op(r, c); v != 0.0) {
        terms[n_terms++] = {r, c, v.real(), v.imag()};
        ++in_column;
      }
    monomial = monomial && in_column == 1;
  }

  if (monomial) {
    // One entry per column: each amplitude moves to a single slot. Columns
    // that stay put with weight 1 are skipped.
    std::size_t n_moving = 0;
    for (std::size_t t = 0; t < n_terms; ++t) {
      const Term& term = terms[t];
      if (term.row != term.col || term.re != 1.0 || term.im != 0.0) terms[n_moving++] = term;
    }
    for (std::size_t base = 0; base < amplitudes.size(); base = next_base(base, target_mask)) {
      for (std::size_t t = 0; t < n_moving; ++t) in[t] = amplitudes[base | offsets[terms[t].col]];
      for (std::size_t t = 0; t < n_moving; ++t)
        amplitudes[base | offsets[terms[t].row]] = mul({terms[t].re, terms[t].im}, in[t]);
    }
    return;
  }

  for (std::size_t base = 0; base < amplitudes.size(); base = next_base(base, target_mask)) {
    for (std::size_t c = 0; c < sub; ++c) {
      in[c] = amplitudes[base | offsets[c]];
      out[c] = 0.0;
    }
    for (std::size_t t = 0; t < n_terms; ++t) {
      const Term& term = terms[t];
      out[term.row] += mul({term.re, term.im}, in[term.col]);
    }
    for (std::size_t r = 0; r < sub; ++r) amplitudes[base | offsets[r]] = out[r];
  }
}

std::vector<Complex> apply_operator(std::span<const Complex> amplitudes, const Operator& op,
                                    std::span<const std::size_t> targets) {
  std::vector<Complex> out(amplitudes.begin(), amplitudes.end());
  apply_operator_in_place(out, op, targets);
  return out;
}

StateVector apply_unitary(const StateVector& s, const Operator& u,
                          std::span<const std::size_t> targets) {
  if (u.dim() != (std::size_t{1} << targets.size())) throw DomainError("bad dimension");
  if (!u.is_unitary()) throw DomainError("operator is not unitary");
  return StateVector(apply_operator(s.amplitudes(), u, targets));
}

StateVector apply_unitary(const StateVector& s, const Operator& u,
                          std::initializer_list<std::size_t> targets) {
  return apply_unitary(s, u, std::span<const std::size_t>(targets.begin(), targets.size()));
}

Complex inner(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw DomainError("bad dimension");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double fidelity(const StateVector& a, const StateVector& b) {
  return std::clamp(std::norm(inner(a, b)), 0.0, 1.0);
}

Complex expectation(const StateVector& s, const Operator& a) {
  if (a.dim() != s.dim()) throw DomainError("bad dimension");
  Complex acc = 0.0;
  for (std::size_t r = 0; r < s.dim(); ++r) {
    Complex row = 0.0;
    for (std::size_t c = 0; c < s.dim(); ++c) row += a(r, c) * s[c];
    acc += std::conj(s[r]) * row;
  }
  return acc;
}

StateVector canonical_phase(const StateVector& s) {
  std::vector<Complex> amps(s.amplitudes().begin(), s.amplitudes().end());
  for (const auto& a : amps) {
    if (std::abs(a) > kTolerance) {
      const Complex phase = std::abs(a) / a;
      for (auto& b : amps) b *= phase;
      break;
    }
  }
  return StateVector(std::move(amps));
}

bool equal_up_to_phase(const StateVector& a, const StateVector& b, double tol) {
  if (a.dim() != b.dim()) return false;
  const auto ca = canonical_phase(a);
  const auto cb = canonical_phase(b);
  for (std::size_t i = 0; i < ca.dim(); ++i)
    if (std::abs(ca[i] - cb[i]) > tol) return false;
  return true;
}

Projection project_qubit(const StateVector& s, std::size_t qubit, unsigned bit) {
  if (qubit >= s.n_qubits()) throw DomainError("target qubit out of range");
  const std::size_t mask = std::size_t{1} << (s.n_qubits() - 1 - qubit);
  Projection out;
  out.amplitudes.assign(s.dim(), Complex{});
  for (std::size_t i = 0; i < s.dim(); ++i) {
    if (((i & mask) != 0) == (bit != 0)) {
      out.amplitudes[i] = s[i];
      out.probability += std::norm(s[i]);
    }
  }
  return out;
}

StateVector discard_qubits(const StateVector& s, std::span<const std::size_t> qubits,
                           std::span<const unsigned> bits) {
  if (qubits.size() != bits.size()) throw DomainError("bad dimension");
  const std::size_t n = s.n_qubits();
  std::size_t fixed_mask = 0;
  std::size_t fixed_value = 0;
  for (std::size_t j = 0; j < qubits.size(); ++j) {
    if (qubits[j] >= n) throw DomainError("target qubit out of range");
    const std::size_t m = std::size_t{1} << (n - 1 - qubits[j]);
    if (fixed_mask & m) throw DomainError("repeated target qubit");
    fixed_mask |= m;
    if (bits[j]) fixed_value |= m;
  }

  std::vector<Complex> kept;
  kept.reserve(s.dim() >> qubits.size());
  double leaked = 0.0;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    if ((i & fixed_mask) == fixed_value) {
      kept.push_back(s[i]);
    } else {
      leaked += std::norm(s[i]);
    }
  }
  if (leaked > kTolerance) throw DomainError("discarded qubits are not in the stated basis state");
  const double norm = std::sqrt(squared_norm(kept));
  for (auto& a : kept) a /= norm;
  return StateVector(std::move(kept));
}

std::string to_string(const StateVector& s) {
  std::ostringstream os;
  os << std::setprecision(6) << '[';
  for (std::size_t i = 0; i < s.dim(); ++i) {
    if (i) os << ", ";
    os << s[i].real();
    if (s[i].imag() != 0.0) os << std::showpos << s[i].imag() << std::noshowpos << 'i';
  }
  os << ']';
  return os.str();
}

}  // namespace bellsim
