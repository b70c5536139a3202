// Command-line front end: `run`, `verify` and `audit`.
//
// Exit codes: 0 success, 1 a verification group or audit failed, 2 invalid
// arguments or state specification, 3 an invariant broke during a run.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bellsim/bellcore.hpp"
#include "bellsim/protocols.hpp"

namespace bellsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInvariant = 3;

enum class OutputFormat { Json, Csv };

struct RunConfig {
  Scheme scheme = Scheme::SchemeB;
  // A Bell label name, four comma-separated complex Bell coefficients
  // c1..c4 written as re[+imi], or "random".
  std::string state = "PhiPlus";
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;
  OutputFormat output = OutputFormat::Json;
  std::optional<std::string> out_path;
  // Line-delimited JSON trace of the first `trace_runs` runs.
  std::optional<std::string> trace_path;
  std::uint64_t trace_runs = 1;
  // duration_ms is null unless timing is on, so reports are reproducible.
  bool timing = false;
  unsigned workers = 1;
};

Complex parse_complex(std::string_view text);

struct ResolvedState {
  StateVector state;
  BellCoefficients coefficients;
  bool renormalized = false;
};

// "random" draws a Haar state from a stream derived from `seed` that no
// trial uses.
ResolvedState resolve_state(std::string_view spec, std::uint64_t seed);

struct ChiSquare {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

// Pearson test over the labels with non-zero expected probability. Throws
// InvariantError if a label with zero probability was observed.
ChiSquare chi_square_test(const Histogram& counts, const std::array<double, 4>& probabilities);

struct RunReport {
  RunConfig config;
  ResolvedState input;
  std::array<double, 4> analytic{};
  Histogram counts{};
  ChiSquare chi_square;
  std::optional<double> min_fidelity;
  std::optional<double> mean_fidelity;
  std::size_t ebits_per_run = 0;
  std::uint64_t ebits_consumed_total = 0;
  std::uint64_t audited_runs = 0;
  bool audit_pass = true;
  std::optional<double> duration_ms;
};

// Throws DomainError for a bad configuration and InvariantError when a run
// breaks a protocol invariant.
RunReport execute_run(const RunConfig& config);

std::string report_to_json(const RunReport& report);
std::string report_to_csv(const RunReport& report);
// Problems found checking a JSON report against the documented schema;
// empty when it conforms.
std::vector<std::string> validate_report_json(std::string_view text);

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(std::uint64_t seed, std::ostream& out, std::ostream& err);
int cmd_audit(const std::string& trace_path, std::ostream& out, std::ostream& err);

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bellsim::cli
