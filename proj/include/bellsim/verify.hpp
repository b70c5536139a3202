// Self-check of every module's invariants, run by `bellsim verify`.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bellsim {

struct GroupResult {
  std::string name;
  bool pass = true;
  std::size_t checks = 0;
  // JSON object describing the first failing check.
  std::string counterexample;
  // Informational lines, e.g. the audit verdict of each scheme.
  std::vector<std::string> notes;
};

std::vector<GroupResult> verify_all(std::uint64_t seed);

}  // namespace bellsim
