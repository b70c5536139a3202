#include "bellsim/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include "bellsim/errors.hpp"
#include "bellsim/verify.hpp"

namespace bellsim::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Keeps a single invocation well under a few seconds.
constexpr std::uint64_t kMaxTrials = 1'000'000;
// Runs whose LOCC trace is recorded and audited, besides the exported ones.
constexpr std::uint64_t kAuditedRuns = 64;
// Stream id for drawing the "random" input; trial streams use ids 0..trials-1.
constexpr std::uint64_t kStateStream = ~std::uint64_t{0};

std::string_view to_string(OutputFormat f) { return f == OutputFormat::Json ? "json" : "csv"; }

double parse_double(std::string_view text, std::string_view whole) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw DomainError("invalid complex number '" + std::string(whole) + "'");
  return value;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

// Trials are split round-robin across workers; everything a worker sees is
// merged back in trial order.
struct Shard {
  Histogram counts{};
  double fidelity_min = 1.0;
  double fidelity_sum = 0.0;
  std::uint64_t ebits = 0;
  std::uint64_t audited = 0;
  bool audit_pass = true;
  std::optional<std::uint64_t> failed_trial;
  std::exception_ptr failure;
};

}  // namespace

Complex parse_complex(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) throw DomainError("empty complex number");
  if (s.back() != 'i') {
    return {parse_double(s, text), 0.0};
  }
  const std::string_view body(s.data(), s.size() - 1);
  // The imaginary part starts at the last sign that is not an exponent sign.
  std::size_t split = std::string_view::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  auto imag_of = [&](std::string_view part) {
    if (part.empty() || part == "+") return 1.0;
    if (part == "-") return -1.0;
    if (part.front() == '+') part.remove_prefix(1);
    return parse_double(part, text);
  };
  if (split == std::string_view::npos) return {0.0, imag_of(body)};
  return {parse_double(body.substr(0, split), text), imag_of(body.substr(split))};
}

ResolvedState resolve_state(std::string_view spec, std::uint64_t seed) {
  const std::string name = trim(spec);
  if (auto label = parse_bell_label(name)) {
    StateVector s = bell_state(*label);
    return {s, to_bell(s), false};
  }
  if (name == "random") {
    RngStream rng = RngStream(seed).split(kStateStream);
    StateVector s = haar_random_state(2, rng);
    return {s, to_bell(s), false};
  }

  std::vector<Complex> coefficients;
  std::string_view rest = name;
  while (true) {
    const auto comma = rest.find(',');
    coefficients.push_back(parse_complex(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (coefficients.size() != 4)
    throw DomainError("expected a Bell label, 'random' or four Bell coefficients, got '" + name + "'");
  const auto made = make_state(coefficients);
  BellCoefficients c;
  for (std::size_t i = 0; i < 4; ++i) c[i] = made.state[i];
  return {from_bell(c), c, made.renormalized};
}

ChiSquare chi_square_test(const Histogram& counts, const std::array<double, 4>& probabilities) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  ChiSquare out;
  std::size_t categories = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (probabilities[i] <= kBranchThreshold) {
      if (counts[i] != 0)
        throw InvariantError("observed " + std::string(to_string(kBellLabels[i])) +
                             " which has zero probability");
      continue;
    }
    ++categories;
    const double expected = static_cast<double>(total) * probabilities[i];
    const double diff = static_cast<double>(counts[i]) - expected;
    out.statistic += diff * diff / expected;
  }
  out.dof = categories > 0 ? categories - 1 : 0;
  if (out.dof > 0) {
    const boost::math::chi_squared_distribution<double> dist(static_cast<double>(out.dof));
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  } else {
    out.statistic = 0.0;
    out.p_value = 1.0;
  }
  return out;
}

RunReport execute_run(const RunConfig& config) {
  if (config.trials < 1) throw DomainError("trials must be at least 1");
  if (config.trials > kMaxTrials)
    throw DomainError("trials must be at most " + std::to_string(kMaxTrials));
  if (config.workers < 1) throw DomainError("workers must be at least 1");

  const auto started = std::chrono::steady_clock::now();
  RunReport report;
  report.config = config;
  report.input = resolve_state(config.state, config.seed);
  report.analytic = analytic_distribution(report.input.state, config.scheme);
  double total_p = 0.0;
  for (double p : report.analytic) total_p += p;
  if (std::abs(total_p - 1.0) > kTolerance)
    throw InvariantError("label probabilities sum to " + std::to_string(total_p));
  report.ebits_per_run = ebit_cost(config.scheme);

  const Scheme scheme = config.scheme;
  const bool expect_locc = scheme != Scheme::Fig1;
  const std::uint64_t exported = config.trace_path ? std::min(config.trace_runs, config.trials) : 0;
  const std::uint64_t traced = std::max(exported, std::min(kAuditedRuns, config.trials));
  std::vector<std::string> trace_text(exported);

  const RngStream root(config.seed);
  const unsigned workers = config.workers;
  std::vector<Shard> shards(workers);

  auto work = [&](unsigned w) {
    Shard& shard = shards[w];
    for (std::uint64_t i = w; i < config.trials; i += workers) {
      try {
        RngStream rng = root.split(i);
        RunOptions options;
        options.record_trace = i < traced;
        const auto result = run_protocol(scheme, report.input.state, rng, options);

        if (result.ledger.ebits_consumed != report.ebits_per_run ||
            result.ledger.ebits_consumed > result.ledger.ebits_granted)
          throw InvariantError("run " + std::to_string(i) + " consumed " +
                               std::to_string(result.ledger.ebits_consumed) + " ebits");
        if (report.analytic[index_of(result.label)] <= kBranchThreshold)
          throw InvariantError("run " + std::to_string(i) + " produced zero-probability label " +
                               std::string(to_string(result.label)));
        if (scheme == Scheme::SchemeB) {
          const double f = fidelity(*result.post_state, bell_state(result.label));
          if (f < 1.0 - kTolerance)
            throw InvariantError("run " + std::to_string(i) + " left the filter output at fidelity " +
                                 std::to_string(f));
          shard.fidelity_min = std::min(shard.fidelity_min, f);
          shard.fidelity_sum += f;
        }
        if (scheme == Scheme::Fig1 &&
            fidelity(*result.post_state, fig1_output(result.label)) < 1.0 - kTolerance)
          throw InvariantError("run " + std::to_string(i) + " readout does not match its label");
        if (options.record_trace) {
          const bool pass = locc_audit(result.trace).pass;
          if (pass != expect_locc)
            throw InvariantError("run " + std::to_string(i) + " LOCC audit " +
                                 (pass ? "passed" : "failed") + " unexpectedly");
          shard.audit_pass = shard.audit_pass && pass;
          ++shard.audited;
          if (i < exported) trace_text[i] = trace_to_jsonl(result.trace, i);
        }
        ++shard.counts[index_of(result.label)];
        shard.ebits += result.ledger.ebits_consumed;
      } catch (...) {
        shard.failed_trial = i;
        shard.failure = std::current_exception();
        return;
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  const Shard* first_failure = nullptr;
  for (const auto& s : shards)
    if (s.failure && (!first_failure || *s.failed_trial < *first_failure->failed_trial))
      first_failure = &s;
  if (first_failure) std::rethrow_exception(first_failure->failure);

  double fidelity_sum = 0.0;
  double fidelity_min = 1.0;
  for (const auto& s : shards) {
    for (std::size_t k = 0; k < 4; ++k) report.counts[k] += s.counts[k];
    report.ebits_consumed_total += s.ebits;
    report.audited_runs += s.audited;
    report.audit_pass = report.audit_pass && s.audit_pass;
    fidelity_sum += s.fidelity_sum;
    fidelity_min = std::min(fidelity_min, s.fidelity_min);
  }
  if (scheme == Scheme::SchemeB) {
    report.min_fidelity = fidelity_min;
    report.mean_fidelity = fidelity_sum / static_cast<double>(config.trials);
  }
  report.chi_square = chi_square_test(report.counts, report.analytic);

  if (config.trace_path) {
    std::ofstream file(*config.trace_path, std::ios::binary);
    if (!file) throw DomainError("cannot write trace file " + *config.trace_path);
    for (const auto& text : trace_text) file << text;
  }
  if (config.timing) {
    report.duration_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  }
  return report;
}

std::string report_to_json(const RunReport& r) {
  ordered_json j;
  j["config"] = {{"scheme", to_string(r.config.scheme)},
                 {"state", r.config.state},
                 {"trials", r.config.trials},
                 {"seed", r.config.seed},
                 {"output", to_string(r.config.output)},
                 {"emit_trace", r.config.trace_path.has_value()},
                 {"workers", r.config.workers}};
  ordered_json coeffs = ordered_json::array();
  for (std::size_t i = 0; i < 4; ++i)
    coeffs.push_back({r.input.coefficients[i].real(), r.input.coefficients[i].imag()});
  j["input"] = {{"bell_coefficients", coeffs}, {"renormalized", r.input.renormalized}};
  j["analytic"] = {{"p1", r.analytic[0]}, {"p2", r.analytic[1]}, {"p3", r.analytic[2]},
                   {"p4", r.analytic[3]}};
  ordered_json counts;
  for (auto label : kBellLabels) counts[std::string(to_string(label))] = r.counts[index_of(label)];
  j["empirical"] = {{"counts", counts}};
  j["chi_square"] = {{"statistic", r.chi_square.statistic},
                     {"dof", r.chi_square.dof},
                     {"p_value", r.chi_square.p_value}};
  if (r.min_fidelity) j["fidelity"] = {{"min", *r.min_fidelity}, {"mean", *r.mean_fidelity}};
  j["ledger"] = {{"ebits_per_run", r.ebits_per_run},
                 {"ebits_consumed_total", r.ebits_consumed_total}};
  j["audit"] = {{"runs_checked", r.audited_runs}, {"locc", r.audit_pass ? "PASS" : "FAIL"}};
  j["duration_ms"] = r.duration_ms ? ordered_json(*r.duration_ms) : ordered_json(nullptr);
  return j.dump(2) + "\n";
}

std::string report_to_csv(const RunReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "# scheme=" << to_string(r.config.scheme) << ",trials=" << r.config.trials
     << ",seed=" << r.config.seed << "\n";
  os << "# chi_square=" << r.chi_square.statistic << ",dof=" << r.chi_square.dof
     << ",p_value=" << r.chi_square.p_value << "\n";
  if (r.min_fidelity) os << "# fidelity_min=" << *r.min_fidelity << ",fidelity_mean=" << *r.mean_fidelity << "\n";
  os << "# ebits_per_run=" << r.ebits_per_run << ",ebits_consumed_total=" << r.ebits_consumed_total
     << "\n";
  os << "# locc_audit=" << (r.audit_pass ? "PASS" : "FAIL") << ",runs_checked=" << r.audited_runs
     << "\n";
  if (r.duration_ms) os << "# duration_ms=" << *r.duration_ms << "\n";
  os << "label,analytic_probability,count,frequency\n";
  for (auto label : kBellLabels) {
    const auto k = index_of(label);
    os << to_string(label) << ',' << r.analytic[k] << ',' << r.counts[k] << ','
       << static_cast<double>(r.counts[k]) / static_cast<double>(r.config.trials) << "\n";
  }
  return os.str();
}

std::vector<std::string> validate_report_json(std::string_view text) {
  std::vector<std::string> problems;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    return {std::string("not JSON: ") + e.what()};
  }
  auto object_at = [&](const json& parent, const std::string& key) -> const json* {
    if (!parent.contains(key) || !parent.at(key).is_object()) {
      problems.push_back("missing object '" + key + "'");
      return nullptr;
    }
    return &parent.at(key);
  };
  auto expect = [&](const json* parent, const std::string& key, auto predicate,
                    const char* type) {
    if (!parent) return;
    if (!parent->contains(key) || !predicate(parent->at(key)))
      problems.push_back("'" + key + "' must be " + type);
  };
  auto is_number = [](const json& v) { return v.is_number(); };
  auto is_unsigned = [](const json& v) { return v.is_number_unsigned(); };
  auto is_string = [](const json& v) { return v.is_string(); };
  auto is_bool = [](const json& v) { return v.is_boolean(); };
  auto is_probability = [](const json& v) {
    return v.is_number() && v.get<double>() >= 0.0 && v.get<double>() <= 1.0;
  };

  if (!j.is_object()) return {"report must be a JSON object"};

  const json* config = object_at(j, "config");
  expect(config, "scheme", [](const json& v) { return v.is_string() && parse_scheme(v.get<std::string>()); },
         "a scheme name");
  expect(config, "state", is_string, "a string");
  expect(config, "trials", [](const json& v) { return v.is_number_unsigned() && v.get<std::uint64_t>() >= 1; },
         "a positive integer");
  expect(config, "seed", is_unsigned, "an unsigned integer");
  expect(config, "output", [](const json& v) { return v == "json" || v == "csv"; }, "json or csv");
  expect(config, "emit_trace", is_bool, "a boolean");
  expect(config, "workers", is_unsigned, "an unsigned integer");

  const json* input = object_at(j, "input");
  expect(input, "bell_coefficients",
         [](const json& v) {
           if (!v.is_array() || v.size() != 4) return false;
           return std::all_of(v.begin(), v.end(), [](const json& c) {
             return c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number();
           });
         },
         "four [re, im] pairs");
  expect(input, "renormalized", is_bool, "a boolean");

  const json* analytic = object_at(j, "analytic");
  double total = 0.0;
  for (const char* key : {"p1", "p2", "p3", "p4"}) {
    expect(analytic, key, is_probability, "a probability");
    if (analytic && analytic->contains(key) && analytic->at(key).is_number())
      total += analytic->at(key).get<double>();
  }
  if (analytic && std::abs(total - 1.0) > 1e-9) problems.push_back("analytic probabilities must sum to 1");

  const json* empirical = object_at(j, "empirical");
  const json* counts = empirical ? object_at(*empirical, "counts") : nullptr;
  std::uint64_t counted = 0;
  for (auto label : kBellLabels) {
    const std::string key(to_string(label));
    expect(counts, key, is_unsigned, "a count");
    if (counts && counts->contains(key) && counts->at(key).is_number_unsigned())
      counted += counts->at(key).get<std::uint64_t>();
  }
  if (config && counts && config->contains("trials") && config->at("trials").is_number_unsigned() &&
      counted != config->at("trials").get<std::uint64_t>())
    problems.push_back("counts must sum to trials");

  const json* chi = object_at(j, "chi_square");
  expect(chi, "statistic", is_number, "a number");
  expect(chi, "dof", is_unsigned, "an unsigned integer");
  expect(chi, "p_value", is_probability, "a probability");

  if (j.contains("fidelity")) {
    const json* fid = object_at(j, "fidelity");
    expect(fid, "min", is_probability, "a probability");
    expect(fid, "mean", is_probability, "a probability");
  }

  const json* ledger = object_at(j, "ledger");
  expect(ledger, "ebits_per_run", is_unsigned, "an unsigned integer");
  expect(ledger, "ebits_consumed_total", is_unsigned, "an unsigned integer");

  const json* audit = object_at(j, "audit");
  expect(audit, "runs_checked", is_unsigned, "an unsigned integer");
  expect(audit, "locc", [](const json& v) { return v == "PASS" || v == "FAIL"; }, "PASS or FAIL");

  if (!j.contains("duration_ms") || !(j.at("duration_ms").is_null() || j.at("duration_ms").is_number()))
    problems.push_back("'duration_ms' must be a number or null");
  return problems;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  RunReport report;
  try {
    report = execute_run(config);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvariantError& e) {
    err << "invariant violated: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const ResourceError& e) {
    err << "invariant violated: " << e.what() << "\n";
    return kExitInvariant;
  }
  if (report.input.renormalized) err << "warning: state coefficients were renormalized\n";

  const std::string text =
      config.output == OutputFormat::Json ? report_to_json(report) : report_to_csv(report);
  if (config.output == OutputFormat::Json) {
    const auto problems = validate_report_json(text);
    if (!problems.empty()) {
      err << "invariant violated: report does not match its schema: " << problems.front() << "\n";
      return kExitInvariant;
    }
  }
  if (config.out_path) {
    std::ofstream file(*config.out_path, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << *config.out_path << "\n";
      return kExitUsage;
    }
    file << text;
  } else {
    out << text;
  }
  return kExitOk;
}

int cmd_verify(std::uint64_t seed, std::ostream& out, std::ostream& err) {
  const auto groups = verify_all(seed);
  bool all = true;
  for (const auto& g : groups) {
    out << (g.pass ? "PASS " : "FAIL ") << g.name << " (" << g.checks << " checks)\n";
    for (const auto& note : g.notes) out << "  " << note << "\n";
    if (!g.pass && all) err << "counterexample: " << g.counterexample << "\n";
    all = all && g.pass;
  }
  return all ? kExitOk : kExitFailed;
}

int cmd_audit(const std::string& trace_path, std::ostream& out, std::ostream& err) {
  std::ifstream file(trace_path, std::ios::binary);
  if (!file) {
    err << "error: cannot read " << trace_path << "\n";
    return kExitUsage;
  }
  // Lines are grouped by their "run" field, in order of first appearance.
  std::map<std::int64_t, std::string> runs;
  std::vector<std::int64_t> order;
  std::string line;
  try {
    while (std::getline(file, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const json j = json::parse(line);
      const std::int64_t run = j.contains("run") ? j.at("run").get<std::int64_t>() : -1;
      if (!runs.count(run)) order.push_back(run);
      runs[run] += line + "\n";
    }
    bool all = true;
    for (auto run : order) {
      const auto report = locc_audit(trace_from_jsonl(runs[run]));
      out << "run " << (run < 0 ? std::string("-") : std::to_string(run)) << ": "
          << (report.pass ? "PASS" : "FAIL") << "\n";
      for (const auto& v : report.violations) out << "  " << v << "\n";
      all = all && report.pass;
    }
    return all ? kExitOk : kExitFailed;
  } catch (const json::exception& e) {
    err << "error: malformed trace: " << e.what() << "\n";
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator for complete Bell measurement from nonlocal spin products", "bellsim"};
  app.require_subcommand(1);

  RunConfig config;
  std::string scheme_name = std::string(to_string(config.scheme));
  std::string output_name = "json";
  std::int64_t trials = static_cast<std::int64_t>(config.trials);
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string trace_path;

  auto* run = app.add_subcommand("run", "Run a protocol repeatedly and report label statistics");
  run->add_option("--scheme", scheme_name, "fig1, scheme_a, scheme_b or photonic")
      ->check(CLI::IsMember({"fig1", "scheme_a", "scheme_b", "photonic"}));
  run->add_option("--state", config.state,
                  "Bell label, four Bell coefficients c1..c4 (re[+imi]) or 'random'");
  run->add_option("--trials", trials, "Number of runs (at least 1)");
  run->add_option("--seed", seed, "RNG seed (falls back to $BELLSIM_SEED, then 0)");
  run->add_option("--output", output_name, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--out", out_path, "Write the report here instead of stdout");
  run->add_option("--trace", trace_path, "Write line-delimited JSON traces here");
  run->add_option("--trace-runs", config.trace_runs, "Number of runs to trace");
  run->add_flag("--timing", config.timing, "Fill in duration_ms");
  run->add_option("--workers", config.workers, "Worker threads");

  std::uint64_t verify_seed = 20240;
  auto* verify = app.add_subcommand("verify", "Check every module's invariants");
  verify->add_option("--seed", verify_seed, "Seed for the randomized checks");

  std::string audit_path;
  auto* audit = app.add_subcommand("audit", "Check an exported trace for LOCC violations");
  audit->add_option("trace", audit_path, "Trace file")->required();

  std::vector<const char*> argv{"bellsim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*verify) return cmd_verify(verify_seed, out, err);
  if (*audit) return cmd_audit(audit_path, out, err);

  if (trials < 1) {
    err << "error: trials must be at least 1\n";
    return kExitUsage;
  }
  config.trials = static_cast<std::uint64_t>(trials);
  config.scheme = *parse_scheme(scheme_name);
  config.output = output_name == "csv" ? OutputFormat::Csv : OutputFormat::Json;
  if (!out_path.empty()) config.out_path = out_path;
  if (!trace_path.empty()) config.trace_path = trace_path;
  if (seed) {
    config.seed = *seed;
  } else if (const char* env = std::getenv("BELLSIM_SEED")) {
    const std::string_view text(env);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), config.seed);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      err << "error: BELLSIM_SEED must be an unsigned integer\n";
      return kExitUsage;
    }
  }
  return cmd_run(config, out, err);
}

}  // namespace bellsim::cli
