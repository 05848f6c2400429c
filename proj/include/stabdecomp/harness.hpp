#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabdecomp/iterate.hpp"
#include "stabdecomp/statevec.hpp"

namespace stabdecomp {

inline constexpr int kSchemaVersion = 1;

const char* build_id();

enum class StateKind { basis, random_stabilizer, tdoped, w_family, combo, haar };

std::string to_string(StateKind k);
StateKind parse_state_kind(const std::string& s);

struct StateSpec {
  StateKind kind = StateKind::basis;
  int n = 1;
  int t = 0;                  // tdoped: number of T gates
  int m = 0;                  // w_family: W block size
  std::uint64_t index = 0;    // basis
  std::optional<std::uint64_t> seed;
  // combo: explicit terms, or `components` random stabilizers with `weights`.
  std::vector<cplx> coeffs;
  std::vector<std::vector<std::string>> stabilizers;
  int components = 0;
  std::vector<double> weights;
  double noise = 0;  // combo: mix in sqrt(noise) of Haar junk orthogonal to the plant

  void validate() const;
};

StateSpec state_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StateSpec& s);

struct GeneratedState {
  StateVector psi;
  nlohmann::json meta;
  std::vector<StabilizerState> components;  // known stabilizer parts, if any
  std::vector<cplx> component_coeffs;       // after renormalization
  std::optional<double> extent_bound;
};

GeneratedState gen_state(const StateSpec& spec, RngStream& rng);

enum class Command { analyze, test, selfcorrect, decompose, learn_extent, oracle, bench };

std::string to_string(Command c);
Command parse_command(const std::string& s);

struct AlgorithmParams {
  std::optional<double> gamma;  // defaults to the exact proxy
  double epsilon = 0.3;
  double epsilon_prime = 0.2;
  std::optional<double> xi;  // defaults to the generator's extent bound
  int t = 0;
  double delta = 0.05;
  double eps1 = 0.9;
  double eps2 = 0.01;
  double separation_constant = 1.0;
  double exponent = 2.0;
  double tolerance = 0.05;  // selfcorrect: success margin against the brute-force optimum
  int bench_naive_max = 8;
};

struct ExperimentConfig {
  Command command = Command::analyze;
  StateSpec state;
  AlgorithmParams params;
  OracleProvenance oracle = OracleProvenance::planted;
  double oracle_theta = 0.5;
  OverlapEstimator estimator = OverlapEstimator::exact;
  EstimatorMode proxy_mode = EstimatorMode::exact;
  EstimatorMode tester_mode = EstimatorMode::sampled;
  LearnerKind learner = LearnerKind::bruteforce_agnostic;
  int max_attempts = 32;
  int trials = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output;
  std::string format = "jsonl";

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

// One record per trial. Wall-clock fields live under "wall_time_s" and, for
// bench, under output.timing.
std::vector<nlohmann::json> run(const ExperimentConfig& config);

enum class OutputFormat { jsonl, csv };

OutputFormat parse_output_format(const std::string& s);

// Writes the whole file through a temporary and a rename.
void emit_results(const std::vector<nlohmann::json>& records, OutputFormat format,
                  const std::string& path);
std::vector<nlohmann::json> read_jsonl(const std::string& path);

// Scalar leaves keyed by dotted paths; arrays are skipped.
std::vector<std::pair<std::string, nlohmann::json>> flatten_scalars(const nlohmann::json& record);

}  // namespace stabdecomp
