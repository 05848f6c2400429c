#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabdecomp/gf2.hpp"
#include "stabdecomp/pauli.hpp"
#include "stabdecomp/statevec.hpp"

namespace stabdecomp {

// Copies of one state plus the cached data the simulated measurements need.
// Implicit from StateVector so call sites can pass a state directly.
class StateAccess {
 public:
  StateAccess(const StateVector& psi);  // NOLINT(google-explicit-constructor)

  const StateVector& state() const { return psi_; }
  int num_qubits() const { return psi_.n; }
  const WeylSampler& sampler() const { return sampler_; }
  double expectation(const PauliLabel& x) const;
  // 2^n p_psi(x) = <W_x>^2
  double weight(const PauliLabel& x) const;

 private:
  StateVector psi_;
  WeylSampler sampler_;
  std::vector<double> table_;  // all expectations when n <= table_cap()
};

struct BsgParams {
  double zeta1 = 0;
  double zeta2 = 0;
  double zeta3 = 0;
  double rho1 = 0.1;
  double rho2 = 0.1;
  int r = 64;
  int s = 64;
  double delta = 0.05;
  // Estimation error for the inner edge tests; 0 means rho1 / 100.
  double edge_error = 0;
  EstimatorMode mode = EstimatorMode::exact;

  void validate() const;
};

// Thresholds (0.6, 0.4, 0.5) * gamma / 4, rho1 = rho2 = 0.1, r = s = 64.
BsgParams practical_bsg_params(double gamma, double delta);

// The worst-case constants, kept in extended precision since they underflow
// double for moderate gamma. Not used for execution.
struct AnalyticBsgParams {
  long double rho = 0;
  long double rho1 = 0;
  long double rho2 = 0;
  long double rho3 = 0;
  long double c1 = 0;
  long double c2 = 0;
  long double intervals = 0;  // 1 / rho3 sub-intervals of [gamma/180, gamma/18]
  long double zeta = 0;
  long double mu = 0;
  long double zeta1 = 0;
  long double zeta2 = 0;
  long double zeta3 = 0;
};

AnalyticBsgParams analytic_bsg_params(double gamma, double delta, long double interval = 0);

// One round count for SAMPLE: ceil(2 ln(1/delta) / gamma^2).
std::uint64_t sample_rounds(double gamma, double delta);

// Bell difference sampling followed by a two-copy retention check.
std::vector<PauliLabel> sample_paulis(const StateAccess& psi, double gamma, double delta,
                                      RngStream& rng, CostLedger& ledger);

// Keeps drawing rounds until `count` labels are retained or max_rounds pass.
std::vector<PauliLabel> draw_retained(const StateAccess& psi, std::size_t count,
                                      std::uint64_t max_rounds, RngStream& rng,
                                      CostLedger& ledger);

bool edge_test(const StateAccess& psi, const PauliLabel& x, const PauliLabel& y, double zeta,
               double zeta_err, double delta, EstimatorMode mode, RngStream& rng,
               CostLedger& ledger);

bool bsg_test(const StateAccess& psi, const PauliLabel& u, const PauliLabel& v,
              const BsgParams& params, RngStream& rng, CostLedger& ledger);

struct CollectConfig {
  std::size_t vertices = 0;  // 0 means 4 * t
  std::vector<BsgParams> param_sets;  // empty means the practical preset
  std::size_t max_sets = 0;           // stop after this many sets; 0 keeps all
};

// Each inner list is A'(u) for one vertex and parameter choice; lists may
// repeat labels because the vertex sample does.
std::vector<std::vector<PauliLabel>> collect_small_doubling(const StateAccess& psi, std::size_t t,
                                                            double gamma, double delta,
                                                            const CollectConfig& config,
                                                            RngStream& rng, CostLedger& ledger);

enum class OracleProvenance { planted, threshold_span };

std::string to_string(OracleProvenance p);
OracleProvenance parse_oracle_provenance(const std::string& s);

struct PfrOracle {
  OracleProvenance provenance = OracleProvenance::planted;
  Gf2Basis subgroup;  // the accepted subgroup for both modes

  bool member(const PauliLabel& x) const { return basis_contains(subgroup, x); }
};

PfrOracle make_planted_oracle(const Gf2Basis& subgroup);
PfrOracle make_planted_oracle(const StabilizerState& s);
// Span of every label whose estimated <W>^2 reaches theta. In sampled mode
// each label is estimated from `shots` retention measurements.
PfrOracle make_threshold_span_oracle(const StateAccess& psi, double theta, std::uint64_t shots,
                                     EstimatorMode mode, RngStream& rng, CostLedger& ledger);

struct SubgroupV {
  Gf2Basis basis;
  double mass = 0;  // E_{x in V}[2^n p_psi(x)]
  std::size_t accepted = 0;
  OracleProvenance provenance = OracleProvenance::planted;
};

nlohmann::json to_json(const SubgroupV& v);

// n + 1 by default, 4 n^2 + log2(10 / delta) in strict mode.
std::size_t pfr_t_min(int n, double delta, bool strict);

// Pairwise sums z_i + z_j (i < j), counted with multiplicity, filtered by the
// oracle. nullopt when fewer than t_min are accepted.
std::optional<SubgroupV> pfr_subgroup(const std::vector<PauliLabel>& samples,
                                      const PfrOracle& oracle, std::size_t t_min,
                                      const StateAccess& psi);

struct CandidateStabilizer {
  StabilizerState state;
  double fidelity = 0;
  int mub_index = -1;  // -1 when V has no symplectic pairs
  std::uint64_t signs = 0;
  std::uint64_t z = 0;
};

nlohmann::json to_json(const CandidateStabilizer& c);

struct FindConfig {
  int rounds = 32;             // N_r
  double shadow_error = 0.05;  // accuracy charged for the fidelity estimates
};

std::optional<CandidateStabilizer> find_stabilizer(const StateAccess& psi, const SubgroupV& v,
                                                   double gamma, double delta,
                                                   const FindConfig& config, RngStream& rng,
                                                   CostLedger& ledger);

struct HighStabDim {
  CliffordTableau u;
  int k = 0;
  StateVector sigma;  // k qubits
  std::uint64_t z = 0;
  double block_weight = 0;
  StateVector state;  // U^dagger (sigma (x) |z>)
};

std::optional<HighStabDim> find_high_stab_dim(const StateAccess& psi, const SubgroupV& v,
                                              double gamma, double delta,
                                              const FindConfig& config, RngStream& rng,
                                              CostLedger& ledger);

class AttemptsExhausted : public std::runtime_error {
 public:
  explicit AttemptsExhausted(int attempts)
      : std::runtime_error("self-correction failed after " + std::to_string(attempts) +
                           " attempts"),
        attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

struct OracleSpec {
  OracleProvenance mode = OracleProvenance::planted;
  Gf2Basis planted;            // planted mode
  double theta = 0.5;          // threshold-span mode
  std::uint64_t shots = 256;
  EstimatorMode estimator = EstimatorMode::exact;
};

struct SelfCorrectConfig {
  int max_attempts = 32;
  std::size_t t = 0;  // collection size threshold; 0 means 2 (n + 1)
  bool strict_t_min = false;
  CollectConfig collect{0, {}, 1};
  FindConfig find;
};

struct SelfCorrectResult {
  CandidateStabilizer candidate;
  SubgroupV subgroup;
  int attempts = 0;
};

nlohmann::json to_json(const SelfCorrectResult& r);

SelfCorrectResult self_correct(const StateAccess& psi, double gamma, double delta,
                               const OracleSpec& oracle, const SelfCorrectConfig& config,
                               RngStream& rng, CostLedger& ledger);

struct TesterConfig {
  double separation_constant = 1.0;  // K in K * eps2^(1/C)
  double exponent = 2.0;             // C
  EstimatorMode mode = EstimatorMode::sampled;
};

struct TolerantResult {
  bool accept = false;
  double estimate = 0;
  double completeness = 0;  // 2^{-2t} eps1^6
  double soundness = 0;     // K eps2^(1/C)
  double accuracy = 0;      // delta hat
  std::uint64_t shots = 0;
};

// Throws std::invalid_argument when the yes and no regions cannot be separated.
TolerantResult tolerant_test(const StateAccess& psi, double eps1, double eps2, int t,
                             double delta, const TesterConfig& config, RngStream& rng,
                             CostLedger& ledger);

}  // namespace stabdecomp
